// Copyright 2026 The pdfp Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDFP_METRICS_HPP
#define PDFP_METRICS_HPP

#include <cstddef>
#include <optional>

#include "pdfp/solvers.hpp"

namespace pdfp {

// A saddle point (x*, v*) of f(x) + <Bx, v> - g*(v), computed by running
// deterministic PDFP to convergence.
struct ReferenceSolution {
  Vector x;
  Vector v;
  double objective = 0.0;  // F(x*) = f(x*) + g(Bx*)
  double f_value = 0.0;    // f(x*)
  Vector grad;             // grad f(x*)
  Vector bx;               // B x*, the subgradient of g* at v* used by R
  double residual = 0.0;   // ||x_{k+1} - x_k||_inf at the last iteration
  double gstar = 0.0;      // g*(v*)
  bool converged = true;   // residual <= kReferenceTolerance
};

inline constexpr long kDefaultReferenceIters = 10000;
inline constexpr double kReferenceTolerance = 1e-6;

struct ReferenceOptions {
  long iters = kDefaultReferenceIters;
  // Non-positive values select admissible defaults: gamma = 1/L_f with L_f an
  // upper estimate of the Lipschitz constant of grad f, lambda =
  // 1/rho_max(BB^T).
  double gamma = 0.0;
  double lambda = 0.0;
};

ReferenceSolution compute_reference(const ProblemSpec& p,
                                    const ReferenceOptions& opts = {});

// Builds the reference fields from a known saddle point.
ReferenceSolution make_reference(const ProblemSpec& p, Vector x, Vector v);

// Upper estimate of the Lipschitz constant of grad f via power iteration on
// (1/n) A^T A (scaled by 1/4 for logistic losses, plus the ridge term).
double full_lipschitz_estimate(const FiniteSum& f);

// D_{g*}(v, v*) with the subgradient B x*; +inf outside dom(g*).
double conj_bregman(const ProblemSpec& p, const ReferenceSolution& ref,
                    const Vector& v, double tol = kDefaultDomainTol);

// R(x, v) = D_f(x, x*) + D_{g*}(v, v*).
double r_value(const ProblemSpec& p, const ReferenceSolution& ref,
               const Vector& x, const Vector& v);

inline constexpr double kRelErrFloor = 1e-12;

// (F(x) - F(x*)) / max(|F(x*)|, 1e-12), clamped at 0. clamped_count, when
// given, is incremented each time a negative value is clamped.
double relative_objective_error(const ProblemSpec& p,
                                const ReferenceSolution& ref, const Vector& x,
                                std::size_t* clamped_count = nullptr);

inline constexpr double kPsnrSentinel = 999.0;

// 10 log10(peak^2 / MSE); kPsnrSentinel when MSE == 0. Peak defaults to
// max(truth).
double psnr(const Vector& reconstruction, const Vector& truth,
            std::optional<double> peak = std::nullopt);

// Average unregularized logistic loss.
double test_loss(const FiniteSum& f_test, const Vector& x);

}  // namespace pdfp

#endif  // PDFP_METRICS_HPP
