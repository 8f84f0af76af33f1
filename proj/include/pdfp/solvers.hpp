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

#ifndef PDFP_SOLVERS_HPP
#define PDFP_SOLVERS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdfp/linops.hpp"
#include "pdfp/objective.hpp"
#include "pdfp/prox.hpp"
#include "pdfp/trace.hpp"

namespace pdfp {

// min_x f(x) + g(B x)
struct ProblemSpec {
  FiniteSum f;
  ProxFn g;
  LinearMap B;

  ProblemSpec(FiniteSum f, ProxFn g, LinearMap B);

  double objective(const Vector& x) const;
};

enum class Variant { Pdfp, Spdfp, SvrgSc, SvrgGc };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct SolverParams {
  Variant variant = Variant::Pdfp;
  double gamma = 0.0;   // primal step (gamma_0 for SPDFP)
  double lambda = 0.0;  // dual step
  Index m = 1;          // inner loop length (SVRG)
  Index batch = 1;      // b, must divide n
  long stages = 1;      // T: SVRG stages, PDFP/SPDFP iterations
  std::uint64_t seed = 0;
  double decay = 0.5;  // SPDFP: gamma_k = gamma / k^decay
  bool override_steps = false;
  std::optional<std::uint64_t> shuffle_seed;
};

struct ValidationReport {
  std::optional<double> kappa;
  double m_const = 0.0;     // M = 4 L_max C(b)
  double c_b = 0.0;
  double rho_max = 0.0;     // upper bound on rho_max(B B^T)
  double lambda_max = 0.0;  // 1 / rho_max
  double gamma_max = 0.0;
  bool identity_gram = false;  // B B^T = I
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

ValidationReport validate_params(const ProblemSpec& p,
                                 const SolverParams& params);

// Contraction factor of one strongly convex stage. rho_min is dropped
// (third term omitted) when identity_gram is set.
double contraction_factor(double mu_f, double gamma, double m_const, Index m,
                          double lambda, double mu_gstar, double rho_min,
                          bool identity_gram);

struct StepResult {
  Vector x;
  Vector v;
  Vector y;
};

// One primal-dual fixed point step with a given gradient estimate:
//   y' = x - gamma grad - gamma B^T v
//   v' = Prox_{(lambda/gamma) g*}((lambda/gamma) B y' + v)
//   x' = x - gamma grad - gamma B^T v'
StepResult pdfp_step(const ProblemSpec& p, double gamma, double lambda,
                     const Vector& x, const Vector& v, const Vector& grad);

struct InnerEvent {
  long stage;
  long k;        // 1-based inner/global iteration index
  Index block;   // sampled block, -1 for full gradient
  const Vector& x;
  const Vector& v;
};

struct StopRule {
  std::optional<double> max_epochs;
  std::optional<double> rel_err_threshold;
};

struct RunOptions {
  // Fills rel_err / r_value / psnr / test_loss of a row from (x, v).
  std::function<void(const Vector& x, const Vector& v, TraceRow& row)>
      evaluate;
  std::function<void(const InnerEvent&)> on_inner;
  StopRule stop;
  long record_every = 1;  // PDFP: iterations between rows
  bool timing = false;
  bool keep_iterates = false;
  // Set to false to run with parameters that fail validation.
  bool require_valid = true;
};

RunTrace run_pdfp(const ProblemSpec& p, const SolverParams& params,
                  const Vector& x0, const Vector& v0, long iters,
                  const RunOptions& opts = {});

RunTrace run_spdfp(const ProblemSpec& p, const SolverParams& params,
                   const Vector& x0, const Vector& v0, long iters,
                   const RunOptions& opts = {});

RunTrace run_svrg_pdfp_sc(const ProblemSpec& p, const SolverParams& params,
                          const Vector& x0, const Vector& v0,
                          const RunOptions& opts = {});

RunTrace run_svrg_pdfp_gc(const ProblemSpec& p, const SolverParams& params,
                          const Vector& x0, const Vector& v0,
                          const RunOptions& opts = {});

// Dispatches on params.variant; PDFP/SPDFP run params.stages iterations.
RunTrace run_solver(const ProblemSpec& p, const SolverParams& params,
                    const Vector& x0, const Vector& v0,
                    const RunOptions& opts = {});

inline constexpr double kDivergenceFactor = 1e3;
inline constexpr int kDivergencePatience = 10;

}  // namespace pdfp

#endif  // PDFP_SOLVERS_HPP
