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

#ifndef PDFP_PROX_HPP
#define PDFP_PROX_HPP

#include <string>

#include "pdfp/common.hpp"

namespace pdfp {

inline constexpr double kDefaultDomainTol = 1e-9;

// Facts about g* needed by the step-size theory.
struct ConjugateInfo {
  // Bound on |v_j| over dom(g*); +inf when g* has full domain.
  double domain_radius = 0.0;
  // Strong convexity modulus of g* (0 if none).
  double strong_convexity = 0.0;
};

// Separable convex penalty g : R^r -> R with closed-form prox.
//
//   Zero   g(y) = 0
//   L1     g(y) = nu * ||y||_1
//   Huber  g(y) = nu * sum_j h_alpha(y_j),
//          h_alpha(t) = t^2 / (2 alpha) if |t| <= alpha, |t| - alpha/2 else
//   SqL2   g(y) = nu * ||y||_2^2
class ProxFn {
 public:
  enum class Kind { Zero, L1, Huber, SqL2 };

  static ProxFn zero(Index dim);
  static ProxFn l1(Index dim, double weight);
  static ProxFn huber(Index dim, double weight, double alpha);
  static ProxFn sq_l2(Index dim, double weight);

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double weight() const { return weight_; }
  double alpha() const { return alpha_; }

  double value(const Vector& y) const;

  // argmin_x { tau * g(x) + 0.5 * ||x - y||^2 }
  Vector prox(const Vector& y, double tau) const;

  // Prox of tau * g*, via Moreau: u - tau * Prox_{g/tau}(u / tau).
  Vector conj_prox(const Vector& u, double tau) const;

  // g*(v); +inf outside dom(g*) enlarged by tol in the sup-norm.
  double conj_value(const Vector& v, double tol = kDefaultDomainTol) const;

  ConjugateInfo conjugate_info() const;

  std::string describe() const;

 private:
  ProxFn(Kind kind, Index dim, double weight, double alpha)
      : kind_(kind), dim_(dim), weight_(weight), alpha_(alpha) {}

  Kind kind_;
  Index dim_;
  double weight_;
  double alpha_;
};

}  // namespace pdfp

#endif  // PDFP_PROX_HPP
