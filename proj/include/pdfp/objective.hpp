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

#ifndef PDFP_OBJECTIVE_HPP
#define PDFP_OBJECTIVE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdfp/common.hpp"

namespace pdfp {

// f(x) = (1/n) sum_i f_i(x) with
//   LeastSquares   f_i(x) = 0.5 (a_i^T x - b_i)^2
//   Logistic       f_i(x) = log(1 + exp(-b_i a_i^T x)),      b_i in {-1, 1}
//   RidgeLogistic  f_i(x) = log(1 + exp(-b_i a_i^T x)) + nu1 ||x||^2
class FiniteSum {
 public:
  enum class Kind { LeastSquares, Logistic, RidgeLogistic };

  static FiniteSum least_squares(RowMatrix a, Vector b);
  static FiniteSum logistic(RowMatrix a, Vector labels);
  static FiniteSum ridge_logistic(RowMatrix a, Vector labels, double nu1);

  Kind kind() const { return kind_; }
  Index n() const { return a_->rows(); }
  Index d() const { return a_->cols(); }
  const RowMatrix& samples() const { return *a_; }
  const Vector& targets() const { return *b_; }
  double ridge() const { return nu1_; }

  double sample_value(Index i, const Vector& x) const;
  double value(const Vector& x) const;
  // Average logistic loss without the ridge term. Logistic kinds only.
  double logistic_loss(const Vector& x) const;

  Vector grad_sample(Index i, const Vector& x) const;
  // Exact average of grad_sample, summed in ascending index order.
  Vector full_grad(const Vector& x) const;

  // Per-sample gradient Lipschitz constants L_i.
  double lipschitz(Index i) const;
  double lipschitz_max() const { return l_max_; }
  // Modulus of strong convexity of f (2 nu1 for RidgeLogistic, else 0).
  double strong_convexity() const;

  // D_f(x, ref) = f(x) - f(ref) - grad f(ref)^T (x - ref).
  double bregman(const Vector& x, const Vector& ref) const;

  // grad f_i(x) = scalar_deriv(i, x) * a_i (+ 2 nu1 x for RidgeLogistic).
  double scalar_deriv(Index i, const Vector& x) const;

  std::string describe() const;

 private:
  FiniteSum(Kind kind, RowMatrix a, Vector b, double nu1);

  void check_index(Index i) const;

  Kind kind_;
  std::shared_ptr<const RowMatrix> a_;
  std::shared_ptr<const Vector> b_;
  double nu1_;
  double l_max_;
};

// Stable log(1 + exp(-t)).
double log1p_exp_neg(double t);
double sigmoid(double t);

// Fixed partition of a (possibly shuffled) sample order into n/b contiguous
// blocks of size b.
class BatchScheme {
 public:
  BatchScheme(Index n, Index batch,
              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  Index n() const { return static_cast<Index>(order_.size()); }
  Index batch() const { return batch_; }
  Index num_blocks() const { return n() / batch_; }

  // Sample indices of a block, in partition order.
  const Index* block_begin(Index block) const;
  const Index* block_end(Index block) const;
  std::vector<Index> block(Index block) const;

  const std::vector<Index>& order() const { return order_; }

 private:
  void check_block(Index block) const;

  std::vector<Index> order_;
  Index batch_;
};

// Snapshot point and the full gradient there.
struct SvrgAnchor {
  Vector x;
  Vector z;

  static SvrgAnchor at(const FiniteSum& f, const Vector& x);
};

// Mini-batch gradient (1/b) sum_{i in block} grad f_i(x).
Vector batch_grad(const FiniteSum& f, const BatchScheme& scheme, Index block,
                  const Vector& x);

// (1/b) sum_{i in block} (grad f_i(x) - grad f_i(anchor.x)) + anchor.z.
// With a single block (b = n) the estimator is identically grad f(x) and
// full_grad(x) is returned.
Vector svrg_grad(const FiniteSum& f, const SvrgAnchor& anchor,
                 const BatchScheme& scheme, Index block, const Vector& x);

struct VarianceConstants {
  double c_b;    // (n - b) / (b (n - 1))
  double m;      // 4 L_max c_b
  double l_max;
};

VarianceConstants variance_constants(const FiniteSum& f,
                                     const BatchScheme& scheme);
VarianceConstants variance_constants(const FiniteSum& f, Index batch);

}  // namespace pdfp

#endif  // PDFP_OBJECTIVE_HPP
