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

#ifndef PDFP_LINOPS_HPP
#define PDFP_LINOPS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>

#include "pdfp/common.hpp"

namespace pdfp {

// Linear operator B : R^d -> R^r with its adjoint. Instances are immutable
// and cheap to copy (dense storage is shared).
class LinearMap {
 public:
  enum class Kind { Identity, Dense, Grad2D, Stacked };

  static LinearMap identity(Index dim);
  static LinearMap dense(RowMatrix matrix);
  // Forward differences with Neumann boundary. Output holds all horizontal
  // differences first, then all vertical ones, both in row-major pixel order.
  static LinearMap grad2d(Index height, Index width);
  // [top; I]: out = concat(top * x, x).
  static LinearMap stacked(LinearMap top);

  Kind kind() const;
  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }

  Vector apply(const Vector& x) const;
  Vector adjoint_apply(const Vector& v) const;

  void apply_into(const Vector& x, Vector& out) const;
  void adjoint_apply_into(const Vector& v, Vector& out) const;

  // Only valid for Kind::Dense.
  const RowMatrix& matrix() const;
  // Only valid for Kind::Stacked.
  const LinearMap& top() const;
  // Only valid for Kind::Grad2D.
  Index grid_height() const;
  Index grid_width() const;

  // Materializes B as a dense matrix (test and diagnostic use).
  RowMatrix to_dense() const;

  std::string describe() const;

 private:
  struct IdentityOp {};
  struct DenseOp {
    std::shared_ptr<const RowMatrix> m;
  };
  struct Grad2DOp {
    Index h;
    Index w;
  };
  struct StackedOp {
    std::shared_ptr<const LinearMap> top;
  };
  using Op = std::variant<IdentityOp, DenseOp, Grad2DOp, StackedOp>;

  LinearMap(Op op, Index in_dim, Index out_dim)
      : op_(std::move(op)), in_dim_(in_dim), out_dim_(out_dim) {}

  Op op_;
  Index in_dim_;
  Index out_dim_;
};

struct SpectralEstimate {
  // Estimate of rho_max(B B^T) inflated by the safety factor.
  double value = 0.0;
  // The operator annihilated every iterate; value is 0 and must not be
  // used as a divisor.
  bool zero_operator = false;
};

inline constexpr int kDefaultPowerIters = 100;
inline constexpr double kSpectralSafety = 1.01;

// Power iteration on v -> B(B^T v) from a seeded start vector. The Rayleigh
// quotient is multiplied by kSpectralSafety so 1/value is an admissible dual
// step.
SpectralEstimate spectral_bound(const LinearMap& map,
                                int iters = kDefaultPowerIters,
                                std::uint64_t seed = 0);

// Plain-text dense matrix: "rows cols" then rows of whitespace separated
// decimals.
LinearMap read_dense_matrix(std::istream& in);
LinearMap load_dense_matrix(const std::string& path);

}  // namespace pdfp

#endif  // PDFP_LINOPS_HPP
