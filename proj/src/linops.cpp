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

#include "pdfp/linops.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

namespace pdfp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

LinearMap LinearMap::identity(Index dim) {
  if (dim < 1) throw ParameterError("identity map needs dim >= 1");
  return LinearMap(IdentityOp{}, dim, dim);
}

LinearMap LinearMap::dense(RowMatrix matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1)
    throw ParameterError("dense map needs a non-empty matrix");
  Index r = matrix.rows();
  Index d = matrix.cols();
  return LinearMap(DenseOp{std::make_shared<const RowMatrix>(std::move(matrix))},
                   d, r);
}

LinearMap LinearMap::grad2d(Index height, Index width) {
  if (height < 1 || width < 1)
    throw ParameterError("gradient map needs positive grid dimensions");
  return LinearMap(Grad2DOp{height, width}, height * width,
                   2 * height * width);
}

LinearMap LinearMap::stacked(LinearMap top) {
  Index d = top.in_dim();
  Index r = top.out_dim() + d;
  return LinearMap(StackedOp{std::make_shared<const LinearMap>(std::move(top))},
                   d, r);
}

LinearMap::Kind LinearMap::kind() const {
  return std::visit(overloaded{
                        [](const IdentityOp&) { return Kind::Identity; },
                        [](const DenseOp&) { return Kind::Dense; },
                        [](const Grad2DOp&) { return Kind::Grad2D; },
                        [](const StackedOp&) { return Kind::Stacked; },
                    },
                    op_);
}

const RowMatrix& LinearMap::matrix() const {
  if (auto* p = std::get_if<DenseOp>(&op_)) return *p->m;
  throw std::logic_error("LinearMap::matrix() on a non-dense map");
}

const LinearMap& LinearMap::top() const {
  if (auto* p = std::get_if<StackedOp>(&op_)) return *p->top;
  throw std::logic_error("LinearMap::top() on a non-stacked map");
}

Index LinearMap::grid_height() const {
  if (auto* p = std::get_if<Grad2DOp>(&op_)) return p->h;
  throw std::logic_error("LinearMap::grid_height() on a non-gradient map");
}

Index LinearMap::grid_width() const {
  if (auto* p = std::get_if<Grad2DOp>(&op_)) return p->w;
  throw std::logic_error("LinearMap::grid_width() on a non-gradient map");
}

void LinearMap::apply_into(const Vector& x, Vector& out) const {
  check_size("LinearMap::apply", in_dim_, x.size());
  out.resize(out_dim_);
  std::visit(
      overloaded{
          [&](const IdentityOp&) { out = x; },
          [&](const DenseOp& op) { out.noalias() = (*op.m) * x; },
          [&](const Grad2DOp& op) {
            const Index h = op.h, w = op.w, hw = h * w;
            for (Index i = 0; i < h; ++i) {
              for (Index j = 0; j < w; ++j) {
                const Index p = i * w + j;
                out[p] = (j + 1 < w) ? x[p + 1] - x[p] : 0.0;
                out[hw + p] = (i + 1 < h) ? x[p + w] - x[p] : 0.0;
              }
            }
          },
          [&](const StackedOp& op) {
            const Index rt = op.top->out_dim();
            Vector head;
            op.top->apply_into(x, head);
            out.head(rt) = head;
            out.tail(in_dim_) = x;
          },
      },
      op_);
}

void LinearMap::adjoint_apply_into(const Vector& v, Vector& out) const {
  check_size("LinearMap::adjoint_apply", out_dim_, v.size());
  out.resize(in_dim_);
  std::visit(
      overloaded{
          [&](const IdentityOp&) { out = v; },
          [&](const DenseOp& op) { out.noalias() = op.m->transpose() * v; },
          [&](const Grad2DOp& op) {
            const Index h = op.h, w = op.w, hw = h * w;
            out.setZero();
            for (Index i = 0; i < h; ++i) {
              for (Index j = 0; j < w; ++j) {
                const Index p = i * w + j;
                if (j + 1 < w) {
                  out[p + 1] += v[p];
                  out[p] -= v[p];
                }
                if (i + 1 < h) {
                  out[p + w] += v[hw + p];
                  out[p] -= v[hw + p];
                }
              }
            }
          },
          [&](const StackedOp& op) {
            const Index rt = op.top->out_dim();
            Vector top_part = v.head(rt);
            op.top->adjoint_apply_into(top_part, out);
            out += v.tail(in_dim_);
          },
      },
      op_);
}

Vector LinearMap::apply(const Vector& x) const {
  Vector out;
  apply_into(x, out);
  return out;
}

Vector LinearMap::adjoint_apply(const Vector& v) const {
  Vector out;
  adjoint_apply_into(v, out);
  return out;
}

RowMatrix LinearMap::to_dense() const {
  RowMatrix m(out_dim_, in_dim_);
  Vector e = Vector::Zero(in_dim_);
  for (Index j = 0; j < in_dim_; ++j) {
    e[j] = 1.0;
    m.col(j) = apply(e);
    e[j] = 0.0;
  }
  return m;
}

std::string LinearMap::describe() const {
  std::ostringstream os;
  switch (kind()) {
    case Kind::Identity:
      os << "Identity(" << in_dim_ << ")";
      break;
    case Kind::Dense:
      os << "Dense(" << out_dim_ << "x" << in_dim_ << ")";
      break;
    case Kind::Grad2D:
      os << "Grad2D(" << grid_height() << "x" << grid_width() << ")";
      break;
    case Kind::Stacked:
      os << "Stacked[" << top().describe() << "; I(" << in_dim_ << ")]";
      break;
  }
  return os.str();
}

SpectralEstimate spectral_bound(const LinearMap& map, int iters,
                                std::uint64_t seed) {
  if (iters < 1) throw ParameterError("spectral_bound needs iters >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(map.out_dim());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  Vector bt, bbt;
  double rayleigh = 0.0;
  for (int k = 0; k < iters; ++k) {
    map.adjoint_apply_into(v, bt);
    map.apply_into(bt, bbt);
    // v is unit norm, so <v, BB^T v> = ||B^T v||^2.
    rayleigh = bt.squaredNorm();
    const double nrm = bbt.norm();
    if (nrm == 0.0) return SpectralEstimate{0.0, true};
    v = bbt / nrm;
  }
  return SpectralEstimate{rayleigh * kSpectralSafety, false};
}

LinearMap read_dense_matrix(std::istream& in) {
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1)
    throw std::runtime_error("matrix file: bad header, expected 'rows cols'");
  RowMatrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw std::runtime_error("matrix file: missing entry at row " +
                                 std::to_string(i + 1) + ", column " +
                                 std::to_string(j + 1));
      }
    }
  }
  std::string extra;
  if (in >> extra)
    throw std::runtime_error("matrix file: trailing data '" + extra + "'");
  return LinearMap::dense(std::move(m));
}

LinearMap load_dense_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  return read_dense_matrix(in);
}

}  // namespace pdfp
