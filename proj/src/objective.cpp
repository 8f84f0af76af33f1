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

#include "pdfp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace pdfp {

double log1p_exp_neg(double t) {
  return std::log1p(std::exp(-std::abs(t))) + std::max(0.0, -t);
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

FiniteSum::FiniteSum(Kind kind, RowMatrix a, Vector b, double nu1)
    : kind_(kind), nu1_(nu1), l_max_(0.0) {
  if (a.rows() < 1 || a.cols() < 1)
    throw ParameterError("finite sum needs at least one sample and feature");
  check_size("FiniteSum targets", a.rows(), b.size());
  if (kind != Kind::LeastSquares) {
    for (Index i = 0; i < b.size(); ++i) {
      if (b[i] != 1.0 && b[i] != -1.0)
        throw ParameterError("logistic labels must be -1 or +1 (sample " +
                             std::to_string(i) + ")");
    }
  }
  a_ = std::make_shared<const RowMatrix>(std::move(a));
  b_ = std::make_shared<const Vector>(std::move(b));
  for (Index i = 0; i < n(); ++i) l_max_ = std::max(l_max_, lipschitz(i));
}

FiniteSum FiniteSum::least_squares(RowMatrix a, Vector b) {
  return FiniteSum(Kind::LeastSquares, std::move(a), std::move(b), 0.0);
}

FiniteSum FiniteSum::logistic(RowMatrix a, Vector labels) {
  return FiniteSum(Kind::Logistic, std::move(a), std::move(labels), 0.0);
}

FiniteSum FiniteSum::ridge_logistic(RowMatrix a, Vector labels, double nu1) {
  if (!(nu1 > 0.0)) throw ParameterError("ridge weight nu1 must be positive");
  return FiniteSum(Kind::RidgeLogistic, std::move(a), std::move(labels), nu1);
}

void FiniteSum::check_index(Index i) const {
  if (i < 0 || i >= n()) {
    throw std::out_of_range("sample index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(n()) + ")");
  }
}

double FiniteSum::sample_value(Index i, const Vector& x) const {
  check_index(i);
  const double t = a_->row(i).dot(x);
  const double bi = (*b_)[i];
  switch (kind_) {
    case Kind::LeastSquares:
      return 0.5 * (t - bi) * (t - bi);
    case Kind::Logistic:
      return log1p_exp_neg(bi * t);
    case Kind::RidgeLogistic:
      return log1p_exp_neg(bi * t) + nu1_ * x.squaredNorm();
  }
  return 0.0;
}

double FiniteSum::value(const Vector& x) const {
  check_size("FiniteSum::value", d(), x.size());
  const Vector t = (*a_) * x;
  double s = 0.0;
  switch (kind_) {
    case Kind::LeastSquares:
      for (Index i = 0; i < n(); ++i) {
        const double r = t[i] - (*b_)[i];
        s += 0.5 * r * r;
      }
      return s / static_cast<double>(n());
    case Kind::Logistic:
    case Kind::RidgeLogistic:
      for (Index i = 0; i < n(); ++i) s += log1p_exp_neg((*b_)[i] * t[i]);
      s /= static_cast<double>(n());
      if (kind_ == Kind::RidgeLogistic) s += nu1_ * x.squaredNorm();
      return s;
  }
  return s;
}

double FiniteSum::logistic_loss(const Vector& x) const {
  if (kind_ == Kind::LeastSquares)
    throw std::logic_error("logistic_loss on a least-squares sum");
  check_size("FiniteSum::logistic_loss", d(), x.size());
  const Vector t = (*a_) * x;
  double s = 0.0;
  for (Index i = 0; i < n(); ++i) s += log1p_exp_neg((*b_)[i] * t[i]);
  return s / static_cast<double>(n());
}

double FiniteSum::scalar_deriv(Index i, const Vector& x) const {
  const double t = a_->row(i).dot(x);
  const double bi = (*b_)[i];
  if (kind_ == Kind::LeastSquares) return t - bi;
  return -bi * sigmoid(-bi * t);
}

Vector FiniteSum::grad_sample(Index i, const Vector& x) const {
  check_index(i);
  check_size("FiniteSum::grad_sample", d(), x.size());
  Vector g = scalar_deriv(i, x) * a_->row(i).transpose();
  if (kind_ == Kind::RidgeLogistic) g += 2.0 * nu1_ * x;
  return g;
}

Vector FiniteSum::full_grad(const Vector& x) const {
  check_size("FiniteSum::full_grad", d(), x.size());
  Vector g = Vector::Zero(d());
  for (Index i = 0; i < n(); ++i) g += scalar_deriv(i, x) * a_->row(i).transpose();
  g /= static_cast<double>(n());
  if (kind_ == Kind::RidgeLogistic) g += 2.0 * nu1_ * x;
  return g;
}

double FiniteSum::lipschitz(Index i) const {
  check_index(i);
  const double sq = a_->row(i).squaredNorm();
  switch (kind_) {
    case Kind::LeastSquares:
      return sq;
    case Kind::Logistic:
      return 0.25 * sq;
    case Kind::RidgeLogistic:
      return 0.25 * sq + 2.0 * nu1_;
  }
  return sq;
}

double FiniteSum::strong_convexity() const {
  return kind_ == Kind::RidgeLogistic ? 2.0 * nu1_ : 0.0;
}

double FiniteSum::bregman(const Vector& x, const Vector& ref) const {
  return value(x) - value(ref) - full_grad(ref).dot(x - ref);
}

std::string FiniteSum::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::LeastSquares:
      os << "LeastSquares";
      break;
    case Kind::Logistic:
      os << "Logistic";
      break;
    case Kind::RidgeLogistic:
      os << "RidgeLogistic(nu1=" << nu1_ << ")";
      break;
  }
  os << "(n=" << n() << ", d=" << d() << ")";
  return os.str();
}

BatchScheme::BatchScheme(Index n, Index batch,
                         std::optional<std::uint64_t> shuffle_seed)
    : order_(static_cast<std::size_t>(std::max<Index>(n, 0))), batch_(batch) {
  if (n < 1) throw ParameterError("batch scheme needs n >= 1");
  if (batch < 1 || batch > n || n % batch != 0) {
    throw ParameterError("batch size must divide n (n=" + std::to_string(n) +
                         ", b=" + std::to_string(batch) + ")");
  }
  std::iota(order_.begin(), order_.end(), Index{0});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

void BatchScheme::check_block(Index block) const {
  if (block < 0 || block >= num_blocks()) {
    throw std::out_of_range("block " + std::to_string(block) +
                            " out of range [0, " +
                            std::to_string(num_blocks()) + ")");
  }
}

const Index* BatchScheme::block_begin(Index block) const {
  check_block(block);
  return order_.data() + block * batch_;
}

const Index* BatchScheme::block_end(Index block) const {
  check_block(block);
  return order_.data() + (block + 1) * batch_;
}

std::vector<Index> BatchScheme::block(Index block) const {
  return std::vector<Index>(block_begin(block), block_end(block));
}

SvrgAnchor SvrgAnchor::at(const FiniteSum& f, const Vector& x) {
  return SvrgAnchor{x, f.full_grad(x)};
}

Vector batch_grad(const FiniteSum& f, const BatchScheme& scheme, Index block,
                  const Vector& x) {
  check_size("batch_grad scheme", f.n(), scheme.n());
  check_size("batch_grad", f.d(), x.size());
  const RowMatrix& a = f.samples();
  Vector g = Vector::Zero(f.d());
  for (const Index* it = scheme.block_begin(block); it != scheme.block_end(block);
       ++it)
    g += f.scalar_deriv(*it, x) * a.row(*it).transpose();
  g /= static_cast<double>(scheme.batch());
  if (f.kind() == FiniteSum::Kind::RidgeLogistic) g += 2.0 * f.ridge() * x;
  return g;
}

Vector svrg_grad(const FiniteSum& f, const SvrgAnchor& anchor,
                 const BatchScheme& scheme, Index block, const Vector& x) {
  check_size("svrg_grad scheme", f.n(), scheme.n());
  check_size("svrg_grad", f.d(), x.size());
  check_size("svrg_grad anchor", f.d(), anchor.x.size());
  if (scheme.num_blocks() == 1) {
    (void)scheme.block_begin(block);
    return f.full_grad(x);
  }
  const RowMatrix& a = f.samples();
  Vector g = Vector::Zero(f.d());
  for (const Index* it = scheme.block_begin(block); it != scheme.block_end(block);
       ++it) {
    const double c = f.scalar_deriv(*it, x) - f.scalar_deriv(*it, anchor.x);
    g += c * a.row(*it).transpose();
  }
  g /= static_cast<double>(scheme.batch());
  if (f.kind() == FiniteSum::Kind::RidgeLogistic)
    g += 2.0 * f.ridge() * (x - anchor.x);
  g += anchor.z;
  return g;
}

VarianceConstants variance_constants(const FiniteSum& f, Index batch) {
  const Index n = f.n();
  if (n < 2) throw ParameterError("variance constants need n >= 2");
  if (batch < 1 || batch > n || n % batch != 0)
    throw ParameterError("batch size must divide n");
  const double nn = static_cast<double>(n);
  const double bb = static_cast<double>(batch);
  const double c_b = (nn - bb) / (bb * (nn - 1.0));
  return VarianceConstants{c_b, 4.0 * f.lipschitz_max() * c_b,
                           f.lipschitz_max()};
}

VarianceConstants variance_constants(const FiniteSum& f,
                                     const BatchScheme& scheme) {
  check_size("variance_constants scheme", f.n(), scheme.n());
  return variance_constants(f, scheme.batch());
}

}  // namespace pdfp
