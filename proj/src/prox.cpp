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

#include "pdfp/prox.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pdfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(Index dim) {
  if (dim < 1) throw ParameterError("penalty dimension must be >= 1");
}

void check_weight(double w) {
  if (!(w > 0.0) || !std::isfinite(w))
    throw ParameterError("penalty weight must be positive and finite");
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ParameterError("prox scale tau must be positive, got " +
                         std::to_string(tau));
}

double sign(double t) { return (t > 0.0) - (t < 0.0); }

}  // namespace

ProxFn ProxFn::zero(Index dim) {
  check_dim(dim);
  return ProxFn(Kind::Zero, dim, 0.0, 0.0);
}

ProxFn ProxFn::l1(Index dim, double weight) {
  check_dim(dim);
  check_weight(weight);
  return ProxFn(Kind::L1, dim, weight, 0.0);
}

ProxFn ProxFn::huber(Index dim, double weight, double alpha) {
  check_dim(dim);
  check_weight(weight);
  if (!(alpha > 0.0)) throw ParameterError("Huber alpha must be positive");
  return ProxFn(Kind::Huber, dim, weight, alpha);
}

ProxFn ProxFn::sq_l2(Index dim, double weight) {
  check_dim(dim);
  check_weight(weight);
  return ProxFn(Kind::SqL2, dim, weight, 0.0);
}

double ProxFn::value(const Vector& y) const {
  check_size("ProxFn::value", dim_, y.size());
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::L1:
      return weight_ * y.lpNorm<1>();
    case Kind::Huber: {
      double s = 0.0;
      for (Index j = 0; j < y.size(); ++j) {
        const double a = std::abs(y[j]);
        s += a <= alpha_ ? y[j] * y[j] / (2.0 * alpha_) : a - 0.5 * alpha_;
      }
      return weight_ * s;
    }
    case Kind::SqL2:
      return weight_ * y.squaredNorm();
  }
  return 0.0;
}

Vector ProxFn::prox(const Vector& y, double tau) const {
  check_size("ProxFn::prox", dim_, y.size());
  check_tau(tau);
  const double t = tau * weight_;
  Vector x(y.size());
  switch (kind_) {
    case Kind::Zero:
      x = y;
      break;
    case Kind::L1:
      for (Index j = 0; j < y.size(); ++j)
        x[j] = sign(y[j]) * std::max(std::abs(y[j]) - t, 0.0);
      break;
    case Kind::Huber: {
      const double knee = alpha_ + t;
      const double shrink = alpha_ / knee;
      for (Index j = 0; j < y.size(); ++j)
        x[j] = std::abs(y[j]) <= knee ? y[j] * shrink : y[j] - t * sign(y[j]);
      break;
    }
    case Kind::SqL2:
      x = y / (1.0 + 2.0 * t);
      break;
  }
  return x;
}

Vector ProxFn::conj_prox(const Vector& u, double tau) const {
  check_size("ProxFn::conj_prox", dim_, u.size());
  check_tau(tau);
  return u - tau * prox(u / tau, 1.0 / tau);
}

double ProxFn::conj_value(const Vector& v, double tol) const {
  check_size("ProxFn::conj_value", dim_, v.size());
  const double sup = v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
  switch (kind_) {
    case Kind::Zero:
      return sup <= tol ? 0.0 : kInf;
    case Kind::L1:
      return sup <= weight_ + tol ? 0.0 : kInf;
    case Kind::Huber:
      if (sup > weight_ + tol) return kInf;
      return alpha_ / (2.0 * weight_) * v.squaredNorm();
    case Kind::SqL2:
      return v.squaredNorm() / (4.0 * weight_);
  }
  return kInf;
}

ConjugateInfo ProxFn::conjugate_info() const {
  switch (kind_) {
    case Kind::Zero:
      return {0.0, 0.0};
    case Kind::L1:
      return {weight_, 0.0};
    case Kind::Huber:
      return {weight_, alpha_ / weight_};
    case Kind::SqL2:
      return {kInf, 1.0 / (2.0 * weight_)};
  }
  return {};
}

std::string ProxFn::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Zero:
      os << "Zero";
      break;
    case Kind::L1:
      os << "L1(nu=" << weight_ << ")";
      break;
    case Kind::Huber:
      os << "Huber(nu=" << weight_ << ", alpha=" << alpha_ << ")";
      break;
    case Kind::SqL2:
      os << "SqL2(nu=" << weight_ << ")";
      break;
  }
  os << "[" << dim_ << "]";
  return os.str();
}

}  // namespace pdfp
