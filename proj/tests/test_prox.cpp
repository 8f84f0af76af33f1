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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pdfp/prox.hpp"

using namespace pdfp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::vector<ProxFn> all_kinds(Index dim) {
  return {ProxFn::zero(dim), ProxFn::l1(dim, 0.7), ProxFn::huber(dim, 1.3, 0.4),
          ProxFn::sq_l2(dim, 0.6)};
}

Vector randn(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("value examples") {
  CHECK(ProxFn::l1(2, 2.0).value(vec({1, -3})) == 8.0);
  CHECK(ProxFn::huber(1, 1.0, 1.0).value(vec({0.5})) == doctest::Approx(0.125));
  CHECK(ProxFn::huber(1, 1.0, 1.0).value(vec({2})) == doctest::Approx(1.5));
  CHECK(ProxFn::sq_l2(2, 0.5).value(vec({1, 2})) == doctest::Approx(2.5));
  CHECK(ProxFn::zero(2).value(vec({1, 2})) == 0.0);
  for (const ProxFn& g : all_kinds(3)) CHECK(g.value(Vector::Zero(3)) == 0.0);
}

TEST_CASE("prox examples") {
  CHECK(ProxFn::l1(1, 1.0).prox(vec({1.2}), 0.5)[0] == doctest::Approx(0.7));
  CHECK(ProxFn::l1(1, 1.0).prox(vec({0.3}), 0.5)[0] == 0.0);
  CHECK(ProxFn::huber(1, 1.0, 1.0).prox(vec({1}), 1.0)[0] == doctest::Approx(0.5));
  CHECK(ProxFn::sq_l2(1, 0.5).prox(vec({3}), 1.0)[0] == doctest::Approx(1.5));
  CHECK(ProxFn::zero(1).prox(vec({3}), 2.0)[0] == 3.0);
}

TEST_CASE("huber prox agrees with a grid-search oracle") {
  const ProxFn h = ProxFn::huber(1, 1.0, 1.0);
  for (double y : {1.0, -0.4, 2.7, 0.0}) {
    const double tau = 1.0;
    double best = 0.0, best_val = kInf;
    for (double x = -4.0; x <= 4.0; x += 1e-5) {
      const double val = tau * h.value(vec({x})) + 0.5 * (x - y) * (x - y);
      if (val < best_val) {
        best_val = val;
        best = x;
      }
    }
    CHECK(h.prox(vec({y}), tau)[0] == doctest::Approx(best).epsilon(1e-4));
  }
}

TEST_CASE("conj_prox examples") {
  const Vector p = ProxFn::l1(2, 1.0).conj_prox(vec({2, -0.5}), 1.0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(-0.5));
  CHECK(ProxFn::zero(1).conj_prox(vec({3}), 0.37)[0] == doctest::Approx(0.0));
  CHECK(ProxFn::sq_l2(1, 0.5).conj_prox(vec({2}), 1.0)[0] == doctest::Approx(1.0));
}

TEST_CASE("conj_value examples") {
  CHECK(ProxFn::l1(2, 1.0).conj_value(vec({0.5, -1}), 0.0) == 0.0);
  CHECK(ProxFn::l1(1, 1.0).conj_value(vec({1.5}), 0.0) == kInf);
  CHECK(ProxFn::huber(1, 1.0, 2.0).conj_value(vec({1})) == doctest::Approx(1.0));
  CHECK(ProxFn::huber(1, 1.0, 2.0).conj_value(vec({1.1}), 0.0) == kInf);
  CHECK(ProxFn::sq_l2(1, 0.5).conj_value(vec({2})) == doctest::Approx(2.0));
  CHECK(ProxFn::zero(1).conj_value(vec({0}), 0.0) == 0.0);
  CHECK(ProxFn::zero(1).conj_value(vec({0.1}), 0.0) == kInf);
}

TEST_CASE("conjugate info") {
  const ConjugateInfo l1 = ProxFn::l1(1, 2.0).conjugate_info();
  CHECK(l1.domain_radius == 2.0);
  CHECK(l1.strong_convexity == 0.0);
  const ConjugateInfo hu = ProxFn::huber(1, 2.0, 0.5).conjugate_info();
  CHECK(hu.domain_radius == 2.0);
  CHECK(hu.strong_convexity == doctest::Approx(0.25));
  const ConjugateInfo sq = ProxFn::sq_l2(1, 2.0).conjugate_info();
  CHECK(sq.domain_radius == kInf);
  CHECK(sq.strong_convexity == doctest::Approx(0.25));
}

TEST_CASE("parameter errors") {
  CHECK_THROWS_AS(ProxFn::l1(1, 1.0).prox(vec({1}), 0.0), ParameterError);
  CHECK_THROWS_AS(ProxFn::l1(1, 1.0).conj_prox(vec({1}), -1.0), ParameterError);
  CHECK_THROWS_AS(ProxFn::l1(1, -1.0), ParameterError);
  CHECK_THROWS_AS(ProxFn::huber(1, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(ProxFn::l1(2, 1.0).value(vec({1})), DimensionError);
}

TEST_CASE("Moreau identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.05, 5.0);
  for (const ProxFn& g : all_kinds(4)) {
    for (int k = 0; k < 500; ++k) {
      const Vector u = randn(4, rng, 2.0);
      const double tau = unif(rng);
      const Vector lhs = g.conj_prox(u, tau) + tau * g.prox(u / tau, 1.0 / tau);
      CHECK((lhs - u).norm() <= 1e-10);
    }
  }
}

TEST_CASE("conjugate prox closed forms") {
  std::mt19937_64 rng(6);
  const ProxFn l1 = ProxFn::l1(5, 0.8);
  const ProxFn sq = ProxFn::sq_l2(5, 0.3);
  const ProxFn hu = ProxFn::huber(5, 0.8, 0.5);
  for (int k = 0; k < 100; ++k) {
    const Vector u = randn(5, rng, 2.0);
    const double tau = 0.7;
    // L1: projection onto the nu-box.
    CHECK((l1.conj_prox(u, tau) - u.cwiseMax(-0.8).cwiseMin(0.8)).norm() <= 1e-12);
    // SqL2: g*(v) = |v|^2/(4 nu), prox = u / (1 + tau/(2 nu)).
    CHECK((sq.conj_prox(u, tau) - u / (1.0 + tau / 0.6)).norm() <= 1e-12);
    // Huber: g*(v) = (alpha/(2 nu))|v|^2 on the box; prox = clamp(u/(1+tau alpha/nu)).
    const Vector want = (u / (1.0 + tau * 0.5 / 0.8)).cwiseMax(-0.8).cwiseMin(0.8);
    CHECK((hu.conj_prox(u, tau) - want).norm() <= 1e-12);
  }
}

TEST_CASE("prox optimality under random perturbations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (const ProxFn& g : all_kinds(3)) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector y = randn(3, rng, 2.0);
      const double tau = unif(rng);
      const Vector x = g.prox(y, tau);
      const double base = tau * g.value(x) + 0.5 * (x - y).squaredNorm();
      for (int k = 0; k < 100; ++k) {
        Vector delta = randn(3, rng);
        delta *= 1e-3 * unif(rng) / (3.0 * delta.norm());
        const Vector z = x + delta;
        CHECK(base <= tau * g.value(z) + 0.5 * (z - y).squaredNorm() + 1e-12);
      }
    }
  }
}

TEST_CASE("prox is nonexpansive") {
  std::mt19937_64 rng(8);
  for (const ProxFn& g : all_kinds(6)) {
    for (int k = 0; k < 200; ++k) {
      const Vector y1 = randn(6, rng, 2.0), y2 = randn(6, rng, 2.0);
      const double tau = 0.9;
      CHECK((g.prox(y1, tau) - g.prox(y2, tau)).norm() <= (y1 - y2).norm() + 1e-12);
    }
  }
}

TEST_CASE("huber prox tends to soft thresholding") {
  std::mt19937_64 rng(9);
  const ProxFn h = ProxFn::huber(8, 1.5, 1e-8);
  const ProxFn l1 = ProxFn::l1(8, 1.5);
  for (int k = 0; k < 50; ++k) {
    const Vector y = randn(8, rng, 3.0);
    CHECK((h.prox(y, 0.6) - l1.prox(y, 0.6)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("conj_value agrees with the Fenchel sup on a grid") {
  const ProxFn h = ProxFn::huber(1, 1.2, 0.7);
  for (double v : {-1.1, -0.3, 0.0, 0.5, 1.2}) {
    double sup = -kInf;
    for (double y = -30.0; y <= 30.0; y += 1e-3) sup = std::max(sup, v * y - h.value(vec({y})));
    CHECK(h.conj_value(vec({v})) == doctest::Approx(sup).epsilon(1e-5));
  }
}
