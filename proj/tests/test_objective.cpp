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

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "pdfp/objective.hpp"

using namespace pdfp;

namespace {

Vector randn(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

RowMatrix rand_matrix(Index r, Index c, std::mt19937_64& rng) {
  RowMatrix m(r, c);
  for (Index i = 0; i < r; ++i) m.row(i) = randn(c, rng).transpose();
  return m;
}

Vector rand_labels(Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector b(n);
  for (Index i = 0; i < n; ++i) b[i] = coin(rng) ? 1.0 : -1.0;
  return b;
}

std::vector<FiniteSum> sample_sums(std::mt19937_64& rng, Index n = 12, Index d = 4) {
  return {FiniteSum::least_squares(rand_matrix(n, d, rng), randn(n, rng)),
          FiniteSum::logistic(rand_matrix(n, d, rng), rand_labels(n, rng)),
          FiniteSum::ridge_logistic(rand_matrix(n, d, rng), rand_labels(n, rng), 0.05)};
}

Vector row(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("grad_sample examples") {
  RowMatrix a(1, 2);
  a << 1, 2;
  const FiniteSum ls = FiniteSum::least_squares(a, row({1}));
  CHECK(ls.grad_sample(0, row({1, 0})).norm() == 0.0);

  RowMatrix a2(2, 2);
  a2 << 1, 0, 0.5, -2;
  const FiniteSum lg = FiniteSum::logistic(a2, row({1, -1}));
  const Vector g = lg.grad_sample(1, Vector::Zero(2));
  CHECK(g[0] == doctest::Approx(0.25));
  CHECK(g[1] == doctest::Approx(-1.0));

  RowMatrix a3(1, 2);
  a3 << 1, 0;
  const FiniteSum rl = FiniteSum::ridge_logistic(a3, row({1}), 0.1);
  const Vector g3 = rl.grad_sample(0, Vector::Zero(2));
  CHECK(g3[0] == doctest::Approx(-0.5));
  CHECK(g3[1] == 0.0);

  CHECK_THROWS(ls.grad_sample(1, row({0, 0})));
  CHECK_THROWS(ls.grad_sample(-1, row({0, 0})));
}

TEST_CASE("labels must be +-1") {
  RowMatrix a(2, 1);
  a << 1, 2;
  CHECK_THROWS_AS(FiniteSum::logistic(a, row({1, 0.5})), ParameterError);
}

TEST_CASE("full_grad examples") {
  const FiniteSum f = FiniteSum::least_squares(RowMatrix::Identity(2, 2), row({1, 1}));
  const Vector g = f.full_grad(Vector::Zero(2));
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(-0.5));

  std::mt19937_64 rng(1);
  const RowMatrix a = rand_matrix(10, 3, rng);
  const Vector xs = randn(3, rng);
  const FiniteSum cons = FiniteSum::least_squares(a, a * xs);
  CHECK(cons.full_grad(xs).norm() <= 1e-12);

  for (const FiniteSum& fs : sample_sums(rng)) {
    const Vector x = randn(fs.d(), rng);
    Vector sum = Vector::Zero(fs.d());
    for (Index i = 0; i < fs.n(); ++i) sum += fs.grad_sample(i, x);
    CHECK((fs.full_grad(x) - sum / static_cast<double>(fs.n())).norm() <= 1e-14);
  }
}

TEST_CASE("Lipschitz constants and strong convexity") {
  RowMatrix a(2, 2);
  a << 1, 2, 3, 0;
  CHECK(FiniteSum::least_squares(a, row({0, 0})).lipschitz(0) == doctest::Approx(5.0));
  CHECK(FiniteSum::logistic(a, row({1, 1})).lipschitz(1) == doctest::Approx(2.25));
  const FiniteSum rl = FiniteSum::ridge_logistic(a, row({1, 1}), 0.1);
  CHECK(rl.lipschitz(0) == doctest::Approx(1.25 + 0.2));
  CHECK(rl.lipschitz_max() == doctest::Approx(2.25 + 0.2));
  CHECK(rl.strong_convexity() == doctest::Approx(0.2));
  CHECK(FiniteSum::logistic(a, row({1, 1})).strong_convexity() == 0.0);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(2);
  for (const FiniteSum& f : sample_sums(rng)) {
    for (int k = 0; k < 20; ++k) {
      const Vector x = randn(f.d(), rng), u = randn(f.d(), rng);
      const double eps = 1e-6;
      const double fd = (f.value(x + eps * u) - f.value(x - eps * u)) / (2 * eps);
      CHECK(std::abs(f.full_grad(x).dot(u) - fd) <= 1e-5);
      const Index i = k % f.n();
      const double fdi = (f.sample_value(i, x + eps * u) - f.sample_value(i, x - eps * u)) /
                         (2 * eps);
      CHECK(std::abs(f.grad_sample(i, x).dot(u) - fdi) <= 1e-5);
    }
  }
}

TEST_CASE("per-sample Lipschitz certificate") {
  std::mt19937_64 rng(3);
  for (const FiniteSum& f : sample_sums(rng)) {
    for (int k = 0; k < 200; ++k) {
      const Index i = k % f.n();
      const Vector x = randn(f.d(), rng, 3.0), y = randn(f.d(), rng, 3.0);
      CHECK((f.grad_sample(i, x) - f.grad_sample(i, y)).norm() <=
            f.lipschitz(i) * (x - y).norm() * (1 + 1e-10));
    }
  }
}

TEST_CASE("ridge logistic strong convexity inequality") {
  std::mt19937_64 rng(4);
  const FiniteSum f =
      FiniteSum::ridge_logistic(rand_matrix(20, 5, rng), rand_labels(20, rng), 0.3);
  for (int k = 0; k < 200; ++k) {
    const Vector x = randn(5, rng), y = randn(5, rng);
    CHECK(f.value(y) >= f.value(x) + f.full_grad(x).dot(y - x) +
                            0.3 * (y - x).squaredNorm() - 1e-12);
  }
}

TEST_CASE("stable logistic loss") {
  CHECK(log1p_exp_neg(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(log1p_exp_neg(-800.0)));
  CHECK(log1p_exp_neg(-800.0) == doctest::Approx(800.0));
  CHECK(log1p_exp_neg(800.0) >= 0.0);
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) == 0.0);
}

TEST_CASE("bregman distance") {
  const FiniteSum q = FiniteSum::least_squares(RowMatrix::Identity(1, 1), row({0}));
  CHECK(q.bregman(row({3}), Vector::Zero(1)) == doctest::Approx(4.5));
  std::mt19937_64 rng(5);
  for (const FiniteSum& f : sample_sums(rng)) {
    const Vector x = randn(f.d(), rng);
    CHECK(f.bregman(x, x) == 0.0);
    for (int k = 0; k < 333; ++k)
      CHECK(f.bregman(randn(f.d(), rng, 2.0), randn(f.d(), rng, 2.0)) >= 0.0);
  }
}

TEST_CASE("batch scheme partitions the samples") {
  const BatchScheme plain(12, 4);
  CHECK(plain.num_blocks() == 3);
  CHECK(plain.block(1) == std::vector<Index>{4, 5, 6, 7});
  const BatchScheme shuffled(12, 3, 42);
  std::set<Index> seen;
  for (Index b = 0; b < shuffled.num_blocks(); ++b) {
    CHECK(shuffled.block(b).size() == 3u);
    for (Index i : shuffled.block(b)) seen.insert(i);
  }
  CHECK(seen.size() == 12u);
  CHECK(BatchScheme(12, 3, 42).order() == shuffled.order());
  CHECK_THROWS_WITH(BatchScheme(10, 3), doctest::Contains("batch size must divide n"));
  CHECK_THROWS(plain.block(3));
}

TEST_CASE("svrg estimator") {
  std::mt19937_64 rng(6);
  for (const FiniteSum& f : sample_sums(rng)) {
    const SvrgAnchor anchor = SvrgAnchor::at(f, randn(f.d(), rng));
    CHECK(anchor.z == f.full_grad(anchor.x));
    const BatchScheme scheme(f.n(), 3);
    for (Index b = 0; b < scheme.num_blocks(); ++b)
      CHECK((svrg_grad(f, anchor, scheme, b, anchor.x) - anchor.z).norm() <= 1e-15);

    const Vector x = randn(f.d(), rng);
    Vector mean = Vector::Zero(f.d());
    for (Index b = 0; b < scheme.num_blocks(); ++b)
      mean += svrg_grad(f, anchor, scheme, b, x);
    mean /= static_cast<double>(scheme.num_blocks());
    CHECK((mean - f.full_grad(x)).norm() <= 1e-13);

    const BatchScheme full(f.n(), f.n());
    CHECK(svrg_grad(f, anchor, full, 0, x) == f.full_grad(x));
  }
}

TEST_CASE("svrg estimator mean on n=4, b=2") {
  std::mt19937_64 rng(7);
  const FiniteSum f = FiniteSum::least_squares(rand_matrix(4, 3, rng), randn(4, rng));
  const SvrgAnchor anchor = SvrgAnchor::at(f, randn(3, rng));
  const BatchScheme scheme(4, 2);
  const Vector x = randn(3, rng);
  const Vector mean =
      0.5 * (svrg_grad(f, anchor, scheme, 0, x) + svrg_grad(f, anchor, scheme, 1, x));
  CHECK((mean - f.full_grad(x)).norm() <= 1e-14);
}

TEST_CASE("variance constants") {
  std::mt19937_64 rng(8);
  const FiniteSum f = FiniteSum::least_squares(rand_matrix(100, 3, rng), randn(100, rng));
  const VarianceConstants full = variance_constants(f, 100);
  CHECK(full.c_b == 0.0);
  CHECK(full.m == 0.0);
  CHECK(variance_constants(f, 1).c_b == doctest::Approx(1.0));
  const VarianceConstants c20 = variance_constants(f, 20);
  CHECK(c20.c_b == doctest::Approx(4.0 / 99.0));
  CHECK(c20.m == doctest::Approx(4.0 * f.lipschitz_max() * 4.0 / 99.0));
  const FiniteSum one = FiniteSum::least_squares(rand_matrix(1, 3, rng), randn(1, rng));
  CHECK_THROWS(variance_constants(one, 1));
}

// Exact E||(1/b) sum_{i in I} psi_i||^2 for I a uniformly random b-subset, from
// the pair inclusion probabilities P(i in I) = b/n and
// P(i, j in I) = b(b-1)/(n(n-1)).
static double subset_variance(const std::vector<Vector>& psi, Index b) {
  const auto n = static_cast<double>(psi.size());
  const auto bd = static_cast<double>(b);
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    diag += psi[i].squaredNorm();
    for (std::size_t j = 0; j < psi.size(); ++j)
      if (i != j) off += psi[i].dot(psi[j]);
  }
  const double p_off = n > 1 ? bd * (bd - 1.0) / (n * (n - 1.0)) : 0.0;
  return (bd / n * diag + p_off * off) / (bd * bd);
}

// The same expectation by listing every b-subset.
static double enumerated_subset_variance(const std::vector<Vector>& psi, Index b) {
  const Index n = static_cast<Index>(psi.size());
  std::vector<Index> pick(static_cast<std::size_t>(b));
  for (Index k = 0; k < b; ++k) pick[static_cast<std::size_t>(k)] = k;
  double total = 0.0;
  long count = 0;
  while (true) {
    Vector s = Vector::Zero(psi.front().size());
    for (Index i : pick) s += psi[static_cast<std::size_t>(i)];
    total += (s / static_cast<double>(b)).squaredNorm();
    ++count;
    Index k = b - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - b + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < b; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return total / static_cast<double>(count);
}

TEST_CASE("batch variance: subset expectation, identity and bound") {
  std::mt19937_64 rng(9);
  const Index n = 12, d = 4;
  const RowMatrix a = rand_matrix(n, d, rng);
  const Vector bvec = randn(n, rng);
  const FiniteSum f = FiniteSum::least_squares(a, bvec);
  const Eigen::MatrixXd ata = a.transpose() * a;
  const Vector xstar = ata.ldlt().solve(a.transpose() * bvec);
  for (Index b : {1, 2, 3, 4, 6, 12}) {
    const BatchScheme scheme(n, b);
    const VarianceConstants vc = variance_constants(f, scheme);
    for (int k = 0; k < 10; ++k) {
      const Vector x = randn(d, rng), xt = randn(d, rng);
      const SvrgAnchor anchor = SvrgAnchor::at(f, xt);
      const Vector g = f.full_grad(x);
      std::vector<Vector> psi;
      double psi_sq = 0.0;
      for (Index i = 0; i < n; ++i) {
        psi.push_back(f.grad_sample(i, x) - f.grad_sample(i, xt) - (g - anchor.z));
        psi_sq += psi.back().squaredNorm();
      }
      const double bound = vc.m * (f.bregman(x, xstar) + f.bregman(xt, xstar));
      const double identity = vc.c_b * psi_sq / static_cast<double>(n);
      if (b < n) {
        const double listed = enumerated_subset_variance(psi, b);
        const double paired = subset_variance(psi, b);
        CHECK(std::abs(listed - paired) <= 1e-12 * paired);
        CHECK(std::abs(paired - identity) <= 1e-12 * identity);
        CHECK(paired <= bound);
      }

      // The solver's fixed partition obeys the same bound.
      double fixed = 0.0;
      for (Index blk = 0; blk < scheme.num_blocks(); ++blk)
        fixed += (svrg_grad(f, anchor, scheme, blk, x) - g).squaredNorm();
      fixed /= static_cast<double>(scheme.num_blocks());
      CHECK(fixed <= bound);
      if (b == n) {
        CHECK(fixed == 0.0);
        CHECK(identity == 0.0);
      }
    }
  }
}
