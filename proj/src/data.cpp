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

#include "pdfp/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "pdfp/trace.hpp"

namespace pdfp {

RowMatrix SparseDataset::dense() const {
  RowMatrix a = RowMatrix::Zero(n(), d);
  for (Index i = 0; i < n(); ++i)
    for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)])
      a(i, idx - 1) = val;
  return a;
}

Vector SparseDataset::label_vector() const {
  Vector b(n());
  for (Index i = 0; i < n(); ++i) b[i] = labels[static_cast<std::size_t>(i)];
  return b;
}

namespace {

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_index(const std::string& s, long long& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::optional<Index> dim) {
  SparseDataset data;
  Index max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label = 0.0;
    if (!parse_real(tok, label)) throw ParseError("bad label '" + tok + "'", lineno);
    if (label == 0.0) throw ParseError("zero label", lineno);

    std::vector<SparseDataset::Entry> row;
    Index prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("malformed pair '" + tok + "'", lineno);
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1)
        throw ParseError("bad feature index in '" + tok + "'", lineno);
      if (!parse_real(tok.substr(colon + 1), val))
        throw ParseError("bad feature value in '" + tok + "'", lineno);
      if (static_cast<Index>(idx) <= prev)
        throw ParseError("indices not increasing", lineno);
      if (dim && static_cast<Index>(idx) > *dim)
        throw ParseError("feature index " + std::to_string(idx) +
                             " exceeds dimension " + std::to_string(*dim),
                         lineno);
      prev = static_cast<Index>(idx);
      row.emplace_back(prev, val);
    }
    max_index = std::max(max_index, prev);
    data.rows.push_back(std::move(row));
    data.labels.push_back(label > 0.0 ? 1.0 : -1.0);
  }
  data.d = dim ? *dim : max_index;
  return data;
}

SparseDataset load_libsvm(const std::string& path, std::optional<Index> dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return parse_libsvm(in, dim);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  for (Index i = 0; i < data.n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << (data.labels[k] > 0.0 ? "+1" : "-1");
    for (const auto& [idx, val] : data.rows[k])
      out << ' ' << idx << ':' << format_double(val);
    out << '\n';
  }
}

SparseDataset gen_synthetic_logistic(Index n, Index d, double separation,
                                     double noise, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ParameterError("synthetic data needs n, d >= 1");
  if (!(noise >= 0.0 && noise < 0.5))
    throw ParameterError("label noise must lie in [0, 0.5)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flip(noise);

  Vector w(d);
  for (Index j = 0; j < d; ++j) w[j] = normal(rng);
  w.normalize();

  SparseDataset data;
  data.d = d;
  data.rows.reserve(static_cast<std::size_t>(n));
  data.labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double cloud = coin(rng) ? 1.0 : -1.0;
    std::vector<SparseDataset::Entry> row;
    row.reserve(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j)
      row.emplace_back(j + 1, cloud * separation * w[j] + normal(rng));
    data.rows.push_back(std::move(row));
    data.labels.push_back(flip(rng) ? -cloud : cloud);
  }
  return data;
}

std::pair<SparseDataset, SparseDataset> split_half(const SparseDataset& data,
                                                   std::uint64_t seed) {
  std::vector<std::size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = (order.size() + 1) / 2;
  SparseDataset train, test;
  train.d = test.d = data.d;
  for (std::size_t k = 0; k < order.size(); ++k) {
    SparseDataset& dst = k < n_train ? train : test;
    dst.rows.push_back(data.rows[order[k]]);
    dst.labels.push_back(data.labels[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

LinearMap gen_graph_matrix(Index d, const GraphSpec& spec) {
  if (d < 2) throw ParameterError("graph matrix needs d >= 2");
  std::vector<std::pair<Index, Index>> edges;
  if (spec.kind == GraphKind::Chain) {
    for (Index i = 0; i + 1 < d; ++i) edges.emplace_back(i, i + 1);
  } else {
    if (!(spec.p > 0.0 && spec.p <= 1.0))
      throw ParameterError("graph density p must lie in (0, 1]");
    const auto pairs = static_cast<std::size_t>(
        std::ceil(spec.p * static_cast<double>(d) * static_cast<double>(d)));
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<Index> pick(0, d - 1);
    std::set<std::pair<Index, Index>> seen;
    for (std::size_t k = 0; k < pairs; ++k) {
      Index i = pick(rng), j = pick(rng);
      while (j == i) j = pick(rng);
      if (i > j) std::swap(i, j);
      if (seen.insert({i, j}).second) edges.emplace_back(i, j);
    }
  }
  RowMatrix g = RowMatrix::Zero(static_cast<Index>(edges.size()), d);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    g(static_cast<Index>(e), edges[e].first) = 1.0;
    g(static_cast<Index>(e), edges[e].second) = -1.0;
  }
  return LinearMap::dense(std::move(g));
}

Vector phantom(Index size) {
  Vector img(size * size);
  const double c = 0.5 * static_cast<double>(size);
  const double radius = 0.4 * static_cast<double>(size);
  const double half_side = 0.15 * static_cast<double>(size);
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      const double y = static_cast<double>(i) + 0.5 - c;
      const double x = static_cast<double>(j) + 0.5 - c;
      double val = 0.0;
      if (x * x + y * y <= radius * radius) val = 1.0;
      if (std::abs(x) <= half_side && std::abs(y) <= half_side) val = 0.5;
      img[i * size + j] = val;
    }
  }
  return img;
}

namespace {

// CDF of U(0, a) + U(0, b) at x.
double sum_uniform_cdf(double x, double a, double b) {
  if (a < b) std::swap(a, b);
  if (x <= 0.0) return 0.0;
  if (x >= a + b) return 1.0;
  if (b < 1e-12 * a) return std::min(x / a, 1.0);
  auto r2 = [](double t) { return t > 0.0 ? t * t : 0.0; };
  return (r2(x) - r2(x - a) - r2(x - b) + r2(x - a - b)) / (2.0 * a * b);
}

}  // namespace

RowMatrix parallel_beam_projector(Index size, Index rays_per_angle,
                                  Index angles) {
  if (size < 1 || rays_per_angle < 1 || angles < 1)
    throw ParameterError("projector needs positive size, rays and angles");
  constexpr int kSub = 4;
  const double pi = std::acos(-1.0);
  const double c = 0.5 * static_cast<double>(size);
  const double reach = c * std::sqrt(2.0);
  const double width = 2.0 * reach / static_cast<double>(rays_per_angle);
  const double h = 1.0 / kSub;

  RowMatrix a = RowMatrix::Zero(rays_per_angle * angles, size * size);
  for (Index k = 0; k < angles; ++k) {
    const double theta = pi * static_cast<double>(k) / static_cast<double>(angles);
    const double ct = std::cos(theta), st = std::sin(theta);
    // A subpixel square projects onto the detector axis as the sum of two
    // uniforms; its exact area in each strip is spread accordingly.
    const double ea = h * std::abs(ct), eb = h * std::abs(st);
    const double half = 0.5 * (ea + eb);
    for (Index i = 0; i < size; ++i) {
      for (Index j = 0; j < size; ++j) {
        for (int si = 0; si < kSub; ++si) {
          for (int sj = 0; sj < kSub; ++sj) {
            const double y = static_cast<double>(i) + (si + 0.5) * h - c;
            const double x = static_cast<double>(j) + (sj + 0.5) * h - c;
            const double t = x * ct + y * st + reach;
            const double lo = t - half;
            auto first = static_cast<Index>(std::floor(lo / width));
            auto last = static_cast<Index>(std::floor((t + half) / width));
            first = std::clamp<Index>(first, 0, rays_per_angle - 1);
            last = std::clamp<Index>(last, 0, rays_per_angle - 1);
            for (Index ray = first; ray <= last; ++ray) {
              const double s0 = static_cast<double>(ray) * width - lo;
              const double frac = sum_uniform_cdf(s0 + width, ea, eb) -
                                  sum_uniform_cdf(s0, ea, eb);
              if (frac > 0.0)
                a(k * rays_per_angle + ray, i * size + j) += h * h * frac / width;
            }
          }
        }
      }
    }
  }
  return a;
}

ImagingProblem gen_imaging_problem(const ImagingParams& params) {
  if (params.size != 16 && params.size != 32 && params.size != 64)
    throw ParameterError("imaging size must be 16, 32 or 64");
  if (!(params.noise_variance >= 0.0))
    throw ParameterError("noise variance must be non-negative");
  if (params.nu && !(*params.nu > 0.0))
    throw ParameterError("TV weight nu must be positive");
  ImagingProblem prob;
  prob.height = prob.width = params.size;
  prob.truth = phantom(params.size);
  prob.projector = parallel_beam_projector(params.size, params.rays_per_angle,
                                           params.angles);
  prob.measurements = prob.projector * prob.truth;
  if (params.noise_variance > 0.0) {
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(params.noise_variance));
    for (Index i = 0; i < prob.measurements.size(); ++i)
      prob.measurements[i] += normal(rng);
  }
  prob.nu = params.nu ? *params.nu
                      : 0.05 * prob.measurements.maxCoeff() /
                            static_cast<double>(prob.measurements.size());
  prob.rays_per_angle = params.rays_per_angle;
  prob.angles = params.angles;
  return prob;
}

void write_pgm(std::ostream& out, const Vector& image, Index height,
               Index width) {
  check_size("write_pgm", height * width, image.size());
  const double lo = std::min(0.0, image.minCoeff());
  const double hi = image.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  out << "P2\n" << width << ' ' << height << "\n255\n";
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      const double s = (image[i * width + j] - lo) / span;
      const long level = std::lround(std::clamp(s, 0.0, 1.0) * 255.0);
      out << level << (j + 1 < width ? ' ' : '\n');
    }
  }
}

}  // namespace pdfp
