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

#ifndef PDFP_DATA_HPP
#define PDFP_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdfp/common.hpp"
#include "pdfp/linops.hpp"

namespace pdfp {

// Binary-labelled sparse samples. Feature indices are 1-based, as in the
// LIBSVM text format.
struct SparseDataset {
  using Entry = std::pair<Index, double>;

  Index d = 0;
  std::vector<std::vector<Entry>> rows;
  std::vector<double> labels;  // -1 or +1

  Index n() const { return static_cast<Index>(rows.size()); }

  RowMatrix dense() const;
  Vector label_vector() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + ", line " + std::to_string(line)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Lines "label idx:val idx:val ..."; blank lines and '#' comments are
// skipped. Labels map to -1/+1 by sign; zero labels are rejected.
SparseDataset parse_libsvm(std::istream& in,
                           std::optional<Index> dim = std::nullopt);
SparseDataset load_libsvm(const std::string& path,
                          std::optional<Index> dim = std::nullopt);
void write_libsvm(std::ostream& out, const SparseDataset& data);

// Two Gaussian clouds centred at +-separation * w/||w|| for a seeded random
// direction w; each label is flipped with probability `noise`.
SparseDataset gen_synthetic_logistic(Index n, Index d, double separation,
                                     double noise, std::uint64_t seed);

// Shuffles with `seed` and splits into the first ceil(n/2) samples (train)
// and the rest (test).
std::pair<SparseDataset, SparseDataset> split_half(const SparseDataset& data,
                                                   std::uint64_t seed);

enum class GraphKind { Chain, RandomSparse };

struct GraphSpec {
  GraphKind kind = GraphKind::Chain;
  double p = 0.1;  // RandomSparse: ceil(p d^2) sampled pairs
  std::uint64_t seed = 0;
};

// Edge-difference matrix G: one row e_i - e_j per edge.
LinearMap gen_graph_matrix(Index d, const GraphSpec& spec);

struct ImagingProblem {
  Index height = 0;
  Index width = 0;
  Vector truth;
  RowMatrix projector;  // one row per ray, grouped by angle
  Vector measurements;
  double nu = 0.0;
  Index rays_per_angle = 0;
  Index angles = 0;
};

struct ImagingParams {
  Index size = 32;  // 16, 32 or 64
  Index rays_per_angle = 48;
  Index angles = 48;
  double noise_variance = 0.01;
  // TV weight; unset means 0.05 * max(measurements) / n
  std::optional<double> nu;
  std::uint64_t seed = 0;
};

// Piecewise-constant phantom: disk (1.0) with an inner square (0.5).
Vector phantom(Index size);

// Parallel-beam strip projector over `angles` equally spaced directions in
// [0, pi). Entry (ray, pixel) is area(strip ∩ pixel) / strip width,
// accumulated over 4x4 subpixels, each spread by its projected footprint.
RowMatrix parallel_beam_projector(Index size, Index rays_per_angle,
                                  Index angles);

ImagingProblem gen_imaging_problem(const ImagingParams& params);

// Plain PGM (P2), values mapped linearly from [min(0, min), max] to 0..255.
void write_pgm(std::ostream& out, const Vector& image, Index height,
               Index width);

}  // namespace pdfp

#endif  // PDFP_DATA_HPP
