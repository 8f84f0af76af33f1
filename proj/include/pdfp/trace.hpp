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

#ifndef PDFP_TRACE_HPP
#define PDFP_TRACE_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdfp/common.hpp"

namespace pdfp {

struct TraceRow {
  long stage = 0;
  double epochs = 0.0;
  std::optional<double> seconds;
  double objective = 0.0;
  std::optional<double> rel_err;
  std::optional<double> r_value;
  std::optional<double> psnr;
  std::optional<double> test_loss;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  // Solver output: last iterate (PDFP, SPDFP), last stage average
  // (SVRG-SC) or the ergodic average of stage averages (SVRG-GC).
  Vector x;
  Vector v;
  // Iterates behind each row, filled when RunOptions::keep_iterates is set.
  std::vector<Vector> row_x;
  std::vector<Vector> row_v;
  // PDFP only: ||x_{k+1} - x_k||_inf per iteration.
  std::vector<double> residuals;
  bool diverged = false;
  bool reached_threshold = false;
  std::string message;
};

inline constexpr const char* kTraceCsvHeader =
    "stage,epochs,seconds,objective,rel_err,r_value,psnr,test_loss";

// 17 significant digits; missing metrics are empty fields.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);
std::string format_double(double x);

}  // namespace pdfp

#endif  // PDFP_TRACE_HPP
