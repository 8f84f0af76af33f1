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

#ifndef PDFP_EXPERIMENT_HPP
#define PDFP_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdfp/data.hpp"
#include "pdfp/metrics.hpp"
#include "pdfp/solvers.hpp"

namespace pdfp {

enum class ProblemType { SyntheticLogistic, Libsvm, Imaging, LassoToy };

struct ProblemConfig {
  ProblemType type = ProblemType::LassoToy;

  // synthetic_logistic
  Index n = 1000;
  Index n_test = 1000;
  Index d = 20;
  double separation = 1.0;
  double noise = 0.1;

  // libsvm
  std::string path;
  std::optional<Index> dim;

  // logistic models: ridge-logistic f, penalty nu2 on B = [G; I]
  GraphSpec graph;
  double nu1 = 1e-4;
  double nu2 = 1e-4;
  std::optional<double> huber_alpha;

  // imaging
  ImagingParams imaging;

  // Canonical JSON text of the problem section (reference cache key).
  std::string canonical;
};

struct SolverConfig {
  std::string name;
  SolverParams params;
};

struct ExperimentConfig {
  int version = 1;
  ProblemConfig problem;
  std::vector<SolverConfig> solvers;
  int repetitions = 1;
  long reference_iters = kDefaultReferenceIters;
  StopRule stop;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool timing = false;
};

// Parses a version-1 JSON config. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct BuiltProblem {
  ProblemSpec spec;
  std::optional<FiniteSum> test;  // held-out logistic samples
  std::optional<Vector> truth;    // imaging ground truth
  Index height = 0;
  Index width = 0;
};

BuiltProblem build_problem(const ProblemConfig& config, std::uint64_t seed);

struct ConfigReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::pair<std::string, ValidationReport>> solvers;
};

ConfigReport validate_config(const ExperimentConfig& config);
std::string format_report(const ConfigReport& report);

struct SolverSummary {
  std::string name;
  ValidationReport validation;
  bool ran = false;
  std::vector<std::optional<double>> epochs_to_threshold;
  std::optional<double> mean_epochs_to_threshold;
  std::size_t averaged_rows = 0;
  bool truncated = false;
  bool diverged = false;
  std::vector<std::string> files;
  std::vector<std::string> messages;
};

struct ExperimentSummary {
  std::vector<SolverSummary> solvers;
  ReferenceSolution reference;
  bool reference_from_cache = false;
  int exit_code = 0;  // 0 ok, 2 validation failure, 3 divergence
};

// Reference saddle point for the configured problem, read from
// <output_dir>/reference.json when the cached problem matches.
ReferenceSolution obtain_reference(const ExperimentConfig& config,
                                   const BuiltProblem& problem,
                                   bool* from_cache = nullptr);
void write_reference_cache(const ExperimentConfig& config,
                           const ReferenceSolution& ref);

ExperimentSummary run_experiment(const ExperimentConfig& config);

// Per-stage mean (and sample standard deviation) of several traces,
// truncated to the shortest one.
std::vector<TraceRow> average_traces(const std::vector<std::vector<TraceRow>>& runs,
                                     std::vector<TraceRow>* stddev = nullptr);

// Concurrency cap for repetitions (THREADS environment variable, default
// hardware concurrency).
unsigned repetition_threads();

}  // namespace pdfp

#endif  // PDFP_EXPERIMENT_HPP
