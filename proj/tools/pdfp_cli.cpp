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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pdfp/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;

int cmd_validate(const std::string& path) {
  const pdfp::ExperimentConfig config = pdfp::load_config(path);
  const pdfp::ConfigReport report = pdfp::validate_config(config);
  std::cout << pdfp::format_report(report);
  std::cout << (report.ok ? "config ok" : "config invalid") << '\n';
  return report.ok ? kExitOk : kExitInvalid;
}

int cmd_reference(const std::string& path) {
  const pdfp::ExperimentConfig config = pdfp::load_config(path);
  const pdfp::BuiltProblem problem = pdfp::build_problem(config.problem, config.seed);
  bool cached = false;
  const pdfp::ReferenceSolution ref = pdfp::obtain_reference(config, problem, &cached);
  if (!cached) pdfp::write_reference_cache(config, ref);
  std::cout << "reference objective " << pdfp::format_double(ref.objective)
            << "  residual " << pdfp::format_double(ref.residual)
            << (cached ? "  (cached)" : "") << '\n';
  if (!ref.converged)
    std::cerr << "warning: reference residual above tolerance; increase reference_iters\n";
  return kExitOk;
}

int cmd_run(const std::string& path) {
  const pdfp::ExperimentConfig config = pdfp::load_config(path);
  const pdfp::ExperimentSummary summary = pdfp::run_experiment(config);
  if (!summary.reference_from_cache && summary.reference.x.size() > 0)
    pdfp::write_reference_cache(config, summary.reference);
  for (const auto& s : summary.solvers) {
    std::cout << s.name << ": ";
    if (!s.validation.ok) {
      std::cout << "invalid\n";
      for (const auto& e : s.validation.errors) std::cout << "  error: " << e << '\n';
      continue;
    }
    if (s.mean_epochs_to_threshold)
      std::cout << "mean epochs to threshold " << *s.mean_epochs_to_threshold;
    else
      std::cout << "threshold not reached in every repetition";
    if (s.diverged) std::cout << "  DIVERGED";
    if (s.truncated) std::cout << "  (averaged trace truncated to " << s.averaged_rows << " rows)";
    std::cout << '\n';
    for (const auto& m : s.messages) std::cout << "  " << m << '\n';
  }
  return summary.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual fixed-point solvers with variance reduction"};
  app.require_subcommand(1);
  std::string config;
  auto* run = app.add_subcommand("run", "Run all solvers in a config and write CSV traces");
  run->add_option("config", config, "JSON config file")->required();
  auto* validate = app.add_subcommand("validate", "Check a config and print step-size constants");
  validate->add_option("config", config, "JSON config file")->required();
  auto* reference = app.add_subcommand("reference", "Compute and cache the reference solution");
  reference->add_option("config", config, "JSON config file")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config);
    if (*validate) return cmd_validate(config);
    if (*reference) return cmd_reference(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
