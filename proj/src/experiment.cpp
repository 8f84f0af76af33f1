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

#include "pdfp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace pdfp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key))
      throw ParameterError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

GraphSpec parse_graph(const json& j) {
  check_keys(j, {"kind", "p", "seed"}, "problem.graph");
  GraphSpec g;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "chain") {
    g.kind = GraphKind::Chain;
  } else if (kind == "random_sparse") {
    g.kind = GraphKind::RandomSparse;
    g.p = j.at("p").get<double>();
    g.seed = get_or<std::uint64_t>(j, "seed", 0);
  } else {
    throw ParameterError("unknown graph kind '" + kind + "'");
  }
  return g;
}

ProblemConfig parse_problem(const json& j) {
  ProblemConfig p;
  const std::string type = j.at("type").get<std::string>();
  auto logistic_keys = [&](std::set<std::string> keys) {
    keys.insert({"type", "graph", "nu1", "nu2", "huber_alpha"});
    check_keys(j, keys, "problem");
    if (j.contains("graph")) p.graph = parse_graph(j.at("graph"));
    p.nu1 = get_or(j, "nu1", p.nu1);
    p.nu2 = get_or(j, "nu2", p.nu2);
    if (j.contains("huber_alpha")) p.huber_alpha = j.at("huber_alpha").get<double>();
  };
  if (type == "lasso_toy") {
    p.type = ProblemType::LassoToy;
    check_keys(j, {"type"}, "problem");
  } else if (type == "synthetic_logistic") {
    p.type = ProblemType::SyntheticLogistic;
    logistic_keys({"n", "n_test", "d", "separation", "noise"});
    p.n = get_or<Index>(j, "n", p.n);
    p.n_test = get_or<Index>(j, "n_test", p.n);
    p.d = get_or<Index>(j, "d", p.d);
    p.separation = get_or(j, "separation", p.separation);
    p.noise = get_or(j, "noise", p.noise);
  } else if (type == "libsvm") {
    p.type = ProblemType::Libsvm;
    logistic_keys({"path", "dim"});
    p.path = j.at("path").get<std::string>();
    if (j.contains("dim")) p.dim = j.at("dim").get<Index>();
  } else if (type == "imaging") {
    p.type = ProblemType::Imaging;
    check_keys(j, {"type", "size", "rays_per_angle", "angles", "noise_variance", "nu"},
               "problem");
    p.imaging.size = get_or<Index>(j, "size", p.imaging.size);
    p.imaging.rays_per_angle =
        get_or<Index>(j, "rays_per_angle", p.imaging.rays_per_angle);
    p.imaging.angles = get_or<Index>(j, "angles", p.imaging.angles);
    p.imaging.noise_variance =
        get_or(j, "noise_variance", p.imaging.noise_variance);
    if (j.contains("nu")) p.imaging.nu = j.at("nu").get<double>();
  } else {
    throw ParameterError("unknown problem type '" + type + "'");
  }
  p.canonical = j.dump();
  return p;
}

SolverConfig parse_solver(const json& j) {
  check_keys(j,
             {"name", "variant", "gamma", "lambda", "m", "batch", "stages",
              "decay", "override", "shuffle_seed"},
             "solver");
  SolverConfig s;
  s.params.variant = parse_variant(j.at("variant").get<std::string>());
  s.name = get_or<std::string>(j, "name", to_string(s.params.variant));
  s.params.gamma = j.at("gamma").get<double>();
  // lambda <= 0 selects 1/rho_max(BB^T) at run time.
  s.params.lambda = get_or(j, "lambda", 0.0);
  s.params.m = get_or<Index>(j, "m", 1);
  s.params.batch = get_or<Index>(j, "batch", 0);
  s.params.stages = get_or<long>(j, "stages", 0);
  s.params.decay = get_or(j, "decay", s.params.decay);
  s.params.override_steps = get_or(j, "override", false);
  if (j.contains("shuffle_seed"))
    s.params.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  return s;
}

// Fills run-time defaults: batch = n for PDFP, lambda = 1/rho_max, and the
// iteration budget derived from stop.max_epochs when stages is unset.
SolverParams resolve_params(const SolverParams& in, const ExperimentConfig& cfg,
                            const ProblemSpec& p) {
  SolverParams s = in;
  const Index n = p.f.n();
  if (s.variant == Variant::Pdfp || s.batch <= 0) s.batch = n;
  if (s.lambda <= 0.0) {
    SolverParams probe = s;
    probe.lambda = 1.0;
    const double lmax = validate_params(p, probe).lambda_max;
    s.lambda = std::isfinite(lmax) ? lmax : 1.0;
  }
  if (s.stages <= 0 && cfg.stop.max_epochs && s.batch > 0 && n % s.batch == 0) {
    const double budget = *cfg.stop.max_epochs;
    const double nd = static_cast<double>(n);
    switch (s.variant) {
      case Variant::Pdfp:
        s.stages = static_cast<long>(std::ceil(budget - 1e-12));
        break;
      case Variant::Spdfp:
        s.stages = static_cast<long>(
            std::ceil(budget * nd / static_cast<double>(s.batch) - 1e-9));
        break;
      case Variant::SvrgSc:
      case Variant::SvrgGc: {
        const double per_stage =
            (nd + static_cast<double>(s.m) * static_cast<double>(s.batch)) / nd;
        s.stages = static_cast<long>(std::ceil(budget / per_stage - 1e-12));
        break;
      }
    }
  }
  return s;
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
               ? c
               : '_';
  return out;
}

json vec_to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector json_to_vec(const json& a) {
  Vector v(static_cast<Index>(a.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

void write_csv_file(const fs::path& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, rows);
}

json report_json(const ValidationReport& r) {
  json j;
  j["ok"] = r.ok;
  j["kappa"] = r.kappa ? json(*r.kappa) : json(nullptr);
  j["M"] = r.m_const;
  j["C_b"] = r.c_b;
  j["rho_max"] = r.rho_max;
  j["lambda_max"] = r.lambda_max;
  j["gamma_max"] = r.gamma_max;
  j["errors"] = r.errors;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"version", "problem", "solvers", "repetitions", "reference_iters",
                "stop", "seed", "output_dir", "timing"},
               "config");
    ExperimentConfig c;
    c.version = j.at("version").get<int>();
    if (c.version != 1)
      throw ParameterError("unsupported config version " + std::to_string(c.version));
    c.problem = parse_problem(j.at("problem"));
    for (const json& s : j.at("solvers")) c.solvers.push_back(parse_solver(s));
    c.repetitions = get_or(j, "repetitions", 1);
    c.reference_iters = get_or<long>(j, "reference_iters", c.reference_iters);
    if (j.contains("stop")) {
      const json& s = j.at("stop");
      check_keys(s, {"max_epochs", "rel_err_threshold"}, "stop");
      if (s.contains("max_epochs")) c.stop.max_epochs = s.at("max_epochs").get<double>();
      if (s.contains("rel_err_threshold"))
        c.stop.rel_err_threshold = s.at("rel_err_threshold").get<double>();
    }
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.timing = get_or(j, "timing", false);
    return c;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

BuiltProblem build_problem(const ProblemConfig& c, std::uint64_t seed) {
  auto logistic_penalty = [&](Index dim) {
    return c.huber_alpha ? ProxFn::huber(dim, c.nu2, *c.huber_alpha)
                         : ProxFn::l1(dim, c.nu2);
  };
  switch (c.type) {
    case ProblemType::LassoToy: {
      // min 0.5 (x - 2)^2 + |x|, written with two identical samples so the
      // variance-reduced solvers have n >= 2.
      RowMatrix a(2, 1);
      a << 1.0, 1.0;
      Vector b(2);
      b << 2.0, 2.0;
      return BuiltProblem{ProblemSpec(FiniteSum::least_squares(a, b),
                                      ProxFn::l1(1, 1.0), LinearMap::identity(1)),
                          std::nullopt, std::nullopt, 0, 0};
    }
    case ProblemType::SyntheticLogistic:
    case ProblemType::Libsvm: {
      SparseDataset train, test;
      if (c.type == ProblemType::SyntheticLogistic) {
        if (c.n < 1 || c.n_test < 0) throw ParameterError("bad sample counts");
        const SparseDataset all =
            gen_synthetic_logistic(c.n + c.n_test, c.d, c.separation, c.noise, seed);
        train.d = test.d = all.d;
        for (Index i = 0; i < all.n(); ++i) {
          SparseDataset& dst = i < c.n ? train : test;
          dst.rows.push_back(all.rows[static_cast<std::size_t>(i)]);
          dst.labels.push_back(all.labels[static_cast<std::size_t>(i)]);
        }
      } else {
        std::tie(train, test) = split_half(load_libsvm(c.path, c.dim), seed);
      }
      LinearMap g = gen_graph_matrix(train.d, c.graph);
      LinearMap b = LinearMap::stacked(std::move(g));
      const Index r = b.out_dim();
      BuiltProblem out{
          ProblemSpec(FiniteSum::ridge_logistic(train.dense(), train.label_vector(), c.nu1),
                      logistic_penalty(r), std::move(b)),
          std::nullopt, std::nullopt, 0, 0};
      if (test.n() > 0)
        out.test = FiniteSum::logistic(test.dense(), test.label_vector());
      return out;
    }
    case ProblemType::Imaging: {
      ImagingParams ip = c.imaging;
      ip.seed = seed;
      ImagingProblem img = gen_imaging_problem(ip);
      const Index h = img.height, w = img.width;
      return BuiltProblem{
          ProblemSpec(FiniteSum::least_squares(std::move(img.projector),
                                               std::move(img.measurements)),
                      ProxFn::l1(2 * h * w, img.nu), LinearMap::grad2d(h, w)),
          std::nullopt, std::move(img.truth), h, w};
    }
  }
  throw ParameterError("unknown problem type");
}

ConfigReport validate_config(const ExperimentConfig& config) {
  ConfigReport report;
  if (config.solvers.empty()) report.errors.push_back("config lists no solvers");
  if (config.repetitions < 1) report.errors.push_back("repetitions must be >= 1");
  if (config.reference_iters < 1) report.errors.push_back("reference_iters must be >= 1");
  std::set<std::string> names;
  for (const auto& s : config.solvers) {
    if (!names.insert(s.name).second)
      report.errors.push_back("duplicate solver name '" + s.name + "'");
  }

  std::optional<BuiltProblem> problem;
  try {
    problem.emplace(build_problem(config.problem, config.seed));
  } catch (const std::exception& e) {
    report.errors.push_back(std::string("problem: ") + e.what());
  }
  if (problem) {
    for (const auto& s : config.solvers) {
      const SolverParams params = resolve_params(s.params, config, problem->spec);
      ValidationReport r = validate_params(problem->spec, params);
      if (params.stages < 1 && !config.stop.max_epochs) {
        r.errors.push_back("no iteration budget: set stages or stop.max_epochs");
        r.ok = false;
      }
      for (const auto& e : r.errors) report.errors.push_back(s.name + ": " + e);
      report.solvers.emplace_back(s.name, std::move(r));
    }
  }
  report.ok = report.errors.empty();
  return report;
}

std::string format_report(const ConfigReport& report) {
  std::ostringstream os;
  for (const auto& [name, r] : report.solvers) {
    os << name << ": " << (r.ok ? "ok" : "INVALID") << "  M=" << r.m_const
       << "  C(b)=" << r.c_b << "  rho_max=" << r.rho_max
       << "  gamma_max=" << r.gamma_max << "  lambda_max=" << r.lambda_max;
    if (r.kappa) os << "  kappa=" << *r.kappa;
    os << '\n';
    for (const auto& w : r.warnings) os << "  warning: " << w << '\n';
  }
  for (const auto& e : report.errors) os << "error: " << e << '\n';
  return os.str();
}

ReferenceSolution obtain_reference(const ExperimentConfig& config,
                                   const BuiltProblem& problem,
                                   bool* from_cache) {
  if (from_cache) *from_cache = false;
  const fs::path cache = fs::path(config.output_dir) / "reference.json";
  if (fs::exists(cache)) {
    try {
      std::ifstream in(cache);
      const json j = json::parse(in);
      if (j.at("problem").get<std::string>() == config.problem.canonical &&
          j.at("seed").get<std::uint64_t>() == config.seed &&
          j.at("reference_iters").get<long>() == config.reference_iters) {
        ReferenceSolution ref =
            make_reference(problem.spec, json_to_vec(j.at("x")), json_to_vec(j.at("v")));
        ref.residual = j.at("residual").get<double>();
        ref.converged = ref.residual <= kReferenceTolerance;
        if (from_cache) *from_cache = true;
        return ref;
      }
    } catch (const std::exception&) {
      // Stale or corrupt cache: recompute.
    }
  }
  ReferenceOptions ro;
  ro.iters = config.reference_iters;
  return compute_reference(problem.spec, ro);
}

void write_reference_cache(const ExperimentConfig& config,
                           const ReferenceSolution& ref) {
  fs::create_directories(config.output_dir);
  json j;
  j["problem"] = config.problem.canonical;
  j["seed"] = config.seed;
  j["reference_iters"] = config.reference_iters;
  j["residual"] = ref.residual;
  j["objective"] = ref.objective;
  j["x"] = vec_to_json(ref.x);
  j["v"] = vec_to_json(ref.v);
  std::ofstream out(fs::path(config.output_dir) / "reference.json");
  if (!out) throw std::runtime_error("cannot write reference cache");
  out << j.dump(1) << '\n';
}

std::vector<TraceRow> average_traces(const std::vector<std::vector<TraceRow>>& runs,
                                     std::vector<TraceRow>* stddev) {
  std::vector<TraceRow> mean;
  if (runs.empty()) return mean;
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  const double k = static_cast<double>(runs.size());

  using Field = std::optional<double> TraceRow::*;
  const Field fields[] = {&TraceRow::seconds, &TraceRow::rel_err, &TraceRow::r_value,
                          &TraceRow::psnr, &TraceRow::test_loss};
  if (stddev) stddev->clear();
  for (std::size_t i = 0; i < len; ++i) {
    TraceRow m = runs.front()[i];
    TraceRow s = m;
    auto stats = [&](auto get) {
      double sum = 0.0;
      for (const auto& r : runs) sum += get(r[i]);
      const double mu = sum / k;
      double sq = 0.0;
      for (const auto& r : runs) sq += (get(r[i]) - mu) * (get(r[i]) - mu);
      return std::pair{mu, k > 1 ? std::sqrt(sq / (k - 1.0)) : 0.0};
    };
    std::tie(m.objective, s.objective) =
        stats([](const TraceRow& r) { return r.objective; });
    for (Field f : fields) {
      const bool all = std::all_of(runs.begin(), runs.end(),
                                   [&](const auto& r) { return (r[i].*f).has_value(); });
      if (!all) {
        m.*f = std::nullopt;
        s.*f = std::nullopt;
        continue;
      }
      auto [mu, sd] = stats([&](const TraceRow& r) { return *(r.*f); });
      m.*f = mu;
      s.*f = sd;
    }
    mean.push_back(m);
    if (stddev) stddev->push_back(s);
  }
  return mean;
}

unsigned repetition_threads() {
  if (const char* env = std::getenv("THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  ExperimentSummary summary;
  const ConfigReport check = validate_config(config);
  // Structural problems stop everything; per-solver failures are reported
  // and the remaining solvers still run.
  bool structural = false;
  for (const auto& e : check.errors) {
    bool solver_error = false;
    for (const auto& s : config.solvers)
      if (e.rfind(s.name + ": ", 0) == 0) solver_error = true;
    structural = structural || !solver_error;
  }
  if (structural) {
    summary.exit_code = 2;
    for (const auto& [name, r] : check.solvers) {
      SolverSummary s;
      s.name = name;
      s.validation = r;
      summary.solvers.push_back(std::move(s));
    }
    return summary;
  }

  const BuiltProblem problem = build_problem(config.problem, config.seed);
  const ProblemSpec& p = problem.spec;
  summary.reference = obtain_reference(config, problem, &summary.reference_from_cache);
  const ReferenceSolution& ref = summary.reference;

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  if (problem.truth) {
    std::ofstream pgm(out_dir / "truth.pgm");
    write_pgm(pgm, *problem.truth, problem.height, problem.width);
  }

  RunOptions base;
  base.stop = config.stop;
  base.timing = config.timing;
  base.evaluate = [&](const Vector& x, const Vector& v, TraceRow& row) {
    row.rel_err = relative_objective_error(p, ref, x);
    row.r_value = r_value(p, ref, x, v);
    if (problem.truth) row.psnr = psnr(x, *problem.truth);
    if (problem.test) row.test_loss = test_loss(*problem.test, x);
  };

  for (std::size_t si = 0; si < config.solvers.size(); ++si) {
    const SolverConfig& sc = config.solvers[si];
    SolverSummary sum;
    sum.name = sc.name;
    sum.validation = check.solvers[si].second;
    if (!sum.validation.ok) {
      summary.exit_code = std::max(summary.exit_code, 2);
      summary.solvers.push_back(std::move(sum));
      continue;
    }
    const SolverParams params = resolve_params(sc.params, config, p);
    const std::string stem = file_stem(sc.name);

    const auto reps = static_cast<std::size_t>(config.repetitions);
    std::vector<RunTrace> traces(reps);
    std::vector<std::string> failures(reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t r = next++; r < reps; r = next++) {
        SolverParams rp = params;
        rp.seed = config.seed + r;
        try {
          traces[r] = run_solver(p, rp, Vector::Zero(p.f.d()),
                                 Vector::Zero(p.B.out_dim()), base);
        } catch (const std::exception& e) {
          failures[r] = e.what();
        }
      }
    };
    const unsigned nthreads =
        static_cast<unsigned>(std::min<std::size_t>(repetition_threads(), reps));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    sum.ran = true;
    std::vector<std::vector<TraceRow>> rows;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!failures[r].empty()) {
        sum.messages.push_back("repetition " + std::to_string(r) + ": " + failures[r]);
        summary.exit_code = std::max(summary.exit_code, 2);
        continue;
      }
      const RunTrace& t = traces[r];
      if (t.diverged) {
        sum.diverged = true;
        summary.exit_code = 3;
      }
      if (!t.message.empty())
        sum.messages.push_back("repetition " + std::to_string(r) + ": " + t.message);
      const std::string file = stem + "_run" + std::to_string(r) + ".csv";
      write_csv_file(out_dir / file, t.rows);
      sum.files.push_back(file);
      rows.push_back(t.rows);

      std::optional<double> hit;
      if (config.stop.rel_err_threshold) {
        for (const TraceRow& row : t.rows) {
          if (row.rel_err && *row.rel_err <= *config.stop.rel_err_threshold) {
            hit = row.epochs;
            break;
          }
        }
      }
      sum.epochs_to_threshold.push_back(hit);
      if (problem.truth && r == 0) {
        std::ofstream pgm(out_dir / (stem + "_run0.pgm"));
        write_pgm(pgm, t.x, problem.height, problem.width);
      }
    }
    if (!rows.empty()) {
      std::vector<TraceRow> sd;
      const std::vector<TraceRow> avg = average_traces(rows, &sd);
      sum.averaged_rows = avg.size();
      for (const auto& r : rows) sum.truncated = sum.truncated || r.size() != avg.size();
      write_csv_file(out_dir / (stem + "_avg.csv"), avg);
      sum.files.push_back(stem + "_avg.csv");
      if (rows.size() > 1) {
        write_csv_file(out_dir / (stem + "_std.csv"), sd);
        sum.files.push_back(stem + "_std.csv");
      }
    }
    const bool all_hit =
        !sum.epochs_to_threshold.empty() &&
        std::all_of(sum.epochs_to_threshold.begin(), sum.epochs_to_threshold.end(),
                    [](const auto& e) { return e.has_value(); });
    if (all_hit) {
      double s = 0.0;
      for (const auto& e : sum.epochs_to_threshold) s += *e;
      sum.mean_epochs_to_threshold = s / static_cast<double>(sum.epochs_to_threshold.size());
    }
    summary.solvers.push_back(std::move(sum));
  }

  json j;
  j["reference"] = {{"objective", ref.objective},
                    {"residual", ref.residual},
                    {"converged", ref.converged},
                    {"from_cache", summary.reference_from_cache}};
  j["solvers"] = json::array();
  for (const SolverSummary& s : summary.solvers) {
    json e;
    e["name"] = s.name;
    e["validation"] = report_json(s.validation);
    json hits = json::array();
    for (const auto& h : s.epochs_to_threshold) hits.push_back(h ? json(*h) : json(nullptr));
    e["epochs_to_threshold"] = hits;
    e["mean_epochs_to_threshold"] =
        s.mean_epochs_to_threshold ? json(*s.mean_epochs_to_threshold) : json(nullptr);
    e["averaged_rows"] = s.averaged_rows;
    e["truncated"] = s.truncated;
    e["diverged"] = s.diverged;
    e["files"] = s.files;
    e["messages"] = s.messages;
    j["solvers"].push_back(e);
  }
  j["exit_code"] = summary.exit_code;
  std::ofstream out(out_dir / "summary.json");
  out << j.dump(2) << '\n';
  return summary;
}

}  // namespace pdfp
