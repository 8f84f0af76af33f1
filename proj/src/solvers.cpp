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

#include "pdfp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace pdfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_identity_gram(const LinearMap& b) {
  if (b.kind() == LinearMap::Kind::Identity) return true;
  if (b.kind() != LinearMap::Kind::Dense || b.out_dim() > 256) return false;
  const RowMatrix& m = b.matrix();
  const RowMatrix gram = m * m.transpose();
  return (gram - RowMatrix::Identity(gram.rows(), gram.cols()))
             .cwiseAbs()
             .maxCoeff() <= 1e-12;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& s : parts) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

// Shared bookkeeping for every solver: rows, timing, stopping and the
// divergence guard.
class Recorder {
 public:
  Recorder(const ProblemSpec& p, const RunOptions& opts, RunTrace& trace)
      : p_(p),
        opts_(opts),
        trace_(trace),
        start_(std::chrono::steady_clock::now()) {}

  // Returns false when the run must stop.
  bool record(long stage, double epochs, const Vector& x, const Vector& v) {
    TraceRow row;
    row.stage = stage;
    row.epochs = epochs;
    row.objective = p_.objective(x);
    if (opts_.evaluate) opts_.evaluate(x, v, row);
    if (opts_.timing) {
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    }
    if (trace_.rows.empty()) {
      threshold_ =
          kDivergenceFactor * std::max(std::abs(row.objective), 1e-12);
    }
    trace_.rows.push_back(row);
    if (opts_.keep_iterates) {
      trace_.row_x.push_back(x);
      trace_.row_v.push_back(v);
    }

    if (!(row.objective <= threshold_)) {
      if (++violations_ >= kDivergencePatience) {
        trace_.diverged = true;
        std::ostringstream os;
        os << "diverged: objective " << row.objective << " exceeded "
           << threshold_ << " for " << violations_
           << " consecutive records (stage " << stage << ")";
        append_message(os.str());
        return false;
      }
    } else {
      violations_ = 0;
    }
    if (opts_.stop.rel_err_threshold && row.rel_err &&
        *row.rel_err <= *opts_.stop.rel_err_threshold) {
      trace_.reached_threshold = true;
      return false;
    }
    if (opts_.stop.max_epochs && epochs >= *opts_.stop.max_epochs - 1e-12)
      return false;
    return true;
  }

  void append_message(const std::string& msg) {
    if (!trace_.message.empty()) trace_.message += "; ";
    trace_.message += msg;
  }

 private:
  const ProblemSpec& p_;
  const RunOptions& opts_;
  RunTrace& trace_;
  std::chrono::steady_clock::time_point start_;
  double threshold_ = kInf;
  int violations_ = 0;
};

ValidationReport checked(const ProblemSpec& p, SolverParams params,
                         Variant variant, const RunOptions& opts,
                         Recorder& rec) {
  params.variant = variant;
  ValidationReport report = validate_params(p, params);
  if (!report.ok && opts.require_valid)
    throw ParameterError("invalid solver parameters: " + join(report.errors));
  for (const auto& w : report.warnings) rec.append_message("warning: " + w);
  if (!report.ok) rec.append_message("running unvalidated: " + join(report.errors));
  return report;
}

void check_start(const ProblemSpec& p, const Vector& x0, const Vector& v0) {
  check_size("initial primal", p.f.d(), x0.size());
  check_size("initial dual", p.B.out_dim(), v0.size());
}

}  // namespace

ProblemSpec::ProblemSpec(FiniteSum f_in, ProxFn g_in, LinearMap b_in)
    : f(std::move(f_in)), g(std::move(g_in)), B(std::move(b_in)) {
  check_size("ProblemSpec: B.in_dim vs f.d", f.d(), B.in_dim());
  check_size("ProblemSpec: g.dim vs B.out_dim", B.out_dim(), g.dim());
}

double ProblemSpec::objective(const Vector& x) const {
  return f.value(x) + g.value(B.apply(x));
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Pdfp:
      return "pdfp";
    case Variant::Spdfp:
      return "spdfp";
    case Variant::SvrgSc:
      return "svrg_sc";
    case Variant::SvrgGc:
      return "svrg_gc";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "pdfp") return Variant::Pdfp;
  if (name == "spdfp") return Variant::Spdfp;
  if (name == "svrg_sc") return Variant::SvrgSc;
  if (name == "svrg_gc") return Variant::SvrgGc;
  throw ParameterError("unknown solver variant '" + name +
                       "' (expected pdfp, spdfp, svrg_sc or svrg_gc)");
}

double contraction_factor(double mu_f, double gamma, double m_const, Index m,
                          double lambda, double mu_gstar, double rho_min,
                          bool identity_gram) {
  const double md = static_cast<double>(m);
  const double shrink = 1.0 - gamma * m_const;
  double kappa = 1.0 / (mu_f * gamma * shrink * md) +
                 (md + 1.0) * gamma * m_const / (shrink * md);
  if (!identity_gram)
    kappa += gamma * (1.0 - rho_min) / (lambda * mu_gstar * shrink * md);
  return kappa;
}

ValidationReport validate_params(const ProblemSpec& p,
                                 const SolverParams& params) {
  ValidationReport r;
  auto fail = [&](const std::string& msg) {
    if (params.override_steps) {
      r.warnings.push_back(msg + " (overridden)");
    } else {
      r.errors.push_back(msg);
    }
  };

  const SpectralEstimate rho = spectral_bound(p.B);
  r.identity_gram = is_identity_gram(p.B);
  r.rho_max = rho.value;
  // Exact values replace the inflated estimate where they are known.
  if (r.identity_gram) r.rho_max = 1.0;
  if (p.B.kind() == LinearMap::Kind::Grad2D) r.rho_max = std::min(r.rho_max, 8.0);
  r.lambda_max = rho.zero_operator ? kInf : 1.0 / r.rho_max;

  const double beta_hat = 1.0 / p.f.lipschitz_max();
  const bool stochastic = params.variant != Variant::Pdfp;
  const bool svrg = params.variant == Variant::SvrgSc ||
                    params.variant == Variant::SvrgGc;

  if (!(params.gamma > 0.0)) r.errors.push_back("gamma must be positive");
  if (!(params.lambda > 0.0)) r.errors.push_back("lambda must be positive");
  if (params.stages < 1) r.errors.push_back("stage/iteration count must be >= 1");
  if (svrg && params.m < 1) r.errors.push_back("inner loop length m must be >= 1");
  if (params.variant == Variant::Spdfp &&
      !(params.decay >= 0.0 && params.decay <= 1.0))
    r.errors.push_back("decay exponent must lie in [0, 1]");

  const Index n = p.f.n();
  const bool batch_ok =
      params.batch >= 1 && params.batch <= n && n % params.batch == 0;
  if (stochastic && !batch_ok) {
    r.errors.push_back("batch size must divide n (n=" + std::to_string(n) +
                       ", b=" + std::to_string(params.batch) + ")");
  }
  if (svrg && batch_ok) {
    if (n < 2) {
      r.errors.push_back("variance-reduced solvers need n >= 2");
    } else {
      const VarianceConstants vc = variance_constants(p.f, params.batch);
      r.c_b = vc.c_b;
      r.m_const = vc.m;
    }
  }

  switch (params.variant) {
    case Variant::Pdfp:
    case Variant::Spdfp:
      r.gamma_max = 2.0 * beta_hat;
      break;
    case Variant::SvrgSc:
      r.gamma_max = std::min(beta_hat, r.m_const > 0.0 ? 1.0 / r.m_const : kInf);
      break;
    case Variant::SvrgGc:
      r.gamma_max =
          std::min(beta_hat, r.m_const > 0.0 ? 1.0 / (2.0 * r.m_const) : kInf);
      break;
  }

  if (params.gamma > 0.0) {
    const bool strict = params.variant == Variant::Pdfp ||
                        params.variant == Variant::Spdfp;
    if (strict ? params.gamma >= r.gamma_max : params.gamma > r.gamma_max) {
      std::ostringstream os;
      os << "gamma=" << params.gamma << " exceeds admissible bound "
         << r.gamma_max << " (1/L_max=" << beta_hat << ", M=" << r.m_const
         << ")";
      fail(os.str());
    }
  }
  if (params.lambda > r.lambda_max) {
    std::ostringstream os;
    os << "lambda=" << params.lambda << " exceeds 1/rho_max(BB^T)="
       << r.lambda_max;
    fail(os.str());
  }

  if (params.variant == Variant::SvrgSc && params.gamma > 0.0 &&
      params.lambda > 0.0 && params.m >= 1) {
    const double mu_f = p.f.strong_convexity();
    const double mu_g = p.g.conjugate_info().strong_convexity;
    if (mu_f <= 0.0) {
      r.warnings.push_back(
          "f is not strongly convex; the linear rate is not certified");
    }
    if (mu_g <= 0.0 && !r.identity_gram) {
      r.warnings.push_back(
          "g* is not strongly convex and BB^T != I; consider the Huber "
          "smoothing of the L1 penalty");
    }
    if (mu_f > 0.0 && (mu_g > 0.0 || r.identity_gram) &&
        params.gamma * r.m_const < 1.0) {
      r.kappa = contraction_factor(mu_f, params.gamma, r.m_const, params.m,
                                   params.lambda, mu_g, 0.0, r.identity_gram);
    }
  }

  r.ok = r.errors.empty();
  return r;
}

StepResult pdfp_step(const ProblemSpec& p, double gamma, double lambda,
                     const Vector& x, const Vector& v, const Vector& grad) {
  check_size("pdfp_step x", p.f.d(), x.size());
  check_size("pdfp_step v", p.B.out_dim(), v.size());
  check_size("pdfp_step grad", p.f.d(), grad.size());
  const double scale = lambda / gamma;
  const Vector half = x - gamma * grad;
  StepResult r;
  r.y = half - gamma * p.B.adjoint_apply(v);
  r.v = p.g.conj_prox(scale * p.B.apply(r.y) + v, scale);
  r.x = half - gamma * p.B.adjoint_apply(r.v);
  return r;
}

RunTrace run_pdfp(const ProblemSpec& p, const SolverParams& params,
                  const Vector& x0, const Vector& v0, long iters,
                  const RunOptions& opts) {
  check_start(p, x0, v0);
  RunTrace trace;
  Recorder rec(p, opts, trace);
  checked(p, params, Variant::Pdfp, opts, rec);
  if (iters < 1) throw ParameterError("run_pdfp needs iters >= 1");
  const long every = std::max(1L, opts.record_every);

  Vector x = x0, v = v0;
  bool go = rec.record(0, 0.0, x, v);
  trace.residuals.reserve(static_cast<std::size_t>(iters));
  for (long k = 1; go && k <= iters; ++k) {
    StepResult s = pdfp_step(p, params.gamma, params.lambda, x, v,
                             p.f.full_grad(x));
    trace.residuals.push_back((s.x - x).lpNorm<Eigen::Infinity>());
    x = std::move(s.x);
    v = std::move(s.v);
    if (opts.on_inner) opts.on_inner(InnerEvent{k, k, -1, x, v});
    if (k % every == 0 || k == iters)
      go = rec.record(k, static_cast<double>(k), x, v);
  }
  trace.x = std::move(x);
  trace.v = std::move(v);
  return trace;
}

RunTrace run_spdfp(const ProblemSpec& p, const SolverParams& params,
                   const Vector& x0, const Vector& v0, long iters,
                   const RunOptions& opts) {
  check_start(p, x0, v0);
  RunTrace trace;
  Recorder rec(p, opts, trace);
  checked(p, params, Variant::Spdfp, opts, rec);
  if (iters < 1) throw ParameterError("run_spdfp needs iters >= 1");

  const BatchScheme scheme(p.f.n(), params.batch, params.shuffle_seed);
  const Index blocks = scheme.num_blocks();
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<Index> pick(0, blocks - 1);
  const double frac = static_cast<double>(params.batch) /
                      static_cast<double>(p.f.n());

  Vector x = x0, v = v0;
  bool go = rec.record(0, 0.0, x, v);
  for (long k = 1; go && k <= iters; ++k) {
    const double gamma_k =
        params.gamma / std::pow(static_cast<double>(k), params.decay);
    const Index block = pick(rng);
    const Vector grad = blocks == 1 ? p.f.full_grad(x)
                                    : batch_grad(p.f, scheme, block, x);
    StepResult s = pdfp_step(p, gamma_k, params.lambda, x, v, grad);
    x = std::move(s.x);
    v = std::move(s.v);
    if (opts.on_inner) opts.on_inner(InnerEvent{k / blocks, k, block, x, v});
    if (k % blocks == 0 || k == iters)
      go = rec.record(k / blocks, static_cast<double>(k) * frac, x, v);
  }
  trace.x = std::move(x);
  trace.v = std::move(v);
  return trace;
}

namespace {

struct StageResult {
  Vector x_avg;
  Vector v_avg;
  Vector x_last;
  Vector v_last;
};

// m inner steps of the variance-reduced iteration around the snapshot.
StageResult svrg_stage(const ProblemSpec& p, const SolverParams& params,
                       const BatchScheme& scheme, std::mt19937_64& rng,
                       const Vector& snapshot, const Vector& x_start,
                       const Vector& v_start, long stage,
                       const RunOptions& opts) {
  std::uniform_int_distribution<Index> pick(0, scheme.num_blocks() - 1);
  const SvrgAnchor anchor = SvrgAnchor::at(p.f, snapshot);
  Vector x = x_start, v = v_start;
  Vector sum_x = Vector::Zero(x.size());
  Vector sum_v = Vector::Zero(v.size());
  for (Index k = 0; k < params.m; ++k) {
    const Index block = pick(rng);
    const Vector grad = svrg_grad(p.f, anchor, scheme, block, x);
    StepResult s = pdfp_step(p, params.gamma, params.lambda, x, v, grad);
    x = std::move(s.x);
    v = std::move(s.v);
    sum_x += x;
    sum_v += v;
    if (opts.on_inner) opts.on_inner(InnerEvent{stage, k + 1, block, x, v});
  }
  const double md = static_cast<double>(params.m);
  return StageResult{sum_x / md, sum_v / md, std::move(x), std::move(v)};
}

double stage_epochs(const ProblemSpec& p, const SolverParams& params) {
  return (static_cast<double>(p.f.n()) +
          static_cast<double>(params.m) * static_cast<double>(params.batch)) /
         static_cast<double>(p.f.n());
}

}  // namespace

RunTrace run_svrg_pdfp_sc(const ProblemSpec& p, const SolverParams& params,
                          const Vector& x0, const Vector& v0,
                          const RunOptions& opts) {
  check_start(p, x0, v0);
  RunTrace trace;
  Recorder rec(p, opts, trace);
  checked(p, params, Variant::SvrgSc, opts, rec);

  const BatchScheme scheme(p.f.n(), params.batch, params.shuffle_seed);
  std::mt19937_64 rng(params.seed);
  const double per_stage = stage_epochs(p, params);

  Vector xt = x0, vt = v0;
  double epochs = 0.0;
  bool go = rec.record(0, 0.0, xt, vt);
  for (long s = 0; go && s < params.stages; ++s) {
    // Inner state restarts at the previous stage average.
    StageResult r = svrg_stage(p, params, scheme, rng, xt, xt, vt, s, opts);
    xt = std::move(r.x_avg);
    vt = std::move(r.v_avg);
    epochs += per_stage;
    go = rec.record(s + 1, epochs, xt, vt);
  }
  trace.x = std::move(xt);
  trace.v = std::move(vt);
  return trace;
}

RunTrace run_svrg_pdfp_gc(const ProblemSpec& p, const SolverParams& params,
                          const Vector& x0, const Vector& v0,
                          const RunOptions& opts) {
  check_start(p, x0, v0);
  RunTrace trace;
  Recorder rec(p, opts, trace);
  checked(p, params, Variant::SvrgGc, opts, rec);

  const BatchScheme scheme(p.f.n(), params.batch, params.shuffle_seed);
  std::mt19937_64 rng(params.seed);
  const double per_stage = stage_epochs(p, params);

  Vector xt = x0;
  Vector xh = x0, vh = v0;
  Vector sum_x = Vector::Zero(x0.size());
  Vector sum_v = Vector::Zero(v0.size());
  long done = 0;
  double epochs = 0.0;
  bool go = rec.record(0, 0.0, x0, v0);
  for (long s = 0; go && s < params.stages; ++s) {
    // Snapshot at the stage average, inner state from the last iterate.
    StageResult r = svrg_stage(p, params, scheme, rng, xt, xh, vh, s, opts);
    xt = std::move(r.x_avg);
    xh = std::move(r.x_last);
    vh = std::move(r.v_last);
    sum_x += xt;
    sum_v += r.v_avg;
    ++done;
    epochs += per_stage;
    go = rec.record(s + 1, epochs, xt, r.v_avg);
  }
  if (done > 0) {
    trace.x = sum_x / static_cast<double>(done);
    trace.v = sum_v / static_cast<double>(done);
  } else {
    trace.x = x0;
    trace.v = v0;
  }
  return trace;
}

RunTrace run_solver(const ProblemSpec& p, const SolverParams& params,
                    const Vector& x0, const Vector& v0,
                    const RunOptions& opts) {
  switch (params.variant) {
    case Variant::Pdfp:
      return run_pdfp(p, params, x0, v0, params.stages, opts);
    case Variant::Spdfp:
      return run_spdfp(p, params, x0, v0, params.stages, opts);
    case Variant::SvrgSc:
      return run_svrg_pdfp_sc(p, params, x0, v0, opts);
    case Variant::SvrgGc:
      return run_svrg_pdfp_gc(p, params, x0, v0, opts);
  }
  throw ParameterError("unknown variant");
}

}  // namespace pdfp
