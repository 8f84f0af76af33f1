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

#include "pdfp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace pdfp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  os << kTraceCsvHeader << '\n';
  for (const TraceRow& r : rows) {
    os << r.stage << ',' << format_double(r.epochs) << ',' << opt(r.seconds)
       << ',' << format_double(r.objective) << ',' << opt(r.rel_err) << ','
       << opt(r.r_value) << ',' << opt(r.psnr) << ',' << opt(r.test_loss)
       << '\n';
  }
}

double full_lipschitz_estimate(const FiniteSum& f) {
  const RowMatrix& a = f.samples();
  std::mt19937_64 rng(0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(f.d());
  for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
  u.normalize();
  double rayleigh = 0.0;
  for (int k = 0; k < kDefaultPowerIters; ++k) {
    const Vector au = a * u;
    rayleigh = au.squaredNorm();
    const Vector w = a.transpose() * au;
    const double nrm = w.norm();
    if (nrm == 0.0) break;
    u = w / nrm;
  }
  double l = kSpectralSafety * rayleigh / static_cast<double>(f.n());
  if (f.kind() != FiniteSum::Kind::LeastSquares) l *= 0.25;
  l += 2.0 * f.ridge();
  // Never claim more smoothness than the per-sample bound certifies.
  return std::min(std::max(l, 1e-300), f.lipschitz_max());
}

ReferenceSolution make_reference(const ProblemSpec& p, Vector x, Vector v) {
  ReferenceSolution ref;
  ref.f_value = p.f.value(x);
  ref.grad = p.f.full_grad(x);
  ref.bx = p.B.apply(x);
  ref.objective = ref.f_value + p.g.value(ref.bx);
  ref.gstar = p.g.conj_value(v);
  ref.x = std::move(x);
  ref.v = std::move(v);
  return ref;
}

ReferenceSolution compute_reference(const ProblemSpec& p,
                                    const ReferenceOptions& opts) {
  if (opts.iters < 1) throw ParameterError("reference needs iters >= 1");
  SolverParams params;
  params.variant = Variant::Pdfp;
  params.gamma = opts.gamma > 0.0 ? opts.gamma
                                  : 1.0 / full_lipschitz_estimate(p.f);
  if (opts.lambda > 0.0) {
    params.lambda = opts.lambda;
  } else {
    const SpectralEstimate rho = spectral_bound(p.B);
    params.lambda = rho.zero_operator ? 1.0 : 1.0 / rho.value;
  }
  params.stages = opts.iters;

  RunOptions ro;
  ro.record_every = opts.iters;
  // The default gamma comes from the full-sum smoothness, which may exceed the
  // per-sample surrogate used for stochastic step validation.
  ro.require_valid = opts.gamma > 0.0;
  const RunTrace trace = run_pdfp(p, params, Vector::Zero(p.f.d()),
                                  Vector::Zero(p.B.out_dim()), opts.iters, ro);
  ReferenceSolution ref = make_reference(p, trace.x, trace.v);
  ref.residual = trace.residuals.empty() ? 0.0 : trace.residuals.back();
  ref.converged = !trace.diverged && ref.residual <= kReferenceTolerance;
  return ref;
}

double conj_bregman(const ProblemSpec& p, const ReferenceSolution& ref,
                    const Vector& v, double tol) {
  const double gv = p.g.conj_value(v, tol);
  if (std::isinf(gv)) return kInf;
  return gv - ref.gstar - ref.bx.dot(v - ref.v);
}

double r_value(const ProblemSpec& p, const ReferenceSolution& ref,
               const Vector& x, const Vector& v) {
  const double dg = conj_bregman(p, ref, v);
  if (std::isinf(dg)) return kInf;
  const double df = p.f.value(x) - ref.f_value - ref.grad.dot(x - ref.x);
  return df + dg;
}

double relative_objective_error(const ProblemSpec& p,
                                const ReferenceSolution& ref, const Vector& x,
                                std::size_t* clamped_count) {
  const double rel = (p.objective(x) - ref.objective) /
                     std::max(std::abs(ref.objective), kRelErrFloor);
  if (rel < 0.0) {
    if (clamped_count) ++*clamped_count;
    return 0.0;
  }
  return rel;
}

double psnr(const Vector& reconstruction, const Vector& truth,
            std::optional<double> peak) {
  check_size("psnr", truth.size(), reconstruction.size());
  if (truth.size() == 0) throw ParameterError("psnr of empty images");
  const double pk = peak ? *peak : truth.maxCoeff();
  if (!(pk > 0.0)) throw ParameterError("psnr peak must be positive");
  const double mse =
      (reconstruction - truth).squaredNorm() / static_cast<double>(truth.size());
  if (mse == 0.0) return kPsnrSentinel;
  return 10.0 * std::log10(pk * pk / mse);
}

double test_loss(const FiniteSum& f_test, const Vector& x) {
  return f_test.logistic_loss(x);
}

}  // namespace pdfp
