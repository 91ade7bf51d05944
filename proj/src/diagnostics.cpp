#include "mhmgt/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mhmgt/errors.hpp"

namespace mhmgt {

EssEstimate effective_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("effective_size needs >= 10 values");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : series) {
    if (!std::isfinite(v)) throw std::invalid_argument("effective_size: non-finite value");
    mean += v;
  }
  mean /= nd;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = series[i] - mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += d[i] * d[i + lag];
    return s / nd;
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return {0.0, true};

  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double rho_even = m == 0 ? 1.0 : autocov(2 * m) / c0;
    const double rho_odd = autocov(2 * m + 1) / c0;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    sum += pair;
    prev = pair;
  }
  const double tau = -1.0 + 2.0 * sum;
  const double cap = 1.5 * nd;
  const double ess = tau > nd / cap ? nd / tau : cap;
  return {ess, false};
}

Vector ess_per_dim(const Matrix& samples) {
  Vector out(samples.cols());
  std::vector<double> col(static_cast<std::size_t>(samples.rows()));
  for (Index k = 0; k < samples.cols(); ++k) {
    for (Index i = 0; i < samples.rows(); ++i) col[i] = samples(i, k);
    out(k) = effective_size(col).ess;
  }
  return out;
}

double mcse(std::span<const double> series) {
  const EssEstimate e = effective_size(series);
  if (e.degenerate) return 0.0;
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(e.ess);
}

CalibrationProfile calibrate(const DifferentiableTarget& target,
                             const Vector& probe, std::size_t n_reps, Rng& rng) {
  if (n_reps < 100) throw std::invalid_argument("calibrate needs n_reps >= 100");
  require_dim(probe.size(), target.dim(), "calibrate probe");
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;

  // Batch evaluations so each timed rep spans at least ~20 µs.
  auto t0 = clock::now();
  sink = sink + target.value(probe);
  const double single = std::chrono::duration<double>(clock::now() - t0).count();
  const std::size_t batch =
      std::clamp<std::size_t>(static_cast<std::size_t>(20e-6 / std::max(single, 1e-9)), 1, 1000);

  std::vector<double> per_eval(n_reps);
  Vector x(probe.size());
  for (std::size_t r = 0; r < n_reps; ++r) {
    for (Index k = 0; k < x.size(); ++k) {
      x(k) = probe(k) + 1e-3 * (1.0 + std::abs(probe(k))) * standard_normal(rng);
    }
    t0 = clock::now();
    for (std::size_t b = 0; b < batch; ++b) sink = sink + target.value(x);
    per_eval[r] = std::chrono::duration<double>(clock::now() - t0).count() /
                  static_cast<double>(batch);
  }
  auto mid = per_eval.begin() + static_cast<std::ptrdiff_t>(n_reps / 2);
  std::nth_element(per_eval.begin(), mid, per_eval.end());
  return {*mid, n_reps};
}

FeeReport fee(const ChainTrace& trace, const CalibrationProfile& calib) {
  if (!(calib.seconds_per_value_eval > 0.0)) {
    throw std::invalid_argument("fee: calibration profile missing");
  }
  FeeReport r;
  r.total = trace.wall_time / calib.seconds_per_value_eval;
  r.per_sample = trace.size() > 0 ? r.total / static_cast<double>(trace.size()) : 0.0;
  r.counters = trace.sampling_cost;
  return r;
}

EfficiencyReport EfficiencyReport::make(double fee_per_nominal,
                                        double sampling_rate, Vector ess) {
  EfficiencyReport r;
  r.fee_per_nominal = fee_per_nominal;
  r.effective_sampling_rate = sampling_rate;
  r.fee_per_effective = fee_per_nominal / sampling_rate;
  r.ess_per_dim = std::move(ess);
  return r;
}

EfficiencyReport efficiency(const ChainTrace& trace,
                            const CalibrationProfile& calib) {
  const FeeReport f = fee(trace, calib);
  Vector ess = ess_per_dim(trace.samples);
  const double rate = ess.mean() / static_cast<double>(trace.size());
  return EfficiencyReport::make(f.per_sample, rate, std::move(ess));
}

double find_mode(const DifferentiableTarget& target, double start) {
  require_dim(target.dim(), 1, "find_mode");
  constexpr int kMaxIter = 200;
  Vector u = Vector::Constant(1, start);
  for (int it = 0; it < kMaxIter; ++it) {
    const EvalResult r = target.evaluate(u, Order::Hessian);
    const double g = (*r.gradient)(0);
    const double h = (*r.hessian)(0, 0);
    if (!(h < 0.0) || !std::isfinite(g)) {
      throw ModeNotFound("mode search left the concave region at u=" +
                         std::to_string(u(0)));
    }
    const double step = -g / h;
    if (std::abs(g) < 1e-10 && std::abs(step) < 1e-8 * (1.0 + std::abs(u(0)))) {
      return u(0);
    }
    u(0) += step;
    if (!std::isfinite(u(0))) break;
  }
  throw ModeNotFound("Newton mode search did not converge from " +
                     std::to_string(start));
}

double mixing_index(const UnivariateTargetWithThird& target, double start) {
  const double mode = find_mode(target, start);
  const EvalResult r = target.evaluate(Vector::Constant(1, mode), Order::Hessian);
  const double tau0 = -(*r.hessian)(0, 0);
  const double kappa0 = target.third_derivative(mode);
  return std::abs(kappa0) * std::pow(tau0, -1.5);
}

}  // namespace mhmgt
