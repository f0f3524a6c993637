#include "tilt/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "tilt/errors.hpp"

namespace tilt {

namespace {

void check_aligned(std::span<const double> est, std::span<const double> truth,
                   std::size_t valid_from) {
  if (est.size() != truth.size())
    throw UsageError("metrics: estimate and truth must be aligned");
  if (valid_from >= est.size())
    throw UsageError("metrics: empty valid range");
}

}  // namespace

double rms_error(std::span<const double> est, std::span<const double> truth,
                 std::size_t valid_from) {
  check_aligned(est, truth, valid_from);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = valid_from; k < est.size(); ++k) {
    if (std::isnan(est[k])) continue;
    const double e = est[k] - truth[k];
    acc += e * e;
    ++n;
  }
  if (n == 0) throw UsageError("metrics: no valid samples");
  return std::sqrt(acc / static_cast<double>(n));
}

double max_abs_error(std::span<const double> est,
                     std::span<const double> truth, std::size_t valid_from) {
  check_aligned(est, truth, valid_from);
  double m = 0.0;
  for (std::size_t k = valid_from; k < est.size(); ++k) {
    if (std::isnan(est[k])) continue;
    m = std::max(m, std::abs(est[k] - truth[k]));
  }
  return m;
}

int xcorr_delay_samples(std::span<const double> est,
                        std::span<const double> truth, std::size_t valid_from,
                        double dt, double max_lag_s) {
  check_aligned(est, truth, valid_from);
  if (!(dt > 0.0)) throw UsageError("metrics: dt must be > 0");
  const std::size_t n = est.size() - valid_from;
  const auto L = static_cast<long>(std::llround(max_lag_s / dt));
  const double* e = est.data() + valid_from;
  const double* tr = truth.data() + valid_from;

  double best = -std::numeric_limits<double>::infinity();
  long best_lag = 0;
  for (long lag = -L; lag <= L; ++lag) {
    // overlap of est[k] against truth[k - lag]
    const std::size_t lo_e = lag > 0 ? static_cast<std::size_t>(lag) : 0;
    const std::size_t hi_e = lag < 0 ? n - static_cast<std::size_t>(-lag) : n;
    if (hi_e <= lo_e + 2) continue;
    double se = 0, st = 0;
    std::size_t m = 0;
    for (std::size_t k = lo_e; k < hi_e; ++k) {
      se += e[k];
      st += tr[k - static_cast<std::size_t>(lag)];
      ++m;
    }
    const double me = se / static_cast<double>(m);
    const double mt = st / static_cast<double>(m);
    double num = 0, de = 0, dt2 = 0;
    for (std::size_t k = lo_e; k < hi_e; ++k) {
      const double a = e[k] - me;
      const double b = tr[k - static_cast<std::size_t>(lag)] - mt;
      num += a * b;
      de += a * a;
      dt2 += b * b;
    }
    const double den = std::sqrt(de * dt2);
    if (den <= 0.0) continue;
    const double c = num / den;
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  return static_cast<int>(best_lag);
}

double overshoot(std::span<const double> est, std::span<const double> truth,
                 std::size_t valid_from) {
  check_aligned(est, truth, valid_from);
  double me = -std::numeric_limits<double>::infinity();
  double mt = -std::numeric_limits<double>::infinity();
  for (std::size_t k = valid_from; k < est.size(); ++k) {
    if (!std::isnan(est[k])) me = std::max(me, est[k]);
    mt = std::max(mt, truth[k]);
  }
  return me - mt;
}

SeriesMetrics compute_metrics(std::span<const double> est,
                              std::span<const double> truth,
                              std::size_t valid_from, double dt,
                              std::size_t clamp_count, double max_lag_s) {
  SeriesMetrics m;
  m.rms_rad = rms_error(est, truth, valid_from);
  m.max_abs_rad = max_abs_error(est, truth, valid_from);
  m.delay_samples = xcorr_delay_samples(est, truth, valid_from, dt, max_lag_s);
  m.delay_s = m.delay_samples * dt;
  m.overshoot_rad = overshoot(est, truth, valid_from);
  m.clamp_count = clamp_count;
  std::size_t n = 0;
  for (std::size_t k = valid_from; k < est.size(); ++k)
    if (!std::isnan(est[k])) ++n;
  m.n_valid = n;
  return m;
}

}  // namespace tilt
