#include "tilt/kernels.hpp"

#include <cassert>
#include <cmath>

// The serial bodies are the reference; the omp variants repeat the same
// per-element arithmetic under `parallel for` so results stay bitwise equal.
// Reductions are deliberately never parallelized.

namespace tilt::kernels {

namespace {

inline double fir_at(std::span<const double> taps, std::span<const double> x,
                     std::size_t k) {
  const std::size_t imax = std::min(k, taps.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i <= imax; ++i) acc += taps[i] * x[k - i];
  return acc;
}

inline double diff1_at(std::span<const double> x, double dt, DiffScheme s,
                       std::size_t k) {
  const std::size_t n = x.size();
  if (s == DiffScheme::central) {
    if (k == 0) return (x[1] - x[0]) / dt;
    if (k == n - 1) return (x[n - 1] - x[n - 2]) / dt;
    return (x[k + 1] - x[k - 1]) / (2.0 * dt);
  }
  if (k == 0) return (x[1] - x[0]) / dt;
  return (x[k] - x[k - 1]) / dt;
}

inline double diff2_at(std::span<const double> x, double dt, DiffScheme s,
                       std::size_t k) {
  const std::size_t n = x.size();
  const double dt2 = dt * dt;
  if (s == DiffScheme::central) {
    const std::size_t m = (k == 0) ? 1 : (k == n - 1 ? n - 2 : k);
    return (x[m + 1] - 2.0 * x[m] + x[m - 1]) / dt2;
  }
  const std::size_t m = (k < 2) ? 2 : k;
  return (x[m] - 2.0 * x[m - 1] + x[m - 2]) / dt2;
}

constexpr double kHalfPi = 1.5707963267948966;

inline double estimate_at(const EstimateMapArgs& a, std::size_t i,
                          std::uint8_t& flag) {
  double arg = a.a * a.phi_dot[i] + a.b * a.phi_ddot[i];
  if (!a.gd.empty()) arg += a.c * a.gd[i];
  double asin_val;
  if (arg > 1.0) {
    asin_val = kHalfPi;
    flag = 1;
  } else if (arg < -1.0) {
    asin_val = -kHalfPi;
    flag = 1;
  } else {
    asin_val = std::asin(arg);
    flag = 0;
  }
  double out = a.phi[i] + asin_val;
  if (!a.gk.empty()) out += a.n * a.gk[i];
  return out;
}

}  // namespace

namespace ref {

void fir_causal(std::span<const double> taps, std::span<const double> x,
                std::span<double> y) {
  assert(y.size() == x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = fir_at(taps, x, k);
}

void diff1(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out) {
  assert(out.size() == x.size() && x.size() >= 2);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = diff1_at(x, dt, scheme, k);
}

void diff2(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out) {
  assert(out.size() == x.size() && x.size() >= 3);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = diff2_at(x, dt, scheme, k);
}

void windowed_diff(std::span<const double> g, std::size_t w, double dt,
                   std::span<double> out) {
  assert(out.size() == g.size() && w >= 1);
  const double nan = std::nan("");
  const double denom = dt * static_cast<double>(w);
  for (std::size_t k = 0; k < g.size(); ++k)
    out[k] = (k < w) ? nan : (g[k] - g[k - w]) / denom;
}

void estimate_map(const EstimateMapArgs& args, std::span<double> theta_est,
                  std::span<std::uint8_t> clamped) {
  assert(theta_est.size() == args.phi.size());
  assert(clamped.size() == args.phi.size());
  for (std::size_t i = 0; i < args.phi.size(); ++i)
    theta_est[i] = estimate_at(args, i, clamped[i]);
}

}  // namespace ref

namespace omp {

void fir_causal(std::span<const double> taps, std::span<const double> x,
                std::span<double> y) {
  assert(y.size() == x.size());
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::int64_t k = 0; k < n; ++k)
    y[static_cast<std::size_t>(k)] = fir_at(taps, x, static_cast<std::size_t>(k));
}

void diff1(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out) {
  assert(out.size() == x.size() && x.size() >= 2);
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::int64_t k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] =
        diff1_at(x, dt, scheme, static_cast<std::size_t>(k));
}

void diff2(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out) {
  assert(out.size() == x.size() && x.size() >= 3);
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::int64_t k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] =
        diff2_at(x, dt, scheme, static_cast<std::size_t>(k));
}

void windowed_diff(std::span<const double> g, std::size_t w, double dt,
                   std::span<double> out) {
  assert(out.size() == g.size() && w >= 1);
  const double nan = std::nan("");
  const double denom = dt * static_cast<double>(w);
  const std::int64_t n = static_cast<std::int64_t>(g.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out[ku] = (ku < w) ? nan : (g[ku] - g[ku - w]) / denom;
  }
}

void estimate_map(const EstimateMapArgs& args, std::span<double> theta_est,
                  std::span<std::uint8_t> clamped) {
  assert(theta_est.size() == args.phi.size());
  assert(clamped.size() == args.phi.size());
  const std::int64_t n = static_cast<std::int64_t>(args.phi.size());
#pragma omp parallel for schedule(static) if (n > 8192)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    theta_est[iu] = estimate_at(args, iu, clamped[iu]);
  }
}

}  // namespace omp

}  // namespace tilt::kernels
