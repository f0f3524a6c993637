// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference under kernels::ref and an OpenMP version under kernels::omp.
// The omp variants parallelize only across independent output elements,
// so both variants produce bitwise-identical results; tests enforce that
// and bench/ compares their throughput.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tilt::kernels {

enum class DiffScheme { central, backward };

// Per-sample inversion y[i] = phi[i] + asin_sat(a*pd[i] + b*pdd[i] + c*gd[i]) + n*gk[i].
// gd/gk may be empty (term dropped). Out-of-range asin arguments saturate to
// +/- pi/2 and raise flag[i].
struct EstimateMapArgs {
  std::span<const double> phi;
  std::span<const double> phi_dot;
  std::span<const double> phi_ddot;
  std::span<const double> gd;  // empty => term absent
  std::span<const double> gk;  // empty => term absent
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double n = 0.0;
};

namespace ref {

void fir_causal(std::span<const double> taps, std::span<const double> x,
                std::span<double> y);

// First derivative; endpoints fall back to one-sided stencils.
void diff1(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out);

// Second derivative; samples without history reuse the nearest full stencil.
void diff2(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out);

// out[k] = (g[k] - g[k-w]) / (dt*w) for k >= w; earlier entries are NaN.
void windowed_diff(std::span<const double> g, std::size_t w, double dt,
                   std::span<double> out);

void estimate_map(const EstimateMapArgs& args, std::span<double> theta_est,
                  std::span<std::uint8_t> clamped);

}  // namespace ref

namespace omp {

void fir_causal(std::span<const double> taps, std::span<const double> x,
                std::span<double> y);
void diff1(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out);
void diff2(std::span<const double> x, double dt, DiffScheme scheme,
           std::span<double> out);
void windowed_diff(std::span<const double> g, std::size_t w, double dt,
                   std::span<double> out);
void estimate_map(const EstimateMapArgs& args, std::span<double> theta_est,
                  std::span<std::uint8_t> clamped);

}  // namespace omp

}  // namespace tilt::kernels
