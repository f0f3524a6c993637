// Synthetic sensor generation, the accelerometer angle baseline, FIR
// conditioning, and the discrete derivative operators.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tilt/dynamics.hpp"
#include "tilt/kernels.hpp"

namespace tilt {

using kernels::DiffScheme;

struct SampleRecord {
  double t = 0.0;
  std::optional<double> theta_true;
  double phi = 0.0;   // pendulum encoder [rad]
  double gyro = 0.0;  // body rate [rad/s]
  double ax = 0.0;    // accelerometer x [m/s^2]
  double ay = 0.0;    // accelerometer y [m/s^2]
};

struct TimeSeries {
  double dt = 0.0;
  double start = 0.0;
  std::vector<SampleRecord> records;

  std::size_t size() const { return records.size(); }
  // Enforces uniform sampling: record i sits at start + i*dt within 1e-9 s.
  void validate() const;

  std::vector<double> phi() const;
  std::vector<double> gyro() const;
  std::vector<double> ax() const;
  std::vector<double> ay() const;
  // Empty when any record lacks truth.
  std::vector<double> theta_true_or_empty() const;
  std::vector<double> times() const;
};

struct NoiseSpec {
  double gyro_bias = 0.0;           // constant bias [rad/s]
  double gyro_bias_walk_std = 0.0;  // random-walk intensity [rad/s per sqrt(s)]
  double gyro_white_std = 0.0;      // [rad/s]
  double accel_white_std = 0.0;     // [m/s^2]
  double vibration_amp = 0.0;       // total sinusoidal amplitude [m/s^2]
  std::vector<double> vibration_freqs = {37.0, 90.0, 180.0};  // [Hz]
  double encoder_noise_std = 0.0;   // [rad]
  double encoder_quantum = 0.0;     // quantization step [rad], 0 disables
  std::uint64_t seed = 0;

  void validate() const;
};

struct FirFilter {
  std::vector<double> taps;  // order+1 entries, symmetric, unit DC gain
  int order = 0;
  double cutoff_hz = 0.0;
  double sample_rate_hz = 0.0;
};

enum class FilterMode { causal, zero_phase };

struct FilterResult {
  std::vector<double> y;
  int group_delay_samples = 0;  // 0 in zero_phase mode
};

// Quadrant-aware tilt from the gravity components; errors when both are zero.
double accel_angle(double ax, double ay);

// Emulates the rig sensors over a simulated trajectory. Deterministic for a
// fixed seed: encoder quantization then additive noise, gyro bias random walk,
// per-channel vibration sinusoids with seeded random phases.
TimeSeries synthesize_sensors(const SimTrajectory& truth,
                              const PendulumParams& p, const NoiseSpec& noise);

// Hamming windowed-sinc low-pass, normalized to unit DC gain.
FirFilter design_fir(int order, double cutoff_hz, double sample_rate_hz);

FilterResult apply_fir(const FirFilter& f, std::span<const double> x,
                       FilterMode mode);

// (g[k] - g[k-w]) / (dt*w); requires k >= w.
double windowed_gyro_diff(std::span<const double> g, std::size_t k,
                          std::size_t w, double dt);

// Whole-series variant; entries before index w are NaN.
std::vector<double> windowed_gyro_diff_series(std::span<const double> g,
                                              std::size_t w, double dt);

std::vector<double> finite_diff1(std::span<const double> x, double dt,
                                 DiffScheme scheme);
std::vector<double> finite_diff2(std::span<const double> x, double dt,
                                 DiffScheme scheme);

}  // namespace tilt
