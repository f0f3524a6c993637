#include "tilt/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tilt/errors.hpp"

namespace tilt {

void TimeSeries::validate() const {
  if (!(dt > 0.0)) throw SchemaError("time series dt must be > 0");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double expect = start + static_cast<double>(i) * dt;
    if (std::abs(records[i].t - expect) > 1e-9)
      throw SchemaError("non-uniform sampling at record " + std::to_string(i));
  }
}

std::vector<double> TimeSeries::phi() const {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].phi;
  return v;
}

std::vector<double> TimeSeries::gyro() const {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].gyro;
  return v;
}

std::vector<double> TimeSeries::ax() const {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].ax;
  return v;
}

std::vector<double> TimeSeries::ay() const {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].ay;
  return v;
}

std::vector<double> TimeSeries::theta_true_or_empty() const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) {
    if (!r.theta_true) return {};
    v.push_back(*r.theta_true);
  }
  return v;
}

std::vector<double> TimeSeries::times() const {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].t;
  return v;
}

void NoiseSpec::validate() const {
  if (gyro_bias_walk_std < 0 || gyro_white_std < 0 || accel_white_std < 0 ||
      vibration_amp < 0 || encoder_noise_std < 0 || encoder_quantum < 0)
    throw UsageError("noise magnitudes must be >= 0");
}

double accel_angle(double ax, double ay) {
  if (ax == 0.0 && ay == 0.0)
    throw NumericError("accel_angle: gravity direction undefined for (0, 0)");
  return std::atan2(ax, ay);
}

TimeSeries synthesize_sensors(const SimTrajectory& truth,
                              const PendulumParams& p, const NoiseSpec& noise) {
  noise.validate();
  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Draw order is fixed: vibration phases for ax, then ay, then the
  // per-sample stream. Changing it would silently change seeded outputs.
  const std::size_t nf = noise.vibration_freqs.size();
  std::vector<double> ph_ax(nf), ph_ay(nf);
  for (auto& v : ph_ax) v = phase(rng);
  for (auto& v : ph_ay) v = phase(rng);
  const double per_tone = nf > 0 ? noise.vibration_amp / static_cast<double>(nf) : 0.0;

  const double dt = truth.dt;
  const double walk_step = noise.gyro_bias_walk_std * std::sqrt(dt);

  TimeSeries out;
  out.dt = dt;
  out.start = truth.start;
  out.records.reserve(truth.states.size());

  double bias = noise.gyro_bias;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const auto& s : truth.states) {
    SampleRecord r;
    r.t = s.t;
    r.theta_true = s.theta;

    double phi = s.phi;
    if (noise.encoder_quantum > 0.0)
      phi = std::round(phi / noise.encoder_quantum) * noise.encoder_quantum;
    if (noise.encoder_noise_std > 0.0) phi += noise.encoder_noise_std * gauss(rng);
    r.phi = phi;

    double gy = s.theta_dot + bias;
    if (noise.gyro_white_std > 0.0) gy += noise.gyro_white_std * gauss(rng);
    r.gyro = gy;
    if (walk_step > 0.0) bias += walk_step * gauss(rng);

    double vib_x = 0.0, vib_y = 0.0;
    for (std::size_t j = 0; j < nf; ++j) {
      const double w = two_pi * noise.vibration_freqs[j] * s.t;
      vib_x += per_tone * std::sin(w + ph_ax[j]);
      vib_y += per_tone * std::sin(w + ph_ay[j]);
    }
    double ax = p.g * std::sin(s.theta) + vib_x;
    double ay = p.g * std::cos(s.theta) + vib_y;
    if (noise.accel_white_std > 0.0) {
      ax += noise.accel_white_std * gauss(rng);
      ay += noise.accel_white_std * gauss(rng);
    }
    r.ax = ax;
    r.ay = ay;
    out.records.push_back(r);
  }
  return out;
}

FirFilter design_fir(int order, double cutoff_hz, double sample_rate_hz) {
  if (order < 2 || order % 2 != 0)
    throw UsageError("design_fir: order must be even and >= 2");
  if (!(sample_rate_hz > 0.0))
    throw UsageError("design_fir: sample rate must be > 0");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * sample_rate_hz)
    throw UsageError("design_fir: cutoff must lie in (0, fs/2)");

  FirFilter f;
  f.order = order;
  f.cutoff_hz = cutoff_hz;
  f.sample_rate_hz = sample_rate_hz;
  f.taps.resize(static_cast<std::size_t>(order) + 1);

  // compute one half and mirror so symmetry holds exactly
  const double fc = 2.0 * cutoff_hz / sample_rate_hz;  // cycles/sample * 2
  const double half = static_cast<double>(order) / 2.0;
  for (int n = 0; n <= order / 2; ++n) {
    const double m = static_cast<double>(n) - half;
    const double sinc =
        (m == 0.0) ? fc : std::sin(std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
    f.taps[static_cast<std::size_t>(n)] = sinc * window;
    f.taps[static_cast<std::size_t>(order - n)] = sinc * window;
  }
  double sum = 0.0;
  for (double t : f.taps) sum += t;
  for (auto& t : f.taps) t /= sum;
  return f;
}

FilterResult apply_fir(const FirFilter& f, std::span<const double> x,
                       FilterMode mode) {
  if (x.size() <= f.taps.size())
    throw UsageError("apply_fir: input shorter than the filter");
  FilterResult res;
  res.y.resize(x.size());
  if (mode == FilterMode::causal) {
    kernels::omp::fir_causal(f.taps, x, res.y);
    res.group_delay_samples = f.order / 2;
    return res;
  }
  // forward-backward pass: zero net delay for offline analysis
  std::vector<double> tmp(x.size());
  kernels::omp::fir_causal(f.taps, x, tmp);
  std::reverse(tmp.begin(), tmp.end());
  kernels::omp::fir_causal(f.taps, tmp, res.y);
  std::reverse(res.y.begin(), res.y.end());
  res.group_delay_samples = 0;
  return res;
}

double windowed_gyro_diff(std::span<const double> g, std::size_t k,
                          std::size_t w, double dt) {
  if (w < 1) throw UsageError("windowed_gyro_diff: window must be >= 1");
  if (!(dt > 0.0)) throw UsageError("windowed_gyro_diff: dt must be > 0");
  if (k < w)
    throw UsageError("windowed_gyro_diff: insufficient history (k < w)");
  if (k >= g.size()) throw UsageError("windowed_gyro_diff: index out of range");
  return (g[k] - g[k - w]) / (dt * static_cast<double>(w));
}

std::vector<double> windowed_gyro_diff_series(std::span<const double> g,
                                              std::size_t w, double dt) {
  if (w < 1) throw UsageError("windowed_gyro_diff: window must be >= 1");
  if (!(dt > 0.0)) throw UsageError("windowed_gyro_diff: dt must be > 0");
  std::vector<double> out(g.size());
  kernels::omp::windowed_diff(g, w, dt, out);
  return out;
}

std::vector<double> finite_diff1(std::span<const double> x, double dt,
                                 DiffScheme scheme) {
  if (x.size() < 3) throw UsageError("finite_diff1: need at least 3 samples");
  if (!(dt > 0.0)) throw UsageError("finite_diff1: dt must be > 0");
  std::vector<double> out(x.size());
  kernels::omp::diff1(x, dt, scheme, out);
  return out;
}

std::vector<double> finite_diff2(std::span<const double> x, double dt,
                                 DiffScheme scheme) {
  if (x.size() < 3) throw UsageError("finite_diff2: need at least 3 samples");
  if (!(dt > 0.0)) throw UsageError("finite_diff2: dt must be > 0");
  std::vector<double> out(x.size());
  kernels::omp::diff2(x, dt, scheme, out);
  return out;
}

}  // namespace tilt
