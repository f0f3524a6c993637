#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "helpers.hpp"
#include "tilt/errors.hpp"
#include "tilt/sensors.hpp"

using namespace tilt;
using testutil::simulate_from_equilibrium;

namespace {

const PendulumParams kDefault{};

// DTFT magnitude of the taps at frequency f
double fir_gain(const FirFilter& f, double freq_hz) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * freq_hz / f.sample_rate_hz;
  for (std::size_t n = 0; n < f.taps.size(); ++n)
    acc += f.taps[n] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(n)));
  return std::abs(acc);
}

// least-squares amplitude of a sinusoid at freq_hz over [from, to)
double fit_amplitude(const std::vector<double>& y, double fs, double freq_hz,
                     std::size_t from, std::size_t to) {
  double ss = 0, sc = 0, scc = 0, sss = 0, ssc = 0;
  for (std::size_t k = from; k < to; ++k) {
    const double t = static_cast<double>(k) / fs;
    const double s = std::sin(2.0 * std::numbers::pi * freq_hz * t);
    const double c = std::cos(2.0 * std::numbers::pi * freq_hz * t);
    ss += s * y[k];
    sc += c * y[k];
    sss += s * s;
    scc += c * c;
    ssc += s * c;
  }
  // solve the 2x2 normal equations
  const double det = sss * scc - ssc * ssc;
  const double a = (ss * scc - sc * ssc) / det;
  const double b = (sc * sss - ss * ssc) / det;
  return std::hypot(a, b);
}

}  // namespace

TEST_CASE("accel_angle basics") {
  CHECK(accel_angle(0.0, 9.81) == 0.0);
  CHECK(accel_angle(6.937, 6.937) == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
  // inverse check: components generated from a known 30-degree tilt
  const double th = M_PI / 6.0;
  CHECK(accel_angle(9.81 * std::sin(th), 9.81 * std::cos(th)) ==
        doctest::Approx(th).epsilon(1e-12));
  // quadrant-aware range (-pi, pi]
  CHECK(accel_angle(0.0, -9.81) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(accel_angle(0.0, 0.0), NumericError);
}

TEST_CASE("noiseless synthesis reproduces the simulation exactly") {
  const auto prof = sigmoid_profile(0.3, 2.0, 1.0);
  const auto traj = simulate_from_equilibrium(kDefault, prof, 1e-3, 2.0);
  NoiseSpec noise;  // all zero
  const auto series = synthesize_sensors(traj, kDefault, noise);
  REQUIRE(series.size() == traj.states.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& r = series.records[i];
    const auto& s = traj.states[i];
    CHECK(r.phi == s.phi);
    CHECK(r.gyro == s.theta_dot);
    CHECK(std::abs(accel_angle(r.ax, r.ay) - s.theta) < 1e-12);
    CHECK(*r.theta_true == s.theta);
  }
}

TEST_CASE("synthesis is deterministic for a fixed seed") {
  const auto prof = sigmoid_profile(0.3, 2.0, 1.0);
  const auto traj = simulate_from_equilibrium(kDefault, prof, 1e-3, 1.0);
  NoiseSpec noise;
  noise.seed = 42;
  noise.vibration_amp = 2.0;
  noise.gyro_white_std = 1e-3;
  noise.encoder_noise_std = 1e-4;
  noise.gyro_bias_walk_std = 1e-4;
  const auto a = synthesize_sensors(traj, kDefault, noise);
  const auto b = synthesize_sensors(traj, kDefault, noise);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].phi == b.records[i].phi);
    CHECK(a.records[i].gyro == b.records[i].gyro);
    CHECK(a.records[i].ax == b.records[i].ax);
    CHECK(a.records[i].ay == b.records[i].ay);
  }
}

TEST_CASE("constant gyro bias shifts every sample") {
  const auto prof = TiltProfile::constant(0.1);
  const auto traj = simulate_pendulum(kDefault, prof, 0.1, 0.0, 1e-3, 0.5);
  NoiseSpec noise;
  noise.gyro_bias = 0.01;
  const auto series = synthesize_sensors(traj, kDefault, noise);
  for (std::size_t i = 0; i < series.size(); ++i)
    CHECK(series.records[i].gyro - traj.states[i].theta_dot ==
          doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("encoder quantization applies before additive noise") {
  const auto prof = TiltProfile::constant(0.1);
  const auto traj = simulate_pendulum(kDefault, prof, 0.1234, 0.0, 1e-3, 0.1);
  NoiseSpec noise;
  noise.encoder_quantum = 0.01;
  const auto series = synthesize_sensors(traj, kDefault, noise);
  for (const auto& r : series.records) {
    const double steps = r.phi / 0.01;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
}

TEST_CASE("fir design: normalization, symmetry, stopband") {
  const auto f = design_fir(50, 20.0, 1000.0);
  REQUIRE(f.taps.size() == 51);
  double sum = 0.0;
  for (double t : f.taps) sum += t;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  for (std::size_t i = 0; i < f.taps.size(); ++i)
    CHECK(f.taps[i] == f.taps[f.taps.size() - 1 - i]);
  // stopband attenuation at 100 Hz, evaluated through the transfer function
  const double att_db = 20.0 * std::log10(fir_gain(f, 100.0));
  CHECK(att_db <= -40.0);

  CHECK_THROWS_AS(design_fir(51, 20.0, 1000.0), UsageError);
  CHECK_THROWS_AS(design_fir(50, 500.0, 1000.0), UsageError);
  CHECK_THROWS_AS(design_fir(0, 20.0, 1000.0), UsageError);
}

TEST_CASE("fir application: dc, impulse, passband sine") {
  const auto f = design_fir(50, 20.0, 1000.0);

  std::vector<double> dc(400, 3.7);
  const auto yd = apply_fir(f, dc, FilterMode::causal);
  CHECK(yd.group_delay_samples == 25);
  for (std::size_t k = 100; k < yd.y.size(); ++k)
    CHECK(yd.y[k] == doctest::Approx(3.7).epsilon(1e-12));

  std::vector<double> imp(200, 0.0);
  imp[0] = 1.0;
  const auto yi = apply_fir(f, imp, FilterMode::causal);
  for (std::size_t k = 0; k < f.taps.size(); ++k)
    CHECK(yi.y[k] == doctest::Approx(f.taps[k]).epsilon(1e-15));

  // 5 Hz sine: the filtered amplitude equals the transfer-function gain.
  // The 51-tap 20 Hz design droops about 3% this deep into the passband.
  const double fs = 1000.0;
  std::vector<double> sine(2000);
  for (std::size_t k = 0; k < sine.size(); ++k)
    sine[k] = std::sin(2.0 * std::numbers::pi * 5.0 * static_cast<double>(k) / fs);
  const auto ys = apply_fir(f, sine, FilterMode::causal);
  const double amp = fit_amplitude(ys.y, fs, 5.0, 200, 2000);
  const double gain = fir_gain(f, 5.0);
  CHECK(gain == doctest::Approx(0.96898).epsilon(1e-3));
  CHECK(amp == doctest::Approx(gain).epsilon(2e-3));

  std::vector<double> too_short(f.taps.size(), 0.0);
  CHECK_THROWS_AS(apply_fir(f, too_short, FilterMode::causal), UsageError);
}

TEST_CASE("zero-phase mode has no lag on an in-band sine") {
  const auto f = design_fir(50, 20.0, 1000.0);
  std::vector<double> sine(2000);
  for (std::size_t k = 0; k < sine.size(); ++k)
    sine[k] = std::sin(2.0 * std::numbers::pi * 5.0 * static_cast<double>(k) / 1000.0);
  const auto y = apply_fir(f, sine, FilterMode::zero_phase);
  CHECK(y.group_delay_samples == 0);
  // peak cross-correlation lag must be zero samples
  double best = -1e300;
  int best_lag = -999;
  for (int lag = -50; lag <= 50; ++lag) {
    double acc = 0.0;
    for (std::size_t k = 300; k < 1700; ++k)
      acc += y.y[k] * sine[static_cast<std::size_t>(static_cast<int>(k) - lag)];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("windowed gyro derivative") {
  std::vector<double> constant(20, 0.7);
  CHECK(windowed_gyro_diff(constant, 10, 3, 0.1) == 0.0);

  const std::vector<double> ramp{0.0, 0.1, 0.2, 0.3};
  CHECK(windowed_gyro_diff(ramp, 3, 2, 0.1) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(windowed_gyro_diff(ramp, 1, 2, 0.1), UsageError);
  CHECK_THROWS_AS(windowed_gyro_diff(ramp, 3, 0, 0.1), UsageError);
}

TEST_CASE("windowed derivative of a sine tracks the midpoint derivative") {
  // The window average equals the central difference at the window midpoint;
  // for a 1 Hz sine, w=10, dt=1e-3 the residual bound is
  // (1 - sinc(w*dt*pi)) * 2*pi = 1.034e-3.
  const double dt = 1e-3, w = 10;
  std::vector<double> g(2000);
  for (std::size_t k = 0; k < g.size(); ++k)
    g[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) * dt);
  const auto gd = windowed_gyro_diff_series(g, 10, dt);
  double max_err = 0.0;
  for (std::size_t k = 500; k < 1500; ++k) {
    const double tm = (static_cast<double>(k) - w / 2.0) * dt;
    const double ref = 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * tm);
    max_err = std::max(max_err, std::abs(gd[k] - ref));
  }
  CHECK(max_err < 1.05e-3);
}

TEST_CASE("windowed derivative with w=1 equals the backward difference") {
  std::vector<double> x(50);
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = std::sin(0.3 * static_cast<double>(k)) + 0.1 * static_cast<double>(k);
  const auto gd = windowed_gyro_diff_series(x, 1, 0.01);
  const auto bd = finite_diff1(x, 0.01, DiffScheme::backward);
  for (std::size_t k = 1; k < x.size(); ++k) CHECK(gd[k] == bd[k]);
}

TEST_CASE("finite differences are exact on low-degree polynomials") {
  const double dt = 0.01;
  std::vector<double> lin(50), quad(50), affine(50);
  for (std::size_t k = 0; k < 50; ++k) {
    const double t = static_cast<double>(k) * dt;
    lin[k] = 2.5 * t - 1.0;
    quad[k] = 3.0 * t * t;
    affine[k] = 7.0 - 4.0 * t;
  }
  for (auto scheme : {DiffScheme::central, DiffScheme::backward}) {
    const auto d1 = finite_diff1(lin, dt, scheme);
    for (std::size_t k = 1; k + 1 < d1.size(); ++k)
      CHECK(d1[k] == doctest::Approx(2.5).epsilon(1e-10));
    const auto z = finite_diff1(std::vector<double>(50, 4.0), dt, scheme);
    for (double v : z) CHECK(v == 0.0);
    const auto d2a = finite_diff2(affine, dt, scheme);
    for (double v : d2a) CHECK(std::abs(v) < 1e-9);
    const auto d2q = finite_diff2(quad, dt, scheme);
    for (std::size_t k = 2; k + 1 < d2q.size(); ++k)
      CHECK(d2q[k] == doctest::Approx(6.0).epsilon(1e-7));
  }
  // central first difference is exact on quadratics at interior points
  const auto d1q = finite_diff1(quad, dt, DiffScheme::central);
  for (std::size_t k = 1; k + 1 < d1q.size(); ++k)
    CHECK(d1q[k] ==
          doctest::Approx(6.0 * static_cast<double>(k) * dt).epsilon(1e-9));
  CHECK_THROWS_AS(finite_diff1(std::vector<double>{1.0, 2.0}, dt,
                               DiffScheme::central),
                  UsageError);
}

TEST_CASE("second difference resolves a fast sine to 0.1%") {
  const double dt = 1e-4, omega = 9.905;
  std::vector<double> x(20000);
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = std::sin(omega * static_cast<double>(k) * dt);
  const auto d2 = finite_diff2(x, dt, DiffScheme::central);
  for (std::size_t k = 1000; k < 19000; k += 500) {
    const double ref = -omega * omega * std::sin(omega * static_cast<double>(k) * dt);
    CHECK(std::abs(d2[k] - ref) <= 1e-3 * omega * omega);
  }
}

TEST_CASE("derivative operators are linear") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(300), y(300);
  for (auto& v : x) v = dist(rng);
  for (auto& v : y) v = dist(rng);
  const double a = 2.25, b = -0.5;
  std::vector<double> mix(300);
  for (std::size_t k = 0; k < 300; ++k) mix[k] = a * x[k] + b * y[k];
  for (auto scheme : {DiffScheme::central, DiffScheme::backward}) {
    const auto dm = finite_diff1(mix, 1e-3, scheme);
    const auto dx = finite_diff1(x, 1e-3, scheme);
    const auto dy = finite_diff1(y, 1e-3, scheme);
    for (std::size_t k = 0; k < 300; ++k)
      CHECK(dm[k] == doctest::Approx(a * dx[k] + b * dy[k]).epsilon(1e-9));
  }
}
