#include "tilt/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "tilt/errors.hpp"

namespace tilt {

namespace {

bool finite(double v) { return std::isfinite(v); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void PendulumParams::validate() const {
  if (!(m_p > 0.0) || !(l_p > 0.0) || !(I_p > 0.0) || !(g > 0.0))
    throw UsageError("pendulum parameters m_p, l_p, I_p, g must be positive");
  if (!(C >= 0.0)) throw UsageError("pendulum damping C must be >= 0");
  if (!(torque_scale() > 0.0))
    throw UsageError("pendulum restoring scale g*l_p*m_p must be positive");
}

void BodyParams::validate() const {
  if (!(m_b > 0.0) || !(I_b > 0.0) || !(l_12 > 0.0) || !(l_bcg > 0.0))
    throw UsageError("body parameters must be positive");
}

TiltProfile TiltProfile::constant(double amplitude) {
  TiltProfile p;
  p.kind_ = ProfileKind::constant;
  p.amplitude_ = amplitude;
  return p;
}

TiltProfile TiltProfile::sigmoid(double amplitude, double rate,
                                 double center_time) {
  if (!(rate > 0.0)) throw UsageError("sigmoid profile rate must be > 0");
  TiltProfile p;
  p.kind_ = ProfileKind::sigmoid;
  p.amplitude_ = amplitude;
  p.rate_ = rate;
  p.center_time_ = center_time;
  return p;
}

TiltProfile TiltProfile::piecewise_linear(double amplitude, double rate,
                                          double center_time) {
  if (!(rate > 0.0)) throw UsageError("ramp profile rate must be > 0");
  TiltProfile p;
  p.kind_ = ProfileKind::piecewise_linear;
  p.amplitude_ = amplitude;
  p.rate_ = rate;
  p.center_time_ = center_time;
  return p;
}

TiltProfile TiltProfile::sampled(std::vector<double> theta, double dt,
                                 double start) {
  if (theta.size() < 3)
    throw UsageError("sampled profile needs at least 3 samples");
  if (!(dt > 0.0)) throw UsageError("sampled profile dt must be > 0");
  TiltProfile p;
  p.kind_ = ProfileKind::sampled;
  p.sample_dt_ = dt;
  p.sample_start_ = start;
  const std::size_t n = theta.size();
  p.samples_dot_.resize(n);
  p.samples_ddot_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m1 = (k == 0) ? 1 : (k == n - 1 ? n - 2 : k);
    p.samples_dot_[k] = (k == 0)       ? (theta[1] - theta[0]) / dt
                        : (k == n - 1) ? (theta[n - 1] - theta[n - 2]) / dt
                                       : (theta[k + 1] - theta[k - 1]) / (2 * dt);
    p.samples_ddot_[k] =
        (theta[m1 + 1] - 2 * theta[m1] + theta[m1 - 1]) / (dt * dt);
  }
  p.samples_ = std::move(theta);
  return p;
}

double TiltProfile::interp(const std::vector<double>& v, double t) const {
  const double u = (t - sample_start_) / sample_dt_;
  if (u <= 0.0) return v.front();
  const double last = static_cast<double>(v.size() - 1);
  if (u >= last) return v.back();
  const auto i = static_cast<std::size_t>(u);
  const double f = u - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

double TiltProfile::theta(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
      return amplitude_;
    case ProfileKind::sigmoid:
      return amplitude_ * logistic(rate_ * (t - center_time_));
    case ProfileKind::piecewise_linear: {
      const double u = 0.5 + rate_ * (t - center_time_);
      return amplitude_ * std::clamp(u, 0.0, 1.0);
    }
    case ProfileKind::sampled:
      return interp(samples_, t);
  }
  return 0.0;
}

double TiltProfile::theta_dot(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
      return 0.0;
    case ProfileKind::sigmoid: {
      const double s = logistic(rate_ * (t - center_time_));
      return amplitude_ * rate_ * s * (1.0 - s);
    }
    case ProfileKind::piecewise_linear: {
      const double u = 0.5 + rate_ * (t - center_time_);
      return (u > 0.0 && u < 1.0) ? amplitude_ * rate_ : 0.0;
    }
    case ProfileKind::sampled:
      return interp(samples_dot_, t);
  }
  return 0.0;
}

double TiltProfile::theta_ddot(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
    case ProfileKind::piecewise_linear:
      return 0.0;
    case ProfileKind::sigmoid: {
      const double s = logistic(rate_ * (t - center_time_));
      return amplitude_ * rate_ * rate_ * s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ProfileKind::sampled:
      return interp(samples_ddot_, t);
  }
  return 0.0;
}

double pendulum_accel(const SimState& s, const PendulumParams& p) {
  p.validate();
  if (!finite(s.phi) || !finite(s.phi_dot) || !finite(s.theta) ||
      !finite(s.theta_ddot))
    throw NumericError("pendulum_accel: non-finite state");
  return s.theta_ddot -
         (p.C * s.phi_dot + p.torque_scale() * std::sin(s.phi - s.theta)) / p.I_p;
}

SimTrajectory simulate_pendulum(const PendulumParams& p,
                                const TiltProfile& profile, double phi0,
                                double phi_dot0, double dt, double duration,
                                const SimOptions& opts) {
  p.validate();
  if (!(dt > 0.0)) throw UsageError("simulate_pendulum: dt must be > 0");
  if (!(duration >= dt))
    throw UsageError("simulate_pendulum: duration must be >= dt");

  const double inv_ip = 1.0 / p.I_p;
  const double scale = p.torque_scale();
  // rate derivative with profile terms folded in; theta values are looked up
  // per stage time
  auto accel = [&](double t, double phi, double phi_dot) {
    return profile.theta_ddot(t) -
           (p.C * phi_dot + scale * std::sin(phi - profile.theta(t))) * inv_ip;
  };

  const auto n = static_cast<std::size_t>(std::floor(duration / dt)) + 1;
  SimTrajectory traj;
  traj.dt = dt;
  traj.start = 0.0;
  traj.states.reserve(n);

  double phi = phi0;
  double phi_dot = phi_dot0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (!finite(phi) || !finite(phi_dot) ||
        std::abs(phi_dot) > opts.phi_dot_bound) {
      traj.diverged = true;
      traj.note = "simulation aborted at t=" + std::to_string(t) +
                  ": |phi_dot| exceeded bound";
      break;
    }
    SimState s;
    s.t = t;
    s.phi = phi;
    s.phi_dot = phi_dot;
    s.theta = profile.theta(t);
    s.theta_dot = profile.theta_dot(t);
    s.theta_ddot = profile.theta_ddot(t);
    traj.states.push_back(s);
    if (i + 1 == n) break;

    const double h = dt;
    const double k1p = phi_dot;
    const double k1v = accel(t, phi, phi_dot);
    const double k2p = phi_dot + 0.5 * h * k1v;
    const double k2v = accel(t + 0.5 * h, phi + 0.5 * h * k1p, phi_dot + 0.5 * h * k1v);
    const double k3p = phi_dot + 0.5 * h * k2v;
    const double k3v = accel(t + 0.5 * h, phi + 0.5 * h * k2p, phi_dot + 0.5 * h * k2v);
    const double k4p = phi_dot + h * k3v;
    const double k4v = accel(t + h, phi + h * k3p, phi_dot + h * k3v);
    phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    phi_dot += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return traj;
}

double kinetic_energy(const SimState& s, const PendulumParams& p,
                      const BodyParams& b) {
  p.validate();
  b.validate();
  const double rel = -s.phi_dot + s.theta_dot;
  return 0.5 * p.I_p * rel * rel +
         (0.5 * b.I_b + 0.5 * b.l_12 * b.l_12 * p.m_p) * s.theta_dot * s.theta_dot;
}

double potential_energy(const SimState& s, const PendulumParams& p,
                        const BodyParams& b) {
  p.validate();
  b.validate();
  return p.g * b.l_bcg * b.m_b * std::cos(s.theta) +
         p.g * p.m_p *
             (b.l_12 * std::cos(s.theta) - p.l_p * std::cos(s.phi - s.theta));
}

double pendulum_energy(const SimState& s, const PendulumParams& p) {
  return 0.5 * p.I_p * s.phi_dot * s.phi_dot -
         p.torque_scale() * std::cos(s.phi - s.theta);
}

TiltProfile sigmoid_profile(double amplitude, double rate, double center_time) {
  return TiltProfile::sigmoid(amplitude, rate, center_time);
}

}  // namespace tilt
