// Pendulum-on-tilting-body forward model: the relative-angle ODE under a
// prescribed tilt trajectory, energy functions used as test oracles, and
// analytic tilt profiles.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tilt {

struct PendulumParams {
  double m_p = 0.05;   // pendulum mass [kg]
  double l_p = 0.1;    // pivot-to-CG length [m]
  double I_p = 5e-4;   // inertia about the pendulum pivot [kg m^2]
  double C = 1e-4;     // viscous damping at the pivot [N m s/rad]
  double g = 9.81;     // gravity [m/s^2]

  // g*l_p*m_p, the restoring torque scale that normalizes the estimators.
  double torque_scale() const { return g * l_p * m_p; }
  void validate() const;
};

struct BodyParams {
  double m_b = 1.0;    // body mass [kg]
  double I_b = 0.05;   // body inertia about the base pivot [kg m^2]
  double l_12 = 0.2;   // base pivot to pendulum pivot [m]
  double l_bcg = 0.1;  // base pivot to body CG [m]

  void validate() const;
};

struct SimState {
  double t = 0.0;
  double phi = 0.0;         // pendulum angle w.r.t. body, clockwise positive
  double phi_dot = 0.0;
  double theta = 0.0;       // body tilt, counter-clockwise positive
  double theta_dot = 0.0;
  double theta_ddot = 0.0;
};

enum class ProfileKind { constant, sigmoid, piecewise_linear, sampled };

// Prescribed body-tilt trajectory theta(t). Analytic kinds provide exact
// first and second derivatives; the sampled kind differentiates its table.
class TiltProfile {
public:
  static TiltProfile constant(double amplitude);
  static TiltProfile sigmoid(double amplitude, double rate, double center_time);
  // Ramp from 0 to amplitude, centered on center_time, traversed in 1/rate.
  static TiltProfile piecewise_linear(double amplitude, double rate,
                                      double center_time);
  static TiltProfile sampled(std::vector<double> theta, double dt, double start);

  ProfileKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double rate() const { return rate_; }
  double center_time() const { return center_time_; }

  double theta(double t) const;
  double theta_dot(double t) const;
  double theta_ddot(double t) const;

private:
  TiltProfile() = default;
  ProfileKind kind_ = ProfileKind::constant;
  double amplitude_ = 0.0;
  double rate_ = 1.0;
  double center_time_ = 0.0;
  // sampled kind
  std::vector<double> samples_;
  std::vector<double> samples_dot_;
  std::vector<double> samples_ddot_;
  double sample_dt_ = 0.0;
  double sample_start_ = 0.0;
  double interp(const std::vector<double>& v, double t) const;
};

struct SimTrajectory {
  double dt = 0.0;
  double start = 0.0;
  std::vector<SimState> states;
  bool diverged = false;
  std::string note;   // diagnostic when diverged

  std::size_t size() const { return states.size(); }
};

// phi_ddot from the relative-angle equation of motion.
double pendulum_accel(const SimState& state, const PendulumParams& p);

struct SimOptions {
  double phi_dot_bound = 1e4;  // abort when |phi_dot| exceeds this
};

// Fixed-step classical RK4 under the prescribed profile. Emits
// floor(duration/dt)+1 states; stops early (diverged=true) if the rate
// bound trips.
SimTrajectory simulate_pendulum(const PendulumParams& p,
                                const TiltProfile& profile, double phi0,
                                double phi_dot0, double dt, double duration,
                                const SimOptions& opts = {});

double kinetic_energy(const SimState& s, const PendulumParams& p,
                      const BodyParams& b);
double potential_energy(const SimState& s, const PendulumParams& p,
                        const BodyParams& b);

// Pendulum-only energy, valid for constant tilt; conserved when C = 0.
double pendulum_energy(const SimState& s, const PendulumParams& p);

TiltProfile sigmoid_profile(double amplitude, double rate, double center_time);

}  // namespace tilt
