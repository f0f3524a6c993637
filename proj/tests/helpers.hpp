// Shared scenario builders and small numeric utilities for the test suites.
#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tilt/dynamics.hpp"
#include "tilt/sensors.hpp"

namespace testutil {

using namespace tilt;

inline double rms(const std::vector<double>& e, std::size_t from = 0) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = from; i < e.size(); ++i) {
    if (std::isnan(e[i])) continue;
    acc += e[i] * e[i];
    ++n;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

inline double max_abs(const std::vector<double>& e, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t i = from; i < e.size(); ++i)
    if (!std::isnan(e[i])) m = std::max(m, std::abs(e[i]));
  return m;
}

// Simulation started at the tilt-profile equilibrium.
inline SimTrajectory simulate_from_equilibrium(const PendulumParams& p,
                                               const TiltProfile& prof,
                                               double dt, double duration,
                                               double phi_offset = 0.0) {
  return simulate_pendulum(p, prof, prof.theta(0.0) + phi_offset,
                           prof.theta_dot(0.0), dt, duration);
}

struct TruthArrays {
  std::vector<double> t, phi, phi_dot, phi_ddot, theta, theta_dot, theta_ddot;
};

inline TruthArrays unpack(const SimTrajectory& traj, const PendulumParams& p) {
  TruthArrays a;
  const std::size_t n = traj.states.size();
  a.t.reserve(n);
  for (const auto& s : traj.states) {
    a.t.push_back(s.t);
    a.phi.push_back(s.phi);
    a.phi_dot.push_back(s.phi_dot);
    a.phi_ddot.push_back(pendulum_accel(s, p));
    a.theta.push_back(s.theta);
    a.theta_dot.push_back(s.theta_dot);
    a.theta_ddot.push_back(s.theta_ddot);
  }
  return a;
}

// Unique scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(
      static_cast<std::uint64_t>(
          std::chrono::steady_clock::now().time_since_epoch().count()));
  const auto p = std::filesystem::temp_directory_path() /
                 ("pendtilt_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::string out;
  std::ifstream in(p, std::ios::binary);
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    out.append(buf, static_cast<std::size_t>(in.gcount()));
  return out;
}

}  // namespace testutil
