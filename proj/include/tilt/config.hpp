// Run configuration: a JSON file with sections mirroring the domain types.
// Unknown keys anywhere are errors. All sections are optional and default
// to the desk-scale pendulum.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tilt/dynamics.hpp"
#include "tilt/estimators.hpp"
#include "tilt/optim.hpp"
#include "tilt/sensors.hpp"

namespace tilt {

struct ProfileSpec {
  std::string kind = "constant";  // constant | sigmoid | ramp
  double amplitude = 0.0;
  double rate = 1.0;
  double center_time = 0.0;

  TiltProfile build() const;
};

struct SimSpec {
  double dt = 1e-3;
  double duration = 5.0;
  std::optional<double> phi0;      // default: equilibrium at t = 0
  std::optional<double> phi_dot0;
};

struct PrefilterSpec {
  std::string channels = "none";   // none | phi | gyro | both
  std::string mode = "causal";     // causal | zero_phase
  int order = 50;
  double cutoff_hz = 20.0;
};

struct EstimatorSpec {
  std::string scheme = "central";  // central | backward
  std::size_t window_w = 5;
  std::string clamp = "saturate_flag";  // saturate_flag | reject
  PrefilterSpec prefilter;

  EstimatorConfig build(const PendulumParams& p, double dt) const;
};

struct SupervisorSpec {
  double window_s = 2.0;
  double interval_s = 0.5;
  std::vector<std::string> free = {"K", "L", "M", "N"};
};

struct KalmanSpec {
  double q_theta = 1e-6;
  double q_bias = 1e-8;
  std::optional<double> r;       // absent: calibrate from the measurement
  double calib_window_s = 0.5;
  bool joseph = false;
};

struct ReportSpec {
  bool fir = true;               // condition presented series
  int fir_order = 50;
  double fir_cutoff_hz = 20.0;
};

struct Config {
  PendulumParams pendulum;
  BodyParams body;
  ProfileSpec profile;
  NoiseSpec noise;
  SimSpec sim;
  EstimatorSpec estimator;
  NewtonConfig newton;
  SupervisorSpec supervisor;
  KalmanSpec kalman;
  ReportSpec report;

  // Canonical serialization of the resolved values.
  std::string canonical_json() const;
  std::string hash() const;  // FNV-1a over canonical_json()
};

Config load_config(const std::string& path);
Config parse_config(const std::string& json_text, const std::string& where);

std::string fnv1a_hex(const std::string& data);

}  // namespace tilt
