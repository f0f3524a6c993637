// The three tilt estimators. All invert the pendulum equation of motion:
// the measured deflection phi minus/plus the arcsine of the normalized
// damping+inertia torque recovers the body tilt. Algorithm 1 uses encoder
// derivatives only, Algorithm 2 adds the windowed gyro derivative, and
// Algorithm 3 generalizes the coefficients for live supervision plus a
// gyro lead term to counter pipeline delay.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tilt/dynamics.hpp"
#include "tilt/kernels.hpp"

namespace tilt {

// Normalized pendulum constants: kappa = C/(m_p g l_p), iota = I_p/(m_p g l_p).
struct Algo12Params {
  double kappa = 0.0;  // [s]
  double iota = 0.0;   // [s^2]

  static Algo12Params from_pendulum(const PendulumParams& p);
  void validate() const;
};

// Supervised coefficients of the generalized estimator.
struct Algo3Params {
  double K = 0.0;  // [N m s/rad]
  double L = 0.0;  // [kg m^2]
  double M = 0.0;  // [kg m^2]
  double N = 0.0;  // [s]

  // The point at which Algorithm 3 reduces to Algorithm 2.
  static Algo3Params algo2_equivalent(const PendulumParams& p);
};

enum class ClampPolicy { saturate_flag, reject };

struct EstimatorConfig {
  double dt = 1e-3;
  std::size_t window_w = 5;
  kernels::DiffScheme diff_scheme = kernels::DiffScheme::central;
  ClampPolicy clamp_policy = ClampPolicy::saturate_flag;
  double scale = 0.04905;  // g*l_p*m_p [N m]

  static EstimatorConfig for_pendulum(const PendulumParams& p);
  void validate() const;
  // First index with full derivative history for this scheme (gyro window
  // included when with_gyro).
  std::size_t warmup(bool with_gyro) const;
};

struct EstimateSeries {
  std::vector<double> theta_est;      // NaN before valid_from
  std::vector<std::uint8_t> clamped;  // per-sample saturation flags
  std::size_t valid_from = 0;

  std::size_t clamp_count() const;
};

struct ClampResult {
  double angle = 0.0;
  bool clamped = false;
};

// asin with the configured out-of-range policy.
ClampResult clamped_asin(double x, ClampPolicy policy);

// Derivative-injected cores. Batch wrappers below differentiate phi/gyro
// per config; these entry points let callers substitute exact derivatives.
EstimateSeries estimate_algo1_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   const Algo12Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from = 0);
EstimateSeries estimate_algo2_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   std::span<const double> gd,
                                   const Algo12Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from = 0);
EstimateSeries estimate_algo3_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   std::span<const double> gd,
                                   std::span<const double> gk,
                                   const Algo3Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from = 0);

EstimateSeries estimate_algo1(std::span<const double> phi,
                              const Algo12Params& params,
                              const EstimatorConfig& cfg);
EstimateSeries estimate_algo2(std::span<const double> phi,
                              std::span<const double> gyro,
                              const Algo12Params& params,
                              const EstimatorConfig& cfg);
EstimateSeries estimate_algo3(std::span<const double> phi,
                              std::span<const double> gyro,
                              const Algo3Params& params,
                              const EstimatorConfig& cfg);

// One-sample-at-a-time evaluation with ring-buffer history; backward
// differences only. Matches the batch backward path bit for bit.
class StreamingEstimator {
public:
  enum class Algo { algo1, algo2, algo3 };

  StreamingEstimator(Algo algo, const Algo12Params& params, EstimatorConfig cfg);
  StreamingEstimator(const Algo3Params& params, EstimatorConfig cfg);

  void set_params(const Algo3Params& params);

  // Returns the estimate once enough history has accumulated.
  std::optional<ClampResult> push(double phi, double gyro);
  void reset();

private:
  Algo algo_;
  EstimatorConfig cfg_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, n_ = 0.0;
  std::vector<double> phi_hist_;   // ring buffer
  std::vector<double> gyro_hist_;
  std::size_t count_ = 0;
  std::size_t cap_ = 0;
  void init_buffers();
  double at_phi(std::size_t back) const;
  double at_gyro(std::size_t back) const;
};

}  // namespace tilt
