#include "tilt/estimators.hpp"

#include <cmath>
#include <limits>

#include "tilt/errors.hpp"
#include "tilt/sensors.hpp"

namespace tilt {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kHalfPi = 1.5707963267948966;

void mask_warmup(EstimateSeries& es) {
  for (std::size_t i = 0; i < es.valid_from && i < es.theta_est.size(); ++i) {
    es.theta_est[i] = kNaN;
    es.clamped[i] = 0;
  }
}

EstimateSeries run_map(const kernels::EstimateMapArgs& args,
                       std::size_t valid_from, ClampPolicy policy) {
  EstimateSeries es;
  es.theta_est.resize(args.phi.size());
  es.clamped.assign(args.phi.size(), 0);
  es.valid_from = valid_from;
  kernels::omp::estimate_map(args, es.theta_est, es.clamped);
  mask_warmup(es);
  if (policy == ClampPolicy::reject) {
    for (std::size_t i = es.valid_from; i < es.clamped.size(); ++i)
      if (es.clamped[i])
        throw NumericError("estimate: asin argument out of range at sample " +
                           std::to_string(i));
  }
  return es;
}
}  // namespace

Algo12Params Algo12Params::from_pendulum(const PendulumParams& p) {
  p.validate();
  const double s = p.torque_scale();
  return {p.C / s, p.I_p / s};
}

void Algo12Params::validate() const {
  if (!(iota > 0.0)) throw UsageError("estimator parameter iota must be > 0");
  if (!(kappa >= 0.0)) throw UsageError("estimator parameter kappa must be >= 0");
}

Algo3Params Algo3Params::algo2_equivalent(const PendulumParams& p) {
  p.validate();
  return {p.C, p.I_p, -p.I_p, 0.0};
}

EstimatorConfig EstimatorConfig::for_pendulum(const PendulumParams& p) {
  EstimatorConfig cfg;
  cfg.scale = p.torque_scale();
  return cfg;
}

void EstimatorConfig::validate() const {
  if (!(dt > 0.0)) throw UsageError("estimator config dt must be > 0");
  if (window_w < 1) throw UsageError("estimator config window_w must be >= 1");
  if (!(scale > 0.0)) throw UsageError("estimator config scale must be > 0");
}

std::size_t EstimatorConfig::warmup(bool with_gyro) const {
  const std::size_t deriv =
      diff_scheme == kernels::DiffScheme::central ? 1 : 2;
  return with_gyro ? std::max(deriv, window_w) : deriv;
}

std::size_t EstimateSeries::clamp_count() const {
  std::size_t n = 0;
  for (auto f : clamped) n += f;
  return n;
}

ClampResult clamped_asin(double x, ClampPolicy policy) {
  if (!std::isfinite(x)) throw NumericError("clamped_asin: non-finite input");
  if (x > 1.0 || x < -1.0) {
    if (policy == ClampPolicy::reject)
      throw NumericError("clamped_asin: argument out of [-1, 1]");
    return {x > 1.0 ? kHalfPi : -kHalfPi, true};
  }
  return {std::asin(x), false};
}

EstimateSeries estimate_algo1_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   const Algo12Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from) {
  cfg.validate();
  kernels::EstimateMapArgs args;
  args.phi = phi;
  args.phi_dot = phi_dot;
  args.phi_ddot = phi_ddot;
  args.a = params.kappa;
  args.b = params.iota;
  return run_map(args, valid_from, cfg.clamp_policy);
}

EstimateSeries estimate_algo2_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   std::span<const double> gd,
                                   const Algo12Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from) {
  cfg.validate();
  kernels::EstimateMapArgs args;
  args.phi = phi;
  args.phi_dot = phi_dot;
  args.phi_ddot = phi_ddot;
  args.gd = gd;
  args.a = params.kappa;
  args.b = params.iota;
  args.c = -params.iota;
  return run_map(args, valid_from, cfg.clamp_policy);
}

EstimateSeries estimate_algo3_core(std::span<const double> phi,
                                   std::span<const double> phi_dot,
                                   std::span<const double> phi_ddot,
                                   std::span<const double> gd,
                                   std::span<const double> gk,
                                   const Algo3Params& params,
                                   const EstimatorConfig& cfg,
                                   std::size_t valid_from) {
  cfg.validate();
  kernels::EstimateMapArgs args;
  args.phi = phi;
  args.phi_dot = phi_dot;
  args.phi_ddot = phi_ddot;
  args.gd = gd;
  args.gk = gk;
  args.a = params.K / cfg.scale;
  args.b = params.L / cfg.scale;
  args.c = params.M / cfg.scale;
  args.n = params.N;
  return run_map(args, valid_from, cfg.clamp_policy);
}

EstimateSeries estimate_algo1(std::span<const double> phi,
                              const Algo12Params& params,
                              const EstimatorConfig& cfg) {
  params.validate();
  const auto pd = finite_diff1(phi, cfg.dt, cfg.diff_scheme);
  const auto pdd = finite_diff2(phi, cfg.dt, cfg.diff_scheme);
  return estimate_algo1_core(phi, pd, pdd, params, cfg, cfg.warmup(false));
}

EstimateSeries estimate_algo2(std::span<const double> phi,
                              std::span<const double> gyro,
                              const Algo12Params& params,
                              const EstimatorConfig& cfg) {
  if (phi.size() != gyro.size())
    throw UsageError("estimate_algo2: phi and gyro must be aligned");
  params.validate();
  const auto pd = finite_diff1(phi, cfg.dt, cfg.diff_scheme);
  const auto pdd = finite_diff2(phi, cfg.dt, cfg.diff_scheme);
  const auto gd = windowed_gyro_diff_series(gyro, cfg.window_w, cfg.dt);
  return estimate_algo2_core(phi, pd, pdd, gd, params, cfg, cfg.warmup(true));
}

EstimateSeries estimate_algo3(std::span<const double> phi,
                              std::span<const double> gyro,
                              const Algo3Params& params,
                              const EstimatorConfig& cfg) {
  if (phi.size() != gyro.size())
    throw UsageError("estimate_algo3: phi and gyro must be aligned");
  const auto pd = finite_diff1(phi, cfg.dt, cfg.diff_scheme);
  const auto pdd = finite_diff2(phi, cfg.dt, cfg.diff_scheme);
  const auto gd = windowed_gyro_diff_series(gyro, cfg.window_w, cfg.dt);
  return estimate_algo3_core(phi, pd, pdd, gd, gyro, params, cfg,
                             cfg.warmup(true));
}

StreamingEstimator::StreamingEstimator(Algo algo, const Algo12Params& params,
                                       EstimatorConfig cfg)
    : algo_(algo), cfg_(cfg) {
  if (algo == Algo::algo3)
    throw UsageError("streaming algo3 takes Algo3Params");
  params.validate();
  a_ = params.kappa;
  b_ = params.iota;
  c_ = algo == Algo::algo2 ? -params.iota : 0.0;
  init_buffers();
}

StreamingEstimator::StreamingEstimator(const Algo3Params& params,
                                       EstimatorConfig cfg)
    : algo_(Algo::algo3), cfg_(cfg) {
  init_buffers();
  set_params(params);
}

void StreamingEstimator::init_buffers() {
  cfg_.validate();
  cfg_.diff_scheme = kernels::DiffScheme::backward;
  cap_ = std::max<std::size_t>(cfg_.window_w, 2) + 1;
  phi_hist_.assign(cap_, 0.0);
  gyro_hist_.assign(cap_, 0.0);
}

void StreamingEstimator::set_params(const Algo3Params& params) {
  if (algo_ != Algo::algo3)
    throw UsageError("set_params(Algo3Params) requires an algo3 stream");
  a_ = params.K / cfg_.scale;
  b_ = params.L / cfg_.scale;
  c_ = params.M / cfg_.scale;
  n_ = params.N;
}

void StreamingEstimator::reset() {
  count_ = 0;
  std::fill(phi_hist_.begin(), phi_hist_.end(), 0.0);
  std::fill(gyro_hist_.begin(), gyro_hist_.end(), 0.0);
}

double StreamingEstimator::at_phi(std::size_t back) const {
  return phi_hist_[(count_ - 1 - back) % cap_];
}

double StreamingEstimator::at_gyro(std::size_t back) const {
  return gyro_hist_[(count_ - 1 - back) % cap_];
}

std::optional<ClampResult> StreamingEstimator::push(double phi, double gyro) {
  phi_hist_[count_ % cap_] = phi;
  gyro_hist_[count_ % cap_] = gyro;
  ++count_;

  const bool with_gyro = algo_ != Algo::algo1;
  if (count_ <= cfg_.warmup(with_gyro)) return std::nullopt;

  const double dt = cfg_.dt;
  const double pd = (at_phi(0) - at_phi(1)) / dt;
  const double pdd = (at_phi(0) - 2.0 * at_phi(1) + at_phi(2)) / (dt * dt);

  double arg = a_ * pd + b_ * pdd;
  if (with_gyro) {
    const double gd = (at_gyro(0) - at_gyro(cfg_.window_w)) /
                      (dt * static_cast<double>(cfg_.window_w));
    arg += c_ * gd;
  }
  auto res = clamped_asin(arg, cfg_.clamp_policy);
  res.angle += phi;
  if (algo_ == Algo::algo3) res.angle += n_ * gyro;
  return res;
}

}  // namespace tilt
