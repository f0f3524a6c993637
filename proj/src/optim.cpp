#include "tilt/optim.hpp"

#include <algorithm>
#include <cmath>

#include "tilt/errors.hpp"
#include "tilt/sensors.hpp"

namespace tilt {

namespace {

std::string param_point_str(const ParamVector& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    if (i < p.labels.size()) s += p.labels[i] + "=";
    s += std::to_string(p.values[i]);
  }
  return s + ")";
}

std::vector<double> component_steps(const ParamVector& p, double delta_p,
                                    double floor) {
  std::vector<double> dp(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    dp[j] = std::max(delta_p * std::abs(p.values[j]), floor);
  return dp;
}

double checked_eval(const CostFn& F, const ParamVector& p) {
  const double v = F(p);
  if (!std::isfinite(v))
    throw NumericError("cost evaluation returned non-finite value at " +
                       param_point_str(p));
  return v;
}

}  // namespace

void ParamVector::validate() const {
  if (values.empty()) throw UsageError("parameter vector must be non-empty");
  for (double v : values)
    if (!std::isfinite(v))
      throw NumericError("parameter vector has non-finite entry");
}

void CostContext::validate() const {
  cfg.validate();
  if (phi.size() < 8) throw UsageError("cost context: dataset too short");
  if (kind == CostKind::offline_truth && theta_true.size() != phi.size())
    throw UsageError("offline cost requires theta_true aligned with phi");
  if (kind == CostKind::live_gyro && gyro.size() != phi.size())
    throw UsageError("live cost requires gyro aligned with phi");
  if (algo != EstimatorAlgo::algo1 && gyro.size() != phi.size())
    throw UsageError("algo2/algo3 require gyro aligned with phi");
  if (algo == EstimatorAlgo::algo3) {
    if (free3.empty()) throw UsageError("algo3 context: no free parameters");
    for (const auto& l : free3)
      if (l != "K" && l != "L" && l != "M" && l != "N")
        throw UsageError("algo3 context: unknown parameter label '" + l + "'");
  }
}

ParamVector CostContext::initial_params(const PendulumParams& p) const {
  if (algo == EstimatorAlgo::algo3) {
    const Algo3Params eq = Algo3Params::algo2_equivalent(p);
    ParamVector out;
    for (const auto& l : free3) {
      out.labels.push_back(l);
      if (l == "K") out.values.push_back(eq.K);
      if (l == "L") out.values.push_back(eq.L);
      if (l == "M") out.values.push_back(eq.M);
      if (l == "N") out.values.push_back(eq.N);
    }
    return out;
  }
  const Algo12Params ap = Algo12Params::from_pendulum(p);
  return {{ap.kappa, ap.iota}, {"kappa", "iota"}};
}

CostEvaluator::CostEvaluator(CostContext ctx) : ctx_(std::move(ctx)) {
  ctx_.validate();
  phi_dot_ = finite_diff1(ctx_.phi, ctx_.cfg.dt, ctx_.cfg.diff_scheme);
  phi_ddot_ = finite_diff2(ctx_.phi, ctx_.cfg.dt, ctx_.cfg.diff_scheme);
  const bool with_gyro = ctx_.algo != EstimatorAlgo::algo1;
  if (with_gyro)
    gd_ = windowed_gyro_diff_series(ctx_.gyro, ctx_.cfg.window_w, ctx_.cfg.dt);
  valid_from_ = ctx_.cfg.warmup(with_gyro);
}

EstimateSeries CostEvaluator::estimate(const ParamVector& p) const {
  switch (ctx_.algo) {
    case EstimatorAlgo::algo1: {
      if (p.size() != 2) throw UsageError("algo1 fit expects (kappa, iota)");
      Algo12Params ap{p.values[0], p.values[1]};
      return estimate_algo1_core(ctx_.phi, phi_dot_, phi_ddot_, ap, ctx_.cfg,
                                 valid_from_);
    }
    case EstimatorAlgo::algo2: {
      if (p.size() != 2) throw UsageError("algo2 fit expects (kappa, iota)");
      Algo12Params ap{p.values[0], p.values[1]};
      return estimate_algo2_core(ctx_.phi, phi_dot_, phi_ddot_, gd_, ap,
                                 ctx_.cfg, valid_from_);
    }
    case EstimatorAlgo::algo3: {
      if (p.size() != ctx_.free3.size())
        throw UsageError("algo3 fit: parameter count mismatch");
      Algo3Params ap = ctx_.base3;
      for (std::size_t i = 0; i < ctx_.free3.size(); ++i) {
        const auto& l = ctx_.free3[i];
        if (l == "K") ap.K = p.values[i];
        if (l == "L") ap.L = p.values[i];
        if (l == "M") ap.M = p.values[i];
        if (l == "N") ap.N = p.values[i];
      }
      return estimate_algo3_core(ctx_.phi, phi_dot_, phi_ddot_, gd_, ctx_.gyro,
                                 ap, ctx_.cfg, valid_from_);
    }
  }
  throw UsageError("unknown estimator");
}

double CostEvaluator::offline_cost(const EstimateSeries& es) const {
  const std::size_t n = es.theta_est.size();
  if (es.valid_from >= n)
    throw NumericError("offline cost: empty valid range");
  double acc = 0.0;
  std::size_t m = 0;
  for (std::size_t k = es.valid_from; k < n; ++k) {
    const double e = es.theta_est[k] - ctx_.theta_true[k];
    acc += e * e;
    ++m;
  }
  if (m == 0) throw NumericError("offline cost: empty valid range");
  return std::sqrt(acc / static_cast<double>(m));
}

double CostEvaluator::live_cost(const EstimateSeries& es) const {
  const std::size_t n = es.theta_est.size();
  if (es.valid_from + 3 >= n)
    throw NumericError("live cost: empty valid range");
  const std::span<const double> seg{es.theta_est.data() + es.valid_from,
                                    n - es.valid_from};
  const auto dseg = finite_diff1(seg, ctx_.cfg.dt, ctx_.cfg.diff_scheme);
  const bool central = ctx_.cfg.diff_scheme == kernels::DiffScheme::central;
  const std::size_t lo = central ? 1 : 2;
  const std::size_t hi = dseg.size() - (central ? 1 : 0);
  if (lo >= hi) throw NumericError("live cost: empty valid range");
  double acc = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double e = dseg[j] - ctx_.gyro[es.valid_from + j];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(hi - lo));
}

double CostEvaluator::operator()(const ParamVector& p) const {
  const EstimateSeries es = estimate(p);
  return ctx_.kind == CostKind::offline_truth ? offline_cost(es)
                                              : live_cost(es);
}

double rms_cost_offline(const ParamVector& p, const CostContext& ctx) {
  if (ctx.kind != CostKind::offline_truth)
    throw UsageError("rms_cost_offline requires an offline context");
  return CostEvaluator(ctx)(p);
}

double rms_cost_live(const ParamVector& p, const CostContext& ctx) {
  if (ctx.kind != CostKind::live_gyro)
    throw UsageError("rms_cost_live requires a live context");
  return CostEvaluator(ctx)(p);
}

namespace {

ParamVector perturbed(const ParamVector& p, std::size_t j, double dp) {
  ParamVector q = p;
  q.values[j] += dp;
  return q;
}

struct FdWorkspace {
  double f0 = 0.0;
  std::vector<double> fj;               // F(P + dp_j e_j)
  Eigen::MatrixXd fjk;                  // F(P + dp_j e_j + dp_k e_k), j <= k
};

// Evaluates the full forward-difference stencil around a known F(P); the
// perturbed points are independent, so they run in parallel.
FdWorkspace evaluate_stencil(const CostFn& F, const ParamVector& p, double f0,
                             std::span<const double> dp) {
  const std::size_t n = p.size();
  struct Point {
    int j;
    int k;  // -1: single perturbation
  };
  std::vector<Point> points;
  for (std::size_t j = 0; j < n; ++j) points.push_back({static_cast<int>(j), -1});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k)
      points.push_back({static_cast<int>(j), static_cast<int>(k)});

  FdWorkspace ws;
  ws.f0 = f0;
  ws.fj.assign(n, 0.0);
  ws.fjk = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                 static_cast<Eigen::Index>(n));

  std::vector<double> results(points.size());
  std::exception_ptr err;
  const auto np = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < np; ++i) {
    try {
      const auto& pt = points[static_cast<std::size_t>(i)];
      ParamVector q = p;
      q.values[static_cast<std::size_t>(pt.j)] += dp[static_cast<std::size_t>(pt.j)];
      if (pt.k >= 0)
        q.values[static_cast<std::size_t>(pt.k)] += dp[static_cast<std::size_t>(pt.k)];
      results[static_cast<std::size_t>(i)] = checked_eval(F, q);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  std::size_t idx = 0;
  for (std::size_t j = 0; j < n; ++j) ws.fj[j] = results[idx++];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      ws.fjk(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          results[idx++];
    }
  return ws;
}

Eigen::VectorXd gradient_from(const FdWorkspace& ws, std::span<const double> dp) {
  const auto n = static_cast<Eigen::Index>(dp.size());
  Eigen::VectorXd g(n);
  for (Eigen::Index j = 0; j < n; ++j)
    g(j) = (ws.fj[static_cast<std::size_t>(j)] - ws.f0) /
           dp[static_cast<std::size_t>(j)];
  return g;
}

Eigen::MatrixXd hessian_from(const FdWorkspace& ws, std::span<const double> dp,
                             HessianStencil stencil) {
  const auto n = static_cast<Eigen::Index>(dp.size());
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j; k < n; ++k) {
      const double fjk = ws.fjk(j, k);
      const double denom =
          dp[static_cast<std::size_t>(j)] * dp[static_cast<std::size_t>(k)];
      const double val =
          stencil == HessianStencil::four_point
              ? (fjk - ws.fj[static_cast<std::size_t>(j)] -
                 ws.fj[static_cast<std::size_t>(k)] + ws.f0) /
                    denom
              : (fjk - ws.f0) / denom;
      H(j, k) = val;
      H(k, j) = val;
    }
  return 0.5 * (H + H.transpose());
}

}  // namespace

ParamVector fd_gradient(const CostFn& F, const ParamVector& p, double delta_p) {
  p.validate();
  if (!(delta_p > 0.0)) throw UsageError("fd_gradient: delta_p must be > 0");
  ParamVector g = p;
  const double f0 = checked_eval(F, p);
  for (std::size_t j = 0; j < p.size(); ++j)
    g.values[j] = (checked_eval(F, perturbed(p, j, delta_p)) - f0) / delta_p;
  return g;
}

Eigen::MatrixXd fd_hessian(const CostFn& F, const ParamVector& p,
                           double delta_p, HessianStencil stencil) {
  p.validate();
  if (!(delta_p > 0.0)) throw UsageError("fd_hessian: delta_p must be > 0");
  std::vector<double> dp(p.size(), delta_p);
  const FdWorkspace ws = evaluate_stencil(F, p, checked_eval(F, p), dp);
  return hessian_from(ws, dp, stencil);
}

Eigen::MatrixXd regularize_hessian(const Eigen::MatrixXd& H, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

FitReport newton_iterate(const CostFn& F, const ParamVector& p0,
                         const NewtonConfig& cfg) {
  p0.validate();
  FitReport rep;
  rep.final_params = p0;

  ParamVector p = p0;
  double f0 = checked_eval(F, p);
  rep.cost_trace.push_back(f0);

  const auto n = static_cast<Eigen::Index>(p.size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto dp = component_steps(p, cfg.delta_p, cfg.delta_p_floor);
    const FdWorkspace ws = evaluate_stencil(F, p, f0, dp);
    const Eigen::VectorXd g = gradient_from(ws, dp);
    const Eigen::MatrixXd H = hessian_from(ws, dp, cfg.stencil);

    const double floor =
        cfg.hessian_regularization * std::max(H.cwiseAbs().maxCoeff(), 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i) ev(i) = std::max(ev(i), floor);
    if (ev.minCoeff() <= 0.0)
      throw NumericError("newton_iterate: singular regularized curvature");
    const Eigen::VectorXd step =
        -(es.eigenvectors() *
          (es.eigenvectors().transpose() * g).cwiseQuotient(ev));

    // Already at a fixed point: the full step would move less than tol.
    if (cfg.h * step.norm() < cfg.tol) {
      rep.converged = true;
      break;
    }

    // Line search: halve the scale until the cost decreases.
    double h_try = cfg.h;
    bool accepted = false;
    ParamVector pn = p;
    double fn = f0;
    const int tries = cfg.backtracking ? cfg.max_halvings : 1;
    for (int attempt = 0; attempt < tries; ++attempt) {
      for (Eigen::Index j = 0; j < n; ++j)
        pn.values[static_cast<std::size_t>(j)] =
            p.values[static_cast<std::size_t>(j)] + h_try * step(j);
      // a trial point outside the cost's domain counts as no decrease
      bool evaluated = true;
      try {
        fn = checked_eval(F, pn);
      } catch (const NumericError&) {
        evaluated = false;
      }
      if (evaluated && (!cfg.backtracking || fn < f0)) {
        accepted = true;
        break;
      }
      if (!evaluated && !cfg.backtracking)
        throw NumericError("newton_iterate: cost not evaluable at the full step");
      h_try *= 0.5;
    }
    if (!accepted) {
      // No descent found. A full step within the perturbation's resolving
      // power means we are already at a fixed point; anything larger is a
      // genuine line-search failure.
      double dp_norm = 0.0;
      for (double d : dp) dp_norm += d * d;
      dp_norm = std::sqrt(dp_norm);
      rep.converged = cfg.h * step.norm() < std::max(cfg.tol, 2.0 * dp_norm);
      rep.final_params = p;
      return rep;
    }

    double step_norm = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = h_try * step(j);
      step_norm += d * d;
    }
    step_norm = std::sqrt(step_norm);

    p = pn;
    f0 = fn;
    rep.cost_trace.push_back(f0);
    rep.iterations = it + 1;
    if (step_norm < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.final_params = p;
  return rep;
}

FitReport fit_parameters(const CostContext& ctx, const ParamVector& p0,
                         const NewtonConfig& cfg) {
  CostEvaluator eval(ctx);
  FitReport rep = newton_iterate([&](const ParamVector& p) { return eval(p); },
                                 p0, cfg);
  switch (ctx.algo) {
    case EstimatorAlgo::algo1: rep.estimator = "algo1"; break;
    case EstimatorAlgo::algo2: rep.estimator = "algo2"; break;
    case EstimatorAlgo::algo3: rep.estimator = "algo3"; break;
  }
  rep.cost_kind = ctx.kind == CostKind::offline_truth ? "offline_truth"
                                                      : "live_gyro";
  return rep;
}

void SnapshotBox::publish(ParamVector v) {
  auto next = std::make_shared<const ParamVector>(std::move(v));
  std::lock_guard<std::mutex> lk(mu_);
  cur_ = std::move(next);
}

std::shared_ptr<const ParamVector> SnapshotBox::read() const {
  std::lock_guard<std::mutex> lk(mu_);
  return cur_;
}

std::vector<ParamSnapshot> live_supervise(const CostContext& full_run,
                                          const ParamVector& p0,
                                          double interval_s, double window_s,
                                          const NewtonConfig& cfg,
                                          SnapshotBox* box) {
  full_run.validate();
  const double dt = full_run.cfg.dt;
  const auto n_win = static_cast<std::size_t>(std::llround(window_s / dt));
  const auto n_int = static_cast<std::size_t>(std::llround(interval_s / dt));
  if (n_win < 10) throw UsageError("live_supervise: window below 10 samples");
  if (n_int < 1) throw UsageError("live_supervise: interval below one sample");
  const std::size_t n = full_run.phi.size();
  if (n_win + 1 > n) throw UsageError("live_supervise: window longer than run");

  std::vector<ParamSnapshot> history;
  ParamVector current = p0;
  if (box) box->publish(current);

  for (std::size_t k_end = n_win; k_end < n; k_end += n_int) {
    CostContext win = full_run;
    const std::size_t lo = k_end - n_win;
    const std::size_t m = k_end - lo + 1;
    win.phi.assign(full_run.phi.begin() + static_cast<std::ptrdiff_t>(lo),
                   full_run.phi.begin() + static_cast<std::ptrdiff_t>(lo + m));
    if (!full_run.gyro.empty())
      win.gyro.assign(full_run.gyro.begin() + static_cast<std::ptrdiff_t>(lo),
                      full_run.gyro.begin() + static_cast<std::ptrdiff_t>(lo + m));
    if (!full_run.theta_true.empty())
      win.theta_true.assign(
          full_run.theta_true.begin() + static_cast<std::ptrdiff_t>(lo),
          full_run.theta_true.begin() + static_cast<std::ptrdiff_t>(lo + m));

    ParamSnapshot snap;
    snap.t = static_cast<double>(k_end) * dt;
    try {
      const FitReport rep = fit_parameters(win, current, cfg);
      current = rep.final_params;
      snap.params = current;
      snap.fit_ok = true;
      snap.converged = rep.converged;
      snap.cost = rep.cost_trace.back();
      if (box) box->publish(current);
    } catch (const std::exception& e) {
      snap.params = current;  // previous snapshot stays in force
      snap.fit_ok = false;
      snap.converged = false;
      snap.cost = std::nan("");
      snap.message = e.what();
    }
    history.push_back(std::move(snap));
  }
  return history;
}

}  // namespace tilt
