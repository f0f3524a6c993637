#include "tilt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>

#include "tilt/errors.hpp"
#include "tilt/kalman.hpp"
#include "tilt/optim.hpp"

namespace tilt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json metrics_to_json(const SeriesMetrics& m) {
  return json{{"n_valid", m.n_valid},
              {"rms_rad", m.rms_rad},
              {"max_abs_rad", m.max_abs_rad},
              {"delay_samples", m.delay_samples},
              {"delay_s", m.delay_s},
              {"overshoot_rad", m.overshoot_rad},
              {"clamp_count", m.clamp_count}};
}

json provenance_to_json(const Provenance& p) {
  json j{{"version", p.version}, {"config_hash", p.config_hash}};
  if (p.has_seed) j["seed"] = p.seed;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

EstimatorAlgo algo_from_name(const std::string& name) {
  if (name == "algo1") return EstimatorAlgo::algo1;
  if (name == "algo2") return EstimatorAlgo::algo2;
  if (name == "algo3") return EstimatorAlgo::algo3;
  throw UsageError("unknown estimator '" + name + "'");
}

Algo3Params algo3_params_from_report(const std::string& path,
                                     const PendulumParams& p) {
  const json j = read_json_file(path);
  if (!j.contains("final_params"))
    throw SchemaError(path + ": not a fit report (missing final_params)");
  Algo3Params out = Algo3Params::algo2_equivalent(p);
  for (const auto& [key, val] : j.at("final_params").items()) {
    if (key == "K") out.K = val.get<double>();
    else if (key == "L") out.L = val.get<double>();
    else if (key == "M") out.M = val.get<double>();
    else if (key == "N") out.N = val.get<double>();
    else if (key == "kappa" || key == "iota") continue;
    else throw SchemaError(path + ": unknown parameter '" + key + "'");
  }
  return out;
}

struct PreparedInputs {
  std::vector<double> phi;
  std::vector<double> gyro;
  std::size_t filter_warmup = 0;
};

PreparedInputs prepare_inputs(const Config& cfg, const TimeSeries& series) {
  PreparedInputs out;
  out.phi = series.phi();
  out.gyro = series.gyro();
  const auto& pf = cfg.estimator.prefilter;
  if (pf.channels == "none") return out;
  const FirFilter fir =
      design_fir(pf.order, pf.cutoff_hz, 1.0 / series.dt);
  const FilterMode mode =
      pf.mode == "causal" ? FilterMode::causal : FilterMode::zero_phase;
  if (pf.channels == "phi" || pf.channels == "both")
    out.phi = apply_fir(fir, out.phi, mode).y;
  if (pf.channels == "gyro" || pf.channels == "both")
    out.gyro = apply_fir(fir, out.gyro, mode).y;
  if (mode == FilterMode::causal)
    out.filter_warmup = static_cast<std::size_t>(pf.order) + 1;
  return out;
}

}  // namespace

Provenance make_provenance(const Config& cfg, bool with_seed) {
  Provenance p;
  p.version = kVersion;
  p.config_hash = cfg.hash();
  p.seed = cfg.noise.seed;
  p.has_seed = with_seed;
  return p;
}

void cmd_simulate(const Config& cfg, const std::string& out_csv) {
  const TiltProfile profile = cfg.profile.build();
  const double phi0 = cfg.sim.phi0 ? *cfg.sim.phi0 : profile.theta(0.0);
  const double phi_dot0 =
      cfg.sim.phi_dot0 ? *cfg.sim.phi_dot0 : profile.theta_dot(0.0);
  const SimTrajectory traj = simulate_pendulum(
      cfg.pendulum, profile, phi0, phi_dot0, cfg.sim.dt, cfg.sim.duration);
  if (traj.diverged) throw NumericError("simulate: " + traj.note);
  const TimeSeries sensors = synthesize_sensors(traj, cfg.pendulum, cfg.noise);
  write_series(out_csv, sensors, make_provenance(cfg, true));
}

std::vector<MethodRun> run_estimators(const Config& cfg,
                                      const TimeSeries& series,
                                      const EstimateOptions& opt) {
  series.validate();
  if (opt.algos.empty()) throw UsageError("estimate: no methods requested");
  const double dt = series.dt;
  const EstimatorConfig ecfg = cfg.estimator.build(cfg.pendulum, dt);
  const PreparedInputs in = prepare_inputs(cfg, series);
  const auto truth = series.theta_true_or_empty();

  const Algo12Params p12 = Algo12Params::from_pendulum(cfg.pendulum);
  std::vector<MethodRun> runs;
  for (const auto& name : opt.algos) {
    MethodRun run;
    run.name = name;
    if (name == "raw") {
      run.theta_est = in.phi;
      run.valid_from = in.filter_warmup;
    } else if (name == "accel") {
      const auto ax = series.ax();
      const auto ay = series.ay();
      run.theta_est.resize(ax.size());
      for (std::size_t i = 0; i < ax.size(); ++i)
        run.theta_est[i] = accel_angle(ax[i], ay[i]);
      run.valid_from = 0;
    } else {
      EstimateSeries es;
      if (name == "algo1") {
        es = estimate_algo1(in.phi, p12, ecfg);
      } else if (name == "algo2") {
        es = estimate_algo2(in.phi, in.gyro, p12, ecfg);
      } else if (name == "algo3") {
        const Algo3Params p3 =
            opt.params_from.empty()
                ? Algo3Params::algo2_equivalent(cfg.pendulum)
                : algo3_params_from_report(opt.params_from, cfg.pendulum);
        es = estimate_algo3(in.phi, in.gyro, p3, ecfg);
      } else {
        throw UsageError("unknown method '" + name + "'");
      }
      run.theta_est = std::move(es.theta_est);
      run.valid_from = std::max(es.valid_from, in.filter_warmup);
      run.clamp_count = es.clamp_count();
      // re-mask anything the filter transient covers
      for (std::size_t i = 0; i < run.valid_from && i < run.theta_est.size(); ++i)
        run.theta_est[i] = kNaN;
    }
    if (!truth.empty()) {
      run.metrics = compute_metrics(run.theta_est, truth, run.valid_from, dt,
                                    run.clamp_count);
      run.has_metrics = true;
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

void cmd_estimate(const Config& cfg, const std::string& in_csv,
                  const EstimateOptions& opt, const std::string& out_csv) {
  const TimeSeries series = read_series(in_csv);
  const auto runs = run_estimators(cfg, series, opt);
  const auto truth = series.theta_true_or_empty();

  Table t;
  t.headers.push_back("t_s");
  t.columns.push_back(series.times());
  if (!truth.empty()) {
    t.headers.push_back("theta_true_rad");
    t.columns.push_back(truth);
  }
  for (const auto& run : runs) {
    t.headers.push_back("theta_" + run.name + "_rad");
    t.columns.push_back(run.theta_est);
  }
  const Provenance prov = make_provenance(cfg, false);
  write_table(out_csv, t, prov);

  json rep{{"command", "estimate"},
           {"input", in_csv},
           {"dt", series.dt},
           {"provenance", provenance_to_json(prov)}};
  for (const auto& run : runs) {
    json jr{{"valid_from", run.valid_from}, {"clamp_count", run.clamp_count}};
    if (run.has_metrics) jr["metrics"] = metrics_to_json(run.metrics);
    rep["methods"][run.name] = jr;
  }
  write_json_file(out_csv + ".report.json", rep);
}

int cmd_fit(const Config& cfg, const std::string& in_csv,
            const FitOptions& opt, const std::string& out_json) {
  const TimeSeries series = read_series(in_csv);
  const double dt = series.dt;
  const PreparedInputs in = prepare_inputs(cfg, series);

  CostContext ctx;
  ctx.kind = opt.mode == "live" ? CostKind::live_gyro : CostKind::offline_truth;
  if (opt.mode != "live" && opt.mode != "offline")
    throw UsageError("fit mode must be offline|live");
  ctx.algo = algo_from_name(opt.algo);
  ctx.cfg = cfg.estimator.build(cfg.pendulum, dt);
  ctx.phi = in.phi;
  ctx.gyro = in.gyro;
  ctx.base3 = Algo3Params::algo2_equivalent(cfg.pendulum);
  ctx.free3 = cfg.supervisor.free;
  if (ctx.kind == CostKind::offline_truth) {
    ctx.theta_true = series.theta_true_or_empty();
    if (ctx.theta_true.empty())
      throw SchemaError("fit: offline mode requires the theta_true_rad column");
  }

  ParamVector p0 = ctx.initial_params(cfg.pendulum);
  if (!opt.p0.empty()) {
    if (opt.p0.size() != p0.size())
      throw UsageError("fit: --p0 expects " + std::to_string(p0.size()) +
                       " values");
    p0.values = opt.p0;
  }

  const Provenance prov = make_provenance(cfg, false);
  json rep{{"command", "fit"},
           {"input", in_csv},
           {"mode", opt.mode},
           {"provenance", provenance_to_json(prov)}};

  bool ok;
  if (opt.supervise) {
    if (ctx.kind != CostKind::live_gyro)
      throw UsageError("fit: --supervise requires live mode");
    const auto history =
        live_supervise(ctx, p0, cfg.supervisor.interval_s,
                       cfg.supervisor.window_s, cfg.newton);
    if (history.empty()) throw NumericError("fit: no supervision ticks");
    json hj = json::array();
    for (const auto& s : history) {
      json pj;
      for (std::size_t i = 0; i < s.params.size(); ++i)
        pj[s.params.labels[i]] = s.params.values[i];
      hj.push_back({{"t", s.t},
                    {"params", pj},
                    {"fit_ok", s.fit_ok},
                    {"converged", s.converged},
                    {"message", s.message}});
    }
    rep["snapshots"] = hj;
    const auto& last = history.back();
    json fp;
    for (std::size_t i = 0; i < last.params.size(); ++i)
      fp[last.params.labels[i]] = last.params.values[i];
    rep["final_params"] = fp;
    rep["estimator"] = opt.algo;
    rep["cost_kind"] = "live_gyro";
    ok = last.fit_ok;
  } else {
    const FitReport fit = fit_parameters(ctx, p0, cfg.newton);
    json fp;
    for (std::size_t i = 0; i < fit.final_params.size(); ++i)
      fp[fit.final_params.labels[i]] = fit.final_params.values[i];
    rep["final_params"] = fp;
    rep["converged"] = fit.converged;
    rep["iterations"] = fit.iterations;
    rep["cost_trace"] = fit.cost_trace;
    rep["estimator"] = fit.estimator;
    rep["cost_kind"] = fit.cost_kind;
    ok = fit.converged;
  }
  write_json_file(out_json, rep);
  return ok ? exit_code::ok : exit_code::numeric;
}

void cmd_kalman(const Config& cfg, const std::string& in_csv,
                const KalmanOptions& opt, const std::string& out_csv) {
  const TimeSeries series = read_series(in_csv);
  const double dt = series.dt;
  const auto gyro = series.gyro();

  // measurement source
  std::vector<double> z_raw;
  std::size_t source_warmup = 0;
  if (opt.measurement == "accel") {
    const auto ax = series.ax();
    const auto ay = series.ay();
    z_raw.resize(ax.size());
    for (std::size_t i = 0; i < ax.size(); ++i)
      z_raw[i] = accel_angle(ax[i], ay[i]);
  } else {
    EstimateOptions eopts;
    eopts.algos = {opt.measurement};
    const auto runs = run_estimators(cfg, series, eopts);
    z_raw = runs[0].theta_est;
    source_warmup = runs[0].valid_from;
  }

  std::vector<std::optional<double>> z(z_raw.size());
  for (std::size_t i = 0; i < z_raw.size(); ++i)
    if (!std::isnan(z_raw[i])) z[i] = z_raw[i];

  double R;
  if (cfg.kalman.r) {
    R = *cfg.kalman.r;
  } else {
    // variance of the source over the calibration window (quasi-static head)
    const auto n_cal = std::min<std::size_t>(
        z_raw.size(),
        source_warmup +
            static_cast<std::size_t>(std::llround(cfg.kalman.calib_window_s / dt)));
    double mean = 0.0;
    std::size_t m = 0;
    for (std::size_t i = source_warmup; i < n_cal; ++i)
      if (!std::isnan(z_raw[i])) {
        mean += z_raw[i];
        ++m;
      }
    if (m < 2) throw NumericError("kalman: calibration window too short");
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = source_warmup; i < n_cal; ++i)
      if (!std::isnan(z_raw[i])) {
        const double d = z_raw[i] - mean;
        var += d * d;
      }
    R = std::max(var / static_cast<double>(m - 1), 1e-12);
  }

  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  Q(0, 0) = cfg.kalman.q_theta;
  Q(1, 1) = cfg.kalman.q_bias;
  KalmanModel model = KalmanModel::imu(dt, Q, R);
  model.joseph_update = cfg.kalman.joseph;

  KalmanState x0;
  x0.P = Eigen::Vector2d(1e-2, 1e-4).asDiagonal();
  for (const auto& zi : z)
    if (zi) {
      x0.x(0) = *zi;
      break;
    }

  const auto states = run_filter(model, x0, gyro, z);

  Table t;
  t.headers = {"t_s",       "theta_true_rad", "phi_rad", "gyro_rad_s",
               "ax_ms2",    "ay_ms2",         "theta_kf_rad",
               "b_kf_rad_s", "p00",           "p01",     "p11"};
  t.columns.assign(t.headers.size(), {});
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    const auto& r = series.records[i];
    t.columns[0].push_back(r.t);
    t.columns[1].push_back(r.theta_true ? *r.theta_true : kNaN);
    t.columns[2].push_back(r.phi);
    t.columns[3].push_back(r.gyro);
    t.columns[4].push_back(r.ax);
    t.columns[5].push_back(r.ay);
    t.columns[6].push_back(states[i].x(0));
    t.columns[7].push_back(states[i].x(1));
    t.columns[8].push_back(states[i].P(0, 0));
    t.columns[9].push_back(states[i].P(0, 1));
    t.columns[10].push_back(states[i].P(1, 1));
  }
  const Provenance prov = make_provenance(cfg, false);
  write_table(out_csv, t, prov);

  json rep{{"command", "kalman"},
           {"input", in_csv},
           {"measurement", opt.measurement},
           {"R", R},
           {"dt", dt},
           {"final_bias", states.back().x(1)},
           {"provenance", provenance_to_json(prov)}};
  const auto truth = series.theta_true_or_empty();
  if (!truth.empty()) {
    std::vector<double> theta_kf(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) theta_kf[i] = states[i].x(0);
    rep["metrics"] = metrics_to_json(
        compute_metrics(theta_kf, truth, source_warmup, dt, 0));
  }
  write_json_file(out_csv + ".report.json", rep);
}

void cmd_report(const Config& cfg, const std::vector<std::string>& inputs,
                const std::string& out_dir, const ReportOptions& opt) {
  if (inputs.empty()) throw UsageError("report: no inputs given");
  fs::create_directories(out_dir);

  struct Loaded {
    std::string path;
    Table table;
  };
  std::vector<Loaded> loaded;
  for (const auto& p : inputs) loaded.push_back({p, read_table(p)});

  // All inputs must share the time base.
  const auto t0_idx = loaded.front().table.column_index("t_s");
  if (t0_idx < 0) throw SchemaError(loaded.front().path + ": missing t_s");
  const auto& t_ref = loaded.front().table.columns[static_cast<std::size_t>(t0_idx)];
  for (const auto& l : loaded) {
    const int ti = l.table.column_index("t_s");
    if (ti < 0) throw SchemaError(l.path + ": missing t_s");
    const auto& tc = l.table.columns[static_cast<std::size_t>(ti)];
    if (tc.size() != t_ref.size())
      throw SchemaError("report: time bases differ between inputs");
    for (std::size_t i = 0; i < tc.size(); ++i)
      if (std::abs(tc[i] - t_ref[i]) > 1e-9)
        throw SchemaError("report: time bases differ between inputs");
  }

  const double dt = t_ref.size() > 1 ? t_ref[1] - t_ref[0] : 0.0;
  const double unit = opt.degrees ? 180.0 / 3.14159265358979323846 : 1.0;
  const std::string unit_name = opt.degrees ? "deg" : "rad";

  std::optional<FirFilter> fir;
  if (cfg.report.fir && dt > 0.0 &&
      t_ref.size() > static_cast<std::size_t>(cfg.report.fir_order) + 1)
    fir = design_fir(cfg.report.fir_order, cfg.report.fir_cutoff_hz, 1.0 / dt);

  auto condition = [&](std::vector<double> v) {
    // zero-phase conditioning of the finite tail; NaN warm-up is preserved
    std::size_t first = 0;
    while (first < v.size() && std::isnan(v[first])) ++first;
    if (!fir || v.size() - first <= fir->taps.size()) return v;
    const std::span<const double> seg{v.data() + first, v.size() - first};
    const auto filtered = apply_fir(*fir, seg, FilterMode::zero_phase).y;
    std::copy(filtered.begin(), filtered.end(),
              v.begin() + static_cast<std::ptrdiff_t>(first));
    return v;
  };

  const Provenance prov = make_provenance(cfg, false);
  json summary{{"command", "report"}, {"provenance", provenance_to_json(prov)},
               {"units", unit_name}};
  json files = json::array();

  for (const auto& l : loaded) {
    const std::string stem = fs::path(l.path).stem().string();
    const int truth_idx = l.table.column_index("theta_true_rad");
    for (std::size_t c = 0; c < l.table.headers.size(); ++c) {
      const auto& h = l.table.headers[c];
      if (h.rfind("theta_", 0) != 0 || h == "theta_true_rad") continue;
      if (h.size() < 10 || h.substr(h.size() - 4) != "_rad") continue;
      const std::string method = h.substr(6, h.size() - 10);
      const auto angled = condition(l.table.columns[c]);

      Table ta;
      ta.headers = {"t_s", "angle_" + unit_name};
      ta.columns.resize(2);
      ta.columns[0] = t_ref;
      ta.columns[1].reserve(angled.size());
      for (double v : angled) ta.columns[1].push_back(v * unit);
      const std::string angle_path =
          (fs::path(out_dir) / (stem + "__" + method + "_angle.csv")).string();
      write_table(angle_path, ta, prov);
      files.push_back(angle_path);

      if (truth_idx >= 0) {
        const auto& truth = l.table.columns[static_cast<std::size_t>(truth_idx)];
        Table te;
        te.headers = {"t_s", "error_" + unit_name};
        te.columns.resize(2);
        te.columns[0] = t_ref;
        te.columns[1].reserve(angled.size());
        for (std::size_t i = 0; i < angled.size(); ++i)
          te.columns[1].push_back((angled[i] - truth[i]) * unit);
        const std::string err_path =
            (fs::path(out_dir) / (stem + "__" + method + "_error.csv")).string();
        write_table(err_path, te, prov);
        files.push_back(err_path);
      }
    }
    // metrics come verbatim from the sibling run report; nothing is recomputed
    const std::string sibling = l.path + ".report.json";
    if (fs::exists(sibling)) summary["runs"][l.path] = read_json_file(sibling);
  }
  summary["files"] = files;
  write_json_file((fs::path(out_dir) / "summary.json").string(), summary);
}

}  // namespace tilt
