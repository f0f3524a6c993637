// pendtilt: pendulum-as-tilt-sensor toolkit.
//   simulate  generate a synthetic sensor log from a tilt scenario
//   estimate  run tilt estimators over a log and report metrics
//   fit       identify estimator parameters (offline truth or live gyro cost)
//   kalman    fuse a measurement source with the gyro in a Kalman filter
//   report    emit plot-data files and a metrics summary

#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "tilt/errors.hpp"
#include "tilt/pipeline.hpp"

namespace {

tilt::Config load_or_default(const std::string& path) {
  if (path.empty()) return tilt::Config{};
  return tilt::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pendulum tilt estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // common flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>(
         "--seed",
         [&](std::uint64_t s) {
           seed = s;
           seed_set = true;
         },
         "override the noise seed");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic sensor log");
  std::string sim_out;
  sim->add_option("--out", sim_out, "output CSV")->required();

  auto* est = app.add_subcommand("estimate", "run estimators over a log");
  std::string est_in, est_out;
  tilt::EstimateOptions est_opt;
  est->add_option("--input", est_in, "input CSV")->required()
      ->check(CLI::ExistingFile);
  est->add_option("--out", est_out, "output CSV")->required();
  est->add_option("--algo", est_opt.algos,
                  "methods: raw accel algo1 algo2 algo3")
      ->delimiter(',');
  est->add_option("--params-from", est_opt.params_from,
                  "fit report JSON supplying algo3 coefficients");
  std::string est_prefilter;
  est->add_option("--prefilter", est_prefilter,
                  "condition estimator inputs before differencing")
      ->check(CLI::IsMember({"none", "phi", "gyro", "both"}));

  auto* fit = app.add_subcommand("fit", "identify estimator parameters");
  std::string fit_in, fit_out;
  tilt::FitOptions fit_opt;
  fit->add_option("--input", fit_in, "input CSV")->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "output JSON")->required();
  fit->add_option("--mode", fit_opt.mode, "offline|live");
  fit->add_option("--algo", fit_opt.algo, "algo1|algo2|algo3");
  fit->add_flag("--supervise", fit_opt.supervise,
                "periodic live supervision over the log");
  fit->add_option("--p0", fit_opt.p0, "initial parameter values")
      ->delimiter(',');

  auto* kal = app.add_subcommand("kalman", "run the tilt/bias Kalman filter");
  std::string kal_in, kal_out;
  tilt::KalmanOptions kal_opt;
  kal->add_option("--input", kal_in, "input CSV")->required()
      ->check(CLI::ExistingFile);
  kal->add_option("--out", kal_out, "output CSV")->required();
  kal->add_option("--measurement", kal_opt.measurement,
                  "accel|algo1|algo2|algo3");

  auto* rep = app.add_subcommand("report", "emit plot data and a summary");
  std::vector<std::string> rep_inputs;
  std::string rep_outdir;
  tilt::ReportOptions rep_opt;
  rep->add_option("inputs", rep_inputs, "run output CSVs")->required();
  rep->add_option("--out", rep_outdir, "output directory")->required();
  rep->add_flag("--degrees", rep_opt.degrees,
                "emit plot data in degrees (logs stay radians internally)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tilt::exit_code::usage;
  }

  try {
    tilt::Config cfg = load_or_default(config_path);
    if (seed_set) cfg.noise.seed = seed;

    if (*sim) {
      tilt::cmd_simulate(cfg, sim_out);
    } else if (*est) {
      if (!est_prefilter.empty()) cfg.estimator.prefilter.channels = est_prefilter;
      tilt::cmd_estimate(cfg, est_in, est_opt, est_out);
    } else if (*fit) {
      return tilt::cmd_fit(cfg, fit_in, fit_opt, fit_out);
    } else if (*kal) {
      tilt::cmd_kalman(cfg, kal_in, kal_opt, kal_out);
    } else if (*rep) {
      tilt::cmd_report(cfg, rep_inputs, rep_outdir, rep_opt);
    }
    return tilt::exit_code::ok;
  } catch (const tilt::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return tilt::exit_code::usage;
  } catch (const tilt::SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return tilt::exit_code::schema;
  } catch (const tilt::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return tilt::exit_code::numeric;
  } catch (const tilt::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return tilt::exit_code::io;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
