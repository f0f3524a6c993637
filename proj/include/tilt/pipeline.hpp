// Command implementations behind the CLI: scenario generation, estimator
// runs with metrics, parameter fitting, filtering, and plot-data emission.
// They live in the library so tests drive them directly.
#pragma once

#include <string>
#include <vector>

#include "tilt/config.hpp"
#include "tilt/csv.hpp"
#include "tilt/metrics.hpp"

namespace tilt {

inline constexpr const char* kVersion = "0.1.0";

Provenance make_provenance(const Config& cfg, bool with_seed);

void cmd_simulate(const Config& cfg, const std::string& out_csv);

struct EstimateOptions {
  std::vector<std::string> algos = {"algo2"};  // raw accel algo1 algo2 algo3
  std::string params_from;  // fit-report JSON for algo3 coefficients
};

struct MethodRun {
  std::string name;
  std::vector<double> theta_est;
  std::size_t valid_from = 0;
  std::size_t clamp_count = 0;
  bool has_metrics = false;
  SeriesMetrics metrics;
};

std::vector<MethodRun> run_estimators(const Config& cfg,
                                      const TimeSeries& series,
                                      const EstimateOptions& opt);

void cmd_estimate(const Config& cfg, const std::string& in_csv,
                  const EstimateOptions& opt, const std::string& out_csv);

struct FitOptions {
  std::string mode = "offline";  // offline | live
  std::string algo = "algo2";
  bool supervise = false;        // periodic supervision over the log
  std::vector<double> p0;        // optional explicit start values
};

// Returns 0 on convergence, the numeric-failure code otherwise.
int cmd_fit(const Config& cfg, const std::string& in_csv,
            const FitOptions& opt, const std::string& out_json);

struct KalmanOptions {
  std::string measurement = "accel";  // accel | algo1 | algo2 | algo3
};

void cmd_kalman(const Config& cfg, const std::string& in_csv,
                const KalmanOptions& opt, const std::string& out_csv);

struct ReportOptions {
  bool degrees = false;
};

void cmd_report(const Config& cfg, const std::vector<std::string>& inputs,
                const std::string& out_dir, const ReportOptions& opt);

}  // namespace tilt
