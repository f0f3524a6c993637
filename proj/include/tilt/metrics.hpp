// Run metrics mirroring the experiment figures: RMS and peak error, the
// cross-correlation delay, and the overshoot of the estimate's peak over
// the true peak.
#pragma once

#include <cstddef>
#include <span>

namespace tilt {

struct SeriesMetrics {
  std::size_t n_valid = 0;
  double rms_rad = 0.0;
  double max_abs_rad = 0.0;
  int delay_samples = 0;     // positive: estimate lags truth
  double delay_s = 0.0;
  double overshoot_rad = 0.0;  // max(est) - max(truth) over valid samples
  std::size_t clamp_count = 0;
};

double rms_error(std::span<const double> est, std::span<const double> truth,
                 std::size_t valid_from);
double max_abs_error(std::span<const double> est, std::span<const double> truth,
                     std::size_t valid_from);

// Argmax over integer lags of the normalized cross-correlation between the
// estimate and the truth, searched within +/- max_lag_s.
int xcorr_delay_samples(std::span<const double> est,
                        std::span<const double> truth, std::size_t valid_from,
                        double dt, double max_lag_s = 0.5);

double overshoot(std::span<const double> est, std::span<const double> truth,
                 std::size_t valid_from);

SeriesMetrics compute_metrics(std::span<const double> est,
                              std::span<const double> truth,
                              std::size_t valid_from, double dt,
                              std::size_t clamp_count = 0,
                              double max_lag_s = 0.5);

}  // namespace tilt
