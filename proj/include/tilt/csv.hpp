// CSV log schema and generic numeric tables. Canonical sensor logs carry
// the header t_s,theta_true_rad,phi_rad,gyro_rad_s,ax_ms2,ay_ms2; the
// theta_true_rad cell may be empty per row. Lines starting with '#' are
// provenance comments and are skipped on read.
#pragma once

#include <string>
#include <vector>

#include "tilt/sensors.hpp"

namespace tilt {

struct Provenance {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool has_seed = false;

  std::vector<std::string> comment_lines() const;
};

inline constexpr const char* kSeriesHeader =
    "t_s,theta_true_rad,phi_rad,gyro_rad_s,ax_ms2,ay_ms2";

TimeSeries read_series(const std::string& path);
void write_series(const std::string& path, const TimeSeries& series,
                  const Provenance& prov);

// Column-oriented numeric table with empty cells represented as NaN.
struct Table {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  // -1 when absent
  int column_index(const std::string& name) const;
};

Table read_table(const std::string& path);
void write_table(const std::string& path, const Table& table,
                 const Provenance& prov);

// Shortest text that parses back to the same double; empty for NaN.
std::string format_cell(double v);

}  // namespace tilt
