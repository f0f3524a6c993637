#include "tilt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tilt/errors.hpp"

namespace tilt {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& s, std::size_t row, const std::string& col) {
  if (s.empty()) return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw SchemaError("row " + std::to_string(row) + ", column " + col +
                      ": cannot parse '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> Provenance::comment_lines() const {
  std::vector<std::string> out;
  out.push_back("# pendtilt " + version);
  std::string line = "# config_hash=" + config_hash;
  if (has_seed) line += " seed=" + std::to_string(seed);
  out.push_back(line);
  return out;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TimeSeries read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  TimeSeries ts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      std::string cleaned = line;
      if (!cleaned.empty() && cleaned.back() == '\r') cleaned.pop_back();
      if (cleaned != kSeriesHeader)
        throw SchemaError(path + ": header must be '" +
                          std::string(kSeriesHeader) + "', got '" + cleaned +
                          "'");
      have_header = true;
      continue;
    }
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != 6)
      throw SchemaError(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected 6");
    SampleRecord r;
    r.t = parse_cell(cells[0], row, "t_s");
    const double tt = parse_cell(cells[1], row, "theta_true_rad");
    if (!std::isnan(tt)) r.theta_true = tt;
    r.phi = parse_cell(cells[2], row, "phi_rad");
    r.gyro = parse_cell(cells[3], row, "gyro_rad_s");
    r.ax = parse_cell(cells[4], row, "ax_ms2");
    r.ay = parse_cell(cells[5], row, "ay_ms2");
    if (!std::isfinite(r.t))
      throw SchemaError(path + ": row " + std::to_string(row) +
                        ": t_s must be finite");
    ts.records.push_back(r);
  }
  if (!have_header) throw SchemaError(path + ": missing header row");
  if (ts.records.size() < 2)
    throw SchemaError(path + ": need at least 2 records");
  ts.start = ts.records.front().t;
  ts.dt = ts.records[1].t - ts.records[0].t;
  ts.validate();
  return ts;
}

void write_series(const std::string& path, const TimeSeries& series,
                  const Provenance& prov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& l : prov.comment_lines()) out << l << '\n';
  out << kSeriesHeader << '\n';
  for (const auto& r : series.records) {
    out << format_cell(r.t) << ','
        << (r.theta_true ? format_cell(*r.theta_true) : "") << ','
        << format_cell(r.phi) << ',' << format_cell(r.gyro) << ','
        << format_cell(r.ax) << ',' << format_cell(r.ay) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < headers.size(); ++i)
    if (headers[i] == name) return static_cast<int>(i);
  return -1;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Table t;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      t.headers = split_csv(line);
      t.columns.assign(t.headers.size(), {});
      have_header = true;
      continue;
    }
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != t.headers.size())
      throw SchemaError(path + ": row " + std::to_string(row) +
                        " has wrong cell count");
    for (std::size_t i = 0; i < cells.size(); ++i)
      t.columns[i].push_back(parse_cell(cells[i], row, t.headers[i]));
  }
  if (!have_header) throw SchemaError(path + ": missing header row");
  return t;
}

void write_table(const std::string& path, const Table& table,
                 const Provenance& prov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& l : prov.comment_lines()) out << l << '\n';
  for (std::size_t i = 0; i < table.headers.size(); ++i)
    out << (i ? "," : "") << table.headers[i];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << (c ? "," : "") << format_cell(table.columns[c][r]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace tilt
