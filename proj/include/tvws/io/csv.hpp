#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tvws/core/signal.hpp"

namespace tvws {

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim_ws(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Numeric table with optional column names.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Comma-separated numbers, one row per line. A first line that does not parse as
/// numbers is taken as the header. Blank lines and lines starting with '#' are skipped.
inline CsvTable read_csv_table(std::istream& in, const std::string& name = "csv") {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = detail::trim_ws(line);
    if (s.empty() || s.front() == '#') continue;
    const auto fields = detail::split_fields(s);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (first) {
      first = false;
      if (!numeric) {
        t.header = fields;
        t.columns.resize(fields.size());
        continue;
      }
      if (t.columns.empty()) t.columns.resize(row.size());
    }
    if (!numeric) throw IoError(name + ":" + std::to_string(lineno) + ": non-numeric field");
    if (row.size() != t.columns.size())
      throw IoError(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) + " fields, got " +
                    std::to_string(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) t.columns[c].push_back(row[c]);
  }
  if (t.rows() == 0) throw IoError(name + ": no data rows");
  return t;
}

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv_table(in, path);
}

/// Signal from a table: columns (t, value) or (value). With a time column the sampling
/// rate comes from the mean step and must agree with `fs` when both are given; with a
/// single column `fs` is required.
inline RealSignal signal_from_table(const CsvTable& t, std::optional<double> fs, const std::string& name = "csv") {
  if (t.columns.size() == 1) {
    if (!fs) throw InvalidArgument(name + ": single-column input needs a sampling rate");
    RealSignal x(t.columns[0], *fs);
    x.validate(name);
    return x;
  }
  if (t.columns.size() != 2) throw IoError(name + ": expected columns 't,value' or 'value'");
  const auto& tc = t.columns[0];
  if (tc.size() < 2) throw IoError(name + ": need at least two samples to infer the sampling rate");
  const double step = (tc.back() - tc.front()) / static_cast<double>(tc.size() - 1);
  if (!(step > 0.0)) throw IoError(name + ": time column must increase");
  for (std::size_t n = 1; n < tc.size(); ++n)
    if (std::abs(tc[n] - tc[n - 1] - step) > 1e-3 * step) throw IoError(name + ": time column is not uniformly sampled");
  const double inferred = 1.0 / step;
  if (fs && std::abs(*fs - inferred) > 1e-6 * inferred)
    throw InvalidArgument(name + ": --fs disagrees with the time column (" + std::to_string(inferred) + " Hz)");
  RealSignal x(t.columns[1], fs.value_or(inferred), tc.front());
  x.validate(name);
  return x;
}

inline RealSignal read_signal_csv(const std::string& path, std::optional<double> fs = {}) {
  return signal_from_table(read_csv_table(path), fs, path);
}

/// Writes equally long columns with a header line; values at full precision.
inline void write_csv_columns(std::ostream& out, const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw InvalidArgument("write_csv: header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidArgument("write_csv: columns differ in length");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, columns[c][r]);
      if (c) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

inline void write_csv_columns(const std::string& path, const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv_columns(out, header, columns);
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// `t,value` with t = t0 + n / fs.
inline void write_signal_csv(const std::string& path, const RealSignal& x, const std::string& value_name = "value") {
  write_csv_columns(path, {"t", value_name}, {x.times(), x.samples});
}

}  // namespace tvws
