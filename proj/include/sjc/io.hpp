#pragma once

// CSV ingestion and output for the study's three inputs and the CLI's pair
// and return files. Columns are located by header name; quoting is not
// supported because none of the formats need it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sjc/calendar.hpp"
#include "sjc/panel.hpp"

namespace sjc {

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {
    std::string line;
    if (!next_line(line)) throw std::runtime_error(source_ + ": empty file");
    header_ = split(line);
  }

  /// Index of a required column.
  std::size_t column(std::string_view name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) throw std::runtime_error(source_ + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header_.begin());
  }

  const std::vector<std::string>& header() const noexcept { return header_; }

  bool next(std::vector<std::string>& row) {
    std::string line;
    while (next_line(line)) {
      if (line.empty()) continue;
      row = split(line);
      if (row.size() != header_.size()) {
        throw std::runtime_error(where() + ": expected " + std::to_string(header_.size()) + " fields, got " +
                                 std::to_string(row.size()));
      }
      return true;
    }
    return false;
  }

  double number(const std::string& field) const {
    double x = 0.0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), x);
    if (r.ec != std::errc{} || r.ptr != field.data() + field.size() || !std::isfinite(x)) {
      throw std::runtime_error(where() + ": not a finite number '" + field + "'");
    }
    return x;
  }

  long long integer(const std::string& field) const {
    long long x = 0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), x);
    if (r.ec != std::errc{} || r.ptr != field.data() + field.size()) {
      throw std::runtime_error(where() + ": not an integer '" + field + "'");
    }
    return x;
  }

  Date date(const std::string& field) const {
    try {
      return parse_date(field);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where() + ": " + e.what());
    }
  }

  std::string where() const { return source_ + ":" + std::to_string(line_no_); }

 private:
  bool next_line(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// recommendations.csv

inline std::vector<ConsensusRecord> read_recommendations(std::istream& in, const std::string& source = "recommendations") {
  CsvReader csv(in, source);
  const auto c_id = csv.column("security_id"), c_date = csv.column("vintage_date"), c_rec = csv.column("mean_rec"),
             c_n = csv.column("num_analysts");
  std::vector<ConsensusRecord> out;
  std::vector<std::string> row;
  while (csv.next(row)) {
    ConsensusRecord r{row[c_id], csv.date(row[c_date]), csv.number(row[c_rec]),
                      static_cast<int>(csv.integer(row[c_n]))};
    try {
      r.validate();
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(csv.where() + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ConsensusRecord> read_recommendations(const std::string& path) {
  auto in = open_input(path);
  return read_recommendations(in, path);
}

inline void write_recommendations(std::ostream& out, const std::vector<ConsensusRecord>& recs) {
  out << "security_id,vintage_date,mean_rec,num_analysts\n";
  for (const auto& r : recs) {
    out << r.security_id << ',' << to_string(r.vintage_date) << ',' << format_double(r.mean_rec_original) << ','
        << r.num_analysts << '\n';
  }
}

// ---------------------------------------------------------------------------
// prices.csv and benchmark.csv

namespace detail {

inline void sort_series(PriceSeries& s, const std::string& what) {
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.dates[a] < s.dates[b]; });
  PriceSeries sorted;
  for (std::size_t i : idx) {
    sorted.dates.push_back(s.dates[i]);
    sorted.values.push_back(s.values[i]);
  }
  sorted.validate(what);
  s = std::move(sorted);
}

}  // namespace detail

inline PriceTable read_prices(std::istream& in, const std::string& source = "prices") {
  CsvReader csv(in, source);
  const auto c_id = csv.column("security_id"), c_date = csv.column("date"), c_close = csv.column("close");
  PriceTable out;
  std::vector<std::string> row;
  while (csv.next(row)) {
    auto& s = out[row[c_id]];
    s.dates.push_back(csv.date(row[c_date]));
    s.values.push_back(csv.number(row[c_close]));
  }
  for (auto& [id, s] : out) detail::sort_series(s, source + " (" + id + ")");
  return out;
}

inline PriceTable read_prices(const std::string& path) {
  auto in = open_input(path);
  return read_prices(in, path);
}

inline void write_prices(std::ostream& out, const PriceTable& prices) {
  out << "security_id,date,close\n";
  for (const auto& [id, s] : prices) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << id << ',' << to_string(s.dates[i]) << ',' << format_double(s.values[i]) << '\n';
    }
  }
}

inline PriceSeries read_benchmark(std::istream& in, const std::string& source = "benchmark") {
  CsvReader csv(in, source);
  const auto c_date = csv.column("date"), c_level = csv.column("level");
  PriceSeries s;
  std::vector<std::string> row;
  while (csv.next(row)) {
    s.dates.push_back(csv.date(row[c_date]));
    s.values.push_back(csv.number(row[c_level]));
  }
  detail::sort_series(s, source);
  return s;
}

inline PriceSeries read_benchmark(const std::string& path) {
  auto in = open_input(path);
  return read_benchmark(in, path);
}

inline void write_benchmark(std::ostream& out, const PriceSeries& s) {
  out << "date,level\n";
  for (std::size_t i = 0; i < s.size(); ++i) out << to_string(s.dates[i]) << ',' << format_double(s.values[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Pairs (u,v) and single numeric columns

inline std::pair<std::vector<double>, std::vector<double>> read_pairs(std::istream& in,
                                                                      const std::string& source = "pairs") {
  CsvReader csv(in, source);
  const auto cu = csv.column("u"), cv = csv.column("v");
  std::pair<std::vector<double>, std::vector<double>> out;
  std::vector<std::string> row;
  while (csv.next(row)) {
    out.first.push_back(csv.number(row[cu]));
    out.second.push_back(csv.number(row[cv]));
  }
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> read_pairs(const std::string& path) {
  auto in = open_input(path);
  return read_pairs(in, path);
}

inline void write_pairs(std::ostream& out, const std::vector<double>& u, const std::vector<double>& v) {
  out << "u,v\n";
  for (std::size_t i = 0; i < u.size(); ++i) out << format_double(u[i]) << ',' << format_double(v[i]) << '\n';
}

/// One numeric column by name; a single-column file is read whatever its header.
inline std::vector<double> read_column(std::istream& in, const std::string& name, const std::string& source = "series") {
  CsvReader csv(in, source);
  const std::size_t c = csv.header().size() == 1 ? 0 : csv.column(name);
  std::vector<double> out;
  std::vector<std::string> row;
  while (csv.next(row)) out.push_back(csv.number(row[c]));
  return out;
}

inline std::vector<double> read_column(const std::string& path, const std::string& name) {
  auto in = open_input(path);
  return read_column(in, name, path);
}

}  // namespace sjc
