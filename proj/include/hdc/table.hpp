#pragma once
/**
 * @file table.hpp
 * @brief Convergence tables: lossless CSV and Markdown with three significant digits.
 *
 * CSV rows are long-form, one per (step, component):
 *
 *     k,component,error,order,diverged
 *
 * Reals are printed with 17 significant digits so parsing reproduces every
 * double exactly. A missing order or a diverged error is an empty field.
 * Step counts are not part of the table; parsed records have n_steps = 0.
 */

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdc/ivp.hpp"

namespace hdc {

struct ConvergenceTable {
  std::string title;
  std::vector<std::string> components;  // column labels, one per error entry
  std::vector<ConvergenceRecord> rows;  // ordered by decreasing step
};

inline const char* kConvergenceCsvHeader = "k,component,error,order,diverged";

/// Default component labels u1..ud.
inline std::vector<std::string> component_labels(std::size_t d, const std::string& stem = "u") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

inline void write_csv(std::ostream& os, const ConvergenceTable& table) {
  os << kConvergenceCsvHeader << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t c = 0; c < table.components.size(); ++c) {
      os << format_exact(r.step) << ',' << table.components[c] << ',';
      if (!r.diverged && c < r.errors.size()) os << format_exact(r.errors[c]);
      os << ',';
      if (c < r.orders.size() && r.orders[c]) os << format_exact(*r.orders[c]);
      os << ',' << (r.diverged ? 1 : 0) << '\n';
    }
  }
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}
}  // namespace detail

/**
 * Inverse of write_csv. Diverged rows come back with NaN errors. Throws
 * std::invalid_argument on malformed input.
 */
inline ConvergenceTable parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty convergence CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kConvergenceCsvHeader) throw std::invalid_argument("unexpected CSV header: " + line);

  ConvergenceTable table;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 5 fields");
    const double k = detail::parse_real(f[0]);
    if (f[4] != "0" && f[4] != "1") throw std::invalid_argument("line " + std::to_string(lineno) + ": bad diverged flag");
    const bool diverged = f[4] == "1";
    if (table.rows.empty() || table.rows.back().step != k) {
      ConvergenceRecord r;
      r.step = k;
      r.diverged = diverged;
      table.rows.push_back(std::move(r));
    }
    auto& r = table.rows.back();
    if (table.rows.size() == 1) table.components.push_back(f[1]);
    r.errors.push_back(f[2].empty() ? std::numeric_limits<double>::quiet_NaN() : detail::parse_real(f[2]));
    r.orders.push_back(f[3].empty() ? std::nullopt : std::optional<double>(detail::parse_real(f[3])));
  }
  return table;
}

namespace detail {
// three significant digits, scientific notation
inline std::string sci3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

inline std::string sig3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::string order_cell(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}
}  // namespace detail

/// Markdown table in the "error (order)" layout; diverged cells show `--`.
inline std::string render_markdown(const ConvergenceTable& table) {
  std::ostringstream os;
  if (!table.title.empty()) os << "### " << table.title << "\n\n";
  os << "| k | N |";
  for (const auto& c : table.components) os << ' ' << c << " |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < table.components.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& r : table.rows) {
    os << "| " << detail::sig3(r.step) << " | " << r.n_steps << " |";
    for (std::size_t c = 0; c < table.components.size(); ++c) {
      if (r.diverged || c >= r.errors.size() || std::isnan(r.errors[c])) {
        os << " -- |";
        continue;
      }
      os << ' ' << detail::sci3(r.errors[c]);
      if (c < r.orders.size() && r.orders[c]) os << " (" << detail::order_cell(*r.orders[c]) << ')';
      os << " |";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace hdc
