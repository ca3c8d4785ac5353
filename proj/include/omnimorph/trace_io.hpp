#pragma once

// CSV serialization of simulation traces. Values print with %.17g, so a
// write/read cycle reproduces every double bit-exactly.

#include "omnimorph/sim.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnimorph {

inline constexpr int kTraceCols = 33;
inline constexpr const char* kTraceVersionLine = "# omnimorph-trace v1";

inline const std::array<const char*, kTraceCols>& trace_columns() {
  static const std::array<const char*, kTraceCols> names = {
      "t",    "px",  "py",  "pz",  "pdx", "pdy", "pdz", "qw",  "qx",  "qy",    "qz",
      "qdw",  "qdx", "qdy", "qdz", "alpha", "u1", "u2",  "u3",  "u4",  "u5",   "u6",
      "u7",   "u8",  "fx",  "fy",  "fz",  "mx",  "my",  "mz",  "P_drag", "E_drag", "E_accel"};
  return names;
}

namespace detail {

inline std::array<double, kTraceCols> row_to_values(const TraceRow& r) {
  std::array<double, kTraceCols> v{};
  int i = 0;
  v[i++] = r.t;
  for (int k = 0; k < 3; ++k) v[i++] = r.p[k];
  for (int k = 0; k < 3; ++k) v[i++] = r.p_d[k];
  for (int k = 0; k < 4; ++k) v[i++] = r.q[k];
  for (int k = 0; k < 4; ++k) v[i++] = r.q_d[k];
  v[i++] = r.alpha;
  for (int k = 0; k < 8; ++k) v[i++] = r.u_w[k];
  for (int k = 0; k < 6; ++k) v[i++] = r.wrench[k];
  v[i++] = r.P_drag;
  v[i++] = r.E_drag;
  v[i++] = r.E_accel;
  return v;
}

inline TraceRow values_to_row(const std::array<double, kTraceCols>& v) {
  TraceRow r;
  int i = 0;
  r.t = v[i++];
  for (int k = 0; k < 3; ++k) r.p[k] = v[i++];
  for (int k = 0; k < 3; ++k) r.p_d[k] = v[i++];
  for (int k = 0; k < 4; ++k) r.q[k] = v[i++];
  for (int k = 0; k < 4; ++k) r.q_d[k] = v[i++];
  r.alpha = v[i++];
  for (int k = 0; k < 8; ++k) r.u_w[k] = v[i++];
  for (int k = 0; k < 6; ++k) r.wrench[k] = v[i++];
  r.P_drag = v[i++];
  r.E_drag = v[i++];
  r.E_accel = v[i++];
  return r;
}

inline void print_value(std::ostream& os, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}

}  // namespace detail

struct TraceParseError : std::runtime_error {
  TraceParseError(int line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_no(line) {}
  int line_no;
};

// Full schema, or the named column subset when `subset` is given.
inline void write_trace(std::ostream& os, const SimTrace& trace,
                        const std::vector<std::string>* subset = nullptr) {
  std::vector<int> cols;
  if (subset) {
    for (const std::string& name : *subset) {
      int found = -1;
      for (int c = 0; c < kTraceCols; ++c)
        if (name == trace_columns()[c]) { found = c; break; }
      if (found < 0) throw std::invalid_argument("write_trace: unknown column " + name);
      cols.push_back(found);
    }
  } else {
    for (int c = 0; c < kTraceCols; ++c) cols.push_back(c);
  }

  os << kTraceVersionLine << "\n";
  for (size_t j = 0; j < cols.size(); ++j)
    os << (j ? "," : "") << trace_columns()[cols[j]];
  os << "\n";
  for (const TraceRow& row : trace.rows) {
    const auto vals = detail::row_to_values(row);
    for (size_t j = 0; j < cols.size(); ++j) {
      if (j) os << ",";
      detail::print_value(os, vals[cols[j]]);
    }
    os << "\n";
  }
}

// Reads a full-schema trace (summary fields are not serialized and stay
// default). Throws TraceParseError with the offending line number.
inline SimTrace read_trace(std::istream& is) {
  std::string line;
  int line_no = 0;
  const auto chomp = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };

  if (!std::getline(is, line)) throw TraceParseError(1, "empty input");
  ++line_no;
  chomp(line);
  if (line != kTraceVersionLine)
    throw TraceParseError(line_no, "expected version line '" + std::string(kTraceVersionLine) + "'");

  if (!std::getline(is, line)) throw TraceParseError(2, "missing column header");
  ++line_no;
  chomp(line);
  {
    std::string expected;
    for (int c = 0; c < kTraceCols; ++c)
      expected += std::string(c ? "," : "") + trace_columns()[c];
    if (line != expected) throw TraceParseError(line_no, "column header mismatch");
  }

  SimTrace trace;
  while (std::getline(is, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    std::array<double, kTraceCols> vals{};
    const char* s = line.c_str();
    for (int c = 0; c < kTraceCols; ++c) {
      char* end = nullptr;
      vals[c] = std::strtod(s, &end);
      if (end == s) throw TraceParseError(line_no, "bad number in column " + std::to_string(c + 1));
      s = end;
      if (c + 1 < kTraceCols) {
        if (*s != ',') throw TraceParseError(line_no, "expected comma after column " + std::to_string(c + 1));
        ++s;
      }
    }
    if (*s != '\0')
      throw TraceParseError(line_no, "trailing characters after last column");
    trace.rows.push_back(detail::values_to_row(vals));
  }
  return trace;
}

}  // namespace omnimorph
