#pragma once

// RFC 4180 output: comma separated, CRLF-free ("\n") lines, fields quoted only when needed,
// numbers printed with 17 significant digits and '.' as decimal separator.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace solvgeo::csv {

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

}  // namespace solvgeo::csv
