#include "gfra/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace gfra {

std::string fmt_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  double v = std::strtod(p, &end);
  if (end == p) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long parse_long(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  long v = std::strtol(p, &end, 10);
  if (end == p) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

}  // namespace gfra
