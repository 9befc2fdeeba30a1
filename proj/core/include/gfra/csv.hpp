#pragma once

#include <string>
#include <vector>

namespace gfra {

// Shortest decimal form that round-trips an IEEE double (17 significant digits).
std::string fmt_g17(double x);

std::vector<std::string> split_csv_line(const std::string& line);

// strtod with "inf"/"-inf"/"nan" support; throws std::invalid_argument on junk.
double parse_double(const std::string& s);
long parse_long(const std::string& s);

}  // namespace gfra
