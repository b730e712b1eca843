#include "romkit/csv.hpp"

#include <cmath>
#include <cstdio>

namespace romkit {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", value);
  return buffer;
}

}  // namespace romkit
