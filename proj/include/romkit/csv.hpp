#pragma once

#include <string>

namespace romkit {

/// `%.16e`; NaN prints as `nan`. Seventeen significant digits round-trip
/// every double exactly.
std::string format_double(double value);

}  // namespace romkit
