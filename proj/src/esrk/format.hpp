#pragma once

#include <cstdio>
#include <string>

namespace esrk {

/// Scientific notation with 17 significant digits and a '.' separator
/// regardless of the process locale.
inline std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  std::string out(buf);
  for (char& ch : out)
    if (ch == ',') ch = '.';
  return out;
}

} // namespace esrk
