#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fedchip {

// Minimal RFC 4180 quoting for the CSV artifacts this library writes.
std::string csv_field(std::string_view s);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// "%.17g"; round-trips every double.
std::string format_double(double v);

}  // namespace fedchip
