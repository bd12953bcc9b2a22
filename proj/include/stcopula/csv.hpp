#pragma once

#include <istream>
#include <string>
#include <vector>

namespace stcopula::csv {

// Splits one CSV line; supports double-quoted fields with embedded commas
// and doubled quotes. Trailing CR is stripped.
std::vector<std::string> split_line(const std::string& line);

// Reads all rows; skips fully empty lines.
std::vector<std::vector<std::string>> read_all(std::istream& in);

// Fixed 6-decimal formatting used by every numeric export.
std::string fmt(double v);

}  // namespace stcopula::csv
