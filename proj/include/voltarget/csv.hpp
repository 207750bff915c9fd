#pragma once

#include <string>
#include <vector>

namespace voltarget::csv {

// Shortest round-trip decimal form (to_chars); locale independent, so CSV
// output is byte-stable across runs and environments.
std::string format_double(double x);

std::string join_row(const std::vector<std::string>& cells);

// Writes header + rows to path, '\n' line endings, no trailing spaces.
void write_file(const std::string& path, const std::string& header,
                const std::vector<std::string>& rows);

}  // namespace voltarget::csv
