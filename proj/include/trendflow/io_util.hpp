#pragma once

#include <string>

namespace trendflow {

// Decimal text with 17 significant digits; parse_double(format_double(x))
// reproduces x bit-for-bit.
std::string format_double(double value);
double parse_double(const std::string& text);

// Writes via a temporary file in the same directory, then renames, so readers
// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace trendflow
