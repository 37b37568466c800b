#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oamp/block_matrix.hpp"

namespace oamp {

// 17 significant digits, round-trip exact.
std::string format_double(double v);

void write_matrix_csv(std::ostream& out, const Mat& m);
void write_matrix_csv(const std::string& path, const Mat& m);
// Comma-separated numbers, one matrix row per line; a non-numeric first line is skipped.
Mat read_matrix_csv(const std::string& path);

} // namespace oamp
