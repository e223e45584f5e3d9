#pragma once

// Plain-text formats: grid functions as CSV (index,real,imag), tables as CSV with a header
// row, plot curves as two whitespace-separated columns. Every double is written with 17
// significant digits.

#include <iosfwd>
#include <string>
#include <vector>

#include "tpdo/torus.hpp"

namespace tpdo::io {

std::string format_double(double v);

void write_grid_csv(std::ostream& out, const GridFunction& f);
/// Needs every flat index of `spec` exactly once, in any order.
GridFunction read_grid_csv(std::istream& in, const GridSpec& spec);

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

void write_curve(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tpdo::io
