#include "tpdo/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "tpdo/errors.hpp"

namespace tpdo::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_grid_csv(std::ostream& out, const GridFunction& f) {
  out << "index,real,imag\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << i << ',' << format_double(f[i].real()) << ',' << format_double(f[i].imag()) << '\n';
}

GridFunction read_grid_csv(std::istream& in, const GridSpec& spec) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("grid CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,real,imag") throw ValidationError("grid CSV header must be 'index,real,imag', got '" + line + "'");
  const std::size_t n = spec.point_count();
  std::vector<Complex> v(n);
  std::vector<char> seen(n, 0);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw ValidationError("grid CSV line " + std::to_string(lineno) + ": expected 3 fields");
    std::size_t idx = 0;
    double re = 0.0, im = 0.0;
    try {
      std::size_t used = 0;
      const long long parsed = std::stoll(a, &used);
      if (used != a.size() || parsed < 0) throw std::invalid_argument("index");
      idx = static_cast<std::size_t>(parsed);
      re = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument("real");
      im = std::stod(c, &used);
      if (used != c.size()) throw std::invalid_argument("imag");
    } catch (const std::exception&) {
      throw ValidationError("grid CSV line " + std::to_string(lineno) + ": malformed number");
    }
    if (idx >= n) throw ValidationError("grid CSV line " + std::to_string(lineno) + ": index out of range");
    if (seen[idx]) throw ValidationError("grid CSV line " + std::to_string(lineno) + ": duplicate index");
    seen[idx] = 1;
    v[idx] = {re, im};
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError("grid CSV is missing index " + std::to_string(i));
  return GridFunction(spec, std::move(v));
}

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

void write_curve(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("curve columns differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) out << format_double(x[i]) << ' ' << format_double(y[i]) << '\n';
}

}  // namespace tpdo::io
