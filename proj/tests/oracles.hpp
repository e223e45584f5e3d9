#pragma once

// Independent reference computations used only by the tests. Nothing here calls
// into the library beyond plain data types.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "tpdo/torus.hpp"

namespace oracle {

using tpdo::Complex;
constexpr double kPi = std::numbers::pi;

inline double japanese(double s2) { return std::sqrt(1.0 + s2); }

inline double bracket1(double xi) { return japanese(xi * xi); }

/// Naive O(G^2) forward DFT with the 1/G weight; frequencies in FFT order.
inline std::vector<Complex> direct_dft(const tpdo::GridSpec& spec, const std::vector<Complex>& f) {
  const std::size_t g = spec.point_count();
  tpdo::FrequencyLattice lat(spec);
  std::vector<Complex> out(g);
  for (std::size_t k = 0; k < g; ++k) {
    const auto xi = lat.frequency(k);
    Complex acc{};
    for (std::size_t j = 0; j < g; ++j) {
      const auto x = spec.point(j);
      double phase = 0.0;
      for (int a = 0; a < spec.dim(); ++a) phase += x[a] * static_cast<double>(xi[a]);
      acc += std::polar(1.0, -2.0 * kPi * phase) * f[j];
    }
    out[k] = acc / static_cast<double>(g);
  }
  return out;
}

inline std::vector<Complex> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<Complex> v(n);
  for (auto& z : v) z = {d(rng), d(rng)};
  return v;
}

// Closed forms of the built-in families (n = 1 unless stated).
inline Complex bessel(double m, double xi_norm2) { return std::pow(japanese(xi_norm2), m); }

inline Complex wainger(double a, double b, double xi_norm2) {
  return std::exp(Complex(0.0, std::pow(std::sqrt(xi_norm2), a))) * std::pow(japanese(xi_norm2), -b);
}

inline Complex exotic(double m, double d, double c, double x1, double xi_norm2) {
  const double br = japanese(xi_norm2);
  return std::pow(br, m) * std::exp(Complex(0.0, c * std::sin(2.0 * kPi * x1) / (2.0 * kPi) * std::pow(br, d)));
}

/// d/dx1 of exotic: i c cos(2 pi x1) <xi>^d p.
inline Complex exotic_dx1(double m, double d, double c, double x1, double xi_norm2) {
  return Complex(0.0, c * std::cos(2.0 * kPi * x1) * std::pow(japanese(xi_norm2), d)) *
         exotic(m, d, c, x1, xi_norm2);
}

/// Volume of the Euclidean ball of radius r in R^n (n <= 3).
inline double ball_volume(double r, int n) {
  if (n == 1) return 2.0 * r;
  if (n == 2) return kPi * r * r;
  return 4.0 / 3.0 * kPi * r * r * r;
}

}  // namespace oracle
