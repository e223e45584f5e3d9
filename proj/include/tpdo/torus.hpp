#pragma once

// Periodic grids on T^n = R^n / Z^n, the truncated frequency lattice and the
// toroidal Fourier transform pair.
//
// Conventions used throughout the library:
//   * grid points are x = (k_1/N_1, ..., k_n/N_n), flattened row-major (axis 0 slowest);
//   * the lattice is the FFT box {-N_j/2, ..., N_j/2 - 1} per axis, enumerated in FFT
//     order (0, 1, ..., N/2-1, -N/2, ..., -1) with the same flattening as the grid;
//   * forward_dft carries the 1/G quadrature weight, inverse_dft carries none.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tpdo {

inline constexpr int kMaxDim = 3;

using Complex = std::complex<double>;
using Point = std::array<double, kMaxDim>;
using LatticePoint = std::array<std::int64_t, kMaxDim>;
using GridIndex = std::array<int, kMaxDim>;

class GridSpec {
 public:
  /// Every size must be a power of two >= 4; 1 <= sizes.size() <= 3.
  explicit GridSpec(std::vector<int> sizes);
  static GridSpec cube(int dim, int n);

  int dim() const noexcept { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int size(int axis) const { return sizes_.at(static_cast<std::size_t>(axis)); }
  std::size_t point_count() const noexcept { return count_; }

  GridIndex unflatten(std::size_t flat) const noexcept;
  /// Wraps every component modulo its axis length.
  std::size_t flatten(const GridIndex& index) const noexcept;
  Point point(std::size_t flat) const noexcept;
  /// Smallest cell width, 1 / max_j N_j.
  double min_spacing() const noexcept;
  /// Same dimension, every axis multiplied by `factor` (a power of two).
  GridSpec refined(int factor) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::vector<int> sizes_;
  std::size_t count_ = 0;
};

class FrequencyLattice {
 public:
  explicit FrequencyLattice(GridSpec spec);

  const GridSpec& grid() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim(); }
  std::size_t size() const noexcept { return spec_.point_count(); }

  LatticePoint frequency(std::size_t flat) const noexcept;
  bool contains(const LatticePoint& xi) const noexcept;
  std::optional<std::size_t> index_of(const LatticePoint& xi) const noexcept;

  friend bool operator==(const FrequencyLattice&, const FrequencyLattice&) = default;

 private:
  GridSpec spec_;
};

struct GridFunction {
  GridFunction(GridSpec spec, std::vector<Complex> values);
  static GridFunction zeros(const GridSpec& spec);
  template <class Fn>
  static GridFunction sample(const GridSpec& spec, Fn&& fn) {
    std::vector<Complex> v(spec.point_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(spec.point(i));
    return GridFunction(spec, std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  Complex& operator[](std::size_t i) noexcept { return values[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return values[i]; }

  GridSpec spec;
  std::vector<Complex> values;
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(Complex c, const GridFunction& f);

/// Quadrature inner product (1/G) sum f * conj(g).
Complex inner_product(const GridFunction& f, const GridFunction& g);

struct SpectralFunction {
  SpectralFunction(FrequencyLattice lattice, std::vector<Complex> coefficients);

  std::size_t size() const noexcept { return coefficients.size(); }
  Complex at(const LatticePoint& xi) const;

  FrequencyLattice lattice;
  std::vector<Complex> coefficients;
};

/// Japanese bracket (1 + |xi|^2)^{1/2}.
double bracket(const LatticePoint& xi, int dim) noexcept;
double bracket(std::span<const double> xi) noexcept;

SpectralFunction forward_dft(const GridFunction& f);
GridFunction inverse_dft(const SpectralFunction& phi);

/// Geodesic distance on T^n: min over k in Z^n of |x - y - k|.
double torus_distance(const Point& x, const Point& y, int dim) noexcept;

/// Grid indices strictly inside the geodesic ball. Radii >= sqrt(n)/2 cover the torus.
/// Throws DegenerateBallError when no grid point qualifies.
std::vector<std::size_t> ball(const Point& center, double radius, const GridSpec& spec);

/// Offsets (per axis, in cells) of the grid points within `radius` of the origin.
/// Translating them to any grid point gives the ball centred there.
std::vector<GridIndex> ball_stencil(double radius, const GridSpec& spec);

}  // namespace tpdo
