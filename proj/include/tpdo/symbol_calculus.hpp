#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tpdo/class_params.hpp"
#include "tpdo/regression.hpp"
#include "tpdo/symbol_dsl.hpp"
#include "tpdo/torus.hpp"

namespace tpdo::calculus {

using dsl::Symbol;

struct MultiIndex {
  int dim = 1;
  std::array<int, kMaxDim> a{};

  static MultiIndex zero(int dim);
  static MultiIndex unit(int dim, int axis);
  static MultiIndex of(std::vector<int> components);

  int order() const noexcept;
  int operator[](int axis) const noexcept { return a[static_cast<std::size_t>(axis)]; }
  std::string str() const;  // "(1,0)"

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// All multi-indices of the given dimension with |alpha| <= max_order, by order then lexicographically.
std::vector<MultiIndex> multi_indices(int dim, int max_order);

/// Iterated forward difference: sum_{gamma <= alpha} (-1)^{|alpha-gamma|} C(alpha,gamma) p(x, xi+gamma).
Complex difference(const Symbol& p, const MultiIndex& alpha, const Point& x, const LatticePoint& xi);

/// Relative l1 mass of the modes with max_j |k_j| >= 3N/8 (the top quarter of |k|) allowed
/// before a spectral x-derivative is refused.
inline constexpr double kSpectralTailTolerance = 1e-8;

/// d^beta f by spectral differentiation; the Nyquist mode is dropped on axes with odd order.
/// Throws SpectralTailError when f is not resolved by its grid.
GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta);
double spectral_tail_fraction(const GridFunction& f);

/// d^beta_x Delta^alpha_xi p(., xi) sampled on `grid`.
GridFunction x_derivative(const Symbol& p, const MultiIndex& beta, const LatticePoint& xi, const GridSpec& grid,
                          const MultiIndex& alpha);
inline GridFunction x_derivative(const Symbol& p, const MultiIndex& beta, const LatticePoint& xi,
                                 const GridSpec& grid) {
  return x_derivative(p, beta, xi, grid, MultiIndex::zero(grid.dim()));
}

/// Lattice points with lo <= <xi> < hi.
struct Shell {
  double lo;
  double hi;
  friend bool operator==(const Shell&, const Shell&) = default;
};

/// Dyadic shells [lo, 2lo), [2lo, 4lo), ... covering [lo, hi).
std::vector<Shell> dyadic_shells(double lo, double hi);

struct ShellOptions {
  /// x samples per axis to start from; 0 picks 32, 32, 16 for n = 1, 2, 3. Doubled
  /// while the spectral tail check fails, up to max_x_points.
  int x_points = 0;
  int max_x_points = 0;  // 0 picks 1024, 128, 64
  /// Above this many lattice points a shell is subsampled (axes, diagonals and seeded
  /// random points), which only happens for n >= 2.
  std::size_t max_points_per_shell = 4096;
  std::uint64_t seed = 1;
};

struct ShellSupremum {
  Shell shell;
  double sup = 0.0;            // max |d^beta Delta^alpha p|
  double bracket_at_max = 0.0; // <xi> where it is attained
  double weighted_sup = 0.0;   // max |d^beta Delta^alpha p| <xi>^{-weight_exponent}
  std::size_t points = 0;      // lattice points examined
  int x_points = 0;            // x resolution used (per axis)
};

std::vector<LatticePoint> shell_points(const Shell& shell, int dim, const ShellOptions& options);

std::vector<ShellSupremum> shell_suprema(const Symbol& p, const MultiIndex& alpha, const MultiIndex& beta,
                                         const std::vector<Shell>& shells, const ShellOptions& options = {},
                                         double weight_exponent = 0.0);

/// max over x and xi in the shells of |d^beta Delta^alpha p| <xi>^{-(m - rho|alpha| + delta|beta|)}.
double seminorm_constant(const Symbol& p, const MultiIndex& alpha, const MultiIndex& beta, const ClassParams& params,
                         const std::vector<Shell>& shells, const ShellOptions& options = {});

struct SlopeFit {
  MultiIndex alpha;
  MultiIndex beta;
  std::vector<double> log_bracket;
  std::vector<double> log_sup;
  LineFit fit;
  bool vanishing = false;  // suprema below round-off everywhere: no slope fitted
};

struct ClassEstimate {
  explicit ClassEstimate(ClassParams nominal) : params(nominal) {}

  ClassParams params;  // nominal class the constants are measured against
  std::map<std::pair<MultiIndex, MultiIndex>, double> constants;
  int max_order = 0;
  double fitted_m = 0.0;
  double fitted_rho = 0.0;
  double fitted_delta = 0.0;
  std::vector<SlopeFit> fits;
  std::vector<Shell> shells;      // all shells examined
  std::vector<Shell> fit_shells;  // the subset entering the regressions
};

/// Number of innermost shells left out of the slope fits (pre-asymptotic regime).
inline constexpr int kExcludedInnerShells = 2;

/// Regress log shell suprema against log <xi>. fitted_m from alpha = beta = 0, fitted_rho
/// from |alpha| = 1 (beta = 0), fitted_delta from |beta| = 1 (alpha = 0).
/// max_order < 0 selects ceil(n/2) + 1.
ClassEstimate fit_order(const Symbol& p, const ClassParams& nominal, const std::vector<Shell>& shells,
                        int max_order = -1, const ShellOptions& options = {});

}  // namespace tpdo::calculus
