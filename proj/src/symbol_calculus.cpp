#include "tpdo/symbol_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>

#include "tpdo/errors.hpp"

namespace tpdo::calculus {
namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

int default_x_points(int dim) { return dim == 3 ? 16 : 32; }
int default_max_x_points(int dim) { return dim == 1 ? 1024 : dim == 2 ? 128 : 64; }

GridSpec x_grid(int dim, int n) { return GridSpec::cube(dim, n); }

GridFunction sample_difference(const Symbol& p, const MultiIndex& alpha, const LatticePoint& xi,
                               const GridSpec& grid) {
  std::vector<Complex> v(grid.point_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = difference(p, alpha, grid.point(k), xi);
  return GridFunction(grid, std::move(v));
}

// Largest <xi> first within a shell gives the x-resolution the whole shell will need.
int resolve_x_points(const Symbol& p, const MultiIndex& alpha, const LatticePoint& xi, int start, int cap,
                     bool strict) {
  if (p.x_independent()) return 4;
  int n = start;
  while (true) {
    const GridFunction f = sample_difference(p, alpha, xi, x_grid(p.dim(), n));
    if (spectral_tail_fraction(f) <= kSpectralTailTolerance) return n;
    if (n * 2 > cap) {
      if (strict)
        throw SpectralTailError("symbol is not resolved in x on a grid of " + std::to_string(n) +
                                " points per axis at <xi> = " + std::to_string(bracket(xi, p.dim())));
      return n;
    }
    n *= 2;
  }
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool in_shell(const LatticePoint& xi, int dim, const Shell& s) {
  const double b = bracket(xi, dim);
  return b >= s.lo && b < s.hi;
}

}  // namespace

MultiIndex MultiIndex::zero(int dim) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("multi-index dimension must be 1, 2 or 3");
  MultiIndex m;
  m.dim = dim;
  return m;
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  MultiIndex m = zero(dim);
  if (axis < 0 || axis >= dim) throw ValidationError("multi-index axis out of range");
  m.a[static_cast<std::size_t>(axis)] = 1;
  return m;
}

MultiIndex MultiIndex::of(std::vector<int> components) {
  MultiIndex m = zero(static_cast<int>(components.size()));
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k] < 0) throw ValidationError("multi-index components must be nonnegative");
    m.a[k] = components[k];
  }
  return m;
}

int MultiIndex::order() const noexcept {
  int s = 0;
  for (int k = 0; k < dim; ++k) s += a[static_cast<std::size_t>(k)];
  return s;
}

std::string MultiIndex::str() const {
  std::string s = "(";
  for (int k = 0; k < dim; ++k) s += (k ? "," : "") + std::to_string(a[static_cast<std::size_t>(k)]);
  return s + ")";
}

std::vector<MultiIndex> multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex m = MultiIndex::zero(dim);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim) {
      out.push_back(m);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      m.a[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1, left - v);
    }
    m.a[static_cast<std::size_t>(axis)] = 0;
  };
  rec(0, max_order);
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& l, const MultiIndex& r) {
    if (l.order() != r.order()) return l.order() < r.order();
    return l.a > r.a;
  });
  return out;
}

Complex difference(const Symbol& p, const MultiIndex& alpha, const Point& x, const LatticePoint& xi) {
  if (alpha.dim != p.dim()) throw ValidationError("multi-index dimension does not match the symbol");
  Complex acc{};
  std::array<int, kMaxDim> g{};
  while (true) {
    double coef = 1.0;
    LatticePoint at = xi;
    for (int k = 0; k < alpha.dim; ++k) {
      const auto u = static_cast<std::size_t>(k);
      coef *= binomial(alpha.a[u], g[u]) * (((alpha.a[u] - g[u]) % 2) ? -1.0 : 1.0);
      at[u] += g[u];
    }
    if (!p.in_domain(at)) throw OutOfTableError("difference steps outside the symbol table");
    acc += coef * p(x, at);
    int k = 0;
    for (; k < alpha.dim; ++k) {
      const auto u = static_cast<std::size_t>(k);
      if (++g[u] <= alpha.a[u]) break;
      g[u] = 0;
    }
    if (k == alpha.dim) break;
  }
  return acc;
}

double spectral_tail_fraction(const GridFunction& f) {
  const SpectralFunction c = forward_dft(f);
  double total = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < c.coefficients.size(); ++k) {
    const LatticePoint xi = c.lattice.frequency(k);
    const double a = std::abs(c.coefficients[k]);
    total += a;
    for (int d = 0; d < f.spec.dim(); ++d) {
      const auto u = static_cast<std::size_t>(d);
      if (8 * std::llabs(xi[u]) >= 3LL * f.spec.sizes()[u]) {
        tail += a;
        break;
      }
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta) {
  if (beta.dim != f.spec.dim()) throw ValidationError("multi-index dimension does not match the grid");
  if (beta.order() == 0) return f;
  const double tail = spectral_tail_fraction(f);
  if (tail > kSpectralTailTolerance)
    throw SpectralTailError("spectral tail fraction " + std::to_string(tail) +
                            " exceeds tolerance; refine the x grid");
  SpectralFunction c = forward_dft(f);
  for (std::size_t k = 0; k < c.coefficients.size(); ++k) {
    const LatticePoint xi = c.lattice.frequency(k);
    Complex factor = 1.0;
    for (int d = 0; d < f.spec.dim(); ++d) {
      const auto u = static_cast<std::size_t>(d);
      const int b = beta.a[u];
      if (b == 0) continue;
      if (b % 2 == 1 && 2 * xi[u] == -static_cast<long long>(f.spec.sizes()[u])) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(Complex(0.0, 2.0 * std::numbers::pi * static_cast<double>(xi[u])), b);
    }
    c.coefficients[k] *= factor;
  }
  return inverse_dft(c);
}

GridFunction x_derivative(const Symbol& p, const MultiIndex& beta, const LatticePoint& xi, const GridSpec& grid,
                          const MultiIndex& alpha) {
  if (grid.dim() != p.dim()) throw ValidationError("grid dimension does not match the symbol");
  return spectral_derivative(sample_difference(p, alpha, xi, grid), beta);
}

std::vector<Shell> dyadic_shells(double lo, double hi) {
  if (!(lo >= 1.0) || !(hi > lo)) throw ValidationError("shell range must satisfy 1 <= lo < hi");
  std::vector<Shell> out;
  for (double a = lo; a < hi; a *= 2.0) out.push_back({a, std::min(2.0 * a, hi)});
  return out;
}

std::vector<LatticePoint> shell_points(const Shell& shell, int dim, const ShellOptions& options) {
  const auto radius = static_cast<long long>(std::floor(std::sqrt(std::max(0.0, shell.hi * shell.hi - 1.0))));
  std::vector<LatticePoint> out;

  double box = 1.0;
  for (int d = 0; d < dim; ++d) box *= static_cast<double>(2 * radius + 1);

  if (box <= 4.0e6) {
    LatticePoint xi{};
    std::function<void(int)> rec = [&](int axis) {
      if (axis == dim) {
        if (in_shell(xi, dim, shell)) out.push_back(xi);
        return;
      }
      for (long long v = -radius; v <= radius; ++v) {
        xi[static_cast<std::size_t>(axis)] = v;
        rec(axis + 1);
      }
    };
    rec(0);
    if (out.size() <= options.max_points_per_shell) return out;
    out.clear();
  }

  // Subsample: axis and diagonal rays (where radial extremes sit) plus seeded uniform points.
  std::set<LatticePoint> pts;
  for (long long r = 0; r <= radius; ++r)
    for (int d = 0; d < dim; ++d)
      for (long long s : {-1LL, 1LL}) {
        LatticePoint xi{};
        xi[static_cast<std::size_t>(d)] = s * r;
        if (in_shell(xi, dim, shell)) pts.insert(xi);
        LatticePoint diag{};
        for (int e = 0; e < dim; ++e) diag[static_cast<std::size_t>(e)] = (e == d ? s : 1) * r;
        if (in_shell(diag, dim, shell)) pts.insert(diag);
      }
  if (pts.size() > options.max_points_per_shell / 2) {
    std::vector<LatticePoint> v(pts.begin(), pts.end());
    pts.clear();
    const std::size_t stride = (2 * v.size()) / options.max_points_per_shell + 1;
    for (std::size_t k = 0; k < v.size(); k += stride) pts.insert(v[k]);
  }
  std::mt19937_64 rng(mix(options.seed ^ mix(static_cast<std::uint64_t>(shell.lo * 1024.0))));
  std::uniform_int_distribution<long long> coord(-radius, radius);
  const std::size_t attempts = 200 * options.max_points_per_shell;
  for (std::size_t t = 0; t < attempts && pts.size() < options.max_points_per_shell; ++t) {
    LatticePoint xi{};
    for (int d = 0; d < dim; ++d) xi[static_cast<std::size_t>(d)] = coord(rng);
    if (in_shell(xi, dim, shell)) pts.insert(xi);
  }
  return {pts.begin(), pts.end()};
}

std::vector<ShellSupremum> shell_suprema(const Symbol& p, const MultiIndex& alpha, const MultiIndex& beta,
                                         const std::vector<Shell>& shells, const ShellOptions& options,
                                         double weight_exponent) {
  const int dim = p.dim();
  if (alpha.dim != dim || beta.dim != dim) throw ValidationError("multi-index dimension does not match the symbol");
  const int start = options.x_points > 0 ? options.x_points : default_x_points(dim);
  const int cap = options.max_x_points > 0 ? options.max_x_points : default_max_x_points(dim);
  const bool derivative = beta.order() > 0;

  std::vector<ShellSupremum> out;
  for (const Shell& shell : shells) {
    const std::vector<LatticePoint> pts = shell_points(shell, dim, options);
    if (pts.empty())
      throw ValidationError("shell [" + std::to_string(shell.lo) + ", " + std::to_string(shell.hi) +
                            ") contains no lattice point");
    const auto far = std::max_element(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
      return bracket(a, dim) < bracket(b, dim);
    });
    const int nx = resolve_x_points(p, alpha, *far, start, cap, derivative);

    std::vector<double> sup(pts.size()), weighted(pts.size());
    std::vector<int> used(pts.size(), nx);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t k = 0; k < pts.size(); ++k) {
      try {
        int n = nx;
        GridFunction v = sample_difference(p, alpha, pts[k], x_grid(dim, n));
        if (derivative) {
          while (spectral_tail_fraction(v) > kSpectralTailTolerance && n * 2 <= cap) {
            n *= 2;
            v = sample_difference(p, alpha, pts[k], x_grid(dim, n));
          }
          v = spectral_derivative(v, beta);
        }
        double s = 0.0;
        for (const Complex& z : v.values) s = std::max(s, std::abs(z));
        sup[k] = s;
        weighted[k] = s * std::pow(bracket(pts[k], dim), -weight_exponent);
        used[k] = n;
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    ShellSupremum r{shell};
    r.points = pts.size();
    r.x_points = *std::max_element(used.begin(), used.end());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == 0 || sup[k] > r.sup) {
        r.sup = sup[k];
        r.bracket_at_max = bracket(pts[k], dim);
      }
      r.weighted_sup = std::max(r.weighted_sup, weighted[k]);
    }
    out.push_back(r);
  }
  return out;
}

double seminorm_constant(const Symbol& p, const MultiIndex& alpha, const MultiIndex& beta, const ClassParams& params,
                         const std::vector<Shell>& shells, const ShellOptions& options) {
  if (shells.empty()) throw ValidationError("empty shell range");
  const double e = params.m() - params.rho() * alpha.order() + params.delta() * beta.order();
  double c = 0.0;
  for (const auto& s : shell_suprema(p, alpha, beta, shells, options, e)) c = std::max(c, s.weighted_sup);
  return c;
}

ClassEstimate fit_order(const Symbol& p, const ClassParams& nominal, const std::vector<Shell>& shells, int max_order,
                        const ShellOptions& options) {
  const int dim = p.dim();
  if (static_cast<int>(shells.size()) < kExcludedInnerShells + 4)
    throw ValidationError("fit_order needs at least " + std::to_string(kExcludedInnerShells + 4) +
                          " shells (the innermost " + std::to_string(kExcludedInnerShells) + " are not fitted)");
  if (max_order < 0) max_order = (dim + 1) / 2 + 1;

  ClassEstimate est(nominal);
  est.max_order = max_order;
  est.shells = shells;
  est.fit_shells.assign(shells.begin() + kExcludedInnerShells, shells.end());

  const MultiIndex zero = MultiIndex::zero(dim);
  std::map<std::pair<MultiIndex, MultiIndex>, std::vector<ShellSupremum>> suprema;
  for (const MultiIndex& a : multi_indices(dim, max_order))
    for (const MultiIndex& b : multi_indices(dim, max_order)) {
      const double e = nominal.m() - nominal.rho() * a.order() + nominal.delta() * b.order();
      auto s = shell_suprema(p, a, b, shells, options, e);
      double c = 0.0;
      for (const auto& r : s) c = std::max(c, r.weighted_sup);
      est.constants[{a, b}] = c;
      suprema[{a, b}] = std::move(s);
    }

  double scale = 0.0;
  for (const auto& r : suprema[{zero, zero}]) scale = std::max(scale, r.sup);
  if (!(scale > 0.0)) throw ValidationError("symbol vanishes on every shell; no order can be fitted");

  auto fit = [&](const MultiIndex& a, const MultiIndex& b) {
    SlopeFit f;
    f.alpha = a;
    f.beta = b;
    const auto& s = suprema[{a, b}];
    f.vanishing = std::all_of(s.begin(), s.end(), [&](const auto& r) { return r.sup <= 1e-10 * scale; });
    for (std::size_t k = kExcludedInnerShells; k < s.size(); ++k) {
      f.log_bracket.push_back(std::log(s[k].bracket_at_max));
      f.log_sup.push_back(std::log(std::max(s[k].sup, 1e-300)));
    }
    if (!f.vanishing) f.fit = fit_line(f.log_bracket, f.log_sup);
    est.fits.push_back(f);
    return f;
  };

  est.fitted_m = fit(zero, zero).fit.slope;
  double rho = 0.0, delta = 0.0;
  int rho_count = 0, delta_count = 0;
  for (int j = 0; j < dim; ++j) {
    const SlopeFit fa = fit(MultiIndex::unit(dim, j), zero);
    if (!fa.vanishing) rho += est.fitted_m - fa.fit.slope, ++rho_count;
    const SlopeFit fb = fit(zero, MultiIndex::unit(dim, j));
    if (!fb.vanishing) delta += fb.fit.slope - est.fitted_m, ++delta_count;
  }
  // A difference that vanishes identically means arbitrary decay; report rho = 1, the
  // top of the admissible range. Likewise an x-independent symbol has delta = 0.
  est.fitted_rho = rho_count ? rho / rho_count : 1.0;
  est.fitted_delta = delta_count ? delta / delta_count : 0.0;
  return est;
}

}  // namespace tpdo::calculus
