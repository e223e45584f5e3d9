#include "tpdo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <random>

#include "tpdo/errors.hpp"
#include "tpdo/fft.hpp"

namespace tpdo {
namespace {

using calculus::MultiIndex;

constexpr std::size_t kDerivativeCacheLimit = std::size_t{1} << 24;

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

Complex monomial(const LatticePoint& xi, const MultiIndex& a, double sign) {
  Complex r = 1.0;
  for (int d = 0; d < a.dim; ++d)
    for (int e = 0; e < a[d]; ++e) r *= Complex(0.0, sign * 2.0 * std::numbers::pi * static_cast<double>(xi[static_cast<std::size_t>(d)]));
  return r;
}

std::vector<MultiIndex> below(const MultiIndex& a) {
  std::vector<MultiIndex> out;
  MultiIndex w = MultiIndex::zero(a.dim);
  std::function<void(int)> rec = [&](int d) {
    if (d == a.dim) {
      out.push_back(w);
      return;
    }
    for (int v = 0; v <= a[d]; ++v) {
      w.a[static_cast<std::size_t>(d)] = v;
      rec(d + 1);
    }
  };
  rec(0);
  return out;
}

double offset_distance(const GridSpec& g, std::size_t z) {
  return torus_distance(g.point(z), Point{}, g.dim());
}

// Rows z -> sum_xi e^{2 pi i z.xi} q(x, xi) of the (derivative) kernel on a fine grid.
class RowSource {
 public:
  RowSource(const dsl::Symbol& p, GridSpec box, GridSpec fine, MultiIndex alpha, MultiIndex beta,
            const PdoOperator* same_grid = nullptr)
      : p_(p), box_(std::move(box)), lattice_(box_), fine_(std::move(fine)), alpha_(alpha), beta_(beta),
        same_grid_(same_grid) {
    for (int a = 0; a < box_.dim(); ++a)
      if (fine_.sizes()[static_cast<std::size_t>(a)] % box_.sizes()[static_cast<std::size_t>(a)] != 0)
        throw ValidationError("kernel grid must refine the truncation box");
    if (alpha_.order() + beta_.order() > 2) throw ValidationError("kernel derivative orders beyond |alpha + beta| = 2 are not supported");
    if (alpha_.dim != box_.dim() || beta_.dim != box_.dim()) throw ValidationError("multi-index dimension mismatch");

    const std::size_t l = lattice_.size();
    for (const MultiIndex& w : below(alpha_)) {
      Term t{w, binomial_product(alpha_, w), {}};
      if (w.order() > 0 && !p_.x_independent()) {
        if (l * fine_.point_count() > kDerivativeCacheLimit)
          throw GuardError("derivative kernel too large to tabulate");
        t.dx.resize(l);
        for (std::size_t k = 0; k < l; ++k)
          t.dx[k] = calculus::x_derivative(p_, w, lattice_.frequency(k), fine_).values;
      }
      if (w.order() > 0 && p_.x_independent()) continue;  // d_x of an x-independent symbol vanishes
      terms_.push_back(std::move(t));
    }
    for (std::size_t k = 0; k < l; ++k) {
      const LatticePoint xi = lattice_.frequency(k);
      std::size_t f = 0;
      for (int a = 0; a < box_.dim(); ++a) {
        const auto u = static_cast<std::size_t>(a);
        const long long n = fine_.sizes()[u];
        f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(((xi[u] % n) + n) % n);
      }
      slot_.push_back(f);
    }
  }

  bool circulant() const { return p_.x_independent(); }
  const GridSpec& fine() const { return fine_; }

  std::vector<Complex> row(std::size_t j) const {
    const std::size_t l = lattice_.size();
    std::vector<Complex> buf(fine_.point_count());
    const Point x = fine_.point(j);
    for (std::size_t k = 0; k < l; ++k) {
      const LatticePoint xi = lattice_.frequency(k);
      Complex q{};
      for (const Term& t : terms_) {
        Complex v;
        if (!t.dx.empty()) v = t.dx[k][j];
        else if (same_grid_ != nullptr) v = same_grid_->sample(j, k);
        else v = p_(x, xi);
        MultiIndex rest = alpha_;
        for (int d = 0; d < rest.dim; ++d) rest.a[static_cast<std::size_t>(d)] -= t.omega[d];
        q += t.coefficient * monomial(xi, rest, 1.0) * v;
      }
      buf[slot_[k]] = q * monomial(xi, beta_, -1.0);
    }
    fft::transform(buf, fine_.sizes(), fft::Direction::Backward);
    return buf;
  }

 private:
  struct Term {
    MultiIndex omega;
    double coefficient;
    std::vector<std::vector<Complex>> dx;  // [xi][x] when the x-derivative is tabulated
  };

  static double binomial_product(const MultiIndex& a, const MultiIndex& w) {
    double c = 1.0;
    for (int d = 0; d < a.dim; ++d) c *= binomial(a[d], w[d]);
    return c;
  }

  const dsl::Symbol& p_;
  GridSpec box_;
  FrequencyLattice lattice_;
  GridSpec fine_;
  MultiIndex alpha_;
  MultiIndex beta_;
  const PdoOperator* same_grid_;
  std::vector<Term> terms_;
  std::vector<std::size_t> slot_;
};

KernelMatrix assemble(const RowSource& src, const GridSpec& box, std::string provenance) {
  const GridSpec& g = src.fine();
  KernelMatrix k{g, box, std::move(provenance), false, {}};
  k.circulant = src.circulant();
  if (k.circulant) {
    k.values = src.row(0);
    return k;
  }
  if (g.point_count() > kDenseGuard)
    throw GuardError("kernel matrix refused: G = " + std::to_string(g.point_count()) + " exceeds " +
                     std::to_string(kDenseGuard));
  const std::size_t n = g.point_count();
  k.values.resize(n * n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x) {
    try {
      const std::vector<Complex> r = src.row(x);
      const GridIndex xi = g.unflatten(x);
      for (std::size_t y = 0; y < n; ++y) {
        const GridIndex yi = g.unflatten(y);
        GridIndex d{};
        for (int a = 0; a < g.dim(); ++a) d[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)] - yi[static_cast<std::size_t>(a)];
        k.values[x * n + y] = r[g.flatten(d)];
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return k;
}

std::vector<std::size_t> strided_rows(const RowSource& src, std::size_t max_rows) {
  const std::size_t n = src.fine().point_count();
  if (src.circulant()) return {0};
  const std::size_t stride = std::max<std::size_t>(1, (n + max_rows - 1) / max_rows);
  std::vector<std::size_t> rows;
  for (std::size_t x = 0; x < n; x += stride) rows.push_back(x);
  return rows;
}

void check_oversample(int oversample) {
  if (oversample < 1 || (oversample & (oversample - 1)) != 0)
    throw ValidationError("oversample must be a power of two >= 1");
}

}  // namespace

Complex KernelMatrix::operator()(std::size_t x, std::size_t y) const {
  if (!circulant) return values[x * spec.point_count() + y];
  const GridIndex xi = spec.unflatten(x), yi = spec.unflatten(y);
  GridIndex d{};
  for (int a = 0; a < spec.dim(); ++a) d[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)] - yi[static_cast<std::size_t>(a)];
  return values[spec.flatten(d)];
}

std::vector<Complex> KernelMatrix::offset_row(std::size_t x) const {
  if (circulant) return values;
  const std::size_t n = spec.point_count();
  std::vector<Complex> r(n);
  const GridIndex xi = spec.unflatten(x);
  for (std::size_t y = 0; y < n; ++y) {
    const GridIndex yi = spec.unflatten(y);
    GridIndex d{};
    for (int a = 0; a < spec.dim(); ++a) d[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)] - yi[static_cast<std::size_t>(a)];
    r[spec.flatten(d)] = values[x * n + y];
  }
  return r;
}

KernelMatrix synthesize_kernel(const PdoOperator& t, int oversample) {
  check_oversample(oversample);
  const GridSpec fine = t.grid().refined(oversample);
  const MultiIndex zero = MultiIndex::zero(t.grid().dim());
  const RowSource src(t.symbol(), t.grid(), fine, zero, zero, oversample == 1 ? &t : nullptr);
  return assemble(src, t.grid(), "kernel of " + t.describe());
}

KernelMatrix derivative_kernel(const PdoOperator& t, const MultiIndex& alpha, const MultiIndex& beta,
                               int oversample) {
  check_oversample(oversample);
  if (t.symbol().is_table() && alpha.order() > 0 && !t.symbol().x_independent())
    throw ValidationError("x-derivatives of kernels need an analytic symbol");
  const GridSpec fine = t.grid().refined(oversample);
  const RowSource src(t.symbol(), t.grid(), fine, alpha, beta, oversample == 1 ? &t : nullptr);
  return assemble(src, t.grid(),
                  "d_x^" + alpha.str() + " d_y^" + beta.str() + " kernel of " + t.describe());
}

KernelDecayReport decay_scan(const dsl::Symbol& p, const DecayOptions& o) {
  if (o.exponent < 0.0) throw ValidationError("decay exponent must be >= 0");
  if (o.truncations.empty()) throw ValidationError("decay scan needs at least one truncation");
  check_oversample(o.oversample);
  const int dim = p.dim();
  const MultiIndex alpha = o.alpha.value_or(MultiIndex::zero(dim));
  const MultiIndex beta = o.beta.value_or(MultiIndex::zero(dim));

  KernelDecayReport rep;
  rep.exponent = o.exponent;
  for (int l : o.truncations) {
    const GridSpec box = GridSpec::cube(dim, l);
    const double cutoff = o.cutoff.value_or(o.cutoff_cells / l);
    if (cutoff < 4.0 / l - 1e-12)
      throw ValidationError("cutoff must be at least four cells of the truncation grid");
    const RowSource src(p, box, box.refined(o.oversample), alpha, beta);
    const GridSpec& g = src.fine();

    std::vector<double> dist(g.point_count());
    for (std::size_t z = 0; z < dist.size(); ++z) dist[z] = offset_distance(g, z);

    const auto rows = strided_rows(src, o.max_rows);
    std::vector<double> best(rows.size(), -1.0), where(rows.size(), 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t r = 0; r < rows.size(); ++r) {
      try {
        const std::vector<Complex> row = src.row(rows[r]);
        for (std::size_t z = 0; z < row.size(); ++z) {
          if (dist[z] < cutoff - 1e-12) continue;
          const double v = std::pow(dist[z], o.exponent) * std::abs(row[z]);
          if (v > best[r]) best[r] = v, where[r] = dist[z];
        }
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    DecayEntry e{l, cutoff, -1.0, 0.0};
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (best[r] > e.sup) e.sup = best[r], e.distance_at_sup = where[r];
    if (e.sup < 0.0) throw ValidationError("cutoff excludes all pairs");
    rep.entries.push_back(e);
  }
  const double first = rep.entries.front().sup, last = rep.entries.back().sup;
  rep.stability_ratio = first > 0.0 ? last / first : (last > 0.0 ? INFINITY : 1.0);
  return rep;
}

LogBoundReport log_bound_check(const dsl::Symbol& p, int truncation, double cutoff_cells, int oversample,
                               std::size_t max_rows) {
  check_oversample(oversample);
  const int dim = p.dim();
  const GridSpec box = GridSpec::cube(dim, truncation);
  const MultiIndex zero = MultiIndex::zero(dim);
  const RowSource src(p, box, box.refined(oversample), zero, zero);
  const GridSpec& g = src.fine();

  LogBoundReport rep;
  rep.truncation = truncation;
  rep.cutoff = cutoff_cells / truncation;
  std::vector<double> xs, ys;
  for (std::size_t x : strided_rows(src, max_rows)) {
    const std::vector<Complex> row = src.row(x);
    for (std::size_t z = 0; z < row.size(); ++z) {
      const double d = offset_distance(g, z);
      rep.max_abs_kernel = std::max(rep.max_abs_kernel, std::abs(row[z]));
      if (d < rep.cutoff - 1e-12 || d > 0.25 + 1e-12) continue;
      xs.push_back(std::fabs(std::log(d)));
      ys.push_back(std::abs(row[z]));
    }
  }
  rep.samples = xs.size();
  if (xs.size() < 8) throw ValidationError("insufficient sample pairs for a log fit");

  const LineFit all = fit_line(xs, ys);
  rep.slope = all.slope;
  rep.intercept = all.intercept;
  const double mid = (*std::min_element(xs.begin(), xs.end()) + *std::max_element(xs.begin(), xs.end())) / 2.0;
  std::vector<double> xi, yi, xo, yo;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k] >= mid) xi.push_back(xs[k]), yi.push_back(ys[k]);
    else xo.push_back(xs[k]), yo.push_back(ys[k]);
  }
  if (xi.size() < 2 || xo.size() < 2) throw ValidationError("insufficient sample pairs for a log fit");
  rep.inner_slope = fit_line(xi, yi).slope;
  rep.outer_slope = fit_line(xo, yo).slope;
  if (rep.inner_slope > 0.0 && rep.outer_slope > 0.0)
    rep.residual_ratio = std::max(rep.inner_slope / rep.outer_slope, rep.outer_slope / rep.inner_slope);
  else
    rep.residual_ratio = INFINITY;
  rep.bounded = rep.inner_slope < rep.outer_slope / 1.5;
  return rep;
}

std::string to_string(SigmaVariant v) {
  switch (v) {
    case SigmaVariant::A1: return "a1";
    case SigmaVariant::A2: return "a2";
    case SigmaVariant::B: return "b";
    case SigmaVariant::C: return "c";
  }
  return "?";
}

SigmaVariant parse_sigma_variant(const std::string& s) {
  if (s == "a1" || s == "a") return SigmaVariant::A1;
  if (s == "a2") return SigmaVariant::A2;
  if (s == "b") return SigmaVariant::B;
  if (s == "c") return SigmaVariant::C;
  throw ValidationError("unknown sigma-estimate variant '" + s + "' (expected a1, a2, b or c)");
}

SigmaEstimateReport sigma_estimates(const PdoOperator& t, SigmaVariant variant, const SigmaOptions& o) {
  const GridSpec& g = t.grid();
  const int dim = g.dim();
  if (o.samples == 0) throw ValidationError("sigma estimates need at least one sample");
  if (!(o.unit_scale > 0.0 && o.unit_scale <= 0.5)) throw ValidationError("unit scale must lie in (0, 1/2]");

  SigmaEstimateReport rep;
  rep.variant = variant;
  rep.params = t.nominal();
  rep.unit_scale = o.unit_scale;
  rep.samples = o.samples;
  rep.sigmas = o.sigmas;
  std::sort(rep.sigmas.begin(), rep.sigmas.end());
  for (double s : rep.sigmas)
    if (!(s > g.min_spacing() && s <= 0.25))
      throw ValidationError("sigma must lie in (grid spacing, 1/4], got " + std::to_string(s));

  const bool transposed = variant == SigmaVariant::A2 || variant == SigmaVariant::C;
  const bool local = variant == SigmaVariant::B || variant == SigmaVariant::C;
  if (local) {
    if (!rep.params) {
      rep.warnings.push_back("no nominal class: hypothesis not checked; rho = 1 assumed");
    } else {
      const ClassParams& c = *rep.params;
      const double bound = variant == SigmaVariant::B ? c.endpoint_order(dim) : -dim * (1.0 - c.rho()) / 2.0;
      if (c.m() > bound + 1e-12)
        rep.warnings.push_back("order " + std::to_string(c.m()) + " exceeds the hypothesis bound " +
                               std::to_string(bound) + " of variant " + to_string(variant));
    }
  }
  const double rho = rep.params ? rep.params->rho() : 1.0;

  const KernelMatrix k = synthesize_kernel(t, 1);
  const std::size_t n = g.point_count();
  const double w = 1.0 / static_cast<double>(n);

  for (double sigma : rep.sigmas) {
    const double radius = local ? 2.0 * o.unit_scale * std::pow(sigma / o.unit_scale, rho) : 2.0 * sigma;
    rep.radii.push_back(radius);

    // Seeded (z, y) pairs with d(y, z) <= sigma, drawn serially.
    std::mt19937_64 rng(o.seed ^ static_cast<std::uint64_t>(std::llround(sigma * 1e9)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> off(-sigma, sigma);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    while (pairs.size() < o.samples) {
      const std::size_t z = pick(rng);
      Point delta{};
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        delta[static_cast<std::size_t>(a)] = off(rng);
        r2 += delta[static_cast<std::size_t>(a)] * delta[static_cast<std::size_t>(a)];
      }
      if (r2 > sigma * sigma) continue;
      GridIndex yi = g.unflatten(z);
      for (int a = 0; a < dim; ++a) {
        const auto u = static_cast<std::size_t>(a);
        yi[u] += static_cast<int>(std::lround(delta[u] * g.sizes()[u]));
      }
      const std::size_t y = g.flatten(yi);
      if (torus_distance(g.point(y), g.point(z), dim) > sigma + 1e-12) continue;
      pairs.emplace_back(z, y);
    }

    std::vector<double> values(pairs.size());
    std::vector<char> empty(pairs.size(), 0);
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < pairs.size(); ++s) {
      const auto [z, y] = pairs[s];
      const Point pz = g.point(z);
      double acc = 0.0;
      std::size_t count = 0;
      for (std::size_t x = 0; x < n; ++x) {
        if (!(torus_distance(g.point(x), pz, dim) > radius)) continue;
        ++count;
        acc += transposed ? std::abs(k(y, x) - k(z, x)) : std::abs(k(x, y) - k(x, z));
      }
      values[s] = acc * w;
      empty[s] = count == 0;
    }
    if (std::any_of(empty.begin(), empty.end(), [](char c) { return c != 0; }))
      throw ValidationError("empty integration domain at sigma = " + std::to_string(sigma) + " (radius " +
                            std::to_string(radius) + ")");
    rep.suprema.push_back(*std::max_element(values.begin(), values.end()));
  }
  const auto [lo, hi] = std::minmax_element(rep.suprema.begin(), rep.suprema.end());
  rep.flatness = *lo > 0.0 ? *hi / *lo : INFINITY;
  return rep;
}

}  // namespace tpdo
