#include "tpdo/function_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "tpdo/errors.hpp"

namespace tpdo {
namespace {

void check_finite(const GridFunction& f) {
  for (const Complex& z : f.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("grid function has non-finite values");
}

bool is_real(const GridFunction& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](const Complex& z) { return z.imag() == 0.0; });
}

std::size_t shifted(const GridSpec& g, const GridIndex& base, const GridIndex& offset) {
  GridIndex s{};
  for (int a = 0; a < g.dim(); ++a) s[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + offset[static_cast<std::size_t>(a)];
  return g.flatten(s);
}

double mean_deviation(const std::vector<Complex>& v, Complex b) {
  double s = 0.0;
  for (const Complex& z : v) s += std::abs(z - b);
  return s / static_cast<double>(v.size());
}

double real_median(std::vector<Complex>& v) {
  auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end(), [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
  return mid->real();
}

double objective(const std::vector<Complex>& v, Complex y) {
  double s = 0.0;
  for (const Complex& z : v) s += std::abs(z - y);
  return s;
}

// Collinear data (real data in particular) has the scalar median along the line as its
// geometric median; the smooth machinery below degenerates there.
std::optional<Complex> collinear_median(const std::vector<Complex>& v) {
  const Complex z0 = v.front();
  double far = 0.0;
  Complex dir{};
  for (const Complex& z : v)
    if (std::abs(z - z0) > far) {
      far = std::abs(z - z0);
      dir = (z - z0) / far;
    }
  if (far == 0.0) return z0;
  std::vector<double> t;
  t.reserve(v.size());
  for (const Complex& z : v) {
    const Complex w = (z - z0) * std::conj(dir);
    if (std::abs(w.imag()) > 1e-13 * far) return std::nullopt;
    t.push_back(w.real());
  }
  auto mid = t.begin() + static_cast<std::ptrdiff_t>((t.size() - 1) / 2);
  std::nth_element(t.begin(), mid, t.end());
  return z0 + *mid * dir;
}

// Weiszfeld iterations (with the Vardi-Zhang step at data points) to get close, then Newton
// on the smooth objective for full precision.
Complex geometric_median(const std::vector<Complex>& v) {
  if (auto c = collinear_median(v)) return *c;
  Complex y{};
  double scale = 0.0;
  for (const Complex& z : v) {
    y += z;
    scale = std::max(scale, std::abs(z));
  }
  y /= static_cast<double>(v.size());
  const double coarse = 1e-3 * (1.0 + scale), fine = 1e-15 * (1.0 + scale);
  for (int it = 0; it < 100; ++it) {
    Complex num{}, pull{};
    double den = 0.0;
    int coincident = 0;
    for (const Complex& z : v) {
      const double d = std::abs(z - y);
      if (d <= fine) {
        ++coincident;
        continue;
      }
      num += z / d;
      pull += (z - y) / d;
      den += 1.0 / d;
    }
    if (den == 0.0) return y;
    Complex next = num / den;
    if (coincident > 0) {
      const double r = std::abs(pull);
      if (r <= coincident) return y;  // optimality at a data point
      const double gamma = coincident / r;
      next = (1.0 - gamma) * next + gamma * y;
    }
    const double step = std::abs(next - y);
    y = next;
    if (step <= coarse) break;
  }
  double f = objective(v, y);
  for (int it = 0; it < 50; ++it) {
    double gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (const Complex& z : v) {
      const Complex w = z - y;
      const double d = std::abs(w);
      if (d <= fine) return y;
      const double ux = w.real() / d, uy = w.imag() / d;
      gx -= ux;
      gy -= uy;
      hxx += (1.0 - ux * ux) / d;
      hxy -= ux * uy / d;
      hyy += (1.0 - uy * uy) / d;
    }
    const double det = hxx * hyy - hxy * hxy;
    if (!(det > 0.0)) break;
    Complex step((-hyy * gx + hxy * gy) / det, (hxy * gx - hxx * gy) / det);
    bool moved = false;
    for (int k = 0; k < 30; ++k, step *= 0.5) {
      const double fn = objective(v, y + step);
      if (fn < f) {
        y += step;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved || std::abs(step) <= fine) break;
  }
  // The minimizer may sit on a data point, where the objective is not smooth: test the
  // optimality condition at the nearest one.
  std::size_t near = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i] - y) < std::abs(v[near] - y)) near = i;
  Complex pull{};
  int coincident = 0;
  for (const Complex& z : v) {
    const double d = std::abs(z - v[near]);
    if (d <= fine) ++coincident;
    else pull += (z - v[near]) / d;
  }
  if (std::abs(pull) <= coincident) return v[near];
  return y;
}

}  // namespace

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Lp: return "Lp";
    case NormKind::WeakLp: return "weakLp";
    case NormKind::BMO: return "BMO";
    case NormKind::OperatorLowerBound: return "operator-lower-bound";
  }
  return "?";
}

NormValue lp_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm needs p >= 1");
  check_finite(f);
  NormValue r;
  r.kind = NormKind::Lp;
  r.p = p;
  double mx = 0.0;
  for (const Complex& z : f.values) mx = std::max(mx, std::abs(z));
  if (std::isinf(p) || mx == 0.0) {
    r.value = mx;
    r.method = "max |f|";
    return r;
  }
  double s = 0.0;
  for (const Complex& z : f.values) s += std::pow(std::abs(z) / mx, p);
  r.value = mx * std::pow(s / static_cast<double>(f.size()), 1.0 / p);
  r.method = "grid quadrature";
  return r;
}

NormValue weak_lp(const GridFunction& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("weak_lp needs p >= 1");
  check_finite(f);
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f[i]);
  std::sort(v.begin(), v.end(), std::greater<>());
  NormValue r;
  r.kind = NormKind::WeakLp;
  r.p = p;
  const double g = static_cast<double>(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double m = static_cast<double>(k + 1) / g;
    r.value = std::max(r.value, v[k] * (std::isinf(p) ? 1.0 : std::pow(m, 1.0 / p)));
  }
  r.method = "exact distribution function on the grid";
  return r;
}

std::vector<double> dyadic_radii(const GridSpec& g) {
  const int coarse = *std::min_element(g.sizes().begin(), g.sizes().end());
  std::vector<double> out;
  for (double r = 0.5; r >= 2.0 / coarse; r *= 0.5) out.push_back(r);
  return out;
}

NormValue bmo_norm(const GridFunction& f) {
  check_finite(f);
  const GridSpec& g = f.spec;
  const bool real = is_real(f);
  const std::size_t n = g.point_count();
  double best = 0.0;
  for (double r : dyadic_radii(g)) {
    const std::vector<GridIndex> st = ball_stencil(r, g);
    double level = 0.0;
#pragma omp parallel
    {
      std::vector<Complex> buf(st.size());
      double local = 0.0;
#pragma omp for schedule(static)
      for (std::size_t c = 0; c < n; ++c) {
        const GridIndex ci = g.unflatten(c);
        for (std::size_t s = 0; s < st.size(); ++s) buf[s] = f[shifted(g, ci, st[s])];
        double dev;
        if (real) {
          std::vector<Complex>& w = buf;
          const double med = real_median(w);
          dev = mean_deviation(w, med);
        } else {
          dev = mean_deviation(buf, geometric_median(buf));
        }
        local = std::max(local, dev);
      }
#pragma omp critical
      level = std::max(level, local);
    }
    best = std::max(best, level);
  }
  NormValue out;
  out.kind = NormKind::BMO;
  out.p = 1.0;
  out.value = best;
  out.method = std::string("sup over grid-centred balls of dyadic radii of inf_b mean |f - b|, b = ") +
               (real ? "median" : "geometric median (Weiszfeld)");
  return out;
}

Atom make_atom(const Point& center, double radius, const GridFunction& profile) {
  check_finite(profile);
  const GridSpec& g = profile.spec;
  Atom a{center, radius, GridFunction::zeros(g), ball(center, radius, g), 0.0};
  if (a.support.size() == g.point_count())
    throw ValidationError("an atom cannot live on a ball covering the whole torus");
  std::vector<char> inside(g.point_count(), 0);
  for (std::size_t i : a.support) inside[i] = 1;
  for (std::size_t i = 0; i < g.point_count(); ++i)
    if (!inside[i] && profile[i] != Complex{}) throw ValidationError("atom profile is not supported in the ball");
  a.ball_measure = static_cast<double>(a.support.size()) / static_cast<double>(g.point_count());

  Complex mean{};
  double scale = 0.0;
  for (std::size_t i : a.support) {
    mean += profile[i];
    scale = std::max(scale, std::abs(profile[i]));
  }
  mean /= static_cast<double>(a.support.size());
  double mx = 0.0;
  for (std::size_t i : a.support) {
    a.values[i] = profile[i] - mean;
    mx = std::max(mx, std::abs(a.values[i]));
  }
  if (!(mx > 1e-14 * scale) || mx == 0.0) throw ValidationError("atom profile is constant on the ball (zero atom)");
  const double cap = 1.0 / a.ball_measure;
  if (mx > cap)
    for (std::size_t i : a.support) a.values[i] *= cap / mx;
  return a;
}

GridFunction maximal_function(const GridFunction& f) {
  check_finite(f);
  const GridSpec& g = f.spec;
  const std::size_t n = g.point_count();
  GridFunction m = GridFunction::zeros(g);
  std::vector<double> absf(n);
  for (std::size_t i = 0; i < n; ++i) {
    absf[i] = std::abs(f[i]);
    m[i] = absf[i];  // the singleton ball {x}
  }
  std::vector<double> means(n);
  for (double r : dyadic_radii(g)) {
    const std::vector<GridIndex> st = ball_stencil(r, g);
    const double w = 1.0 / static_cast<double>(st.size());
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n; ++c) {
      const GridIndex ci = g.unflatten(c);
      double s = 0.0;
      for (const GridIndex& o : st) s += absf[shifted(g, ci, o)];
      means[c] = s * w;
    }
    // Balls of radius r containing x are centred at x + o for o in the (symmetric) stencil.
#pragma omp parallel for schedule(static)
    for (std::size_t x = 0; x < n; ++x) {
      const GridIndex xi = g.unflatten(x);
      double best = m[x].real();
      for (const GridIndex& o : st) best = std::max(best, means[shifted(g, xi, o)]);
      m[x] = best;
    }
  }
  return m;
}

GridFunction BadPart::materialize(const GridSpec& g) const {
  GridFunction b = GridFunction::zeros(g);
  for (std::size_t i = 0; i < cube.indices.size(); ++i) b[cube.indices[i]] = values[i];
  return b;
}

CZDecomposition cz_decompose(const GridFunction& f, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("cz_decompose needs a finite lambda > 0");
  check_finite(f);
  const GridSpec& g = f.spec;
  const int dim = g.dim();
  const int side = g.size(0);
  for (int a = 1; a < dim; ++a)
    if (g.size(a) != side) throw ValidationError("cz_decompose needs equal axis lengths");

  CZDecomposition out{lambda, f, {}, {}, 0.0, {}};
  const auto cube_indices = [&](int level, const GridIndex& corner) {
    const int s = side >> level;
    std::size_t count = 1;
    for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(s);
    std::vector<std::size_t> idx;
    idx.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      GridIndex p = corner;
      std::size_t rem = t;
      for (int a = dim - 1; a >= 0; --a) {
        p[static_cast<std::size_t>(a)] += static_cast<int>(rem % static_cast<std::size_t>(s));
        rem /= static_cast<std::size_t>(s);
      }
      idx.push_back(g.flatten(p));
    }
    return idx;
  };

  double total = 0.0;
  for (const Complex& z : f.values) total += std::abs(z);
  if (total / static_cast<double>(g.point_count()) > lambda)
    out.warnings.push_back("lambda does not exceed mean |f|: the whole torus is selected");

  std::vector<DyadicCube> stack{DyadicCube{0, GridIndex{}, {}}};
  while (!stack.empty()) {
    DyadicCube q = std::move(stack.back());
    stack.pop_back();
    q.indices = cube_indices(q.level, q.corner);
    double s = 0.0;
    for (std::size_t i : q.indices) s += std::abs(f[i]);
    if (s / static_cast<double>(q.indices.size()) > lambda) {
      Complex mean{};
      for (std::size_t i : q.indices) mean += f[i];
      mean /= static_cast<double>(q.indices.size());
      BadPart b{q, mean, {}};
      b.values.reserve(q.indices.size());
      for (std::size_t i : q.indices) {
        b.values.push_back(f[i] - mean);
        out.good[i] = mean;
        out.omega.push_back(i);
      }
      out.bad.push_back(std::move(b));
      continue;
    }
    const int child = side >> (q.level + 1);
    if (child < 1) continue;
    for (int c = (1 << dim) - 1; c >= 0; --c) {
      GridIndex corner = q.corner;
      for (int a = 0; a < dim; ++a)
        if ((c >> (dim - 1 - a)) & 1) corner[static_cast<std::size_t>(a)] += child;
      stack.push_back(DyadicCube{q.level + 1, corner, {}});
    }
  }
  std::sort(out.omega.begin(), out.omega.end());
  out.omega_measure = static_cast<double>(out.omega.size()) / static_cast<double>(g.point_count());
  return out;
}

}  // namespace tpdo
