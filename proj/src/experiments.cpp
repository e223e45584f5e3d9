#include "tpdo/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>

#include "tpdo/errors.hpp"
#include "tpdo/regression.hpp"

namespace tpdo {
namespace {

class IdentityOperator final : public Operator {
 public:
  explicit IdentityOperator(GridSpec g) : g_(std::move(g)) {}
  const GridSpec& grid() const override { return g_; }
  GridFunction apply(const GridFunction& f) const override {
    check_grid(f);
    return f;
  }
  GridFunction apply_adjoint(const GridFunction& f) const override { return apply(f); }
  std::string describe() const override { return "identity"; }

 private:
  GridSpec g_;
};

// f -> its mean: the multiplier with symbol 1 at xi = 0 and 0 elsewhere.
class MeanProjection final : public Operator {
 public:
  explicit MeanProjection(GridSpec g) : g_(std::move(g)) {}
  const GridSpec& grid() const override { return g_; }
  GridFunction apply(const GridFunction& f) const override {
    check_grid(f);
    Complex m{};
    for (const Complex& z : f.values) m += z;
    m /= static_cast<double>(f.size());
    return GridFunction(g_, std::vector<Complex>(f.size(), m));
  }
  GridFunction apply_adjoint(const GridFunction& f) const override { return apply(f); }
  std::string describe() const override { return "mean projection"; }

 private:
  GridSpec g_;
};

double conjugate(double s) {
  if (s == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(s)) return 1.0;
  return s / (s - 1.0);
}

std::vector<int> sizes_of(const GridSpec& g) { return g.sizes(); }

GridFunction gaussian_field(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<Complex> v(g.point_count());
  for (auto& z : v) z = {d(rng), d(rng)};
  return GridFunction(g, std::move(v));
}

GridFunction sign_field(const GridSpec& g, std::mt19937_64& rng) {
  std::vector<Complex> v(g.point_count());
  for (auto& z : v) z = (rng() & 1U) ? 1.0 : -1.0;
  return GridFunction(g, std::move(v));
}

Point random_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point p{};
  for (int a = 0; a < dim; ++a) p[static_cast<std::size_t>(a)] = u(rng);
  return p;
}

std::size_t nearest_index(const GridSpec& g, const Point& p) {
  GridIndex i{};
  for (int a = 0; a < g.dim(); ++a)
    i[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(p[static_cast<std::size_t>(a)] * g.size(a)));
  return g.flatten(i);
}

// Signed first-axis offset of x from c on the torus.
double signed_offset(const Point& x, const Point& c) {
  double d = x[0] - c[0];
  return d - std::round(d);
}

// An atom with max |a| = 1/|B| exactly: a random smooth profile on the ball, mean removed.
std::optional<Atom> random_atom(const GridSpec& g, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Point c = random_point(g.dim(), rng);
  const int j = 1 + static_cast<int>(rng() % 3);
  const double phi = 2.0 * std::numbers::pi * u(rng);
  std::vector<std::size_t> b;
  try {
    b = ball(c, radius, g);
  } catch (const DegenerateBallError&) {
    return std::nullopt;
  }
  const double measure = static_cast<double>(b.size()) / static_cast<double>(g.point_count());
  GridFunction prof = GridFunction::zeros(g);
  for (std::size_t i : b)
    prof[i] = 4.0 / measure * std::cos(std::numbers::pi * j * signed_offset(g.point(i), c) / radius + phi);
  try {
    return make_atom(c, radius, prof);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

struct Candidate {
  GridFunction f;
  std::string kind;
  double ratio;
};

bool better(double a, double b) { return std::isfinite(a) && a > b; }

}  // namespace

double norm_ratio(const Operator& t, const GridFunction& f, double p, double q) {
  const double fn = lp_norm(f, p).value;
  if (fn == 0.0) return 0.0;
  return lp_norm(t.apply(f), q).value / fn;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NormEstimate l2_norm(const Operator& t, const PowerIterationOptions& o) {
  if (o.block < 1 || o.max_iterations < 2 || !(o.tolerance > 0.0)) throw ValidationError("invalid power iteration options");
  const GridSpec& g = t.grid();
  const auto n = static_cast<Eigen::Index>(g.point_count());
  const Eigen::Index b = std::min<Eigen::Index>(o.block, n);

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> d;
  Eigen::MatrixXcd x(n, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = Complex(d(rng), d(rng));
  const auto orth = [&](const Eigen::MatrixXcd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return Eigen::MatrixXcd(qr.householderQ() * Eigen::MatrixXcd::Identity(n, b));
  };
  x = orth(x);

  const auto normal_apply = [&](const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd z(n, b);
    for (Eigen::Index j = 0; j < b; ++j) {
      std::vector<Complex> col(m.col(j).data(), m.col(j).data() + n);
      const GridFunction y = t.apply_adjoint(t.apply(GridFunction(g, std::move(col))));
      z.col(j) = Eigen::Map<const Eigen::VectorXcd>(y.values.data(), n);
    }
    return z;
  };

  NormEstimate est;
  est.method = "power-iteration";
  est.seed = o.seed;
  est.truncation = sizes_of(g);
  double prev = -1.0;
  for (int it = 1; it <= o.max_iterations; ++it) {
    const Eigen::MatrixXcd z = normal_apply(x);
    Eigen::MatrixXcd h = x.adjoint() * z;
    h = (h + h.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    const double theta = std::max(0.0, eig.eigenvalues()(b - 1));
    const double gap = theta > 0.0 ? std::abs(theta - prev) / theta : (prev == 0.0 ? 0.0 : 1.0);
    est.iterations = it;
    est.gap = gap;
    if (prev >= 0.0 && gap < o.tolerance) {
      const Eigen::VectorXcd w = x * eig.eigenvectors().col(b - 1);
      est.witness = GridFunction(g, std::vector<Complex>(w.data(), w.data() + n));
      est.witness_kind = "top Ritz vector";
      est.value = norm_ratio(t, *est.witness, 2.0, 2.0);
      est.trials = static_cast<std::size_t>(b);
      return est;
    }
    prev = theta;
    x = orth(z * eig.eigenvectors());
  }
  throw NonConvergenceError("l2_norm: power iteration did not converge in " + std::to_string(o.max_iterations) + " iterations",
                            est.gap);
}

GridFunction align(const GridFunction& u, double s) {
  if (!(s >= 1.0)) throw ValidationError("align needs s >= 1");
  const std::size_t n = u.size();
  double mx = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(u[i]) > mx) {
      mx = std::abs(u[i]);
      arg = i;
    }
  GridFunction f = GridFunction::zeros(u.spec);
  if (mx == 0.0) return f;
  if (s == 1.0) {
    f[arg] = static_cast<double>(n) * u[arg] / mx;
    return f;
  }
  if (std::isinf(s)) {
    for (std::size_t i = 0; i < n; ++i)
      if (u[i] != Complex{}) f[i] = u[i] / std::abs(u[i]);
    return f;
  }
  const double e = conjugate(s) - 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(u[i]);
    if (a > 0.0) f[i] = u[i] / a * std::pow(a / mx, e);
  }
  const double fn = lp_norm(f, s).value;
  for (auto& z : f.values) z /= fn;
  return f;
}

NormEstimate lp_lq_lower_bound(const Operator& t, double p, double q, const LowerBoundOptions& o) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw ValidationError("lp_lq_lower_bound needs p, q >= 1");
  const GridSpec& g = t.grid();
  std::mt19937_64 rng(o.seed);

  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < o.trials; ++i) cands.push_back({gaussian_field(g, rng), "gaussian", 0.0});
  for (std::size_t i = 0; i < o.trials; ++i) cands.push_back({sign_field(g, rng), "signs", 0.0});
  const std::vector<double> radii = dyadic_radii(g);
  for (std::size_t i = 0; i < o.trials && !radii.empty(); ++i)
    if (auto a = random_atom(g, radii[i % radii.size()], rng)) cands.push_back({a->values, "atom", 0.0});

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cands.size(); ++i) {
    try {
      cands[i].ratio = norm_ratio(t, cands[i].f, p, q);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  NormEstimate est;
  est.p = p;
  est.q = q;
  est.method = "ascent";
  est.seed = o.seed;
  est.truncation = sizes_of(g);
  est.trials = cands.size();
  est.value = -1.0;
  const auto consider = [&](const GridFunction& f, double r, const std::string& kind) {
    if (better(r, est.value)) {
      est.value = r;
      est.witness = f;
      est.witness_kind = kind;
    }
  };
  for (const Candidate& c : cands) consider(c.f, c.ratio, c.kind);

  // Ascent from the best start of each class.
  const double qd = conjugate(q);
  for (const std::string kind : {"gaussian", "signs", "atom"}) {
    const Candidate* start = nullptr;
    for (const Candidate& c : cands)
      if (c.kind == kind && (start == nullptr || c.ratio > start->ratio)) start = &c;
    if (start == nullptr) continue;
    GridFunction f = start->f;
    double last = start->ratio;
    for (int step = 0; step < o.ascent_steps; ++step) {
      const GridFunction h = align(t.apply(f), qd);
      GridFunction next = align(t.apply_adjoint(h), p);
      if (lp_norm(next, p).value == 0.0) break;
      const double r = norm_ratio(t, next, p, q);
      consider(next, r, std::string(kind) + "+ascent");
      f = std::move(next);
      if (std::abs(r - last) <= 1e-14 * std::max(1.0, r)) break;
      last = r;
    }
  }
  est.value = std::max(est.value, 0.0);
  est.iterations = o.ascent_steps;
  return est;
}

dsl::SymbolFamily with_order(const dsl::SymbolFamily& f, double m) {
  if (f.name == "bessel") return dsl::bessel_family(m);
  if (f.name == "wainger") return dsl::wainger_family(f.params.at("a"), -m);
  if (f.name == "exotic") return dsl::exotic_family(m, f.params.at("d"), f.params.at("c"));
  throw ValidationError("family '" + f.name + "' has no order parameter");
}

ThresholdSweepRecord threshold_sweep(const dsl::SymbolFamily& family, double p, const std::vector<double>& orders,
                                     const std::vector<int>& truncations, const SweepOptions& o) {
  if (truncations.size() < 3) throw ValidationError("threshold_sweep needs at least 3 truncations");
  if (orders.empty()) throw ValidationError("threshold_sweep needs at least one order");
  if (!(p >= 1.0)) throw ValidationError("threshold_sweep needs p >= 1");
  ThresholdSweepRecord rec{family, o.dim, p, orders, truncations, {}, 0.0, {}, {}, o.bound.seed, o.bound.trials};
  rec.threshold = family.nominal.lp_order(p, o.dim);
  const std::size_t nm = orders.size(), nn = truncations.size();
  rec.estimates.assign(nm, std::vector<NormEstimate>(nn));

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t j = 0; j < nn; ++j) {
      try {
        const dsl::SymbolFamily f = with_order(family, orders[i]);
        const GridSpec g = GridSpec::cube(o.dim, truncations[j]);
        const PdoOperator t(dsl::Symbol::analytic(f.expr, o.dim, f.params), g, f.nominal);
        LowerBoundOptions lb = o.bound;
        lb.seed = derive_seed(o.bound.seed, i * nn + j);
        rec.estimates[i][j] = lp_lq_lower_bound(t, p, p, lb);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> logn;
  for (int n : truncations) logn.push_back(std::log(static_cast<double>(n)));
  for (std::size_t i = 0; i < nm; ++i) {
    std::vector<double> logv;
    for (const NormEstimate& e : rec.estimates[i]) logv.push_back(std::log(e.value));
    const double s = fit_line(logn, logv).slope;
    rec.slopes.push_back(s);
    rec.classification.push_back(s < kBoundedSlope ? "bounded-consistent" : s > kGrowthSlope ? "growth" : "inconclusive");
  }
  return rec;
}

OperatorFamily pdo_family(const dsl::SymbolFamily& family, int dim) {
  const std::string name = family.expr.print();
  return {family.name + ": " + name,
          [family, dim](const GridSpec& g) -> OperatorPtr {
            if (g.dim() != dim) throw ValidationError("grid dimension does not match the symbol");
            return std::make_shared<PdoOperator>(dsl::Symbol::analytic(family.expr, dim, family.params), g, family.nominal);
          },
          family.nominal};
}

OperatorFamily bessel_left(const OperatorFamily& t, double s) {
  std::optional<ClassParams> nominal;
  if (t.nominal) nominal = t.nominal->with_order(t.nominal->m() + s);
  return {"J^" + std::to_string(s) + " o " + t.name,
          [build = t.build, s](const GridSpec& g) { return compose_bessel(build(g), s, Side::Left); }, nominal};
}

OperatorFamily adjoint_family(const OperatorFamily& t) {
  // The adjoint of an operator of class (m, rho, delta) has the same class.
  return {"adjoint(" + t.name + ")", [build = t.build](const GridSpec& g) { return adjoint_operator(build(g)); },
          t.nominal};
}

OperatorFamily identity_family() {
  return {"identity", [](const GridSpec& g) -> OperatorPtr { return std::make_shared<IdentityOperator>(g); },
          ClassParams(0.0, 1.0, 0.0)};
}

OperatorFamily mean_projection_family() {
  return {"mean projection", [](const GridSpec& g) -> OperatorPtr { return std::make_shared<MeanProjection>(g); },
          ClassParams(-1e3, 1.0, 0.0)};  // smoothing: any finite order; -1e3 stands in for -infinity
}

namespace {

std::vector<std::string> hypothesis_warnings(const OperatorFamily& t, int dim) {
  if (!t.nominal) return {"operator has no nominal class: the order hypothesis is unchecked"};
  const double crit = t.nominal->endpoint_order(dim);
  if (t.nominal->m() > crit + 1e-12)
    return {"nominal order " + std::to_string(t.nominal->m()) + " exceeds -n[(1-rho)/2 + lambda] = " + std::to_string(crit)};
  return {};
}

// Trial functions are defined on the continuum and sampled, so the same trial index gives the
// same function (up to sampling) at every truncation.
struct Trial {
  std::string kind;
  GridFunction f;
};

Trial weak_trial(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double big = static_cast<double>(g.point_count());
  GridFunction f = GridFunction::zeros(g);
  switch (seed % 3) {
    case 0: {
      f[nearest_index(g, random_point(g.dim(), rng))] = big;
      return {"spike", f};
    }
    case 1: {
      const Point c = random_point(g.dim(), rng);
      const double r = std::ldexp(1.0, -2 - static_cast<int>(rng() % 4));
      const double beta = 0.2 + 0.8 * u(rng);
      std::vector<std::size_t> b;
      try {
        b = ball(c, r, g);
      } catch (const DegenerateBallError&) {
        b = {nearest_index(g, c)};
      }
      const double measure = static_cast<double>(b.size()) / big;
      for (std::size_t i : b) {
        const double s = signed_offset(g.point(i), c);
        f[i] = ((s > 0) - (s < 0) + beta) / measure;
      }
      return {"atom+constant", f};
    }
    default: {
      const int k = 2 + static_cast<int>(rng() % 7);
      std::vector<double> w(static_cast<std::size_t>(k));
      double total = 0.0;
      for (double& x : w) total += (x = 0.1 + u(rng));
      for (int j = 0; j < k; ++j) {
        const double sign = (rng() & 1U) ? 1.0 : -1.0;
        f[nearest_index(g, random_point(g.dim(), rng))] += sign * big * w[static_cast<std::size_t>(j)] / total;
      }
      return {"sparse signs", f};
    }
  }
}

Trial bmo_trial(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f = GridFunction::zeros(g);
  if (seed % 2 == 0) {
    // Signs constant on a fixed partition of the torus into 32^n cells.
    const int cells = 32;
    std::size_t count = 1;
    for (int a = 0; a < g.dim(); ++a) count *= cells;
    std::vector<double> sign(count);
    for (double& s : sign) s = (rng() & 1U) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < g.point_count(); ++i) {
      const Point x = g.point(i);
      std::size_t cell = 0;
      for (int a = 0; a < g.dim(); ++a)
        cell = cell * cells + static_cast<std::size_t>(std::floor(x[static_cast<std::size_t>(a)] * cells)) % cells;
      f[i] = sign[cell];
    }
    return {"signs", f};
  }
  // Lacunary trigonometric sum, normalized in L^inf.
  const int terms = 5;
  std::vector<double> amp(terms), phase(terms);
  for (int k = 0; k < terms; ++k) {
    amp[static_cast<std::size_t>(k)] = 2.0 * u(rng) - 1.0;
    phase[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * u(rng);
  }
  double mx = 0.0;
  for (std::size_t i = 0; i < g.point_count(); ++i) {
    const Point x = g.point(i);
    double s = 0.0;
    for (int k = 0; k < terms; ++k)
      s += amp[static_cast<std::size_t>(k)] *
           std::cos(2.0 * std::numbers::pi * std::ldexp(1.0, k) * x[static_cast<std::size_t>(k % g.dim())] +
                    phase[static_cast<std::size_t>(k)]);
    f[i] = s;
    mx = std::max(mx, std::abs(s));
  }
  if (mx > 0.0)
    for (auto& z : f.values) z /= mx;
  return {"lacunary", f};
}

template <class Ratio>
TruncationResult run_trials(const GridSpec& g, std::size_t trials, std::uint64_t seed,
                            Trial (*make)(const GridSpec&, std::uint64_t), Ratio&& ratio) {
  TruncationResult r;
  r.truncation = g.sizes();
  r.ratios.assign(trials, 0.0);
  r.kinds.assign(trials, "");
  std::vector<GridFunction> inputs(trials, GridFunction::zeros(g));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < trials; ++i) {
    try {
      Trial t = make(g, derive_seed(seed, i));
      r.ratios[i] = ratio(t.f);
      r.kinds[i] = t.kind;
      inputs[i] = std::move(t.f);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t i = 0; i < trials; ++i)
    if (r.ratios[i] > r.max_ratio) {
      r.max_ratio = r.ratios[i];
      r.argmax = i;
    }
  if (trials > 0) r.witness = inputs[r.argmax];
  return r;
}

double relative_change(const std::vector<TruncationResult>& rs) {
  if (rs.size() < 2 || rs.front().max_ratio == 0.0) return 0.0;
  return std::abs(rs.back().max_ratio - rs.front().max_ratio) / rs.front().max_ratio;
}

void check_options(const ExperimentOptions& o) {
  if (o.truncations.empty()) throw ValidationError("experiment needs at least one truncation");
  if (o.trials == 0) throw ValidationError("experiment needs at least one trial");
}

}  // namespace

WeakTypeReport weak11_experiment(const OperatorFamily& t, const ExperimentOptions& o) {
  check_options(o);
  WeakTypeReport rep;
  rep.op = t.name;
  rep.lambda_grid = o.lambda_grid;
  rep.warnings = hypothesis_warnings(t, o.dim);
  rep.seed = o.seed;
  rep.trials = o.trials;
  for (int n : o.truncations) {
    const GridSpec g = GridSpec::cube(o.dim, n);
    const OperatorPtr op = t.build(g);
    rep.results.push_back(run_trials(g, o.trials, o.seed, weak_trial, [&](const GridFunction& f) {
      const double l1 = lp_norm(f, 1.0).value;
      const GridFunction tf = op->apply(f);
      if (o.lambda_grid.empty()) return weak_lp(tf, 1.0).value / l1;
      double best = 0.0;
      for (double lam : o.lambda_grid) {
        std::size_t count = 0;
        for (const Complex& z : tf.values) count += std::abs(z) > lam * l1;
        best = std::max(best, lam * static_cast<double>(count) / static_cast<double>(tf.size()));
      }
      return best;
    }));
    if (rep.input_l1.empty())
      for (std::size_t i = 0; i < o.trials; ++i) rep.input_l1.push_back(lp_norm(weak_trial(g, derive_seed(o.seed, i)).f, 1.0).value);
  }
  rep.relative_change = relative_change(rep.results);
  return rep;
}

ExperimentReport linf_bmo_experiment(const OperatorFamily& t, const ExperimentOptions& o) {
  check_options(o);
  ExperimentReport rep;
  rep.op = t.name;
  rep.kind = "bmo";
  rep.warnings = hypothesis_warnings(t, o.dim);
  rep.seed = o.seed;
  rep.trials = o.trials;
  for (int n : o.truncations) {
    const GridSpec g = GridSpec::cube(o.dim, n);
    const OperatorPtr op = t.build(g);
    rep.results.push_back(run_trials(g, o.trials, o.seed, bmo_trial, [&](const GridFunction& f) {
      const double inf = lp_norm(f, std::numeric_limits<double>::infinity()).value;
      return inf > 0.0 ? bmo_norm(op->apply(f)).value / inf : 0.0;
    }));
  }
  rep.relative_change = relative_change(rep.results);
  return rep;
}

ExperimentReport h1_l1_experiment(const OperatorFamily& t, const ExperimentOptions& o) {
  check_options(o);
  ExperimentReport rep;
  rep.op = t.name;
  rep.kind = "h1l1";
  rep.warnings = hypothesis_warnings(t, o.dim);
  rep.seed = o.seed;
  rep.trials = o.trials;
  rep.radii = o.atom_radii;
  if (rep.radii.empty())
    for (int k = 2; k <= 6; ++k) rep.radii.push_back(std::ldexp(1.0, -k));
  for (double r : rep.radii) {
    if (!(r > 0.0)) throw ValidationError("atom radii must be positive");
    rep.regime.push_back(r <= o.unit_scale ? "small" : "large");
  }
  const std::size_t nr = rep.radii.size();
  for (int n : o.truncations) {
    const GridSpec g = GridSpec::cube(o.dim, n);
    const OperatorPtr op = t.build(g);
    TruncationResult res;
    res.truncation = g.sizes();
    res.ratios.assign(o.trials, 0.0);
    res.kinds.assign(o.trials, "");
    std::vector<std::optional<GridFunction>> atoms(o.trials);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < o.trials; ++i) {
      try {
        std::mt19937_64 rng(derive_seed(o.seed, i));
        const double r = rep.radii[i % nr];
        res.kinds[i] = "atom r=" + std::to_string(r);
        if (auto a = random_atom(g, r, rng)) {
          res.ratios[i] = lp_norm(op->apply(a->values), 1.0).value;
          atoms[i] = std::move(a->values);
        }
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = 0; i < o.trials; ++i)
      if (res.ratios[i] > res.max_ratio) {
        res.max_ratio = res.ratios[i];
        res.argmax = i;
      }
    res.witness = atoms[res.argmax];
    rep.radius_max.assign(nr, 0.0);
    for (std::size_t i = 0; i < o.trials; ++i) rep.radius_max[i % nr] = std::max(rep.radius_max[i % nr], res.ratios[i]);
    rep.results.push_back(std::move(res));
  }
  rep.relative_change = relative_change(rep.results);
  return rep;
}

AdmissibilityReport lp_lq_admissibility(const ClassParams& c, double p, double q, int dim) {
  if (!(p > 1.0 && p <= q && std::isfinite(q))) throw ValidationError("lp_lq_admissibility needs 1 < p <= q < infinity");
  if (dim < 1) throw ValidationError("dimension must be positive");
  const double n = dim, ip = 1.0 / p, iq = 1.0 / q, lam = c.lambda(), r = 1.0 - c.rho();
  AdmissibilityReport rep{c, dim, p, q, 'a', 0.0, {}, false};
  if (p <= 2.0 && 2.0 <= q) rep.cases.push_back({'a', -n * (ip - iq + lam)});
  if (2.0 <= p) rep.cases.push_back({'b', -n * (ip - iq + r * (0.5 - ip) + lam)});
  if (q <= 2.0) rep.cases.push_back({'c', -n * (ip - iq + r * (iq - 0.5) + lam)});
  rep.primary = rep.cases.front().id;
  rep.threshold = rep.cases.front().threshold;
  rep.admissible = c.m() <= rep.threshold + 1e-12;
  return rep;
}

Weak11Hypothesis weak11_hypothesis(const ClassParams& c, int dim) {
  Weak11Hypothesis h;
  h.alpha = c.rho();
  h.beta = dim * (1.0 - c.rho()) / 2.0;
  h.q = 2.0 / (2.0 - c.rho());
  h.residual = 1.0 / h.q - (0.5 + h.beta / dim);
  h.order_ok = c.m() <= c.endpoint_order(dim) + 1e-12;
  return h;
}

}  // namespace tpdo
