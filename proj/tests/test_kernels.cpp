#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tpdo/errors.hpp"
#include "tpdo/kernels.hpp"

using namespace tpdo;
using calculus::MultiIndex;
using dsl::parse;
using dsl::Symbol;

namespace {

Symbol fam_symbol(const dsl::SymbolFamily& f, int dim = 1) { return Symbol::analytic(f.expr, dim, f.params); }

Symbol expr_symbol(const char* s, int dim = 1) { return Symbol::analytic(parse(s), dim); }

// k(x, y) by the defining sum over the box {-L/2, ..., L/2 - 1} (n = 1).
Complex direct_kernel(const std::function<Complex(double, long long)>& q, int l, double x, double y) {
  Complex acc{};
  for (long long xi = -l / 2; xi < l / 2; ++xi)
    acc += std::polar(1.0, 2 * oracle::kPi * (x - y) * static_cast<double>(xi)) * q(x, xi);
  return acc;
}

}  // namespace

TEST_CASE("kernel synthesis agrees with the dense matrix") {
  const GridSpec g({32});
  for (const auto& f : {dsl::bessel_family(-1), dsl::wainger_family(0.5, 1), dsl::exotic_family(0, 0.75, 1),
                        dsl::exotic_family(-0.5, 0.5, 2)}) {
    const auto t = make_pdo(f, g);
    const KernelMatrix k = synthesize_kernel(*t);
    const auto m = to_matrix(*t);
    double err = 0.0, ref = 0.0;
    for (int x = 0; x < 32; ++x)
      for (int y = 0; y < 32; ++y) {
        err = std::max(err, std::abs(k(x, y) - 32.0 * m.m(x, y)));
        ref = std::max(ref, std::abs(k(x, y)));
      }
    CHECK(err <= 1e-10 * ref);
  }
}

TEST_CASE("Dirichlet kernel") {
  const int n = 32;
  const auto t = std::make_shared<PdoOperator>(expr_symbol("1"), GridSpec({n}));
  // On the lattice's own grid the box sum is n * delta.
  const KernelMatrix k1 = synthesize_kernel(*t);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) CHECK(std::abs(k1(x, y) - (x == y ? Complex(n) : Complex(0))) < 1e-10);
  // Off the grid it is e^{-i pi d} sin(pi n d) / sin(pi d) for the box {-n/2, ..., n/2 - 1}.
  const KernelMatrix k2 = synthesize_kernel(*t, 2);
  for (int x = 0; x < 2 * n; x += 3)
    for (int y = 0; y < 2 * n; ++y) {
      const double d = (x - y) / (2.0 * n);
      const Complex closed = std::abs(std::sin(oracle::kPi * d)) < 1e-14
                                 ? Complex(n)
                                 : std::polar(1.0, -oracle::kPi * d) * std::sin(oracle::kPi * n * d) / std::sin(oracle::kPi * d);
      CHECK(std::abs(k2(x, y) - closed) < 1e-10);
    }
}

TEST_CASE("multiplier kernels are circulant and bounded by the symbol sum") {
  const GridSpec g({64});
  const auto t = make_bessel(-2, g);
  const KernelMatrix k = synthesize_kernel(*t);
  CHECK(k.circulant);
  for (int h : {1, 7, 33})
    for (int x = 0; x < 64; x += 5)
      for (int y = 0; y < 64; y += 3) CHECK(k(x, y) == k((x + h) % 64, (y + h) % 64));
  double bound = 0.0;
  for (long long xi = -32; xi < 32; ++xi) bound += std::pow(oracle::bracket1(static_cast<double>(xi)), -2.0);
  double mx = 0.0;
  for (const Complex& z : k.values) mx = std::max(mx, std::abs(z));
  CHECK(mx <= bound * (1 + 1e-12));
}

TEST_CASE("row sums reproduce apply(T, 1)") {
  const GridSpec g({32});
  const auto t = make_pdo(dsl::exotic_family(-0.5, 0.5, 2), g);
  const KernelMatrix k = synthesize_kernel(*t);
  const GridFunction one = GridFunction::sample(g, [](const Point&) { return Complex(1.0); });
  const GridFunction r = t->apply(one);
  for (int x = 0; x < 32; ++x) {
    Complex s{};
    for (int y = 0; y < 32; ++y) s += k(x, y);
    CHECK(std::abs(s / 32.0 - r[x]) < 1e-10);
  }
}

TEST_CASE("derivative kernels") {
  const GridSpec g({32});
  const MultiIndex zero = MultiIndex::zero(1), one = MultiIndex::of({1});
  const auto mult = make_bessel(-1, g);
  const KernelMatrix base = synthesize_kernel(*mult, 2);
  CHECK(derivative_kernel(*mult, zero, zero, 2).values == base.values);

  // beta = 1 on a multiplier: minus the spectral derivative of the kernel row, i.e. d_y.
  const KernelMatrix dy = derivative_kernel(*mult, zero, one, 2);
  const GridSpec fine({64});
  const auto c = oracle::direct_dft(fine, base.values);
  const FrequencyLattice lat(fine);
  for (int z = 0; z < 64; ++z) {
    Complex acc{};
    for (std::size_t k = 0; k < 64; ++k) {
      const double xi = static_cast<double>(lat.frequency(k)[0]);
      acc += std::polar(1.0, 2 * oracle::kPi * z * xi / 64.0) * Complex(0, 2 * oracle::kPi * xi) * c[k];
    }
    CHECK(std::abs(dy.values[z] + acc) <= 1e-8 * std::abs(acc) + 1e-8);
  }

  // alpha = 1 on a multiplier: only the (2 pi i xi) p term survives.
  const KernelMatrix dx = derivative_kernel(*mult, one, zero, 2);
  for (int z = 0; z < 64; ++z) CHECK(std::abs(dx.values[z] + dy.values[z]) < 1e-9);

  // alpha = 1 on the exotic family: (2 pi i xi) p + d_x p.
  const auto ex = make_pdo(dsl::exotic_family(-1, 0.5, 1), g);
  const KernelMatrix kx = derivative_kernel(*ex, one, zero, 1);
  const auto q = [](double x, long long xi) {
    const double n2 = static_cast<double>(xi * xi);
    return Complex(0, 2 * oracle::kPi * xi) * oracle::exotic(-1, 0.5, 1, x, n2) + oracle::exotic_dx1(-1, 0.5, 1, x, n2);
  };
  for (int x = 0; x < 32; x += 5)
    for (int y = 0; y < 32; y += 3) {
      const Complex o = direct_kernel(q, 32, x / 32.0, y / 32.0);
      CHECK(std::abs(kx(x, y) - o) <= 1e-8 * (1 + std::abs(o)));
    }
  CHECK_THROWS_AS(derivative_kernel(*ex, MultiIndex::of({2}), one), ValidationError);
}

TEST_CASE("decay scans") {
  DecayOptions o;
  o.exponent = 0;
  o.truncations = {128, 256};
  o.cutoff = 4.0 / 128;
  const auto b2 = decay_scan(fam_symbol(dsl::bessel_family(-2)), o);
  double bound = 0.0;
  for (long long xi = -128; xi < 128; ++xi) bound += std::pow(oracle::bracket1(static_cast<double>(xi)), -2.0);
  for (const auto& e : b2.entries) CHECK(e.sup <= bound);
  CHECK(std::abs(b2.stability_ratio - 1.0) <= 0.05);

  DecayOptions p;
  p.exponent = 1;
  const auto b1 = decay_scan(fam_symbol(dsl::bessel_family(-1)), p);
  CHECK(b1.entries.size() == 3);
  CHECK(b1.stability_ratio >= 0.5);
  CHECK(b1.stability_ratio <= 2.0);

  const auto dirichlet = decay_scan(expr_symbol("1"), DecayOptions{});
  CHECK(dirichlet.stability_ratio > 1.8);
  CHECK(dirichlet.entries[1].sup / dirichlet.entries[0].sup == doctest::Approx(2.0).epsilon(0.1));

  DecayOptions bad;
  bad.cutoff = 1.0 / 512;
  CHECK_THROWS_AS(decay_scan(expr_symbol("1"), bad), ValidationError);

  // x-dependent symbols stream rows.
  DecayOptions x;
  x.truncations = {32, 64};
  x.max_rows = 16;
  const auto ex = decay_scan(fam_symbol(dsl::exotic_family(-2, 0.5, 1)), x);
  CHECK(std::isfinite(ex.stability_ratio));
}

TEST_CASE("log bound checks") {
  const Symbol b1 = fam_symbol(dsl::bessel_family(-1));
  const auto r256 = log_bound_check(b1, 256);
  const auto r512 = log_bound_check(b1, 512);
  CHECK(r256.residual_ratio <= 1.5);
  CHECK(r512.residual_ratio <= 1.5);
  CHECK(std::abs(r512.slope / r256.slope - 1.0) <= 0.2);
  CHECK_FALSE(r512.bounded);

  const auto b2 = log_bound_check(fam_symbol(dsl::bessel_family(-2)), 512);
  CHECK(b2.bounded);
  CHECK(b2.inner_slope / b2.max_abs_kernel < 0.15);

  // Order -1 multiplier with a bounded, smooth phase.
  const Symbol ph = expr_symbol("bracket(xi)^(-1)*exp(i*0.6*xi1/bracket(xi))");
  const auto p256 = log_bound_check(ph, 256);
  const auto p512 = log_bound_check(ph, 512);
  CHECK(p256.residual_ratio <= 1.5);
  CHECK(p512.residual_ratio <= 1.5);
  CHECK(std::abs(p512.slope / p256.slope - 1.0) <= 0.2);
}

TEST_CASE("sigma estimates") {
  const GridSpec g({128});
  const auto j = make_bessel(-2, g);
  SigmaOptions o;
  o.samples = 16;
  o.sigmas = {1.0 / 32, 1.0 / 16, 1.0 / 8};  // rho = 1: sigma = 1/4 would exclude all of T^1
  const auto b = sigma_estimates(*j, SigmaVariant::B, o);
  REQUIRE(b.suprema.size() == 3);
  const KernelMatrix k = synthesize_kernel(*j);
  double l1 = 0.0;
  for (const Complex& z : k.values) l1 += std::abs(z) / 128.0;
  for (double s : b.suprema) {
    CHECK(std::isfinite(s));
    CHECK(s <= 2.0 * l1);
  }
  CHECK(b.warnings.empty());
  // Self-adjoint real multiplier: the transposed variant coincides.
  const auto c = sigma_estimates(*j, SigmaVariant::C, o);
  for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(c.suprema[s] - b.suprema[s]) <= 1e-10 * b.suprema[s]);
  // Radii follow the two regimes.
  const auto a = sigma_estimates(*j, SigmaVariant::A1, o);
  CHECK(a.radii[1] == doctest::Approx(2.0 / 16));
  CHECK(b.radii[1] == doctest::Approx(2.0 / 16));  // rho = 1

  SigmaOptions full;
  full.samples = 16;
  const auto w = sigma_estimates(*make_pdo(dsl::exotic_family(0, 0.75, 1), g), SigmaVariant::B, full);
  CHECK_FALSE(w.warnings.empty());
  CHECK(w.radii[0] == doctest::Approx(2 * 0.125 * std::pow(0.25, 0.25)));

  SigmaOptions bad = o;
  bad.sigmas = {0.5};
  CHECK_THROWS_AS(sigma_estimates(*j, SigmaVariant::B, bad), ValidationError);
  bad.sigmas = {1.0 / 256};
  CHECK_THROWS_AS(sigma_estimates(*j, SigmaVariant::B, bad), ValidationError);
  // sigma = 1/4 with rho = 1 excludes everything beyond 1/2: empty domain on T^1.
  SigmaOptions far = o;
  far.sigmas = {0.25};
  CHECK_THROWS_AS(sigma_estimates(*j, SigmaVariant::A1, far), ValidationError);

}
