#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tpdo/errors.hpp"
#include "tpdo/symbol_calculus.hpp"

using namespace tpdo;
using namespace tpdo::calculus;
using dsl::parse;

namespace {

Symbol sym(const char* s, int dim = 1) { return Symbol::analytic(parse(s), dim); }

Symbol family(const dsl::SymbolFamily& f, int dim = 1) { return Symbol::analytic(f.expr, dim, f.params); }

}  // namespace

TEST_CASE("forward differences") {
  const Symbol id = sym("xi1");
  const Symbol sq = sym("xi1^2");
  const auto a1 = MultiIndex::of({1});
  const auto a2 = MultiIndex::of({2});
  for (long long k : {-5LL, 0LL, 17LL}) {
    CHECK(difference(id, a1, {}, {k, 0, 0}) == Complex(1.0));
    CHECK(difference(sq, a1, {}, {k, 0, 0}) == Complex(2.0 * k + 1.0));
    CHECK(difference(sq, a2, {}, {k, 0, 0}) == Complex(2.0));
  }
  // Differences along different axes commute exactly.
  const Symbol p = sym("bracket(xi)^(-0.5)*exp(i*xi1*xi2/7)", 2);
  const auto e1 = MultiIndex::of({1, 0}), e2 = MultiIndex::of({0, 1}), e12 = MultiIndex::of({1, 1});
  for (long long k : {-3LL, 4LL}) {
    const LatticePoint xi{k, 2 * k, 0};
    const Complex d12 = difference(p, e1, {}, {xi[0], xi[1] + 1, 0}) - difference(p, e1, {}, xi);
    const Complex d21 = difference(p, e2, {}, {xi[0] + 1, xi[1], 0}) - difference(p, e2, {}, xi);
    CHECK(std::abs(d12 - d21) <= 1e-15);
    CHECK(std::abs(difference(p, e12, {}, xi) - d12) <= 1e-15);
  }
}

TEST_CASE("differences respect symbol tables") {
  const GridSpec g({8});
  const Symbol t = Symbol::table(g, std::vector<Complex>(64, 1.0));
  CHECK(difference(t, MultiIndex::of({1}), {0.0}, {2, 0, 0}) == Complex(0.0));
  CHECK_THROWS_AS(difference(t, MultiIndex::of({1}), {0.0}, {3, 0, 0}), OutOfTableError);
}

TEST_CASE("spectral x-derivatives") {
  const GridSpec g({64});
  const auto b1 = MultiIndex::of({1});
  const auto c = x_derivative(sym("bracket(xi)^2"), b1, {5, 0, 0}, g);
  for (const Complex& z : c.values) CHECK(std::abs(z) < 1e-10);

  const auto w = x_derivative(sym("exp(2*pi*i*x1)"), b1, {0, 0, 0}, g);
  for (std::size_t k = 0; k < g.point_count(); ++k) {
    const double x = g.point(k)[0];
    CHECK(std::abs(w[k] - Complex(0, 2 * oracle::kPi) * std::polar(1.0, 2 * oracle::kPi * x)) < 1e-10);
  }

  const Symbol ex = family(dsl::exotic_family(0.0, 0.5, 1.0));
  for (long long xi : {3LL, 40LL, 300LL}) {
    const auto d = x_derivative(ex, b1, {xi, 0, 0}, GridSpec({128}));
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < 128; ++k) {
      const Complex o = oracle::exotic_dx1(0.0, 0.5, 1.0, k / 128.0, static_cast<double>(xi * xi));
      err = std::max(err, std::abs(d[k] - o));
      ref = std::max(ref, std::abs(o));
    }
    CHECK(err <= 1e-8 * ref);
  }
  // Rough in x for the grid: refused.
  CHECK_THROWS_AS(x_derivative(family(dsl::exotic_family(0.0, 0.75, 40.0)), b1, {500, 0, 0}, GridSpec({16})),
                  SpectralTailError);
}

TEST_CASE("shell enumeration") {
  const auto s = dyadic_shells(8, 512);
  REQUIRE(s.size() == 6);
  CHECK(s.front() == Shell{8, 16});
  CHECK(s.back() == Shell{256, 512});
  const auto pts = shell_points({8, 16}, 1, {});
  for (const auto& p : pts) {
    CHECK(bracket(p, 1) >= 8);
    CHECK(bracket(p, 1) < 16);
  }
  CHECK(pts.size() == 16);  // |xi| = 8..15 both signs
  ShellOptions small;
  small.max_points_per_shell = 500;
  const auto sub = shell_points({64, 128}, 2, small);
  CHECK(sub.size() <= 500);
  CHECK(sub.size() >= 400);
  CHECK(sub == shell_points({64, 128}, 2, small));
}

TEST_CASE("seminorm constants") {
  const auto shells = dyadic_shells(8, 256);
  const auto zero = MultiIndex::zero(1), one = MultiIndex::of({1});
  for (double m : {-1.0, 0.5, 2.0})
    CHECK(seminorm_constant(family(dsl::bessel_family(m)), zero, zero, ClassParams(m, 1, 0), shells) ==
          doctest::Approx(1.0).epsilon(1e-12));

  const Symbol b = family(dsl::bessel_family(-1));
  const double c1 = seminorm_constant(b, one, zero, ClassParams(-1, 1, 0), dyadic_shells(8, 256));
  const double c2 = seminorm_constant(b, one, zero, ClassParams(-1, 1, 0), dyadic_shells(8, 512));
  CHECK(std::isfinite(c1));
  CHECK(c1 > 0);
  CHECK(std::abs(c2 / c1 - 1.0) <= 0.1);

  CHECK(seminorm_constant(b, zero, one, ClassParams(-1, 1, 0), shells) < 1e-10);
  CHECK_THROWS_AS(seminorm_constant(b, zero, zero, ClassParams(-1, 1, 0), {}), ValidationError);

  // exotic(0, 0.75, 1) measured against (0, 1, 0): the first difference decays like <xi>^{-1/4}, not
  // <xi>^{-1}, so the normalized constant grows by about 2^{3/4} per doubling of the shell range.
  const Symbol ex = family(dsl::exotic_family(0, 0.75, 1));
  const double g1 = seminorm_constant(ex, one, zero, ClassParams(0, 1, 0), dyadic_shells(8, 128));
  const double g2 = seminorm_constant(ex, one, zero, ClassParams(0, 1, 0), dyadic_shells(8, 256));
  const double g3 = seminorm_constant(ex, one, zero, ClassParams(0, 1, 0), dyadic_shells(8, 512));
  CHECK(g2 / g1 > 1.5);
  CHECK(g3 / g2 > 1.5);
  CHECK(g3 / g1 >= 2.0);
}

TEST_CASE("bessel difference slopes") {
  const auto shells = dyadic_shells(8, 512);
  for (double m : {-1.0, 0.5}) {
    const Symbol b = family(dsl::bessel_family(m));
    for (int a = 0; a <= 2; ++a) {
      const auto s = shell_suprema(b, MultiIndex::of({a}), MultiIndex::zero(1), shells);
      std::vector<double> x, y;
      for (std::size_t k = kExcludedInnerShells; k < s.size(); ++k) {
        x.push_back(std::log(s[k].bracket_at_max));
        y.push_back(std::log(s[k].sup));
      }
      CHECK(fit_line(x, y).slope == doctest::Approx(m - a).epsilon(0).scale(1).epsilon(0.1));
    }
  }
}

TEST_CASE("fit_order recovers nominal classes") {
  const auto shells = dyadic_shells(8, 512);
  struct Case {
    dsl::SymbolFamily f;
  };
  for (const auto& f : {dsl::bessel_family(-1), dsl::wainger_family(0.5, 1), dsl::exotic_family(0, 0.75, 1),
                        dsl::exotic_family(-0.5, 0.5, 2)}) {
    const ClassEstimate e = fit_order(family(f), f.nominal, shells);
    INFO(f.name);
    CHECK(std::abs(e.fitted_m - f.nominal.m()) <= 0.1);
    CHECK(std::abs(e.fitted_rho - f.nominal.rho()) <= 0.1);
    CHECK(std::abs(e.fitted_delta - f.nominal.delta()) <= 0.1);
    CHECK(e.fit_shells.size() == 4);
    CHECK(e.max_order == 2);
    CHECK(e.constants.size() == 9);
    for (const auto& fit : e.fits)
      if (!fit.vanishing) CHECK(fit.fit.residuals.size() == 4);
    for (const auto& [key, c] : e.constants) CHECK(std::isfinite(c));
  }
  CHECK_THROWS_AS(fit_order(family(dsl::bessel_family(-1)), ClassParams(-1, 1, 0), dyadic_shells(8, 128)),
                  ValidationError);
}

TEST_CASE("fit_order in two dimensions") {
  const auto f = dsl::exotic_family(-0.5, 0.5, 2);
  ShellOptions opt;
  opt.max_points_per_shell = 96;
  opt.x_points = 16;
  const ClassEstimate e = fit_order(family(f, 2), f.nominal, dyadic_shells(2, 128), 1, opt);
  CHECK(std::abs(e.fitted_m - f.nominal.m()) <= 0.15);
  CHECK(std::abs(e.fitted_delta - f.nominal.delta()) <= 0.15);
}
