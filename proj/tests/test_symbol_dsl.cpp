#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "oracles.hpp"
#include "tpdo/errors.hpp"
#include "tpdo/symbol_dsl.hpp"

using namespace tpdo;
using namespace tpdo::dsl;

namespace {

Complex ev(const std::string& s, Point x = {}, LatticePoint xi = {}, int dim = 1, const ParamMap& params = {}) {
  return parse(s).eval(x, xi, dim, params);
}

std::size_t error_offset(const std::string& s) {
  try {
    parse(s);
  } catch (const ParseError& e) {
    return e.position();
  }
  return std::string::npos;
}

// Random expressions whose x-dependence is through 1-periodic functions only.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 4 : 11);
  std::uniform_real_distribution<double> num(0.5, 3.0);
  switch (pick(rng)) {
    case 0: return std::to_string(num(rng));
    case 1: return "xi1";
    case 2: return "sin(2*pi*x1)";
    case 3: return "cos(2*pi*x2)";
    case 4: return "bracket(xi)";
    case 5: return "(" + random_expr(rng, depth - 1) + "+" + random_expr(rng, depth - 1) + ")";
    case 6: return "(" + random_expr(rng, depth - 1) + "-" + random_expr(rng, depth - 1) + ")";
    case 7: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
    case 8: return "exp(i*" + random_expr(rng, depth - 1) + ")";
    case 9: return "-" + random_expr(rng, depth - 1);
    case 10: return "bracket(" + random_expr(rng, depth - 1) + ")^" + std::to_string(num(rng) - 2.0);
    default: return random_expr(rng, depth - 1) + "/bracket(xi2, " + random_expr(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST_CASE("tokenizer") {
  const auto t = tokenize("bracket(xi1)^2");
  REQUIRE(t.size() == 6);
  CHECK(t[0] == Token{TokenKind::Identifier, "bracket", 0});
  CHECK(t[1].kind == TokenKind::LParen);
  CHECK(t[2] == Token{TokenKind::Identifier, "xi1", 8});
  CHECK(t[3].kind == TokenKind::RParen);
  CHECK(t[4] == Token{TokenKind::Operator, "^", 12});
  CHECK(t[5] == Token{TokenKind::Number, "2", 13});
  CHECK(tokenize("exp(i*pi)").size() == 6);
  const auto u = tokenize(" 1.5e-3 + .25*x");
  for (std::size_t k = 1; k < u.size(); ++k) CHECK(u[k].position > u[k - 1].position);

  try {
    tokenize("1e--3");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  try {
    tokenize("xi1 $ 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_AS(tokenize("2x"), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(ev("1+2*3") == Complex(7.0));
  CHECK(ev("2^3^2") == Complex(512.0));
  CHECK(ev("-2^2") == Complex(-4.0));
  CHECK(ev("(-2)^2") == Complex(4.0));
  CHECK(ev("2^-1") == Complex(0.5));
  CHECK(ev("8/4/2") == Complex(1.0));
  CHECK(ev("1-2-3") == Complex(-4.0));
  CHECK(ev("-3*2") == Complex(-6.0));
  CHECK(ev("--3") == Complex(3.0));
}

TEST_CASE("evaluation examples") {
  CHECK(ev("bracket(xi1)") == Complex(1.0));
  CHECK(std::abs(ev("exp(i*2*pi*x1)", {0.25}) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(ev("exp(i*pi)") + 1.0) < 1e-15);
  CHECK(ev("norm(xi)", {}, {3, 4, 0}, 2) == Complex(5.0));
  CHECK(ev("bracket(xi)", {}, {3, 4, 0}, 2).real() == doctest::Approx(std::sqrt(26.0)));
  CHECK(ev("abs(3-4*i)") == Complex(5.0));
  CHECK(ev("a*xi1+b", {}, {2, 0, 0}, 1, {{"a", 3.0}, {"b", 1.0}}) == Complex(7.0));
  // Principal branch for complex powers: (-1)^(1/2) = i.
  CHECK(std::abs(ev("(-1)^0.5") - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(ev("sqrt(-4)") - Complex(0.0, 2.0)) < 1e-15);
  for (long long k : {-7LL, 0LL, 3LL, 1000LL})
    CHECK(std::abs(ev("exotic(-1, 0.5, 1)", {0.0}, {k, 0, 0}) - 1.0 / oracle::bracket1(static_cast<double>(k))) <
          1e-15);
}

TEST_CASE("domain errors carry positions") {
  try {
    ev("1 + 1/(xi1 - 2)", {}, {2, 0, 0});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.position() == 5);
  }
  try {
    ev("log(x1)", {0.0});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.position() == 0);
  }
  CHECK_THROWS_AS(ev("xi1^(-1)"), DomainError);
  CHECK_THROWS_AS(ev("a + 1"), DomainError);
  CHECK_THROWS_AS(ev("exp(1000)"), DomainError);
}

TEST_CASE("parse errors") {
  CHECK(error_offset("(1+2") == 4);
  CHECK(error_offset("1+2)") == 3);
  CHECK(error_offset("1 + * 2") == 4);
  CHECK(error_offset("sin(1, 2)") == 0);
  CHECK(error_offset("exp") == 0);
  CHECK(error_offset("x4 + 1") == 0);
  CHECK(error_offset("foo(1)") == 0);
  CHECK(error_offset("wainger(1.5, 1)") == 0);
  CHECK(error_offset("bessel(xi1)") == 7);
  CHECK_THROWS_AS(parse(std::vector<Token>{}), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("reserved names and dimension checks") {
  CHECK_THROWS_AS(parse("i*a").bind({{"i", 2.0}}), ValidationError);
  CHECK_THROWS_AS(Symbol::analytic(parse("x3"), 2), ValidationError);
  CHECK_THROWS_AS(Symbol::analytic(parse("xi + 1"), 2), ValidationError);
  CHECK_NOTHROW(Symbol::analytic(parse("bracket(xi) + norm(x)"), 3));
  CHECK_NOTHROW(Symbol::analytic(parse("xi + 1"), 1));
  CHECK_THROWS_AS(Symbol::analytic(parse("a*xi1"), 1), ValidationError);
  CHECK(Symbol::analytic(parse("a*xi1"), 1, {{"a", 2.0}})({}, {3, 0, 0}) == Complex(6.0));
}

TEST_CASE("canonical printer round trip") {
  std::mt19937_64 rng(42);
  std::vector<std::string> inputs = {"1+2*3", "2^3^2", "-2^2", "(2^3)^2", "-(a*b)", "a-(b-c)", "a/(b*c)",
                                     "exotic(0, 0.75, 1)", "wainger(0.5, 1)", "bessel(-1)", "2^-1", "0.1+1e-20",
                                     "bracket(xi1, xi2)^(-s)"};
  for (int k = 0; k < 200; ++k) inputs.push_back(random_expr(rng, 4));
  for (const auto& s : inputs) {
    const std::string once = parse(s).print();
    CHECK_MESSAGE(parse(once).print() == once, s);
  }
  CHECK(parse("-(a*b)").print() == "-(a*b)");
  CHECK(parse("(2^3)^2").print() == "(2^3)^2");
}

TEST_CASE("periodicity in x") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<long long> k(-50, 50);
  std::vector<std::string> exprs = {"bessel(-1)", "wainger(0.5, 1)", "exotic(0, 0.75, 1)", "exotic(-1, 0.5, 3)"};
  for (int t = 0; t < 100; ++t) exprs.push_back(random_expr(rng, 4));
  for (const auto& s : exprs) {
    const Expr e = parse(s);
    const Point x{u(rng), u(rng), 0.0};
    const LatticePoint xi{k(rng), k(rng), 0};
    for (int j = 0; j < 2; ++j) {
      Point shifted = x;
      shifted[j] += 1.0;
      Complex a, b;
      try {
        a = e.eval(x, xi, 2);
        b = e.eval(shifted, xi, 2);
      } catch (const DomainError&) {
        continue;
      }
      CHECK_MESSAGE(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)), s);
    }
  }
}

TEST_CASE("built-in families match closed forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<long long> k(-600, 600);
  for (int dim = 1; dim <= 2; ++dim) {
    const auto b = bessel_family(-1.5);
    const auto w = wainger_family(0.5, 1.0);
    const auto x = exotic_family(0.0, 0.75, 2.0);
    const Symbol sb = Symbol::analytic(b.expr, dim, b.params);
    const Symbol sw = Symbol::analytic(w.expr, dim, w.params);
    const Symbol sx = Symbol::analytic(x.expr, dim, x.params);
    for (int t = 0; t < 1000; ++t) {
      const Point p{u(rng), u(rng), 0.0};
      const LatticePoint xi{k(rng), dim == 2 ? k(rng) : 0, 0};
      const double n2 = static_cast<double>(xi[0] * xi[0] + xi[1] * xi[1]);
      CHECK(std::abs(sb(p, xi) - oracle::bessel(-1.5, n2)) <= 1e-12 * std::abs(oracle::bessel(-1.5, n2)));
      CHECK(std::abs(sw(p, xi) - oracle::wainger(0.5, 1.0, n2)) <= 1e-12 * std::abs(oracle::wainger(0.5, 1.0, n2)));
      CHECK(std::abs(sx(p, xi) - oracle::exotic(0.0, 0.75, 2.0, p[0], n2)) <= 1e-12);
    }
  }
  CHECK(bessel_family(2).nominal == ClassParams(2, 1, 0));
  CHECK(wainger_family(0.25, 2).nominal == ClassParams(-2, 0.75, 0));
  CHECK(exotic_family(-1, 0.75, 1).nominal == ClassParams(-1, 0.25, 0.75));
  CHECK_THROWS_AS(wainger_family(1.0, 0), ValidationError);
  CHECK_THROWS_AS(exotic_family(0, 1.0, 1), ValidationError);
  const auto f = parse_family("exotic(0, 3/4, 1)");
  REQUIRE(f.has_value());
  CHECK(f->params.at("d") == 0.75);
  CHECK_FALSE(parse_family("bracket(xi)^2").has_value());
}

TEST_CASE("table symbols") {
  const GridSpec g({8});
  const FrequencyLattice lat(g);
  std::vector<Complex> v(64);
  for (std::size_t x = 0; x < 8; ++x)
    for (std::size_t k = 0; k < 8; ++k) v[x * 8 + k] = static_cast<double>(lat.frequency(k)[0]) + 10.0 * x;
  const Symbol s = Symbol::table(g, v);
  CHECK_FALSE(s.x_independent());
  CHECK(s({0.25}, {-4, 0, 0}) == Complex(16.0));
  CHECK_THROWS_AS(s({0.0}, {4, 0, 0}), OutOfTableError);
  CHECK_THROWS_AS(s({0.1}, {0, 0, 0}), ValidationError);
  CHECK_FALSE(s.in_domain({4, 0, 0}));
}
