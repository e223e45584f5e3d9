#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tpdo/errors.hpp"
#include "tpdo/experiments.hpp"

using namespace tpdo;

namespace {

std::shared_ptr<PdoOperator> random_table_operator(const GridSpec& g, std::uint64_t seed, bool multiplier) {
  const std::size_t n = g.point_count();
  std::vector<Complex> row = oracle::random_values(n, seed);
  std::vector<Complex> vals(n * n);
  const auto other = oracle::random_values(n * n, seed + 1);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < n; ++k) vals[x * n + k] = multiplier ? row[k] : other[x * n + k];
  return std::make_shared<PdoOperator>(dsl::Symbol::table(g, std::move(vals)), g);
}

double top_singular_value(const Operator& t) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_matrix(t).m);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("L2 norms by power iteration") {
  const GridSpec g({32});
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto t = random_table_operator(g, 40 + s, true);
    double mx = 0.0;
    for (const Complex& z : t->multiplier()) mx = std::max(mx, std::abs(z));
    const NormEstimate e = l2_norm(*t);
    CHECK(std::abs(e.value - mx) <= 1e-6 * mx);
    REQUIRE(e.witness);
    CHECK(std::abs(norm_ratio(*t, *e.witness, 2, 2) - e.value) <= 1e-10 * e.value);
  }
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto t = random_table_operator(g, 70 + s, false);
    const double sv = top_singular_value(*t);
    CHECK(std::abs(l2_norm(*t).value - sv) <= 1e-6 * sv);
    CHECK(std::abs(l2_norm(*adjoint_operator(t)).value - sv) <= 1e-6 * sv);
  }
  CHECK(l2_norm(*make_bessel(-1.5, GridSpec({64}))).value == doctest::Approx(1.0).epsilon(1e-6));
  const auto ex = make_pdo(dsl::exotic_family(-0.5, 0.5, 2), GridSpec({8, 8}));
  CHECK(l2_norm(*ex).value == doctest::Approx(top_singular_value(*ex)).epsilon(1e-6));

  PowerIterationOptions tight;
  tight.max_iterations = 2;
  tight.tolerance = 1e-300;
  CHECK_THROWS_AS(l2_norm(*random_table_operator(g, 9, false), tight), NonConvergenceError);
}

TEST_CASE("Lp -> Lq lower bounds") {
  const GridSpec g({32});
  const OperatorPtr id = identity_family().build(g);
  for (double p : {1.0, 1.5, 2.0, 3.0, double(INFINITY)}) {
    const NormEstimate e = lp_lq_lower_bound(*id, p, p);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(lp_lq_lower_bound(*id, 2, 4).value >= 1.0);
  CHECK(lp_lq_lower_bound(*mean_projection_family().build(g), 2, 2).value == doctest::Approx(1.0).epsilon(1e-9));

  // 2 -> infinity has a closed form: sup_x ||row x||_2 in the quadrature pairing.
  const auto j = make_bessel(-1, g);
  const auto m = to_matrix(*j).m;
  double exact = 0.0;
  for (Eigen::Index x = 0; x < m.rows(); ++x) exact = std::max(exact, m.row(x).norm() * std::sqrt(32.0));
  const NormEstimate e = lp_lq_lower_bound(*j, 2, INFINITY);
  CHECK(e.value <= exact * (1 + 1e-10));
  CHECK(e.value >= 0.95 * exact);
  REQUIRE(e.witness);
  CHECK(std::abs(norm_ratio(*j, *e.witness, 2, INFINITY) - e.value) <= 1e-10 * e.value);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = random_table_operator(g, 200 + s, true);
    const double l2 = l2_norm(*t).value;
    const NormEstimate b = lp_lq_lower_bound(*t, 2, 2);
    CHECK(b.value <= l2 + 1e-6);
    CHECK(b.value >= 0.99 * l2);
    REQUIRE(b.witness);
    CHECK(std::abs(norm_ratio(*t, *b.witness, 2, 2) - b.value) <= 1e-10 * b.value);
  }
  // Deterministic under a fixed seed.
  const auto ex = make_pdo(dsl::exotic_family(0, 0.5, 1), g);
  CHECK(lp_lq_lower_bound(*ex, 4, 4).value == lp_lq_lower_bound(*ex, 4, 4).value);
}

TEST_CASE("align") {
  const GridSpec g({16});
  const GridFunction u(g, oracle::random_values(16, 3));
  for (double s : {1.0, 1.5, 2.0, 3.0, double(INFINITY)}) {
    const GridFunction f = align(u, s);
    CHECK(lp_norm(f, s).value == doctest::Approx(1.0).epsilon(1e-12));
    // Hoelder: Re <f, u> = ||u||_{s'} is the best possible.
    const double sd = s == 1.0 ? INFINITY : std::isinf(s) ? 1.0 : s / (s - 1);
    CHECK(inner_product(u, f).real() == doctest::Approx(lp_norm(u, sd).value).epsilon(1e-12));
  }
}

TEST_CASE("threshold sweep") {
  CHECK(dsl::bessel_family(0).nominal.lp_order(2, 1) == 0.0);
  CHECK(dsl::exotic_family(0, 0.75, 1).nominal.lp_order(2, 1) == doctest::Approx(-0.25));
  CHECK(dsl::exotic_family(0, 0.75, 1).nominal.lp_order(2, 2) == doctest::Approx(-0.5));
  CHECK(with_order(dsl::wainger_family(0.5, 1), -0.3).params.at("b") == doctest::Approx(0.3));

  const auto w = dsl::wainger_family(0.5, 0);
  SweepOptions o;
  o.bound.trials = 8;
  const ThresholdSweepRecord r = threshold_sweep(w, 4, {-0.375, -0.125, 0.125}, {64, 128, 256, 512}, o);
  CHECK(r.threshold == doctest::Approx(-0.125));
  REQUIRE(r.slopes.size() == 3);
  CHECK(r.slopes[0] < r.slopes[2]);
  CHECK(r.classification.size() == 3);
  for (const auto& row : r.estimates)
    for (const NormEstimate& e : row) CHECK(e.value > 0.0);
  CHECK_THROWS_AS(threshold_sweep(w, 4, {0.0}, {64, 128}, o), ValidationError);
  CHECK_THROWS_AS(with_order(dsl::SymbolFamily{"custom", {}, dsl::parse("1"), ClassParams(0, 1, 0)}, 1), ValidationError);
}

TEST_CASE("weak type (1,1) experiments") {
  ExperimentOptions o;
  o.trials = 30;
  o.truncations = {64, 128};
  const WeakTypeReport id = weak11_experiment(identity_family(), o);
  for (const auto& r : id.results) CHECK(r.max_ratio <= 1.0 + 1e-12);
  CHECK(id.warnings.empty());

  // A unit-mass spike maps to a kernel row.
  const OperatorFamily j = pdo_family(dsl::bessel_family(-2));
  std::vector<double> ratio;
  for (int n : {128, 256}) {
    const GridSpec g({n});
    GridFunction spike = GridFunction::zeros(g);
    spike[static_cast<std::size_t>(n / 4)] = n;
    const auto op = j.build(g);
    const GridFunction row = op->apply(spike);
    const double r = weak_lp(row, 1).value;
    CHECK(r <= lp_norm(row, INFINITY).value);
    ratio.push_back(r);
  }
  CHECK(std::abs(ratio[1] / ratio[0] - 1) <= 0.1);

  const WeakTypeReport bad = weak11_experiment(pdo_family(dsl::bessel_family(0.5)), o);
  CHECK_FALSE(bad.warnings.empty());

  ExperimentOptions grid = o;
  grid.lambda_grid = {0.25, 0.5, 1, 2, 4};
  const WeakTypeReport gr = weak11_experiment(j, grid);
  const WeakTypeReport ex = weak11_experiment(j, o);
  for (std::size_t t = 0; t < 2; ++t) CHECK(gr.results[t].max_ratio <= ex.results[t].max_ratio * (1 + 1e-12));

  for (double rho : {0.1, 0.25, 0.5, 0.9, 1.0}) {
    const Weak11Hypothesis h = weak11_hypothesis(ClassParams(-1, rho, 0.3), 2);
    CHECK(std::abs(h.residual) <= 1e-15);
    CHECK(h.alpha == rho);
  }
}

TEST_CASE("L-infinity -> BMO and H1 -> L1 experiments") {
  ExperimentOptions o;
  o.trials = 20;
  o.truncations = {64, 128};
  for (const auto& r : linf_bmo_experiment(mean_projection_family(), o).results) CHECK(r.max_ratio <= 1e-12);
  for (const auto& r : linf_bmo_experiment(identity_family(), o).results) CHECK(r.max_ratio <= 2.0);
  for (const auto& r : h1_l1_experiment(identity_family(), o).results) CHECK(r.max_ratio <= 1.0 + 1e-12);

  // An atom on the whole torus is rejected by the constructor.
  const GridSpec g({64});
  GridFunction prof = GridFunction::sample(g, [](const Point& x) { return Complex(std::cos(2 * oracle::kPi * x[0])); });
  CHECK_THROWS_AS(make_atom(Point{}, 0.75, prof), ValidationError);

  const OperatorFamily crit = bessel_left(pdo_family(dsl::exotic_family(0, 0.75, 1)), -0.625);
  REQUIRE(crit.nominal);
  CHECK(crit.nominal->m() == doctest::Approx(crit.nominal->endpoint_order(1)));
  ExperimentOptions h;
  h.trials = 40;
  h.truncations = {256};
  const ExperimentReport rep = h1_l1_experiment(crit, h);
  CHECK(rep.warnings.empty());
  REQUIRE(rep.radius_max.size() == 5);
  const auto [lo, hi] = std::minmax_element(rep.radius_max.begin(), rep.radius_max.end());
  CHECK(*hi <= 3 * *lo);

  ExperimentOptions b;
  b.trials = 100;
  const ExperimentReport bm = linf_bmo_experiment(crit, b);
  CHECK(bm.relative_change < 0.15);
}

TEST_CASE("Lp -> Lq admissibility") {
  const ClassParams c(0, 1, 0);
  const auto r = lp_lq_admissibility(c, 2, 2);
  CHECK(r.cases.size() == 3);
  for (const auto& k : r.cases) CHECK(k.threshold == 0.0);
  CHECK(lp_lq_admissibility(c, 2, 4).threshold == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(lp_lq_admissibility(c, 2, 4).primary == 'a');
  CHECK(lp_lq_admissibility(c, 3, 4).primary == 'b');
  CHECK(lp_lq_admissibility(c, 1.2, 1.5).primary == 'c');
  const ClassParams ex(-1, 0.25, 0.75);
  const auto e = lp_lq_admissibility(ex, 2, 2, 1);
  CHECK(e.threshold == doctest::Approx(-0.25));
  CHECK(e.admissible);
  CHECK_THROWS_AS(lp_lq_admissibility(c, 1, 2), ValidationError);
  CHECK_THROWS_AS(lp_lq_admissibility(c, 3, 2), ValidationError);
  CHECK_THROWS_AS(lp_lq_admissibility(c, 2, INFINITY), ValidationError);
}

TEST_CASE("composition consistency at the critical L2 order") {
  // J^{m*} composed with the order-zero member has order exactly m* = -n lambda.
  for (const auto& f : {dsl::bessel_family(0), dsl::wainger_family(0.5, 0), dsl::exotic_family(0, 0.75, 1),
                        dsl::exotic_family(0, 0.5, 2)}) {
    const double ms = lp_lq_admissibility(f.nominal, 2, 2).threshold;
    const OperatorFamily t = bessel_left(pdo_family(f), ms);
    const double a = l2_norm(*t.build(GridSpec({64}))).value;
    const double b = l2_norm(*t.build(GridSpec({128}))).value;
    CHECK(std::abs(b / a - 1) < 0.1);
  }
}
