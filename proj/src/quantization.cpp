#include "tpdo/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include "tpdo/errors.hpp"

namespace tpdo {
namespace {

constexpr std::size_t kTableLimit = std::size_t{1} << 22;

std::string grid_name(const GridSpec& g) {
  std::string s;
  for (int a = 0; a < g.dim(); ++a) s += (a ? "x" : "") + std::to_string(g.sizes()[static_cast<std::size_t>(a)]);
  return s;
}

GridFunction unit_vector(const GridSpec& g, std::size_t y) {
  GridFunction e = GridFunction::zeros(g);
  e[y] = 1.0;
  return e;
}

void guard(const GridSpec& g) {
  if (g.point_count() > kDenseGuard)
    throw GuardError("dense matrix refused: G = " + std::to_string(g.point_count()) + " exceeds " +
                     std::to_string(kDenseGuard));
}

// Runs body(i) for i in [0, n) in parallel and rethrows the first exception.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

GridFunction DenseOperatorMatrix::apply(const GridFunction& f) const {
  if (!(f.spec == spec)) throw ValidationError("grid mismatch in dense apply");
  const Eigen::Map<const Eigen::VectorXcd> v(f.values.data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXcd r = m * v;
  return GridFunction(spec, std::vector<Complex>(r.data(), r.data() + r.size()));
}

void Operator::check_grid(const GridFunction& f) const {
  if (!(f.spec == grid()))
    throw ValidationError("grid/lattice mismatch: operator on " + grid_name(grid()) + ", function on " +
                          grid_name(f.spec));
}

DenseOperatorMatrix Operator::dense() const {
  const GridSpec& g = grid();
  guard(g);
  const auto n = static_cast<Eigen::Index>(g.point_count());
  DenseOperatorMatrix out{g, Eigen::MatrixXcd(n, n)};
  for (Eigen::Index y = 0; y < n; ++y) {
    const GridFunction col = apply(unit_vector(g, static_cast<std::size_t>(y)));
    for (Eigen::Index x = 0; x < n; ++x) out.m(x, y) = col[static_cast<std::size_t>(x)];
  }
  return out;
}

// ---------------------------------------------------------------- PdoOperator

PdoOperator::PdoOperator(dsl::Symbol symbol, GridSpec grid, std::optional<ClassParams> nominal)
    : symbol_(std::move(symbol)), grid_(std::move(grid)), lattice_(grid_), nominal_(nominal) {
  if (symbol_.dim() != grid_.dim())
    throw ValidationError("symbol dimension " + std::to_string(symbol_.dim()) + " does not match grid dimension " +
                          std::to_string(grid_.dim()));
  const std::size_t g = grid_.point_count();
  for (int a = 0; a < grid_.dim(); ++a) {
    const int n = grid_.sizes()[static_cast<std::size_t>(a)];
    std::vector<Complex> t(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
    twiddles_.push_back(std::move(t));
  }
  if (symbol_.x_independent()) {
    sigma_.resize(g);
    parallel_for(g, [&](std::size_t k) { sigma_[k] = symbol_(Point{}, lattice_.frequency(k)); });
  } else if (g * g <= kTableLimit) {
    table_.resize(g * g);
    parallel_for(g, [&](std::size_t j) {
      const Point x = grid_.point(j);
      for (std::size_t k = 0; k < g; ++k) table_[j * g + k] = symbol_(x, lattice_.frequency(k));
    });
  }
}

const std::vector<Complex>& PdoOperator::multiplier() const {
  if (!is_multiplier()) throw ValidationError("symbol depends on x; no multiplier profile");
  return sigma_;
}

Complex PdoOperator::sample(std::size_t j, std::size_t k) const {
  if (!sigma_.empty()) return sigma_[k];
  if (!table_.empty()) return table_[j * grid_.point_count() + k];
  return symbol_(grid_.point(j), lattice_.frequency(k));
}

GridFunction PdoOperator::apply(const GridFunction& f) const {
  check_grid(f);
  return is_multiplier() ? apply_multiplier(f) : apply_general(f);
}

GridFunction PdoOperator::apply_multiplier(const GridFunction& f) const {
  check_grid(f);
  if (!is_multiplier()) throw ValidationError("multiplier path needs an x-independent symbol");
  SpectralFunction c = forward_dft(f);
  for (std::size_t k = 0; k < c.size(); ++k) c.coefficients[k] *= sigma_[k];
  return inverse_dft(c);
}

GridFunction PdoOperator::apply_general(const GridFunction& f) const {
  check_grid(f);
  const SpectralFunction fh = forward_dft(f);
  const std::size_t g = grid_.point_count();
  const int dim = grid_.dim();
  std::vector<LatticePoint> freq(g);
  for (std::size_t k = 0; k < g; ++k) freq[k] = lattice_.frequency(k);

  std::vector<Complex> out(g);
  parallel_for(g, [&](std::size_t j) {
    const GridIndex i = grid_.unflatten(j);
    Complex acc{};
    for (std::size_t k = 0; k < g; ++k) {
      Complex w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const auto u = static_cast<std::size_t>(a);
        const long long mask = grid_.sizes()[u] - 1;
        w *= twiddles_[u][static_cast<std::size_t>((i[u] * freq[k][u]) & mask)];
      }
      acc += w * sample(j, k) * fh.coefficients[k];
    }
    out[j] = acc;
  });
  return GridFunction(grid_, std::move(out));
}

GridFunction PdoOperator::apply_adjoint(const GridFunction& gf) const {
  check_grid(gf);
  const std::size_t g = grid_.point_count();
  if (is_multiplier()) {
    SpectralFunction c = forward_dft(gf);
    for (std::size_t k = 0; k < g; ++k) c.coefficients[k] *= std::conj(sigma_[k]);
    return inverse_dft(c);
  }
  // c(xi) = (1/G) sum_x conj(p(x, xi)) e^{-2 pi i x.xi} g(x); T* g = inverse DFT of c.
  const int dim = grid_.dim();
  std::vector<GridIndex> idx(g);
  for (std::size_t j = 0; j < g; ++j) idx[j] = grid_.unflatten(j);
  std::vector<Complex> c(g);
  parallel_for(g, [&](std::size_t k) {
    const LatticePoint xi = lattice_.frequency(k);
    Complex acc{};
    for (std::size_t j = 0; j < g; ++j) {
      Complex w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const auto u = static_cast<std::size_t>(a);
        const long long mask = grid_.sizes()[u] - 1;
        w *= twiddles_[u][static_cast<std::size_t>((idx[j][u] * xi[u]) & mask)];
      }
      acc += std::conj(w * sample(j, k)) * gf[j];
    }
    c[k] = acc / static_cast<double>(g);
  });
  return inverse_dft(SpectralFunction(lattice_, std::move(c)));
}

std::vector<Complex> PdoOperator::kernel_row(std::size_t j) const {
  const std::size_t g = grid_.point_count();
  std::vector<Complex> row(g);
  for (std::size_t k = 0; k < g; ++k) row[k] = sample(j, k);
  return inverse_dft(SpectralFunction(lattice_, std::move(row))).values;
}

DenseOperatorMatrix PdoOperator::dense() const {
  guard(grid_);
  const std::size_t g = grid_.point_count();
  const auto n = static_cast<Eigen::Index>(g);
  DenseOperatorMatrix out{grid_, Eigen::MatrixXcd(n, n)};
  const double w = 1.0 / static_cast<double>(g);
  parallel_for(g, [&](std::size_t j) {
    const std::vector<Complex> row = kernel_row(j);
    const GridIndex xi = grid_.unflatten(j);
    for (std::size_t y = 0; y < g; ++y) {
      const GridIndex yi = grid_.unflatten(y);
      GridIndex d{};
      for (int a = 0; a < grid_.dim(); ++a) d[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)] - yi[static_cast<std::size_t>(a)];
      out.m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y)) = row[grid_.flatten(d)] * w;
    }
  });
  return out;
}

std::string PdoOperator::describe() const { return "Op(" + symbol_.describe() + ") on " + grid_name(grid_); }

// ---------------------------------------------------------------- other operators

MatrixOperator::MatrixOperator(DenseOperatorMatrix m, std::string name) : m_(std::move(m)), name_(std::move(name)) {
  const auto g = static_cast<Eigen::Index>(m_.spec.point_count());
  if (m_.m.rows() != g || m_.m.cols() != g) throw ValidationError("matrix size does not match its grid");
}

GridFunction MatrixOperator::apply(const GridFunction& f) const {
  check_grid(f);
  return m_.apply(f);
}

GridFunction MatrixOperator::apply_adjoint(const GridFunction& g) const {
  check_grid(g);
  const Eigen::Map<const Eigen::VectorXcd> v(g.values.data(), static_cast<Eigen::Index>(g.size()));
  const Eigen::VectorXcd r = m_.m.adjoint() * v;
  return GridFunction(m_.spec, std::vector<Complex>(r.data(), r.data() + r.size()));
}

Composition::Composition(OperatorPtr outer, OperatorPtr inner) : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (!(outer_->grid() == inner_->grid())) throw ValidationError("composed operators live on different grids");
}

std::shared_ptr<const PdoOperator> make_pdo(const dsl::SymbolFamily& family, const GridSpec& grid) {
  return std::make_shared<const PdoOperator>(dsl::Symbol::analytic(family.expr, grid.dim(), family.params), grid,
                                             family.nominal);
}

std::shared_ptr<const PdoOperator> make_bessel(double s, const GridSpec& grid) {
  return make_pdo(dsl::bessel_family(s), grid);
}

GridFunction bessel_apply(double s, const GridFunction& f) {
  const FrequencyLattice lat(f.spec);
  SpectralFunction c = forward_dft(f);
  for (std::size_t k = 0; k < c.size(); ++k) c.coefficients[k] *= std::pow(bracket(lat.frequency(k), f.spec.dim()), s);
  return inverse_dft(c);
}

OperatorPtr compose_bessel(OperatorPtr t, double s, Side side) {
  OperatorPtr j = make_bessel(s, t->grid());
  return side == Side::Left ? std::make_shared<const Composition>(j, t) : std::make_shared<const Composition>(t, j);
}

DenseOperatorMatrix to_matrix(const Operator& t) { return t.dense(); }

DenseOperatorMatrix adjoint(const Operator& t) {
  DenseOperatorMatrix m = t.dense();
  m.m.adjointInPlace();
  return m;
}

OperatorPtr adjoint_operator(OperatorPtr t) { return std::make_shared<const AdjointOperator>(std::move(t)); }

EffectiveOrder effective_order(const Operator& t, double min_bracket) {
  const GridSpec& g = t.grid();
  const FrequencyLattice lat(g);
  const int dim = g.dim();
  const double top = g.sizes()[0] / 2.0;

  EffectiveOrder out;
  for (double lo = 1.0; 2.0 * lo <= top + 1e-9; lo *= 2.0) {
    if (lo < min_bracket) continue;
    double best = 0.0, at = 0.0;
    for (std::size_t k = 0; k < lat.size(); ++k) {
      const LatticePoint xi = lat.frequency(k);
      bool on_axis = true;  // plane waves along the first axis represent the shell
      for (int a = 1; a < dim; ++a) on_axis = on_axis && xi[static_cast<std::size_t>(a)] == 0;
      const double b = bracket(xi, dim);
      if (!on_axis || b < lo || b >= 2.0 * lo) continue;
      const GridFunction e = GridFunction::sample(g, [&](const Point& x) {
        return std::polar(1.0, 2.0 * std::numbers::pi * x[0] * static_cast<double>(xi[0]));
      });
      const GridFunction r = t.apply(e);
      double s = 0.0;
      for (const Complex& z : r.values) s += std::norm(z);
      const double norm = std::sqrt(s / static_cast<double>(g.point_count()));
      if (norm > best) best = norm, at = b;
    }
    if (best > 0.0) {
      out.log_bracket.push_back(std::log(at));
      out.log_norm.push_back(std::log(best));
    }
  }
  if (out.log_bracket.size() < 2) throw ValidationError("grid too small to fit an effective order");
  out.fit = fit_line(out.log_bracket, out.log_norm);
  out.order = out.fit.slope;
  return out;
}

}  // namespace tpdo
