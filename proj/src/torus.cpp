#include "tpdo/torus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tpdo/errors.hpp"
#include "tpdo/fft.hpp"

namespace tpdo {
namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap(long long k, int n) {
  long long r = k % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

GridSpec::GridSpec(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty() || sizes_.size() > static_cast<std::size_t>(kMaxDim))
    throw ValidationError("grid dimension must be 1, 2 or 3, got " + std::to_string(sizes_.size()));
  count_ = 1;
  for (int n : sizes_) {
    if (n < 4 || !is_power_of_two(n))
      throw ValidationError("grid sizes must be powers of two >= 4, got " + std::to_string(n));
    count_ *= static_cast<std::size_t>(n);
  }
}

GridSpec GridSpec::cube(int dim, int n) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("grid dimension must be 1, 2 or 3");
  return GridSpec(std::vector<int>(static_cast<std::size_t>(dim), n));
}

GridIndex GridSpec::unflatten(std::size_t flat) const noexcept {
  GridIndex idx{};
  for (int axis = dim() - 1; axis >= 0; --axis) {
    const auto n = static_cast<std::size_t>(sizes_[static_cast<std::size_t>(axis)]);
    idx[static_cast<std::size_t>(axis)] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t GridSpec::flatten(const GridIndex& index) const noexcept {
  std::size_t flat = 0;
  for (int axis = 0; axis < dim(); ++axis) {
    const int n = sizes_[static_cast<std::size_t>(axis)];
    flat = flat * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(wrap(index[static_cast<std::size_t>(axis)], n));
  }
  return flat;
}

Point GridSpec::point(std::size_t flat) const noexcept {
  const GridIndex idx = unflatten(flat);
  Point p{};
  for (int axis = 0; axis < dim(); ++axis) {
    const auto a = static_cast<std::size_t>(axis);
    p[a] = static_cast<double>(idx[a]) / sizes_[a];
  }
  return p;
}

double GridSpec::min_spacing() const noexcept {
  return 1.0 / *std::max_element(sizes_.begin(), sizes_.end());
}

GridSpec GridSpec::refined(int factor) const {
  std::vector<int> s = sizes_;
  for (int& n : s) n *= factor;
  return GridSpec(std::move(s));
}

FrequencyLattice::FrequencyLattice(GridSpec spec) : spec_(std::move(spec)) {}

LatticePoint FrequencyLattice::frequency(std::size_t flat) const noexcept {
  const GridIndex idx = spec_.unflatten(flat);
  LatticePoint xi{};
  for (int axis = 0; axis < dim(); ++axis) {
    const auto a = static_cast<std::size_t>(axis);
    const int n = spec_.sizes()[a];
    xi[a] = idx[a] < n / 2 ? idx[a] : idx[a] - n;
  }
  return xi;
}

bool FrequencyLattice::contains(const LatticePoint& xi) const noexcept {
  for (int axis = 0; axis < dim(); ++axis) {
    const auto a = static_cast<std::size_t>(axis);
    const int half = spec_.sizes()[a] / 2;
    if (xi[a] < -half || xi[a] >= half) return false;
  }
  return true;
}

std::optional<std::size_t> FrequencyLattice::index_of(const LatticePoint& xi) const noexcept {
  if (!contains(xi)) return std::nullopt;
  GridIndex idx{};
  for (int axis = 0; axis < dim(); ++axis) {
    const auto a = static_cast<std::size_t>(axis);
    idx[a] = static_cast<int>(xi[a]);
  }
  return spec_.flatten(idx);
}

GridFunction::GridFunction(GridSpec s, std::vector<Complex> v) : spec(std::move(s)), values(std::move(v)) {
  if (values.size() != spec.point_count())
    throw ValidationError("grid function has " + std::to_string(values.size()) + " values, grid has " +
                          std::to_string(spec.point_count()));
  for (const Complex& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ValidationError("grid function values must be finite");
}

GridFunction GridFunction::zeros(const GridSpec& spec) {
  return GridFunction(spec, std::vector<Complex>(spec.point_count()));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec == b.spec)) throw ValidationError("grid mismatch in sum");
  GridFunction out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += b.values[i];
  return out;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec == b.spec)) throw ValidationError("grid mismatch in difference");
  GridFunction out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

GridFunction operator*(Complex c, const GridFunction& f) {
  GridFunction out = f;
  for (Complex& z : out.values) z *= c;
  return out;
}

Complex inner_product(const GridFunction& f, const GridFunction& g) {
  if (!(f.spec == g.spec)) throw ValidationError("grid mismatch in inner product");
  Complex acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.values[i] * std::conj(g.values[i]);
  return acc / static_cast<double>(f.size());
}

SpectralFunction::SpectralFunction(FrequencyLattice l, std::vector<Complex> c)
    : lattice(std::move(l)), coefficients(std::move(c)) {
  if (coefficients.size() != lattice.size())
    throw ValidationError("spectral function size does not match its lattice");
  for (const Complex& z : coefficients)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ValidationError("spectral coefficients must be finite");
}

Complex SpectralFunction::at(const LatticePoint& xi) const {
  const auto idx = lattice.index_of(xi);
  return idx ? coefficients[*idx] : Complex{};
}

double bracket(const LatticePoint& xi, int dim) noexcept {
  double s = 1.0;
  for (int a = 0; a < dim; ++a) {
    const auto v = static_cast<double>(xi[static_cast<std::size_t>(a)]);
    s += v * v;
  }
  return std::sqrt(s);
}

double bracket(std::span<const double> xi) noexcept {
  double s = 1.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

SpectralFunction forward_dft(const GridFunction& f) {
  std::vector<Complex> c = f.values;
  fft::transform(c, f.spec.sizes(), fft::Direction::Forward);
  const double w = 1.0 / static_cast<double>(c.size());
  for (Complex& z : c) z *= w;
  return SpectralFunction(FrequencyLattice(f.spec), std::move(c));
}

GridFunction inverse_dft(const SpectralFunction& phi) {
  std::vector<Complex> v = phi.coefficients;
  fft::transform(v, phi.lattice.grid().sizes(), fft::Direction::Backward);
  return GridFunction(phi.lattice.grid(), std::move(v));
}

double torus_distance(const Point& x, const Point& y, int dim) noexcept {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    double d = std::fabs(x[i] - y[i]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::size_t> ball(const Point& center, double radius, const GridSpec& spec) {
  if (!(radius > 0.0)) throw ValidationError("ball radius must be positive");
  std::vector<std::size_t> out;
  if (radius >= std::sqrt(static_cast<double>(spec.dim())) / 2.0) {
    out.resize(spec.point_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  for (std::size_t i = 0; i < spec.point_count(); ++i)
    if (torus_distance(spec.point(i), center, spec.dim()) < radius) out.push_back(i);
  if (out.empty()) throw DegenerateBallError("ball of radius " + std::to_string(radius) + " contains no grid point");
  return out;
}

std::vector<GridIndex> ball_stencil(double radius, const GridSpec& spec) {
  // Offsets within half a period on each axis; the ball is translation invariant on the grid.
  std::vector<GridIndex> out;
  const Point origin{};
  for (std::size_t i = 0; i < spec.point_count(); ++i) {
    if (radius < std::sqrt(static_cast<double>(spec.dim())) / 2.0 &&
        !(torus_distance(spec.point(i), origin, spec.dim()) < radius))
      continue;
    out.push_back(spec.unflatten(i));
  }
  return out;
}

}  // namespace tpdo
