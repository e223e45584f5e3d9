#include "tpdo/reference.hpp"

#include <cmath>
#include <numbers>

#include "tpdo/function_spaces.hpp"

namespace tpdo::reference {

GridFunction apply_pdo(const dsl::Symbol& p, const GridFunction& f) {
  const SpectralFunction fh = forward_dft(f);
  const FrequencyLattice& lat = fh.lattice;
  std::vector<Complex> out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const Point x = f.spec.point(j);
    Complex acc{};
    for (std::size_t k = 0; k < lat.size(); ++k) {
      const LatticePoint xi = lat.frequency(k);
      double phase = 0.0;
      for (int a = 0; a < f.spec.dim(); ++a) phase += x[static_cast<std::size_t>(a)] * static_cast<double>(xi[static_cast<std::size_t>(a)]);
      acc += std::polar(1.0, 2.0 * std::numbers::pi * phase) * p(x, xi) * fh.coefficients[k];
    }
    out[j] = acc;
  }
  return GridFunction(f.spec, std::move(out));
}

}  // namespace tpdo::reference

namespace tpdo::reference {

GridFunction maximal_function(const GridFunction& f) {
  const GridSpec& g = f.spec;
  const std::size_t n = g.point_count();
  GridFunction m = GridFunction::zeros(g);
  for (std::size_t x = 0; x < n; ++x) m[x] = std::abs(f[x]);
  for (double r : dyadic_radii(g)) {
    std::vector<double> means(n);
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      std::size_t count = 0;
      for (std::size_t y = 0; y < n; ++y)
        if (torus_distance(g.point(y), g.point(c), g.dim()) < r) {
          s += std::abs(f[y]);
          ++count;
        }
      means[c] = s / static_cast<double>(count);
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t c = 0; c < n; ++c)
        if (torus_distance(g.point(x), g.point(c), g.dim()) < r && means[c] > m[x].real()) m[x] = means[c];
  }
  return m;
}

}  // namespace tpdo::reference
