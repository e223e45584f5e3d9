#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpdo/torus.hpp"

namespace tpdo {

enum class NormKind { Lp, WeakLp, BMO, OperatorLowerBound };
std::string to_string(NormKind k);

struct NormValue {
  NormKind kind = NormKind::Lp;
  double p = 2.0;               // exponent (source exponent for operator bounds)
  std::optional<double> q;      // target exponent for operator bounds
  double value = 0.0;
  std::string method;
};

/// ((1/G) sum |f|^p)^{1/p}; p = infinity gives max |f|. p < 1 is rejected.
NormValue lp_norm(const GridFunction& f, double p);

/// sup_lambda lambda |{|f| > lambda}|^{1/p}, exact on the grid: max_k v_k (k/G)^{1/p}
/// with v sorted descending.
NormValue weak_lp(const GridFunction& f, double p);

/// Radii 2^{-k} down to two cells of the coarsest axis: the ball family used by the
/// BMO norm and the maximal function.
std::vector<double> dyadic_radii(const GridSpec& g);

/// sup over balls (every grid centre, dyadic radii) of inf_b mean_B |f - b|. The inner
/// infimum is the median for real data and the geometric median for complex data.
NormValue bmo_norm(const GridFunction& f);

struct Atom {
  Point center{};
  double radius = 0.0;
  GridFunction values;
  std::vector<std::size_t> support;  // the ball
  double ball_measure = 0.0;         // |B| = count / G
};

/// Mean-subtracted profile on the ball, scaled down if needed so max |a| <= 1/|B|.
/// Throws ValidationError when the profile leaves the ball or is constant on it.
Atom make_atom(const Point& center, double radius, const GridFunction& profile);

/// sup over balls B containing x (dyadic radii, plus the point itself) of mean_B |f|.
GridFunction maximal_function(const GridFunction& f);

struct DyadicCube {
  int level = 0;       // side = N / 2^level cells on every axis
  GridIndex corner{};  // in cells
  std::vector<std::size_t> indices;
};

struct BadPart {
  DyadicCube cube;
  Complex mean{};
  std::vector<Complex> values;  // b_j on cube.indices
  GridFunction materialize(const GridSpec& g) const;
};

struct CZDecomposition {
  double lambda = 0.0;
  GridFunction good;
  std::vector<BadPart> bad;
  std::vector<std::size_t> omega;  // sorted union of the selected cubes
  double omega_measure = 0.0;      // |Omega| = count / G
  std::vector<std::string> warnings;
};

/// Dyadic stopping time on the 2^n-ary cube tree: maximal cubes with mean |f| > lambda.
/// Needs equal axis lengths. lambda <= mean |f| selects the whole torus (warned).
CZDecomposition cz_decompose(const GridFunction& f, double lambda);

}  // namespace tpdo
