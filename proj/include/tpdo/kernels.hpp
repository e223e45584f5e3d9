#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpdo/quantization.hpp"
#include "tpdo/symbol_calculus.hpp"

namespace tpdo {

/// Samples of k(x, y) = sum_{xi in box} e^{2 pi i (x - y).xi} q(x, xi) on a (possibly
/// oversampled) grid. For x-independent q only one row is stored: k(x, y) = row(x - y).
struct KernelMatrix {
  GridSpec spec;         // where x and y are sampled
  GridSpec truncation;   // frequency box the sum runs over
  std::string provenance;
  bool circulant = false;
  std::vector<Complex> values;  // G x G row-major, or a single row when circulant

  Complex operator()(std::size_t x, std::size_t y) const;
  /// Row x as a function of the offset z = x - y.
  std::vector<Complex> offset_row(std::size_t x) const;
};

/// Kernel of T sampled on T's grid refined by `oversample` (a power of two). With
/// oversample = 1 it equals G * to_matrix(T). Full matrices are guarded at G <= 4096.
KernelMatrix synthesize_kernel(const PdoOperator& t, int oversample = 1);

/// Kernel of d^alpha_x d^beta_y k, built from the symbol
/// sum_{omega <= alpha} C(alpha, omega) (2 pi i xi)^{alpha - omega} d^omega_x p(x, xi) (-2 pi i xi)^beta.
/// |alpha + beta| <= 2.
KernelMatrix derivative_kernel(const PdoOperator& t, const calculus::MultiIndex& alpha,
                               const calculus::MultiIndex& beta, int oversample = 1);

struct DecayOptions {
  double exponent = 0.0;  // N in sup d^N |k|
  std::vector<int> truncations{128, 256, 512};
  /// Minimal distance in cells of each truncation (cutoff = cells / L), or a fixed value.
  double cutoff_cells = 4.0;
  std::optional<double> cutoff;
  int oversample = 2;
  std::optional<calculus::MultiIndex> alpha;
  std::optional<calculus::MultiIndex> beta;
  std::size_t max_rows = 4096;  // x rows examined for x-dependent symbols (strided)
};

struct DecayEntry {
  int truncation = 0;
  double cutoff = 0.0;
  double sup = 0.0;
  double distance_at_sup = 0.0;
};

struct KernelDecayReport {
  double exponent = 0.0;
  std::vector<DecayEntry> entries;
  double stability_ratio = 0.0;  // sup at the largest truncation / sup at the smallest
};

/// sup over d(x, y) >= cutoff of d^N |d^alpha_x d^beta_y k(x, y)|, recomputed per truncation.
KernelDecayReport decay_scan(const dsl::Symbol& p, const DecayOptions& options);

struct LogBoundReport {
  int truncation = 0;
  double cutoff = 0.0;
  std::size_t samples = 0;
  double slope = 0.0;      // |k| ~ C |log d| + c over cutoff <= d <= 1/4
  double intercept = 0.0;
  double inner_slope = 0.0;  // the half of the |log d| range nearest the diagonal
  double outer_slope = 0.0;
  double residual_ratio = 0.0;  // max(inner/outer, outer/inner)
  double max_abs_kernel = 0.0;
  /// Kernel flattens towards the diagonal (inner slope below 2/3 of the outer one):
  /// bounded rather than logarithmic, the log fit is degenerate.
  bool bounded = false;
};

LogBoundReport log_bound_check(const dsl::Symbol& p, int truncation, double cutoff_cells = 4.0, int oversample = 2,
                               std::size_t max_rows = 256);

enum class SigmaVariant { A1, A2, B, C };
std::string to_string(SigmaVariant v);
SigmaVariant parse_sigma_variant(const std::string& s);

struct SigmaOptions {
  std::vector<double> sigmas{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  std::size_t samples = 64;
  std::uint64_t seed = 1;
  double unit_scale = 0.125;  // s0, standing in for sigma = 1 on the unit torus
};

struct SigmaEstimateReport {
  SigmaVariant variant = SigmaVariant::B;
  std::optional<ClassParams> params;
  std::vector<double> sigmas;
  std::vector<double> radii;   // excluded radius around z for each sigma
  std::vector<double> suprema; // sampled suprema: lower bounds for the true ones
  std::vector<std::string> warnings;
  double unit_scale = 0.0;
  std::size_t samples = 0;
  double flatness = 0.0;  // max / min of suprema
};

/// Variants a1, b: sup_y int_{d(x,z) > R} |k(x,y) - k(x,z)| dx; a2, c: the same with the
/// kernel arguments transposed. R = 2 sigma for a1, a2 and 2 s0 (sigma/s0)^rho for b, c.
SigmaEstimateReport sigma_estimates(const PdoOperator& t, SigmaVariant variant, const SigmaOptions& options = {});

}  // namespace tpdo
