#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tpdo/class_params.hpp"
#include "tpdo/function_spaces.hpp"
#include "tpdo/quantization.hpp"

namespace tpdo {

/// A certified lower bound ||T w||_q / ||w||_p for the stored witness w.
struct NormEstimate {
  double p = 2.0;
  double q = 2.0;
  double value = 0.0;
  std::string method;  // power-iteration | ascent | atom-probe
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<int> truncation;
  std::optional<GridFunction> witness;
  std::string witness_kind;
  int iterations = 0;
  double gap = 0.0;  // last relative change of the Rayleigh quotient
};

/// ||T f||_q / ||f||_p with the quadrature norms.
double norm_ratio(const Operator& t, const GridFunction& f, double p, double q);

struct PowerIterationOptions {
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  int max_iterations = 500;
  int block = 4;  // subspace width; Rayleigh-Ritz on the block
};

/// Largest singular value of T by subspace iteration on T*T. Throws NonConvergenceError.
NormEstimate l2_norm(const Operator& t, const PowerIterationOptions& options = {});

struct LowerBoundOptions {
  std::size_t trials = 16;  // per random class (Gaussian fields, sign patterns, atoms)
  std::uint64_t seed = 1;
  int ascent_steps = 50;
};

/// Best ||Tf||_q / ||f||_p over random Gaussian fields, sign patterns and H^1 atoms, refined
/// by the dual-exponent ascent f <- align_p(T* align_{q'}(T f)).
NormEstimate lp_lq_lower_bound(const Operator& t, double p, double q, const LowerBoundOptions& options = {});

/// The f of unit L^s norm maximizing Re <f, u> (quadrature pairing), or its direction
/// for s = 1 (a spike at the largest |u|).
GridFunction align(const GridFunction& u, double s);

/// Same family with order m (bessel: m, wainger: b = -m, exotic: m).
dsl::SymbolFamily with_order(const dsl::SymbolFamily& family, double m);

inline constexpr double kBoundedSlope = 0.05;
inline constexpr double kGrowthSlope = 0.15;

struct ThresholdSweepRecord {
  dsl::SymbolFamily family;
  int dim = 1;
  double p = 2.0;
  std::vector<double> orders;
  std::vector<int> truncations;
  std::vector<std::vector<NormEstimate>> estimates;  // [order][truncation]
  double threshold = 0.0;
  std::vector<double> slopes;
  std::vector<std::string> classification;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
};

struct SweepOptions {
  int dim = 1;
  LowerBoundOptions bound;
};

ThresholdSweepRecord threshold_sweep(const dsl::SymbolFamily& family, double p, const std::vector<double>& orders,
                                     const std::vector<int>& truncations, const SweepOptions& options = {});

/// An operator known on every grid, with its nominal class when there is one.
struct OperatorFamily {
  std::string name;
  std::function<OperatorPtr(const GridSpec&)> build;
  std::optional<ClassParams> nominal;
};

OperatorFamily pdo_family(const dsl::SymbolFamily& family, int dim = 1);
/// f -> J^s(T f) with nominal order shifted by s.
OperatorFamily bessel_left(const OperatorFamily& t, double s);
OperatorFamily adjoint_family(const OperatorFamily& t);
OperatorFamily identity_family();
OperatorFamily mean_projection_family();

struct TruncationResult {
  std::vector<int> truncation;
  double max_ratio = 0.0;
  std::vector<double> ratios;  // per trial
  std::vector<std::string> kinds;
  std::size_t argmax = 0;
  std::optional<GridFunction> witness;
};

struct ExperimentOptions {
  std::vector<int> truncations{128, 256};
  int dim = 1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// weak11: levels as multiples of ||f||_1; empty means the exact supremum over all levels.
  std::vector<double> lambda_grid;
  std::vector<double> atom_radii;  // h1l1: empty means 2^{-k}, k = 2..6
  double unit_scale = 0.125;      // h1l1: radius <= s0 counts as the small-ball regime
};

struct WeakTypeReport {
  std::string op;
  std::vector<double> lambda_grid;
  std::vector<TruncationResult> results;
  std::vector<double> input_l1;  // per trial, on the first truncation
  double relative_change = 0.0;  // |last - first| / first of the max ratios
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
};

struct ExperimentReport {
  std::string op;
  std::string kind;  // bmo | h1l1
  std::vector<TruncationResult> results;
  /// h1l1: per-radius maxima at the last truncation.
  std::vector<double> radii;
  std::vector<double> radius_max;
  std::vector<std::string> regime;  // "small" (radius <= s0) or "large"
  double relative_change = 0.0;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
};

WeakTypeReport weak11_experiment(const OperatorFamily& t, const ExperimentOptions& options = {});
ExperimentReport linf_bmo_experiment(const OperatorFamily& t, const ExperimentOptions& options = {});
ExperimentReport h1_l1_experiment(const OperatorFamily& t, const ExperimentOptions& options = {});

struct AdmissibleCase {
  char id = 'a';
  double threshold = 0.0;
};

struct AdmissibilityReport {
  ClassParams params;
  int dim = 1;
  double p = 2.0;
  double q = 2.0;
  char primary = 'a';
  double threshold = 0.0;
  std::vector<AdmissibleCase> cases;  // every case whose exponent range contains (p, q)
  bool admissible = false;            // params.m() <= threshold
};

/// Orders for which T is L^p -> L^q bounded, 1 < p <= q < infinity:
/// (a) p <= 2 <= q: -n(1/p - 1/q + lambda); (b) 2 <= p: -n[1/p - 1/q + (1-rho)(1/2 - 1/p) + lambda];
/// (c) q <= 2: -n[1/p - 1/q + (1-rho)(1/q - 1/2) + lambda].
AdmissibilityReport lp_lq_admissibility(const ClassParams& params, double p, double q, int dim = 1);

/// The exponents used for the weak-(1,1) reduction: alpha = rho, beta = n(1-rho)/2,
/// q = 2/(2-rho), and the residual of 1/q = 1/2 + beta/n.
struct Weak11Hypothesis {
  double alpha = 0.0;
  double beta = 0.0;
  double q = 0.0;
  double residual = 0.0;
  bool order_ok = false;  // m <= -n[(1-rho)/2 + lambda]
};
Weak11Hypothesis weak11_hypothesis(const ClassParams& params, int dim = 1);

/// Deterministic per-cell seed from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace tpdo
