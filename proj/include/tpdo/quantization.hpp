#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpdo/class_params.hpp"
#include "tpdo/regression.hpp"
#include "tpdo/symbol_dsl.hpp"
#include "tpdo/torus.hpp"

namespace tpdo {

/// Dense G x G matrix in the grid basis (row = output point, column = input point) with
/// (M f)(x) = sum_y M(x, y) f(y). The Schwartz kernel is G * M.
struct DenseOperatorMatrix {
  GridSpec spec;
  Eigen::MatrixXcd m;

  GridFunction apply(const GridFunction& f) const;
};

inline constexpr std::size_t kDenseGuard = 4096;

/// A linear map on grid functions over one grid, together with its adjoint for the
/// inner product (1/G) sum f conj(g).
class Operator {
 public:
  virtual ~Operator() = default;

  virtual const GridSpec& grid() const = 0;
  virtual GridFunction apply(const GridFunction& f) const = 0;
  virtual GridFunction apply_adjoint(const GridFunction& g) const = 0;
  virtual std::string describe() const = 0;

  /// Dense form; the default builds it column by column from apply(). Throws GuardError for G > 4096.
  virtual DenseOperatorMatrix dense() const;

 protected:
  void check_grid(const GridFunction& f) const;
};

using OperatorPtr = std::shared_ptr<const Operator>;

/// Op(p) f(x) = sum_{xi in box} e^{2 pi i x.xi} p(x, xi) f^(xi).
class PdoOperator final : public Operator {
 public:
  PdoOperator(dsl::Symbol symbol, GridSpec grid, std::optional<ClassParams> nominal = std::nullopt);

  const GridSpec& grid() const override { return grid_; }
  GridFunction apply(const GridFunction& f) const override;
  GridFunction apply_adjoint(const GridFunction& g) const override;
  std::string describe() const override;
  DenseOperatorMatrix dense() const override;

  /// The O(G L) sum, regardless of whether the symbol depends on x.
  GridFunction apply_general(const GridFunction& f) const;
  /// FFT, multiply, inverse FFT. Requires an x-independent symbol.
  GridFunction apply_multiplier(const GridFunction& f) const;

  bool is_multiplier() const noexcept { return symbol_.x_independent(); }
  /// sigma(xi) in lattice order; only for multipliers.
  const std::vector<Complex>& multiplier() const;
  const dsl::Symbol& symbol() const noexcept { return symbol_; }
  const std::optional<ClassParams>& nominal() const noexcept { return nominal_; }

  /// p(x_j, xi_k) for grid index j and lattice index k (cached when G L <= 2^22).
  Complex sample(std::size_t j, std::size_t k) const;
  /// Row x of the kernel: z -> sum_xi e^{2 pi i z.xi} p(x, xi) on the grid.
  std::vector<Complex> kernel_row(std::size_t j) const;

 private:
  dsl::Symbol symbol_;
  GridSpec grid_;
  FrequencyLattice lattice_;
  std::optional<ClassParams> nominal_;
  std::vector<Complex> sigma_;  // multipliers only
  std::vector<Complex> table_;  // G x L samples, empty when too large
  std::vector<std::vector<Complex>> twiddles_;  // per axis: e^{2 pi i j / N}
};

/// Wraps a dense matrix.
class MatrixOperator final : public Operator {
 public:
  explicit MatrixOperator(DenseOperatorMatrix m, std::string name = "matrix");
  const GridSpec& grid() const override { return m_.spec; }
  GridFunction apply(const GridFunction& f) const override;
  GridFunction apply_adjoint(const GridFunction& g) const override;
  std::string describe() const override { return name_; }
  DenseOperatorMatrix dense() const override { return m_; }

 private:
  DenseOperatorMatrix m_;
  std::string name_;
};

/// T*, applied matrix-free.
class AdjointOperator final : public Operator {
 public:
  explicit AdjointOperator(OperatorPtr inner) : inner_(std::move(inner)) {}
  const GridSpec& grid() const override { return inner_->grid(); }
  GridFunction apply(const GridFunction& f) const override { return inner_->apply_adjoint(f); }
  GridFunction apply_adjoint(const GridFunction& g) const override { return inner_->apply(g); }
  std::string describe() const override { return "adjoint(" + inner_->describe() + ")"; }

 private:
  OperatorPtr inner_;
};

/// f -> outer(inner(f)).
class Composition final : public Operator {
 public:
  Composition(OperatorPtr outer, OperatorPtr inner);
  const GridSpec& grid() const override { return inner_->grid(); }
  GridFunction apply(const GridFunction& f) const override { return outer_->apply(inner_->apply(f)); }
  GridFunction apply_adjoint(const GridFunction& g) const override {
    return inner_->apply_adjoint(outer_->apply_adjoint(g));
  }
  std::string describe() const override { return outer_->describe() + " o " + inner_->describe(); }

 private:
  OperatorPtr outer_;
  OperatorPtr inner_;
};

std::shared_ptr<const PdoOperator> make_pdo(const dsl::SymbolFamily& family, const GridSpec& grid);
/// J^s: the multiplier <xi>^s.
std::shared_ptr<const PdoOperator> make_bessel(double s, const GridSpec& grid);
GridFunction bessel_apply(double s, const GridFunction& f);

enum class Side { Left, Right };
/// Left: f -> J^s(T f). Right: f -> T(J^s f).
OperatorPtr compose_bessel(OperatorPtr t, double s, Side side);

DenseOperatorMatrix to_matrix(const Operator& t);
/// Conjugate transpose (the 1/G weights cancel on both sides of the duality).
DenseOperatorMatrix adjoint(const Operator& t);
OperatorPtr adjoint_operator(OperatorPtr t);

/// Growth of ||T e_xi||_{L^2} on plane waves: per dyadic shell of <xi> in the lattice the
/// largest norm is taken, and log norm is regressed on log <xi> over shells with lo >= min_bracket.
/// The slope is the order T exhibits on L^2.
struct EffectiveOrder {
  double order = 0.0;
  LineFit fit;
  std::vector<double> log_bracket;
  std::vector<double> log_norm;
};
EffectiveOrder effective_order(const Operator& t, double min_bracket = 4.0);

}  // namespace tpdo
