#pragma once

// A small expression language for symbols p(x, xi).
//
//   expr    := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr | expr '^' expr
//            | number | name | name '(' args ')' | '(' expr ')'
//
// '^' binds tightest and is right associative; unary minus sits between '^' and '*'.
// Names: x1..x3, xi1..xi3, the vectors x and xi (scalar only when n = 1), the
// reserved literals i and pi, and free parameters bound at evaluation time.
// Functions: exp sin cos log sqrt abs, bracket(...) = (1 + sum |a_k|^2)^{1/2},
// norm(...) = (sum |a_k|^2)^{1/2}; bracket(xi) and norm(xi) use the whole frequency
// vector. The families bessel(m), wainger(a, b) and exotic(m, d, c) expand in place.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpdo/class_params.hpp"
#include "tpdo/torus.hpp"

namespace tpdo::dsl {

enum class TokenKind { Number, Identifier, Operator, LParen, RParen, Comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;

  friend bool operator==(const Token&, const Token&) = default;
};

std::vector<Token> tokenize(std::string_view source);

using ParamMap = std::map<std::string, double>;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree; cheap to copy and safe to share across threads.
class Expr {
 public:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  /// Canonical text form; parse(print()) reproduces the same tree.
  std::string print() const;

  Complex eval(const Point& x, const LatticePoint& xi, int dim, const ParamMap& params = {}) const;

  /// Replaces every free parameter by its value. Throws if one is unbound or a
  /// reserved literal is shadowed.
  Expr bind(const ParamMap& params) const;

  bool depends_on_x() const;
  bool depends_on_xi() const;
  std::set<std::string> parameters() const;
  /// Throws ValidationError if an indexed variable exceeds `dim`, or a vector
  /// variable is used as a scalar while dim > 1.
  void check_dimension(int dim) const;

  const NodePtr& root() const noexcept { return root_; }

 private:
  NodePtr root_;
};

Expr parse(const std::vector<Token>& tokens);
Expr parse(std::string_view source);

struct SymbolFamily {
  std::string name;
  ParamMap params;
  Expr expr;
  ClassParams nominal;
};

/// bracket(xi)^m; nominal class (m, 1, 0).
SymbolFamily bessel_family(double m);
/// exp(i |xi|^a) bracket(xi)^{-b}, 0 < a < 1; nominal class (-b, 1 - a, 0).
SymbolFamily wainger_family(double a, double b);
/// bracket(xi)^m exp(i c s(x1) bracket(xi)^d) with s(t) = sin(2 pi t)/(2 pi), 0 <= d < 1;
/// nominal class (m, 1 - d, d).
SymbolFamily exotic_family(double m, double d, double c);

std::optional<SymbolFamily> family_from_call(std::string_view name, std::span<const double> args);
/// Accepts "bessel(-1)", "wainger(0.5, 1)", "exotic(0, 0.75, 1)".
std::optional<SymbolFamily> parse_family(std::string_view text);

/// A symbol either given analytically (evaluable at any xi in Z^n) or as a table on
/// grid x lattice (rejects frequencies outside its box).
class Symbol {
 public:
  static Symbol analytic(const Expr& expr, int dim, const ParamMap& params = {});
  /// values[x_flat * L + xi_flat] on grid x FrequencyLattice(grid).
  static Symbol table(const GridSpec& grid, std::vector<Complex> values);

  Complex operator()(const Point& x, const LatticePoint& xi) const;

  int dim() const noexcept { return dim_; }
  bool x_independent() const noexcept { return x_independent_; }
  bool is_table() const noexcept { return !expr_.has_value(); }
  bool in_domain(const LatticePoint& xi) const noexcept;
  const std::optional<Expr>& expression() const noexcept { return expr_; }
  std::string describe() const;

 private:
  Symbol() = default;

  int dim_ = 1;
  bool x_independent_ = false;
  std::optional<Expr> expr_;
  std::optional<GridSpec> table_grid_;
  std::shared_ptr<const std::vector<Complex>> table_;
};

}  // namespace tpdo::dsl
