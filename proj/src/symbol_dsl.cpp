#include "tpdo/symbol_dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "tpdo/errors.hpp"

namespace tpdo::dsl {

enum class NodeKind { Constant, ImagUnit, Pi, Param, XVar, XiVar, Neg, Binary, Call };
enum class Func { Exp, Sin, Cos, Log, Sqrt, Abs, Bracket, Norm };

struct Node {
  explicit Node(NodeKind k) : kind(k) {}

  NodeKind kind;
  std::size_t position = 0;
  double value = 0.0;          // Constant
  std::string name;            // Param
  int index = 0;               // XVar / XiVar; 0 means the whole vector
  char op = 0;                 // Binary
  Func func = Func::Exp;       // Call
  std::vector<NodePtr> children;
};

namespace {

struct FuncInfo {
  const char* name;
  Func func;
  int min_args;
  int max_args;  // -1 = variadic
};

constexpr FuncInfo kFunctions[] = {
    {"exp", Func::Exp, 1, 1},   {"sin", Func::Sin, 1, 1},        {"cos", Func::Cos, 1, 1},
    {"log", Func::Log, 1, 1},   {"sqrt", Func::Sqrt, 1, 1},      {"abs", Func::Abs, 1, 1},
    {"bracket", Func::Bracket, 1, -1}, {"norm", Func::Norm, 1, -1},
};

const FuncInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

const char* function_name(Func f) {
  for (const auto& info : kFunctions)
    if (info.func == f) return info.name;
  return "?";
}

bool is_family_name(std::string_view name) { return name == "bessel" || name == "wainger" || name == "exotic"; }

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr constant(double v, std::size_t pos) {
  Node n{NodeKind::Constant};
  n.value = v;
  n.position = pos;
  return make(std::move(n));
}

// ---------------------------------------------------------------- tokenizer

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::size_t scan_number(std::string_view s, std::size_t start) {
  std::size_t i = start;
  bool digits = false;
  while (i < s.size() && digit(s[i])) ++i, digits = true;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && digit(s[i])) ++i, digits = true;
  }
  if (!digits) throw ParseError("malformed number", start);
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    const std::size_t exponent = i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    const std::size_t body = i;
    while (i < s.size() && digit(s[i])) ++i;
    if (i == body) throw ParseError("malformed number: bad exponent", exponent);
  }
  if (i < s.size() && (ident_char(s[i]) || s[i] == '.')) throw ParseError("malformed number", i);
  return i;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  NodePtr parse_all() {
    if (tokens_.empty()) throw ParseError("empty expression", 0);
    NodePtr root = expression(0);
    if (pos_ < tokens_.size()) {
      const Token& t = tokens_[pos_];
      if (t.kind == TokenKind::RParen) throw ParseError("unbalanced parentheses: unmatched ')'", t.position);
      throw ParseError("unexpected token '" + t.lexeme + "'", t.position);
    }
    return root;
  }

 private:
  static int left_power(const Token& t) {
    if (t.kind != TokenKind::Operator) return -1;
    switch (t.lexeme[0]) {
      case '+': case '-': return 10;
      case '*': case '/': return 20;
      case '^': return 40;
      default: return -1;
    }
  }

  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

  std::size_t end_position() const {
    const Token& last = tokens_.back();
    return last.position + last.lexeme.size();
  }

  NodePtr expression(int min_power) {
    NodePtr lhs = prefix();
    while (const Token* t = peek()) {
      const int lp = left_power(*t);
      if (lp < 0) break;
      if (lp < min_power) break;
      ++pos_;
      const char op = t->lexeme[0];
      // '^' is right associative: the right operand may contain another '^'.
      NodePtr rhs = expression(op == '^' ? lp : lp + 1);
      Node n{NodeKind::Binary};
      n.op = op;
      n.position = t->position;
      n.children = {lhs, rhs};
      lhs = make(std::move(n));
    }
    return lhs;
  }

  NodePtr prefix() {
    const Token* t = peek();
    if (t == nullptr) throw ParseError("unexpected end of expression", end_position());
    ++pos_;
    switch (t->kind) {
      case TokenKind::Number: {
        double v = 0.0;
        const auto* b = t->lexeme.data();
        auto r = std::from_chars(b, b + t->lexeme.size(), v);
        if (r.ec != std::errc{} || r.ptr != b + t->lexeme.size()) throw ParseError("malformed number", t->position);
        return constant(v, t->position);
      }
      case TokenKind::Operator:
        if (t->lexeme == "-") {
          Node n{NodeKind::Neg};
          n.position = t->position;
          n.children = {expression(30)};
          return make(std::move(n));
        }
        if (t->lexeme == "+") return expression(30);
        throw ParseError("unexpected token '" + t->lexeme + "'", t->position);
      case TokenKind::LParen: {
        NodePtr inner = expression(0);
        const Token* close = peek();
        if (close == nullptr || close->kind != TokenKind::RParen)
          throw ParseError("unbalanced parentheses: missing ')'", close ? close->position : end_position());
        ++pos_;
        return inner;
      }
      case TokenKind::Identifier: {
        const Token* next = peek();
        if (next != nullptr && next->kind == TokenKind::LParen) return call(*t);
        return name(*t);
      }
      case TokenKind::RParen:
        throw ParseError("unbalanced parentheses: unexpected ')'", t->position);
      case TokenKind::Comma:
        throw ParseError("unexpected token ','", t->position);
    }
    throw ParseError("unexpected token", t->position);
  }

  static std::optional<int> variable_index(std::string_view lexeme, std::string_view stem) {
    if (lexeme.size() <= stem.size() || lexeme.substr(0, stem.size()) != stem) return std::nullopt;
    const auto digits = lexeme.substr(stem.size());
    for (char c : digits)
      if (!digit(c)) return std::nullopt;
    int k = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), k);
    return k;
  }

  NodePtr name(const Token& t) {
    const std::string& s = t.lexeme;
    Node n{NodeKind::Param};
    n.position = t.position;
    if (s == "i") {
      n.kind = NodeKind::ImagUnit;
    } else if (s == "pi") {
      n.kind = NodeKind::Pi;
    } else if (s == "x" || s == "xi") {
      n.kind = s == "x" ? NodeKind::XVar : NodeKind::XiVar;
    } else if (auto k = variable_index(s, "xi")) {
      if (*k < 1 || *k > kMaxDim) throw ParseError("variable index out of range in '" + s + "'", t.position);
      n.kind = NodeKind::XiVar;
      n.index = *k;
    } else if (auto k2 = variable_index(s, "x")) {
      if (*k2 < 1 || *k2 > kMaxDim) throw ParseError("variable index out of range in '" + s + "'", t.position);
      n.kind = NodeKind::XVar;
      n.index = *k2;
    } else if (find_function(s) != nullptr || is_family_name(s)) {
      throw ParseError("function '" + s + "' used without arguments", t.position);
    } else {
      n.name = s;
    }
    return make(std::move(n));
  }

  NodePtr call(const Token& fn) {
    ++pos_;  // '('
    std::vector<NodePtr> args;
    const Token* t = peek();
    if (t != nullptr && t->kind == TokenKind::RParen) {
      ++pos_;
    } else {
      while (true) {
        args.push_back(expression(0));
        t = peek();
        if (t == nullptr) throw ParseError("unbalanced parentheses: missing ')'", end_position());
        ++pos_;
        if (t->kind == TokenKind::Comma) continue;
        if (t->kind == TokenKind::RParen) break;
        throw ParseError("unexpected token '" + t->lexeme + "'", t->position);
      }
    }

    if (is_family_name(fn.lexeme)) return family(fn, args);

    const FuncInfo* info = find_function(fn.lexeme);
    if (info == nullptr) throw ParseError("unknown function '" + fn.lexeme + "'", fn.position);
    const int k = static_cast<int>(args.size());
    if (k < info->min_args || (info->max_args >= 0 && k > info->max_args))
      throw ParseError("arity mismatch: '" + fn.lexeme + "' takes " +
                           (info->max_args < 0 ? "at least " + std::to_string(info->min_args)
                                               : std::to_string(info->min_args)) +
                           " argument(s), got " + std::to_string(k),
                       fn.position);
    Node n{NodeKind::Call};
    n.func = info->func;
    n.position = fn.position;
    n.children = std::move(args);
    return make(std::move(n));
  }

  NodePtr family(const Token& fn, const std::vector<NodePtr>& args) {
    std::vector<double> values;
    for (const auto& a : args) {
      const Expr e(a);
      if (e.depends_on_x() || e.depends_on_xi() || !e.parameters().empty())
        throw ParseError("arguments of '" + fn.lexeme + "' must be constants", a->position);
      const Complex v = e.eval(Point{}, LatticePoint{}, 1);
      if (v.imag() != 0.0) throw ParseError("arguments of '" + fn.lexeme + "' must be real", a->position);
      values.push_back(v.real());
    }
    std::optional<SymbolFamily> fam;
    try {
      fam = family_from_call(fn.lexeme, values);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), fn.position);
    }
    if (!fam) throw ParseError("arity mismatch in '" + fn.lexeme + "'", fn.position);
    return relocate(fam->expr.bind(fam->params).root(), fn.position);
  }

  // Expanded family nodes report errors at the call site.
  static NodePtr relocate(const NodePtr& n, std::size_t pos) {
    Node copy = *n;
    copy.position = pos;
    for (auto& ch : copy.children) ch = relocate(ch, pos);
    return make(std::move(copy));
  }

  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- printer

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Binary:
      switch (n.op) {
        case '+': case '-': return 10;
        case '*': case '/': return 20;
        default: return 40;
      }
    case NodeKind::Neg: return 30;
    default: return 100;
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out);

void print_operand(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant:
      out += format_number(n.value);
      return;
    case NodeKind::ImagUnit: out += 'i'; return;
    case NodeKind::Pi: out += "pi"; return;
    case NodeKind::Param: out += n.name; return;
    case NodeKind::XVar: out += n.index == 0 ? "x" : "x" + std::to_string(n.index); return;
    case NodeKind::XiVar: out += n.index == 0 ? "xi" : "xi" + std::to_string(n.index); return;
    case NodeKind::Neg: {
      out += '-';
      print_operand(*n.children[0], precedence(*n.children[0]) < 30, out);
      return;
    }
    case NodeKind::Binary: {
      const int p = precedence(n);
      const Node& l = *n.children[0];
      const Node& r = *n.children[1];
      const bool right_assoc = n.op == '^';
      print_operand(l, precedence(l) < p || (right_assoc && precedence(l) == p), out);
      out += n.op;
      print_operand(r, precedence(r) < p || (!right_assoc && precedence(r) == p), out);
      return;
    }
    case NodeKind::Call: {
      out += function_name(n.func);
      out += '(';
      for (std::size_t k = 0; k < n.children.size(); ++k) {
        if (k > 0) out += ", ";
        print_node(*n.children[k], out);
      }
      out += ')';
      return;
    }
  }
}

// ---------------------------------------------------------------- evaluator

struct EvalContext {
  const Point& x;
  const LatticePoint& xi;
  int dim;
  const ParamMap& params;
};

Complex checked(Complex v, const Node& n) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw DomainError("non-finite value", n.position);
  return v;
}

Complex eval_node(const Node& n, const EvalContext& c);

double squared_modulus_sum(const Node& n, const EvalContext& c) {
  double s = 0.0;
  for (const auto& ch : n.children) {
    const Node& a = *ch;
    if (a.kind == NodeKind::XiVar && a.index == 0) {
      for (int k = 0; k < c.dim; ++k) {
        const auto v = static_cast<double>(c.xi[static_cast<std::size_t>(k)]);
        s += v * v;
      }
    } else if (a.kind == NodeKind::XVar && a.index == 0) {
      for (int k = 0; k < c.dim; ++k) s += c.x[static_cast<std::size_t>(k)] * c.x[static_cast<std::size_t>(k)];
    } else {
      s += std::norm(eval_node(a, c));
    }
  }
  return s;
}

// -0.0 imaginary parts (from negating a real) must not flip the branch cut.
Complex canon(Complex a) {
  if (a.imag() == 0.0) a.imag(0.0);
  return a;
}

Complex power(Complex base, Complex exponent, const Node& n) {
  base = canon(base);
  exponent = canon(exponent);
  if (exponent.imag() == 0.0) {
    const double e = exponent.real();
    if (base.imag() == 0.0 && base.real() >= 0.0) {
      if (base.real() == 0.0 && e < 0.0) throw DomainError("division by zero in power", n.position);
      return std::pow(base.real(), e);
    }
    if (base.imag() == 0.0 && e == std::round(e) && std::fabs(e) <= 1024.0) {
      if (base.real() == 0.0 && e < 0.0) throw DomainError("division by zero in power", n.position);
      return std::pow(base.real(), e);
    }
  }
  if (base == Complex{}) {
    if (exponent.real() > 0.0) return 0.0;
    throw DomainError("zero raised to a non-positive power", n.position);
  }
  return std::exp(exponent * std::log(base));  // principal branch
}

Complex eval_node(const Node& n, const EvalContext& c) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::ImagUnit: return {0.0, 1.0};
    case NodeKind::Pi: return std::numbers::pi;
    case NodeKind::Param: {
      auto it = c.params.find(n.name);
      if (it == c.params.end()) throw DomainError("unbound parameter '" + n.name + "'", n.position);
      return it->second;
    }
    case NodeKind::XVar:
    case NodeKind::XiVar: {
      int k = n.index;
      if (k == 0) {
        if (c.dim != 1)
          throw DomainError(std::string("vector '") + (n.kind == NodeKind::XVar ? "x" : "xi") +
                                "' used as a scalar in dimension " + std::to_string(c.dim),
                            n.position);
        k = 1;
      }
      if (k > c.dim) throw DomainError("variable index exceeds dimension", n.position);
      const auto a = static_cast<std::size_t>(k - 1);
      return n.kind == NodeKind::XVar ? c.x[a] : static_cast<double>(c.xi[a]);
    }
    case NodeKind::Neg: return -eval_node(*n.children[0], c);
    case NodeKind::Binary: {
      const Complex a = eval_node(*n.children[0], c);
      const Complex b = eval_node(*n.children[1], c);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return checked(a * b, n);
        case '/':
          if (b == Complex{}) throw DomainError("division by zero", n.position);
          return checked(a / b, n);
        default: return checked(power(a, b, n), n);
      }
    }
    case NodeKind::Call: {
      switch (n.func) {
        case Func::Bracket: return std::sqrt(1.0 + squared_modulus_sum(n, c));
        case Func::Norm: return std::sqrt(squared_modulus_sum(n, c));
        default: break;
      }
      const Complex a = canon(eval_node(*n.children[0], c));
      switch (n.func) {
        case Func::Exp: return checked(a.imag() == 0.0 ? Complex(std::exp(a.real())) : std::exp(a), n);
        case Func::Sin: return checked(a.imag() == 0.0 ? Complex(std::sin(a.real())) : std::sin(a), n);
        case Func::Cos: return checked(a.imag() == 0.0 ? Complex(std::cos(a.real())) : std::cos(a), n);
        case Func::Log:
          if (a == Complex{}) throw DomainError("log of zero", n.position);
          return a.imag() == 0.0 && a.real() > 0.0 ? Complex(std::log(a.real())) : std::log(a);
        case Func::Sqrt:
          return a.imag() == 0.0 && a.real() >= 0.0 ? Complex(std::sqrt(a.real())) : std::sqrt(a);
        case Func::Abs: return std::abs(a);
        default: break;
      }
      break;
    }
  }
  throw DomainError("malformed expression node", n.position);
}

// ---------------------------------------------------------------- tree walks

void visit(const Node& n, const std::function<void(const Node&)>& f) {
  f(n);
  for (const auto& ch : n.children) visit(*ch, f);
}

// Negative values become Neg(|v|) so that substituted trees print and re-parse to themselves.
NodePtr literal(double v, std::size_t pos) {
  if (!std::signbit(v)) return constant(v, pos);
  Node n{NodeKind::Neg};
  n.position = pos;
  n.children = {constant(-v, pos)};
  return make(std::move(n));
}

NodePtr substitute(const NodePtr& n, const ParamMap& params) {
  if (n->kind == NodeKind::Param) {
    auto it = params.find(n->name);
    if (it == params.end()) throw ValidationError("unbound parameter '" + n->name + "'");
    if (!std::isfinite(it->second)) throw ValidationError("parameter '" + n->name + "' must be finite");
    return literal(it->second, n->position);
  }
  if (n->children.empty()) return n;
  Node copy = *n;
  for (auto& ch : copy.children) ch = substitute(ch, params);
  return make(std::move(copy));
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
      const std::size_t end = scan_number(s, i);
      out.push_back({TokenKind::Number, std::string(s.substr(i, end - i)), i});
      i = end;
    } else if (ident_start(c)) {
      std::size_t end = i;
      while (end < s.size() && ident_char(s[end])) ++end;
      out.push_back({TokenKind::Identifier, std::string(s.substr(i, end - i)), i});
      i = end;
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({TokenKind::Operator, std::string(1, c), i++});
    } else if (c == '(') {
      out.push_back({TokenKind::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({TokenKind::RParen, ")", i++});
    } else if (c == ',') {
      out.push_back({TokenKind::Comma, ",", i++});
    } else {
      throw ParseError(std::string("unknown character '") + c + "'", i);
    }
  }
  return out;
}

Expr parse(const std::vector<Token>& tokens) { return Expr(Parser(tokens).parse_all()); }

Expr parse(std::string_view source) { return parse(tokenize(source)); }

std::string Expr::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

Complex Expr::eval(const Point& x, const LatticePoint& xi, int dim, const ParamMap& params) const {
  const EvalContext ctx{x, xi, dim, params};
  return checked(eval_node(*root_, ctx), *root_);
}

Expr Expr::bind(const ParamMap& params) const {
  for (const char* reserved : {"i", "pi"})
    if (params.count(reserved) != 0)
      throw ValidationError(std::string("parameter name '") + reserved + "' is reserved");
  return Expr(substitute(root_, params));
}

bool Expr::depends_on_x() const {
  bool found = false;
  visit(*root_, [&](const Node& n) { found = found || n.kind == NodeKind::XVar; });
  return found;
}

bool Expr::depends_on_xi() const {
  bool found = false;
  visit(*root_, [&](const Node& n) { found = found || n.kind == NodeKind::XiVar; });
  return found;
}

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  visit(*root_, [&](const Node& n) {
    if (n.kind == NodeKind::Param) out.insert(n.name);
  });
  return out;
}

void Expr::check_dimension(int dim) const {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3");
  // Vector variables are legal directly inside bracket()/norm() in any dimension.
  std::function<void(const Node&, bool)> walk = [&](const Node& n, bool in_vector_call) {
    if (n.kind == NodeKind::XVar || n.kind == NodeKind::XiVar) {
      if (n.index > dim)
        throw ValidationError("variable index " + std::to_string(n.index) + " exceeds dimension " +
                              std::to_string(dim) + " at offset " + std::to_string(n.position));
      if (n.index == 0 && dim > 1 && !in_vector_call)
        throw ValidationError("vector variable used as a scalar at offset " + std::to_string(n.position));
    }
    const bool vector_call = n.kind == NodeKind::Call && (n.func == Func::Bracket || n.func == Func::Norm);
    for (const auto& ch : n.children) walk(*ch, vector_call);
  };
  walk(*root_, false);
}

// ---------------------------------------------------------------- families

SymbolFamily bessel_family(double m) {
  return {"bessel", {{"m", m}}, parse("bracket(xi)^m"), ClassParams(m, 1.0, 0.0)};
}

SymbolFamily wainger_family(double a, double b) {
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("wainger exponent a must lie in (0, 1)");
  return {"wainger", {{"a", a}, {"b", b}}, parse("exp(i*norm(xi)^a)*bracket(xi)^(-b)"),
          ClassParams(-b, 1.0 - a, 0.0)};
}

SymbolFamily exotic_family(double m, double d, double c) {
  if (!(d >= 0.0 && d < 1.0)) throw ValidationError("exotic exponent d must lie in [0, 1)");
  return {"exotic", {{"m", m}, {"d", d}, {"c", c}},
          parse("bracket(xi)^m*exp(i*c*sin(2*pi*x1)/(2*pi)*bracket(xi)^d)"), ClassParams(m, 1.0 - d, d)};
}

std::optional<SymbolFamily> family_from_call(std::string_view name, std::span<const double> args) {
  if (name == "bessel" && args.size() == 1) return bessel_family(args[0]);
  if (name == "wainger" && args.size() == 2) return wainger_family(args[0], args[1]);
  if (name == "exotic" && args.size() == 3) return exotic_family(args[0], args[1], args[2]);
  return std::nullopt;
}

std::optional<SymbolFamily> parse_family(std::string_view text) {
  const auto tokens = tokenize(text);
  if (tokens.size() < 3 || tokens[0].kind != TokenKind::Identifier || !is_family_name(tokens[0].lexeme) ||
      tokens[1].kind != TokenKind::LParen || tokens.back().kind != TokenKind::RParen)
    return std::nullopt;
  std::vector<double> args;
  std::vector<Token> current;
  int depth = 0;
  auto flush = [&](std::size_t pos) {
    if (current.empty()) throw ParseError("empty family argument", pos);
    const Expr e = parse(current);
    if (e.depends_on_x() || e.depends_on_xi() || !e.parameters().empty())
      throw ParseError("family arguments must be constants", current.front().position);
    args.push_back(e.eval(Point{}, LatticePoint{}, 1).real());
    current.clear();
  };
  for (std::size_t k = 2; k + 1 < tokens.size(); ++k) {
    const Token& t = tokens[k];
    if (t.kind == TokenKind::LParen) ++depth;
    if (t.kind == TokenKind::RParen && --depth < 0) return std::nullopt;
    if (t.kind == TokenKind::Comma && depth == 0) {
      flush(t.position);
      continue;
    }
    current.push_back(t);
  }
  if (depth != 0) return std::nullopt;
  flush(tokens.back().position);
  auto fam = family_from_call(tokens[0].lexeme, args);
  if (!fam) throw ParseError("arity mismatch in '" + tokens[0].lexeme + "'", tokens[0].position);
  return fam;
}

// ---------------------------------------------------------------- Symbol

Symbol Symbol::analytic(const Expr& expr, int dim, const ParamMap& params) {
  Expr bound = expr.bind(params);
  bound.check_dimension(dim);
  Symbol s;
  s.dim_ = dim;
  s.x_independent_ = !bound.depends_on_x();
  s.expr_ = std::move(bound);
  return s;
}

Symbol Symbol::table(const GridSpec& grid, std::vector<Complex> values) {
  const std::size_t g = grid.point_count();
  if (values.size() != g * g) throw ValidationError("symbol table must have G*L entries");
  for (const Complex& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("symbol table must be finite");
  Symbol s;
  s.dim_ = grid.dim();
  s.table_grid_ = grid;
  s.x_independent_ = true;
  for (std::size_t x = 1; x < g && s.x_independent_; ++x)
    for (std::size_t k = 0; k < g; ++k)
      if (values[x * g + k] != values[k]) {
        s.x_independent_ = false;
        break;
      }
  s.table_ = std::make_shared<const std::vector<Complex>>(std::move(values));
  return s;
}

bool Symbol::in_domain(const LatticePoint& xi) const noexcept {
  return !table_grid_ || FrequencyLattice(*table_grid_).contains(xi);
}

Complex Symbol::operator()(const Point& x, const LatticePoint& xi) const {
  if (expr_) return expr_->eval(x, xi, dim_);
  const GridSpec& grid = *table_grid_;
  const FrequencyLattice lattice(grid);
  const auto k = lattice.index_of(xi);
  if (!k) throw OutOfTableError("frequency outside the symbol table");
  GridIndex idx{};
  for (int a = 0; a < dim_; ++a) {
    const auto u = static_cast<std::size_t>(a);
    const double t = x[u] * grid.sizes()[u];
    const double r = std::round(t);
    if (std::fabs(t - r) > 1e-9) throw ValidationError("table symbol evaluated off its grid");
    idx[u] = static_cast<int>(r);
  }
  return (*table_)[grid.flatten(idx) * grid.point_count() + *k];
}

std::string Symbol::describe() const {
  if (expr_) return expr_->print();
  std::string s = "table[";
  for (int a = 0; a < dim_; ++a) s += (a ? "x" : "") + std::to_string(table_grid_->sizes()[static_cast<std::size_t>(a)]);
  return s + "]";
}

}  // namespace tpdo::dsl
