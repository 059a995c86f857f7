#include "dualgeo/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace dualgeo {

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
    : Error("parse error at offset " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

EvalError::EvalError(const std::string& subexpression, const std::string& reason)
    : Error("evaluation error in '" + subexpression + "': " + reason), subexpression_(subexpression) {}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    if ((c >= '0' && c <= '9') || c == '.') {
      std::size_t j = i;
      while (j < src.size() && ((src[j] >= '0' && src[j] <= '9') || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && src[k] >= '0' && src[k] <= '9') {
          while (k < src.size() && src[k] >= '0' && src[k] <= '9') ++k;
          j = k;
        }
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, v);
      if (ec != std::errc() || ptr != src.data() + j) {
        throw ParseError(ParseErrorKind::Lexical, i, "malformed number '" + std::string(src.substr(i, j - i)) + "'");
      }
      out.push_back({Tok::Number, i, src.substr(i, j - i), v});
      i = j;
      continue;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ((src[j] >= 'a' && src[j] <= 'z') || (src[j] >= 'A' && src[j] <= 'Z') ||
                                (src[j] >= '0' && src[j] <= '9') || src[j] == '_')) {
        ++j;
      }
      out.push_back({Tok::Name, i, src.substr(i, j - i)});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      default:
        throw ParseError(ParseErrorKind::Lexical, i, std::string("unexpected character '") + c + "'");
    }
    out.push_back({k, i, src.substr(i, 1)});
    ++i;
  }
  out.push_back({Tok::End, src.size(), {}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool integral_literal(const Node& n, int& k) {
  const Node* num = &n;
  int sign = 1;
  if (n.kind == Node::Kind::Neg && n.lhs->kind == Node::Kind::Number) {
    num = n.lhs.get();
    sign = -1;
  }
  if (num->kind != Node::Kind::Number) return false;
  const double v = num->number;
  if (v != std::floor(v) || std::abs(v) > 1e6) return false;
  k = sign * static_cast<int>(v);
  return true;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseContext& ctx) : toks_(std::move(toks)), ctx_(ctx) {}

  NodePtr parse_all() {
    if (peek().kind == Tok::End) throw ParseError(ParseErrorKind::Empty, 0, "empty expression");
    NodePtr e = expr();
    if (peek().kind == Tok::RParen) {
      throw ParseError(ParseErrorKind::UnbalancedParens, peek().offset, "unmatched ')'");
    }
    if (peek().kind != Tok::End) {
      throw ParseError(ParseErrorKind::Syntax, peek().offset, "unexpected '" + std::string(peek().text) + "'");
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  NodePtr expr() {
    NodePtr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const auto k = next().kind == Tok::Plus ? Node::Kind::Add : Node::Kind::Sub;
      lhs = make(k, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const auto k = next().kind == Tok::Star ? Node::Kind::Mul : Node::Kind::Div;
      lhs = make(k, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek().kind == Tok::Minus) {
      next();
      return make(Node::Kind::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek().kind != Tok::Caret) return base;
    next();
    NodePtr exponent = unary();
    int k = 0;
    if (integral_literal(*exponent, k)) {
      auto n = make(Node::Kind::IntPow, base);
      std::const_pointer_cast<Node>(n)->index = k;
      return n;
    }
    return make(Node::Kind::Pow, base, exponent);
  }

  NodePtr primary() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Number: {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->number = t.number;
        return n;
      }
      case Tok::LParen: {
        NodePtr e = expr();
        if (peek().kind != Tok::RParen) {
          throw ParseError(ParseErrorKind::UnbalancedParens, t.offset, "'(' is never closed");
        }
        next();
        return e;
      }
      case Tok::Name:
        return name(t);
      case Tok::RParen:
        throw ParseError(ParseErrorKind::UnbalancedParens, t.offset, "unmatched ')'");
      case Tok::End:
        throw ParseError(ParseErrorKind::Syntax, t.offset, "unexpected end of input");
      default:
        throw ParseError(ParseErrorKind::Syntax, t.offset, "unexpected '" + std::string(t.text) + "'");
    }
  }

  NodePtr name(const Token& t) {
    static const std::map<std::string_view, Func> kFuncs = {{"sqrt", Func::Sqrt}, {"sin", Func::Sin},
                                                             {"cos", Func::Cos},   {"tan", Func::Tan},
                                                             {"exp", Func::Exp},   {"log", Func::Log}};
    const std::string id(t.text);
    if (auto f = kFuncs.find(t.text); f != kFuncs.end()) {
      if (peek().kind != Tok::LParen) {
        throw ParseError(ParseErrorKind::Arity, t.offset, "function '" + id + "' expects one argument");
      }
      const Token& open = next();
      if (peek().kind == Tok::RParen) {
        throw ParseError(ParseErrorKind::Arity, peek().offset, "function '" + id + "' expects one argument, got 0");
      }
      NodePtr arg = expr();
      if (peek().kind == Tok::Comma) {
        throw ParseError(ParseErrorKind::Arity, peek().offset, "function '" + id + "' expects one argument");
      }
      if (peek().kind != Tok::RParen) {
        throw ParseError(ParseErrorKind::UnbalancedParens, open.offset, "'(' is never closed");
      }
      next();
      auto n = make(Node::Kind::Call, arg);
      std::const_pointer_cast<Node>(n)->func = f->second;
      return n;
    }
    if (peek().kind == Tok::LParen) {
      throw ParseError(ParseErrorKind::UnknownIdentifier, t.offset, "unknown function '" + id + "'");
    }
    if (id.size() >= 2 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int idx = std::stoi(id.substr(1));
      if (idx < 1 || idx > ctx_.dimension) {
        throw ParseError(ParseErrorKind::UnknownIdentifier, t.offset,
                         "coordinate '" + id + "' out of range for dimension " + std::to_string(ctx_.dimension));
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Variable;
      n->index = idx - 1;
      return n;
    }
    double value = 0.0;
    if (auto c = ctx_.constants.find(id); c != ctx_.constants.end()) {
      value = c->second;
    } else if (id == "pi") {
      value = std::numbers::pi;
    } else {
      throw ParseError(ParseErrorKind::UnknownIdentifier, t.offset, "unknown identifier '" + id + "'");
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Constant;
    n->name = id;
    n->number = value;
    return n;
  }

  std::vector<Token> toks_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation, generic over double / Jet2<double> / Jet2<Dual>

template <class S>
double scalar(const Jet2<S>& j) {
  return value_of(j.value);
}
double scalar(double x) { return x; }

template <class J>
struct Lift;

template <>
struct Lift<double> {
  int n;
  double operator()(double c) const { return c; }
};

template <class S>
struct Lift<Jet2<S>> {
  int n;
  Jet2<S> operator()(double c) const { return Jet2<S>::constant(n, S(c)); }
};

double reciprocal(double x) { return 1.0 / x; }

template <class J>
class Evaluator {
 public:
  Evaluator(const std::vector<J>& vars, int n, bool with_derivatives)
      : vars_(vars), lift_{n}, derivs_(with_derivatives) {}

  J eval(const Node& node) const {
    J r = eval_raw(node);
    if (!std::isfinite(scalar(r))) fail(node, "non-finite value");
    return r;
  }

 private:
  [[noreturn]] void fail(const Node& node, const std::string& why) const { throw EvalError(print_node(node), why); }

  J eval_raw(const Node& node) const {
    using K = Node::Kind;
    switch (node.kind) {
      case K::Number:
      case K::Constant:
        return lift_(node.number);
      case K::Variable:
        return vars_[static_cast<std::size_t>(node.index)];
      case K::Neg:
        return -eval(*node.lhs);
      case K::Add:
        return eval(*node.lhs) + eval(*node.rhs);
      case K::Sub:
        return eval(*node.lhs) - eval(*node.rhs);
      case K::Mul:
        return eval(*node.lhs) * eval(*node.rhs);
      case K::Div: {
        const J den = eval(*node.rhs);
        if (scalar(den) == 0.0) fail(node, "division by zero");
        return eval(*node.lhs) * reciprocal(den);
      }
      case K::IntPow: {
        const J base = eval(*node.lhs);
        if (node.index < 0 && scalar(base) == 0.0) fail(node, "zero raised to a negative power");
        return powi(base, node.index);
      }
      case K::Pow: {
        const J base = eval(*node.lhs);
        if (!(scalar(base) > 0.0)) fail(node, "real exponent requires a positive base");
        return exp(eval(*node.rhs) * log(base));
      }
      case K::Call: {
        const J arg = eval(*node.lhs);
        const double a = scalar(arg);
        switch (node.func) {
          case Func::Sqrt:
            if (a < 0.0 || (derivs_ && a == 0.0)) fail(node, "sqrt outside its differentiable domain");
            return sqrt(arg);
          case Func::Log:
            if (!(a > 0.0)) fail(node, "log of a non-positive value");
            return log(arg);
          case Func::Sin:
            return sin(arg);
          case Func::Cos:
            return cos(arg);
          case Func::Tan:
            if (std::cos(a) == 0.0) fail(node, "tan at a pole");
            return tan(arg);
          case Func::Exp:
            return exp(arg);
        }
      }
    }
    fail(node, "unknown node");
  }

  const std::vector<J>& vars_;
  Lift<J> lift_;
  bool derivs_;
};

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_point(const Point& p) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += format_number(p[i]);
  }
  return s + ")";
}

Expression parse(std::string_view source, const ParseContext& ctx) {
  if (ctx.dimension < 1 || ctx.dimension > kMaxDim) {
    throw ParseError(ParseErrorKind::Syntax, 0, "unsupported dimension " + std::to_string(ctx.dimension));
  }
  Parser p(lex(source), ctx);
  return Expression(p.parse_all(), ctx.dimension);
}

Expression Expression::constant(double c, int dimension) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->number = c;
  return Expression(n, dimension);
}

double Expression::eval(const Point& p) const {
  std::vector<double> vars(p.data(), p.data() + dimension_);
  return Evaluator<double>(vars, dimension_, false).eval(*root_);
}

Jet2<double> Expression::eval_jet2(const Point& p) const {
  std::vector<Jet2<double>> vars(static_cast<std::size_t>(dimension_));
  for (int i = 0; i < dimension_; ++i) {
    auto& v = vars[static_cast<std::size_t>(i)];
    v = Jet2<double>::constant(dimension_, p[i]);
    v.grad[i] = 1.0;
  }
  return Evaluator<Jet2<double>>(vars, dimension_, true).eval(*root_);
}

std::vector<double> Expression::eval_order3(const Point& p) const {
  const int n = dimension_;
  std::vector<Jet2<Dual>> vars(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& v = vars[static_cast<std::size_t>(i)];
    v = Jet2<Dual>::constant(n, Dual::variable(p[i], i));
    v.grad[i] = Dual(1.0);
  }
  const Jet2<Dual> j = Evaluator<Jet2<Dual>>(vars, n, true).eval(*root_);
  std::vector<double> raw(static_cast<std::size_t>(n * n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) raw[static_cast<std::size_t>((a * n + b) * n + c)] = j.h(a, b).d[c];
  // Average over index orders so the result is exactly symmetric.
  std::vector<double> out(raw.size());
  auto at = [&](int a, int b, int c) { return raw[static_cast<std::size_t>((a * n + b) * n + c)]; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        int s[3] = {a, b, c};
        std::sort(s, s + 3);
        const double v = (at(s[0], s[1], s[2]) + at(s[0], s[2], s[1]) + at(s[1], s[0], s[2]) +
                          at(s[1], s[2], s[0]) + at(s[2], s[0], s[1]) + at(s[2], s[1], s[0])) /
                         6.0;
        out[static_cast<std::size_t>((a * n + b) * n + c)] = v;
      }
  return out;
}

std::string Expression::print() const { return print_node(*root_); }

bool operator==(const Expression& a, const Expression& b) {
  if (a.dimension_ != b.dimension_) return false;
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return same_tree(*a.root_, *b.root_);
}

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  using K = Node::Kind;
  switch (a.kind) {
    case K::Number:
      return std::memcmp(&a.number, &b.number, sizeof(double)) == 0;
    case K::Constant:
      return a.name == b.name && a.number == b.number;
    case K::Variable:
      return a.index == b.index;
    case K::Neg:
      return same_tree(*a.lhs, *b.lhs);
    case K::IntPow:
      return a.index == b.index && same_tree(*a.lhs, *b.lhs);
    case K::Call:
      return a.func == b.func && same_tree(*a.lhs, *b.lhs);
    default:
      return same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
  }
}

std::string print_node(const Node& n) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Number:
      return format_number(n.number);
    case K::Constant:
      return n.name;
    case K::Variable:
      return "x" + std::to_string(n.index + 1);
    case K::Neg:
      return "(-" + print_node(*n.lhs) + ")";
    case K::Add:
      return "(" + print_node(*n.lhs) + " + " + print_node(*n.rhs) + ")";
    case K::Sub:
      return "(" + print_node(*n.lhs) + " - " + print_node(*n.rhs) + ")";
    case K::Mul:
      return "(" + print_node(*n.lhs) + " * " + print_node(*n.rhs) + ")";
    case K::Div:
      return "(" + print_node(*n.lhs) + " / " + print_node(*n.rhs) + ")";
    case K::IntPow:
      return "(" + print_node(*n.lhs) + "^" + (n.index < 0 ? "(-" + std::to_string(-n.index) + ")" : std::to_string(n.index)) + ")";
    case K::Pow:
      return "(" + print_node(*n.lhs) + "^" + print_node(*n.rhs) + ")";
    case K::Call: {
      static const char* kNames[] = {"sqrt", "sin", "cos", "tan", "exp", "log"};
      return std::string(kNames[static_cast<int>(n.func)]) + "(" + print_node(*n.lhs) + ")";
    }
  }
  return "?";
}

}  // namespace dualgeo
