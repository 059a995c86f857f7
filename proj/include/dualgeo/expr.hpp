#pragma once

// Closed-form scalar expressions in chart coordinates x1..xn.
//
// Grammar (see docs/expression_grammar.ebnf):
//   expr    := term  { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := "-" unary | power
//   power   := primary [ "^" unary ]          (right-associative)
//   primary := number | name | name "(" expr ")" | "(" expr ")"
//
// An exponent that is an integral literal (optionally negated) is an integer
// power and accepts any base; any other exponent requires a positive base at
// evaluation time.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dualgeo/jet.hpp"
#include "dualgeo/types.hpp"

namespace dualgeo {

enum class ParseErrorKind { Lexical, UnbalancedParens, UnknownIdentifier, Arity, Syntax, Empty };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what);
  ParseErrorKind kind() const { return kind_; }
  /// Byte offset of the first offending character.
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

/// Domain violation during evaluation; the message names the subexpression.
class EvalError : public Error {
 public:
  EvalError(const std::string& subexpression, const std::string& reason);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Func { Sqrt, Sin, Cos, Tan, Exp, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Number, Variable, Constant, Neg, Add, Sub, Mul, Div, IntPow, Pow, Call };
  Kind kind;
  double number = 0.0;   // Number literal, or bound value of a Constant
  int index = 0;         // Variable index (0-based) or integer exponent
  std::string name;      // Constant name
  Func func = Func::Sqrt;
  NodePtr lhs;
  NodePtr rhs;
};

/// Names bound at load time (system parameters). `pi` is always available.
struct ParseContext {
  int dimension = 2;
  std::map<std::string, double> constants;
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root, int dimension) : root_(std::move(root)), dimension_(dimension) {}

  static Expression constant(double c, int dimension);

  const Node& root() const { return *root_; }
  int dimension() const { return dimension_; }
  bool valid() const { return root_ != nullptr; }

  double eval(const Point& p) const;
  Jet2<double> eval_jet2(const Point& p) const;
  /// Third partial derivatives d3[(i*n + j)*n + k], symmetrized over all index orders.
  std::vector<double> eval_order3(const Point& p) const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string print() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  NodePtr root_;
  int dimension_ = 0;
};

Expression parse(std::string_view source, const ParseContext& ctx);

/// Structural tree equality (literal values compared bitwise).
bool same_tree(const Node& a, const Node& b);

std::string print_node(const Node& n);

}  // namespace dualgeo
