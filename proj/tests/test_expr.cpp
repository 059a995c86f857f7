#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "doctest.h"
#include "dualgeo/expr.hpp"
#include "oracles.hpp"

using namespace dualgeo;

namespace {

ParseContext ctx(int n) {
  ParseContext c;
  c.dimension = n;
  return c;
}

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// Random expressions that are smooth on all of R^2: every denominator, log and
// sqrt argument is bounded away from zero.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
  std::uniform_real_distribution<double> lit(0.25, 3.0);
  const int k = pick(rng);
  auto sub = [&] { return random_expr(rng, depth - 1); };
  switch (k) {
    case 0: return "x1";
    case 1: return "x2";
    case 2: return std::to_string(lit(rng));
    case 3: return "(" + sub() + " + " + sub() + ")";
    case 4: return "(" + sub() + " - " + sub() + ")";
    case 5: return "(" + sub() + " * " + sub() + ")";
    case 6: return "(" + sub() + ") / (2 + sin(" + sub() + "))";
    case 7: return "(" + sub() + ")^" + std::to_string(1 + static_cast<int>(lit(rng)));
    case 8: return "cos(" + sub() + ")";
    case 9: return "exp(sin(" + sub() + "))";
    case 10: return "log(1 + (" + sub() + ")^2)";
    default: return "sqrt(2 + (" + sub() + ")^2)^1.5";
  }
}

std::vector<std::string> corpus() {
  std::mt19937_64 rng(20240611);
  std::vector<std::string> out;
  for (int i = 0; i < 20; ++i) out.push_back(random_expr(rng, 3));
  return out;
}

}  // namespace

TEST_CASE("parse and evaluate the documented examples") {
  const auto e = parse("x1^2 + x2^2", ctx(2));
  CHECK(e.eval(pt({1, 2})) == 5.0);
  const auto j = e.eval_jet2(pt({1, 2}));
  CHECK(j.grad[0] == 2.0);
  CHECK(j.grad[1] == 4.0);
  CHECK(j.h(0, 0) == 2.0);
  CHECK(j.h(1, 1) == 2.0);
  CHECK(j.h(0, 1) == 0.0);

  const auto inv = parse("1/x1^2", ctx(1)).eval_jet2(pt({1}));
  CHECK(inv.value == doctest::Approx(1.0));
  CHECK(inv.grad[0] == doctest::Approx(-2.0));
  CHECK(inv.h(0, 0) == doctest::Approx(6.0));

  const auto sc = parse("sin(x1)*cos(x1)", ctx(1)).eval_jet2(pt({0}));
  CHECK(sc.value == 0.0);
  CHECK(sc.grad[0] == doctest::Approx(1.0));

  const auto c = parse("3", ctx(2)).eval_jet2(pt({0.3, -4}));
  CHECK(c.value == 3.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(c.grad[i] == 0.0);
    for (int k = 0; k < 2; ++k) CHECK(c.h(i, k) == 0.0);
  }
}

TEST_CASE("inverse square in x2 matches finite differences") {
  const auto e = parse("1/x2^2", ctx(2));
  const Point p = pt({1, 2});
  const auto j = e.eval_jet2(p);
  const auto fd = oracle::fd_jet(e, p, 1e-5);
  CHECK(j.grad[0] == 0.0);
  CHECK(j.grad[1] == doctest::Approx(-0.25));
  CHECK(j.h(1, 1) == doctest::Approx(0.375));
  CHECK(std::abs(fd.grad[1] - (-0.25)) < 1e-6);
  CHECK(std::abs(fd.hess(1, 1) - 0.375) < 1e-6);
  CHECK(std::abs(fd.hess(0, 0)) < 1e-6);
}

TEST_CASE("third derivatives") {
  CHECK(parse("x1^3", ctx(1)).eval_order3(pt({2}))[0] == doctest::Approx(6.0));
  CHECK(parse("1/x1^2", ctx(1)).eval_order3(pt({1}))[0] == doctest::Approx(-24.0));
  for (double v : parse("3*x1^2 - x1*x2 + 7*x2 + 1", ctx(2)).eval_order3(pt({0.4, 1.7}))) CHECK(v == 0.0);

  // symmetric in all three slots and consistent with differencing the Hessian
  const auto e = parse("sin(x1*x2) + exp(x1)*x2^3", ctx(2));
  const Point p = pt({0.3, 0.8});
  const auto d3 = e.eval_order3(p);
  const double h = 1e-3;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        Point hi = p, lo = p;
        hi[c] += h;
        lo[c] -= h;
        const double fd = (oracle::fd_jet(e, hi, 1e-3).hess(a, b) - oracle::fd_jet(e, lo, 1e-3).hess(a, b)) / (2 * h);
        CHECK(d3[(a * 2 + b) * 2 + c] == doctest::Approx(fd).epsilon(1e-4));
        CHECK(d3[(a * 2 + b) * 2 + c] == d3[(c * 2 + a) * 2 + b]);
      }
}

TEST_CASE("precedence and associativity") {
  const Point p = pt({2, 3});
  CHECK(parse("-x1^2", ctx(2)).eval(p) == -4.0);
  CHECK(parse("2^3^2", ctx(2)).eval(p) == doctest::Approx(512.0));
  CHECK(parse("x1 - x2 - 1", ctx(2)).eval(p) == -2.0);
  CHECK(parse("x2 / x1 * 4", ctx(2)).eval(p) == 6.0);
  CHECK(parse("x1^-1", ctx(2)).eval(p) == 0.5);
  CHECK(parse("(-x1)^2", ctx(2)).eval(p) == 4.0);
}

TEST_CASE("integer exponents accept negative bases, real exponents do not") {
  CHECK(parse("x1^3", ctx(1)).eval(pt({-2})) == -8.0);
  CHECK(parse("x1^(-2)", ctx(1)).eval(pt({-2})) == 0.25);
  CHECK_THROWS_AS(parse("x1^1.5", ctx(1)).eval(pt({-2})), EvalError);
  CHECK(parse("x1^1.5", ctx(1)).eval(pt({4})) == doctest::Approx(8.0));
}

TEST_CASE("parse errors carry kind and offset") {
  auto expect = [](const char* src, ParseErrorKind kind, std::size_t offset) {
    try {
      (void)parse(src, ctx(2));
      FAIL("expected a parse error for " << src);
    } catch (const ParseError& e) {
      CHECK(e.kind() == kind);
      CHECK(e.offset() == offset);
    }
  };
  expect("x1 + $", ParseErrorKind::Lexical, 5);
  expect("(x1 + 2", ParseErrorKind::UnbalancedParens, 0);
  expect("x1 + 2)", ParseErrorKind::UnbalancedParens, 6);
  expect("x1 + alpha", ParseErrorKind::UnknownIdentifier, 5);
  expect("x3", ParseErrorKind::UnknownIdentifier, 0);
  expect("sin(x1, x2)", ParseErrorKind::Arity, 6);
  expect("cos()", ParseErrorKind::Arity, 4);
  expect("foo(x1)", ParseErrorKind::UnknownIdentifier, 0);
  expect("", ParseErrorKind::Empty, 0);
  expect("x1 +", ParseErrorKind::Syntax, 4);
}

TEST_CASE("named constants are bound at parse time") {
  ParseContext c = ctx(2);
  c.constants["k"] = 2.5;
  const auto e = parse("k*x1", c);
  CHECK(e.eval(pt({2, 0})) == 5.0);
  CHECK(parse("pi", ctx(2)).eval(pt({0, 0})) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(parse("k*x1", ctx(2)), ParseError);
}

TEST_CASE("domain violations name the offending subexpression") {
  try {
    (void)parse("x2 + 1/x1", ctx(2)).eval(pt({0, 1}));
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.subexpression() == "(1 / x1)");
  }
  CHECK_THROWS_AS(parse("log(x1)", ctx(1)).eval_jet2(pt({-1})), EvalError);
  CHECK_THROWS_AS(parse("sqrt(x1)", ctx(1)).eval_jet2(pt({0})), EvalError);
  CHECK(parse("sqrt(x1)", ctx(1)).eval(pt({0})) == 0.0);
}

TEST_CASE("jets match central finite differences on a random corpus") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  double worst = 0.0;
  for (const auto& src : corpus()) {
    const auto e = parse(src, ctx(2));
    for (int k = 0; k < 20; ++k) {
      const Point p = pt({coord(rng), coord(rng)});
      const auto j = e.eval_jet2(p);
      const auto fd = oracle::fd_jet(e, p, 1e-4);
      for (int a = 0; a < 2; ++a) {
        worst = std::max(worst, oracle::rel_err(j.grad[a], fd.grad[a]));
        for (int b = 0; b < 2; ++b) worst = std::max(worst, oracle::rel_err(j.h(a, b), fd.hess(a, b)));
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("print then parse reproduces the tree") {
  for (const auto& src : corpus()) {
    const auto e = parse(src, ctx(2));
    const auto again = parse(e.print(), ctx(2));
    CHECK(again == e);
    CHECK(parse(again.print(), ctx(2)) == again);
  }
  const auto neg = parse("x1^(-3) + 2.5e-7*x2^0.5", ctx(2));
  CHECK(parse(neg.print(), ctx(2)) == neg);
}

TEST_CASE("evaluation is deterministic") {
  const auto e = parse(corpus()[3], ctx(2));
  const Point p = pt({0.37, -0.91});
  const auto a = e.eval_jet2(p);
  const auto b = e.eval_jet2(p);
  CHECK(std::memcmp(&a.value, &b.value, sizeof(double)) == 0);
  for (int i = 0; i < 2; ++i) CHECK(std::memcmp(&a.grad[i], &b.grad[i], sizeof(double)) == 0);
}
