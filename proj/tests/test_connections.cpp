#include <cmath>
#include <random>

#include "doctest.h"
#include "dualgeo/connections.hpp"
#include "dualgeo/fixtures.hpp"
#include "dualgeo/grid.hpp"

using namespace dualgeo;

namespace {

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

Metric curved() {
  ParseContext c;
  c.dimension = 2;
  const auto a = parse("2 + x2^2", c), b = parse("x1*x2/3", c), d = parse("1 + exp(x1)", c);
  return Metric({{a, b}, {b, d}});
}

std::vector<Point> sample() { return grid_points({pt(0.4, -0.6), pt(1.4, 0.6), 4}); }

// α = (sin x1 + x2, x1 x2 - 1) scaled by `c`.
CovectorFn smooth_alpha(double c) {
  return [c](const Point& p) {
    Vec a(2);
    a << c * (std::sin(p[0]) + p[1]), c * (p[0] * p[1] - 1);
    return a;
  };
}

}  // namespace

TEST_CASE("connection tags round trip") {
  for (auto t : {ConnectionTag::LeviCivita, ConnectionTag::PlusT, ConnectionTag::MinusT, ConnectionTag::PlusB,
                 ConnectionTag::MinusB, ConnectionTag::PlusD, ConnectionTag::MinusD, ConnectionTag::PlusDigamma,
                 ConnectionTag::MinusDigamma, ConnectionTag::PlusDagger, ConnectionTag::MinusDagger})
    CHECK(parse_connection_tag(to_string(t)) == t);
  CHECK_THROWS_AS(parse_connection_tag("+Q"), Error);
}

TEST_CASE("the plus variant subtracts the tensor") {
  const Fixture f = builtin("sw2");
  const auto model = f.model();
  const CoefficientFn t = [model](const Point& p) { return model.t_hat(p); };
  const auto plus = from_difference(f.metric, +1, t, ConnectionTag::PlusT);
  const auto minus = from_difference(f.metric, -1, t, ConnectionTag::MinusT);
  const auto lc = AffineConnection::levi_civita(f.metric);
  const Point p = pt(1, 2);
  CHECK(max_abs_diff(difference_tensor(plus, lc, p), -1.0 * model.t_hat(p)) < 1e-14);
  CHECK(max_abs_diff(difference_tensor(minus, lc, p), model.t_hat(p)) < 1e-14);
}

TEST_CASE("a non-symmetric difference tensor is rejected") {
  const Metric g = Metric::euclidean(2);
  const auto c = from_difference(g, +1, [](const Point&) {
    TensorValue a = TensorValue::mixed12(2);
    a(0, 0, 1) = 1.0;
    return a;
  }, ConnectionTag::Custom);
  CHECK_THROWS_AS(c.coefficients(pt(0, 0)), Error);
}

TEST_CASE("dual-projective test recovers a random shift") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  const Metric g = curved();
  const auto lc = AffineConnection::levi_civita(g);
  const auto pts = sample();
  for (int trial = 0; trial < 5; ++trial) {
    const double c = gauss(rng);
    const auto shifted = shift_by_covector(lc, smooth_alpha(c), ConnectionTag::Custom);
    const auto r = dual_projective_test(shifted, lc, pts, 1e-9);
    REQUIRE(r.holds);
    CHECK(r.max_residual < 1e-12);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((r.alpha[i] - smooth_alpha(c)(pts[i])).norm() < 1e-12);
  }
}

TEST_CASE("dual-projective equivalence is transitive and symmetric") {
  const Metric g = curved();
  const auto lc = AffineConnection::levi_civita(g);
  const auto b = shift_by_covector(lc, smooth_alpha(0.7), ConnectionTag::Custom);
  const auto c = shift_by_covector(b, smooth_alpha(-1.9), ConnectionTag::Custom);
  const auto pts = sample();
  const auto ac = dual_projective_test(c, lc, pts, 1e-9);
  REQUIRE(ac.holds);
  const auto ca = dual_projective_test(lc, c, pts, 1e-9);
  REQUIRE(ca.holds);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK((ac.alpha[i] - smooth_alpha(-1.2)(pts[i])).norm() < 1e-12);
    CHECK((ac.alpha[i] + ca.alpha[i]).norm() < 1e-12);
  }
}

TEST_CASE("a generic perturbation is not dual-projective") {
  const Metric g = curved();
  const auto lc = AffineConnection::levi_civita(g);
  const auto bent = add_tensor(lc, [](const Point& p) {
    TensorValue a = TensorValue::mixed12(2);
    a(1, 0, 0) = 0.1 * p[0];
    return a;
  }, "bent");
  const auto r = dual_projective_test(bent, lc, sample(), 1e-9);
  CHECK_FALSE(r.holds);
  CHECK(r.max_residual > 1e-3);
  CHECK(r.alpha.empty());
}

TEST_CASE("torsion is refused by the dual-projective test") {
  const Metric g = Metric::euclidean(2);
  const auto lc = AffineConnection::levi_civita(g);
  const auto twisted = add_tensor(lc, [](const Point&) {
    TensorValue a = TensorValue::mixed12(2);
    a(0, 0, 1) = 0.5;
    return a;
  }, "twisted");
  CHECK(torsion(twisted, pt(0, 0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dual_projective_test(twisted, lc, {pt(0, 0)}, 1e-9), Error);
}

TEST_CASE("Levi-Civita is compatible with its metric") {
  const Metric g = curved();
  const auto r = semi_compatibility_test(AffineConnection::levi_civita(g), g, sample(), 1e-9);
  CHECK(r.holds);
  CHECK(r.max_antisymmetrized < 1e-12);
  for (const Vec& a : r.alpha) CHECK(a.norm() < 1e-12);
}

TEST_CASE("a covector shift of Levi-Civita is semi-compatible in both readings") {
  const Metric g = curved();
  const auto pts = sample();
  const auto shifted = shift_by_covector(AffineConnection::levi_civita(g), smooth_alpha(1.0), ConnectionTag::Custom);
  const CovectorFn beta = smooth_alpha(1.0);
  const CovectorFn neg = smooth_alpha(-1.0);

  const auto bc = semi_compatibility_test(shifted, g, pts, 1e-9, &beta, SemiForm::BetaCondition);
  CHECK(bc.holds);
  CHECK(bc.max_residual < 1e-12);
  const auto def = semi_compatibility_test(shifted, g, pts, 1e-9, &neg, SemiForm::Definition);
  CHECK(def.holds);
  CHECK(def.max_antisymmetrized > 0.1);

  const auto wrong = semi_compatibility_test(shifted, g, pts, 1e-9, &beta, SemiForm::Definition);
  CHECK_FALSE(wrong.holds);
  CHECK(wrong.max_free_residual < 1e-12);
}

TEST_CASE("difference of connections on different dimensions throws") {
  const auto a = AffineConnection::levi_civita(Metric::euclidean(2));
  const auto b = AffineConnection::levi_civita(Metric::euclidean(3));
  CHECK_THROWS_AS(difference_tensor(a, b, pt(0, 0)), Error);
}

TEST_CASE("Ricci of Levi-Civita is symmetric, a generic connection's is not") {
  const Metric g = curved();
  const auto pts = sample();
  const auto lc = AffineConnection::levi_civita(g);
  CHECK(connection_ricci_asymmetry(lc, pts, nullptr) < 1e-6);
  const auto bent = add_tensor(lc, [](const Point& p) {
    TensorValue a = TensorValue::mixed12(2);
    a(0, 0, 0) = p[1];
    return a;
  }, "bent");
  CHECK(connection_ricci_asymmetry(bent, pts, nullptr) > 1e-3);
}
