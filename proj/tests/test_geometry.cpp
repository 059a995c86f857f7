#include <cmath>
#include <random>

#include "doctest.h"
#include "dualgeo/geometry.hpp"
#include "dualgeo/grid.hpp"
#include "oracles.hpp"

using namespace dualgeo;

namespace {

Metric metric_from(const std::vector<std::vector<std::string>>& src, std::map<std::string, double> consts = {}) {
  ParseContext c;
  c.dimension = static_cast<int>(src.size());
  c.constants = std::move(consts);
  std::vector<std::vector<Expression>> g;
  for (const auto& row : src) {
    g.emplace_back();
    for (const auto& s : row) g.back().push_back(parse(s, c));
  }
  return Metric(std::move(g));
}

oracle::MetricFn as_fn(const Metric& g) {
  return [g](const Eigen::VectorXd& p) {
    Eigen::MatrixXd m(g.dim(), g.dim());
    for (int i = 0; i < g.dim(); ++i)
      for (int j = 0; j < g.dim(); ++j) m(i, j) = g.component(i, j).eval(p);
    return m;
  };
}

Metric round_sphere(double radius) {
  return metric_from({{"R^2", "0"}, {"0", "R^2*sin(x1)^2"}}, {{"R", radius}});
}

// Stereographic unit 3-sphere.
Metric stereo3() {
  const std::string c = "4/(1 + x1^2 + x2^2 + x3^2)^2";
  return metric_from({{c, "0", "0"}, {"0", c, "0"}, {"0", "0", c}});
}

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

double max_christoffel_gap(const Metric& g, const Point& p) {
  const TensorValue gam = christoffel(g, p);
  const auto ref = oracle::fd_christoffel(as_fn(g), p);
  double m = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) m = std::max(m, std::abs(gam.data()[i] - ref[i]));
  return m;
}

}  // namespace

TEST_CASE("Euclidean Christoffel symbols vanish") {
  for (int n = 2; n <= 4; ++n) {
    Point p = Point::Constant(n, 0.7);
    CHECK(christoffel(Metric::euclidean(n), p).max_abs() == 0.0);
    CHECK(ricci(Metric::euclidean(n), p).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("round sphere Christoffel symbols") {
  const Metric g = round_sphere(1.0);
  const Point p = pt({M_PI / 4, 0.3});
  const TensorValue gam = christoffel(g, p);
  CHECK(gam(0, 1, 1) == doctest::Approx(-0.5));
  CHECK(gam(1, 0, 1) == doctest::Approx(1.0));
  CHECK(gam(1, 1, 0) == doctest::Approx(1.0));
  CHECK(gam(0, 0, 0) == 0.0);
  CHECK(max_christoffel_gap(g, p) < 1e-8);
}

TEST_CASE("conformally flat metric at the origin") {
  const Metric g = metric_from({{"exp(2*x1)", "0"}, {"0", "exp(2*x1)"}});
  const TensorValue gam = christoffel(g, pt({0, 0}));
  CHECK(gam(0, 0, 0) == doctest::Approx(1.0));
  CHECK(gam(0, 1, 1) == doctest::Approx(-1.0));
  CHECK(gam(1, 0, 1) == doctest::Approx(1.0));
  CHECK(gam(1, 1, 1) == doctest::Approx(0.0));
}

TEST_CASE("Christoffel symbols agree with differenced metric on random points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  const Metric skew = metric_from({{"2 + x2^2", "x1*x2/3"}, {"x1*x2/3", "1 + exp(x1)"}});
  for (int k = 0; k < 25; ++k) {
    CHECK(max_christoffel_gap(skew, pt({u(rng), u(rng)})) < 1e-7);
    CHECK(max_christoffel_gap(stereo3(), pt({u(rng), u(rng), u(rng)})) < 1e-7);
  }
}

TEST_CASE("Ricci of round spheres") {
  for (double radius : {1.0, 2.5}) {
    const Metric g = round_sphere(radius);
    const Point p = pt({1.1, -0.4});
    const Mat ric = ricci(g, p);
    // n = 2, so Ric = (n - 1)/R^2 g
    CHECK((ric - g.at(p) / (radius * radius)).cwiseAbs().maxCoeff() < 1e-10);
  }
  const Point q = pt({0.2, -0.5, 0.4});
  CHECK((ricci(stereo3(), q) - 2.0 * stereo3().at(q)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("first Bianchi identity on a grid") {
  const Metric g = metric_from({{"2 + x2^2", "x1*x2/3"}, {"x1*x2/3", "1 + exp(x1)"}});
  GridSpec spec{pt({-0.5, -0.5}), pt({0.5, 0.5}), 5};
  double worst = 0.0;
  for (const Point& p : grid_points(spec)) worst = std::max(worst, first_bianchi_defect(riemann(g, p)));
  CHECK(worst < 1e-8);
  GridSpec s3{Point::Constant(3, -1), Point::Constant(3, 1), 5};
  worst = 0.0;
  for (const Point& p : grid_points(s3)) worst = std::max(worst, first_bianchi_defect(riemann(stereo3(), p)));
  CHECK(worst < 1e-8);
}

TEST_CASE("covariant Hessians") {
  ParseContext c2;
  const Metric flat = Metric::euclidean(2);
  const Point p = pt({0.3, 1.2});
  const Mat h = hessian(flat, parse("x1^2 + x2^2", c2), p);
  CHECK((h - 2.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // On the sphere, Hess(cos θ) = -cos θ g.
  const Metric s = round_sphere(1.0);
  const Mat hs = hessian(s, parse("cos(x1)", c2), p);
  CHECK((hs + std::cos(p[0]) * s.at(p)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("raising and lowering") {
  const Mat g = Vec::Map(std::vector<double>{1.0, 4.0}.data(), 2).asDiagonal();
  TensorValue w(2, {Variance::Co});
  w(0) = 1.0;
  w(1) = 1.0;
  const TensorValue v = sharp(g.inverse(), w, 0);
  CHECK(v.slots()[0] == Variance::Contra);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == 0.25);
  CHECK(max_abs_diff(flat(g, v, 0), w) < 1e-15);
  CHECK_THROWS_AS(flat(g, w, 0), Error);
  CHECK_THROWS_AS(sharp(g, v, 0), Error);
}

TEST_CASE("Levi-Civita connection is metric") {
  for (const Metric& g : {round_sphere(1.0), metric_from({{"2 + x2^2", "x1*x2/3"}, {"x1*x2/3", "1 + exp(x1)"}})}) {
    GridSpec spec{pt({0.4, -0.6}), pt({1.4, 0.6}), 5};
    double worst = 0.0;
    for (const Point& p : grid_points(spec)) {
      const TensorValue gam = christoffel(g, p);
      worst = std::max(worst, covariant_derivative(gam, metric_field(g), p).max_abs());
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("two Laplacian routes agree") {
  ParseContext c3;
  c3.dimension = 3;
  const auto v = parse("x1*x2^2 + sin(x3) + x1^3", c3);
  GridSpec spec{Point::Constant(3, -0.9), Point::Constant(3, 0.9), 4};
  double worst = 0.0;
  for (const Point& p : grid_points(spec))
    worst = std::max(worst, std::abs(laplacian(stereo3(), v, p) - laplacian_divergence(stereo3(), v, p)));
  CHECK(worst < 1e-8);
}

TEST_CASE("covariant derivative of a covector field") {
  // On flat space in Cartesian coordinates ∇w = ∂w.
  TensorField w;
  w.slots = {Variance::Co};
  w.value = [](const Point& p) {
    TensorValue t(2, {Variance::Co});
    t(0) = p[0] * p[1];
    t(1) = p[0] * p[0];
    return t;
  };
  const Point p = pt({1.5, -2});
  const TensorValue d = covariant_derivative(TensorValue::mixed12(2), w, p);
  CHECK(d(0, 0) == doctest::Approx(-2.0));
  CHECK(d(0, 1) == doctest::Approx(1.5));
  CHECK(d(1, 0) == doctest::Approx(3.0));
  CHECK(d(1, 1) == doctest::Approx(0.0));

  // The differential of cos θ on the sphere: ∇(dV) equals the covariant Hessian.
  const Metric s = round_sphere(1.0);
  TensorField dv;
  dv.slots = {Variance::Co};
  dv.value = [](const Point& q) {
    TensorValue t(2, {Variance::Co});
    t(0) = -std::sin(q[0]);
    return t;
  };
  const Point q = pt({0.9, 0.1});
  const TensorValue nd = covariant_derivative(christoffel(s, q), dv, q);
  CHECK((nd.as_matrix() + std::cos(q[0]) * s.at(q)).cwiseAbs().maxCoeff() < 1e-8);

  Chart tight;
  tight.dim = 2;
  tight.singular = {{0, 0.9}};
  CHECK_THROWS_AS(covariant_derivative(christoffel(s, q), dv, pt({0.9 + 1.005e-3, 0.1}), &tight), DomainError);
}

TEST_CASE("singular metrics are rejected") {
  const Metric g = metric_from({{"x1^2", "0"}, {"0", "1"}});
  CHECK_THROWS_AS(g.at(pt({0, 1})), SingularMetricError);
  CHECK_THROWS_AS(local_geometry(g, pt({1e-9, 1})), SingularMetricError);
  CHECK_THROWS_AS(metric_from({{"1", "x1"}, {"x2", "1"}}), Error);
}
