#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dualgeo/fixtures.hpp"
#include "dualgeo/grid.hpp"
#include "dualgeo/structure.hpp"
#include "oracles.hpp"

using namespace dualgeo;

namespace {

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

std::vector<Expression> parse_all(const std::vector<std::string>& src, int n) {
  ParseContext c;
  c.dimension = n;
  std::vector<Expression> out;
  for (const auto& s : src) out.push_back(parse(s, c));
  return out;
}

}  // namespace

TEST_CASE("recovered T on sw2 matches the brute-force oracle on 25 points") {
  const Fixture f = builtin("sw2");
  const auto pts = grid_points({pt(0.5, 0.5), pt(3, 3), 5});
  REQUIRE(pts.size() == 25);
  double worst = 0.0;
  for (const Point& p : pts) {
    const TensorRecovery r = recover_structure_tensor(f.metric, f.potentials, p);
    const auto ref = oracle::sw_t_hat(p);
    REQUIRE(ref.size() == 8);
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(r.tensor.data()[i] - ref[i]));
    CHECK(r.residual < 1e-12);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("sw2 spot values at (1,2)") {
  const PointStructure s = builtin("sw2").model().at(pt(1, 2));
  CHECK(s.t_hat(0, 0, 0) == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(s.t_hat(1, 0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s.dec.t[0] == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(s.dec.t[1] == doctest::Approx(-0.375).epsilon(1e-12));
  CHECK(s.dec.reconstruction_defect < 1e-12);
}

TEST_CASE("harmonic oscillator has vanishing structure tensor") {
  const Fixture f = builtin("ho2");
  for (const Point& p : f.sample_points(4)) CHECK(f.model().t_hat(p).max_abs() < 1e-12);
}

TEST_CASE("recovery is invariant under invertible recombination of the family") {
  const Fixture f = builtin("sw2");
  const auto mixed = parse_all({"x1^2 + x2^2 + 2/x1^2", "1/x1^2 - 1/x2^2 + 1", "3/x2^2 - x1^2 - x2^2", "7"}, 2);
  for (const Point& p : f.sample_points(4)) {
    const auto a = recover_structure_tensor(f.metric, f.potentials, p).tensor;
    const auto b = recover_structure_tensor(f.metric, mixed, p).tensor;
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
}

TEST_CASE("recovery rejects a family that is too small") {
  const Fixture f = builtin("sw2");
  const auto small = parse_all({"1/x1^2", "1"}, 2);
  CHECK_THROWS_AS(recover_structure_tensor(f.metric, small, pt(1, 2)), RecoveryError);
}

TEST_CASE("sw2-weak: s and the weak classification") {
  const Fixture f = builtin("sw2-weak");
  const auto pts = f.sample_points(5);
  for (const Point& p : pts) {
    const PointStructure s = f.model().at(p);
    CHECK(s.s_up[0] == doctest::Approx(-3 / p[0]).epsilon(1e-10));
    CHECK(s.s_up[1] == doctest::Approx(-3 / p[1]).epsilon(1e-10));
    CHECK(s.beta.cwiseAbs().maxCoeff() < 1e-10);
  }
  const ClassifyResult r = classify(f.model(), pts);
  CHECK(r.verdict == Classification::Weak);
  CHECK(r.max_n < 1e-8);
}

TEST_CASE("synthetic fixture classifies strong") {
  const Fixture f = builtin("sw2-strong-synthetic");
  const ClassifyResult r = classify(f.model(), f.sample_points(5));
  CHECK(r.verdict == Classification::Strong);
  CHECK(r.max_n > 1e-2);
  CHECK(r.t_hat.empty());
}

TEST_CASE("weak/strong calibration holds under every placement of the output slot") {
  using conv::NPlacement;
  const Fixture weak = builtin("sw2-weak"), strong = builtin("sw2-strong-synthetic");
  for (NPlacement pl : {NPlacement::OutputLast, NPlacement::OutputFirst, NPlacement::OutputMiddle}) {
    CAPTURE(conv::to_string(pl));
    double n_weak = 0.0, n_strong = 0.0;
    for (const Point& p : weak.sample_points(5)) {
      const PointStructure w = weak.model().at(p);
      n_weak = std::max(n_weak, n_tensor(w.d_hat, w.g, w.dd, pl).max_abs());
      const PointStructure s = strong.model().at(p);
      n_strong = std::max(n_strong, n_tensor(s.d_hat, s.g, s.dd, pl).max_abs());
    }
    CHECK(n_weak < 1e-8);
    CHECK(n_strong > 1e-2);
  }
}

TEST_CASE("extracted T on sw2-weak equals the T recovered from the full family") {
  const Fixture weak = builtin("sw2-weak"), full = builtin("sw2");
  const auto pts = weak.sample_points(5);
  const ClassifyResult r = classify(weak.model(), pts);
  REQUIRE(r.t_hat.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(max_abs_diff(r.t_hat[i], full.model().t_hat(pts[i])) < 1e-10);
}

TEST_CASE("B is trace-adjusted T") {
  const PointStructure s = builtin("sw2").model().at(pt(1.3, 0.8));
  const int n = 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double expect = s.dec.flat(i, j, k) + (n + 2.0) / n * s.g(i, j) * s.dec.t[k];
        CHECK(s.b.flat(i, j, k) == doctest::Approx(expect).epsilon(1e-12));
      }
}

TEST_CASE("Killing and Bertrand-Darboux checks on sw2") {
  const Fixture f = builtin("sw2");
  REQUIRE(!f.killing.empty());
  const Expression v = f.total_potential();
  for (const Point& p : f.sample_points(4)) {
    for (const auto& k : f.killing) {
      CHECK(killing_residual(f.metric, k, p) < 1e-10);
      CHECK(bertrand_darboux_residual(f.metric, k, v, p) < 1e-8);
    }
  }
  // x1 x2 does not separate in Cartesian coordinates.
  ParseContext c;
  c.dimension = 2;
  const Expression bad = parse("x1*x2", c);
  const auto k = std::find_if(f.killing.begin(), f.killing.end(), [](const auto& e) { return e.name == "dx1dx1"; });
  REQUIRE(k != f.killing.end());
  CHECK(bertrand_darboux_residual(f.metric, *k, bad, pt(1, 2)) > 1e-3);
}

TEST_CASE("structure JSON records variance and components") {
  const auto j = tensor_json(builtin("sw2").model().t_hat(pt(1, 2)));
  CHECK(j["variance"] == "^__");
  CHECK(j["components"].size() == 8);
  CHECK(j["components"][0].get<double>() == doctest::Approx(-1.5));
}
