#include <cstdlib>
#include <fstream>
#include <set>

#include "doctest.h"
#include "dualgeo/theorems.hpp"

using namespace dualgeo;
using nlohmann::json;

namespace {

const Claim& claim(const SuiteResult& s, const std::string& id) {
  for (const auto& c : s.claims)
    if (c.id == id) return c;
  FAIL("no claim " << id);
  throw std::logic_error("unreachable");
}

void check_all_pass(const SuiteResult& s) {
  for (const auto& c : s.claims) {
    CAPTURE(c.id);
    CAPTURE(c.max_residual);
    CHECK(c.pass());
  }
  CHECK(s.pass());
}

// Every suite must contain a broken input that is expected to fail and does.
void check_has_negative_control(const SuiteResult& s) {
  bool found = false;
  for (const auto& c : s.claims) found = found || (!c.expected_to_hold && !c.holds);
  CHECK(found);
}

// The parts of a report that must not drift: keys, claim ids and anchors.
json skeleton(const json& report) {
  json out;
  for (const auto& [k, v] : report.items()) out["keys"].push_back(k);
  for (const auto& [k, v] : report["grid"].items()) out["grid_keys"].push_back(k);
  for (const auto& [k, v] : report["options"].items()) out["option_keys"].push_back(k);
  for (const auto& s : report["suites"]) {
    json claims = json::array();
    std::set<std::string> keys;
    for (const auto& c : s["claims"]) {
      claims.push_back({c["id"], c["anchor"]});
      for (const auto& [k, v] : c.items()) keys.insert(k);
    }
    out["suites"][s["suite"].get<std::string>()] = {{"claims", claims}, {"claim_keys", keys}};
  }
  return out;
}

json golden_path_skeletons(const RunOptions& o) {
  json all;
  for (const std::string name : {"ho2", "sw2", "sw2-weak", "sw2-strong-synthetic"}) {
    const Fixture f = builtin(name);
    std::vector<SuiteResult> suites;
    for (const auto& s : applicable_suites(f)) suites.push_back(run_suite(s, f, o));
    all[name] = skeleton(to_json(make_report(f, o, std::move(suites))));
  }
  return all;
}

}  // namespace

TEST_CASE("theorem 1 on sw2") {
  const SuiteResult s = verify_theorem1(builtin("sw2"));
  check_all_pass(s);
  check_has_negative_control(s);
  for (const std::string sign : {"plus", "minus"}) {
    CHECK(claim(s, "T1.a." + sign).max_residual < 1e-9);
    CHECK(claim(s, "T1.b." + sign).max_residual < 1e-6);
    CHECK(claim(s, "T1.c." + sign).max_residual < 1e-9);
    CHECK(claim(s, "T1.d." + sign).max_residual > 1e-3);
  }
  CHECK(claim(s, "T1.b.plus").details["pairs"].size() == 10);
}

TEST_CASE("theorem 1 on the harmonic oscillator has zero residuals") {
  const SuiteResult s = verify_theorem1(builtin("ho2"));
  check_all_pass(s);
  CHECK(claim(s, "T1.a.plus").max_residual < 1e-14);
  CHECK(claim(s, "T1.c.plus").max_residual < 1e-14);
}

TEST_CASE("theorem 2 on the weak fixture") {
  const SuiteResult s = verify_theorem2(builtin("sw2-weak"));
  check_all_pass(s);
  check_has_negative_control(s);
  CHECK(claim(s, "T2.a").max_residual < 1e-8);
  CHECK(claim(s, "T2.b.plus").max_residual < 1e-10);
  CHECK(claim(s, "T2.c.plus").max_residual < 1e-9);
  CHECK(claim(s, "T2.e.plus").holds);
  CHECK(claim(s, "T2.g").holds);
}

TEST_CASE("theorem 2 on the strong fixture expects semi-compatibility to fail") {
  const SuiteResult s = verify_theorem2(builtin("sw2-strong-synthetic"));
  check_all_pass(s);
  CHECK_FALSE(claim(s, "T2.e.plus").holds);
  CHECK(claim(s, "T2.e.plus").max_residual > 1e-2);
  CHECK(claim(s, "T2.f.plus").holds);
  CHECK(claim(s, "T2.c.minus").holds);
}

TEST_CASE("weyl symmetry") {
  const SuiteResult sw = verify_weyl_symmetry(builtin("sw2"));
  check_all_pass(sw);
  check_has_negative_control(sw);
  CHECK(claim(sw, "W.a.plus").max_residual < 1e-8);
  CHECK(claim(sw, "W.lc").max_residual > 1e-3);
  const SuiteResult ho = verify_weyl_symmetry(builtin("ho2"));
  CHECK(claim(ho, "W.a.plus").max_residual == 0.0);
}

TEST_CASE("digamma remark on the 3-sphere") {
  const SuiteResult s = verify_remark_digamma(builtin("sphere3-trivial"));
  check_all_pass(s);
  check_has_negative_control(s);
  CHECK(claim(s, "R.diff.zeta-x1.plus").max_residual < 1e-9);
  CHECK(claim(s, "R.equal.zeta-const").max_residual < 1e-12);
  CHECK_FALSE(claim(s, "R.equal.zeta-x1").holds);
}

TEST_CASE("suites refuse fixtures they do not apply to") {
  CHECK_THROWS_AS(verify_theorem1(builtin("sw2-weak")), PreconditionError);
  CHECK_THROWS_AS(verify_theorem2(builtin("sw2")), PreconditionError);
  CHECK_THROWS_AS(verify_remark_digamma(builtin("sw2")), PreconditionError);
  CHECK_THROWS_AS(run_suite("theorem3", builtin("sw2"), {}), Error);
  CHECK(applicable_suites(builtin("sw2")) == std::vector<std::string>{"theorem1", "weyl"});
  CHECK(applicable_suites(builtin("sw2-weak")) == std::vector<std::string>{"theorem2"});
  CHECK(applicable_suites(builtin("sphere3-trivial")) == std::vector<std::string>{"theorem1", "weyl", "digamma"});
}

TEST_CASE("a failing claim fails the suite") {
  RunOptions o;
  o.trajectory_tol = 1e-30;
  const SuiteResult s = verify_theorem1(builtin("sw2"), o);
  CHECK_FALSE(claim(s, "T1.b.minus").pass());
  CHECK_FALSE(s.pass());
}

TEST_CASE("reports are byte-identical across runs") {
  const Fixture f = builtin("sw2-weak");
  RunOptions o;
  auto once = [&] { return to_json(make_report(f, o, {verify_theorem2(f, o)})).dump(2); };
  CHECK(once() == once());
}

TEST_CASE("report layout matches the golden skeleton") {
  RunOptions o;
  o.trajectories = 2;
  o.steps = 200;
  const json got = golden_path_skeletons(o);
  const std::string path = std::string(DUALGEO_GOLDEN_DIR) + "/report_skeleton.json";
  if (const char* upd = std::getenv("DUALGEO_UPDATE_GOLDEN"); upd && std::string(upd) == "1") {
    std::ofstream(path) << got.dump(2) << '\n';
  }
  std::ifstream in(path);
  REQUIRE(in.good());
  const json want = json::parse(in);
  CHECK(got == want);
  if (got != want) MESSAGE(json::diff(want, got).dump(2));
}

TEST_CASE("report JSON carries provenance") {
  const Fixture f = builtin("sw2");
  RunOptions o;
  o.seed = 7;
  const json j = to_json(make_report(f, o, {verify_weyl_symmetry(f, o)}, {{"theorem", "weyl"}}));
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["seed"] == 7);
  CHECK(j["inputs"]["theorem"] == "weyl");
  CHECK(j["grid"]["points"] == 25);
  CHECK(j["verdict"] == "pass");
  CHECK(j["environment"]["n_placement"] == "output-last");
}
