#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dualgeo/fixtures.hpp"
#include "dualgeo/structure.hpp"

using namespace dualgeo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "dualgeo_test_fixtures";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p.string();
}

bool has_check(const std::vector<ValidationFailure>& fs, const std::string& prefix) {
  return std::any_of(fs.begin(), fs.end(), [&](const auto& f) { return f.check.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("every built-in passes its own validation") {
  const auto names = builtin_names();
  CHECK(names.size() == 5);
  for (const auto& name : names) {
    CAPTURE(name);
    const Fixture f = builtin(name);
    CHECK(f.name == name);
    const auto failures = validate(f);
    for (const auto& x : failures) MESSAGE(x.check << " at " << format_point(x.point) << ": " << x.detail);
    CHECK(failures.empty());
  }
}

TEST_CASE("unknown built-in names throw") {
  CHECK_FALSE(is_builtin("nosuch"));
  CHECK_THROWS_AS(builtin("nosuch"), Error);
  CHECK_THROWS_AS(resolve_fixture("nosuch"), Error);
}

TEST_CASE("a verbatim config copy behaves like the built-in") {
  const Fixture ref = builtin("sw2");
  const std::string path = write_temp("sw2-copy.json", ref.source.dump(2));
  const Fixture copy = load_fixture(path);
  for (const Point& p : ref.sample_points(5)) {
    CHECK(max_abs_diff(copy.model().t_hat(p), ref.model().t_hat(p)) == 0.0);
    CHECK(max_abs_diff(copy.model().b_hat(p), ref.model().b_hat(p)) == 0.0);
  }
  CHECK(copy.sample_points(5) == ref.sample_points(5));
}

TEST_CASE("a typo in a potential shows up as a recovery residual failure") {
  json doc = builtin("sw2").source;
  doc["potentials"][1] = "1/x1";
  const std::string path = write_temp("sw2-typo.json", doc.dump());
  try {
    (void)load_fixture(path);
    FAIL("expected a validation failure");
  } catch (const ValidationError& e) {
    REQUIRE(has_check(e.failures(), "recovery"));
    const auto it = std::find_if(e.failures().begin(), e.failures().end(),
                                 [](const auto& f) { return f.check == "recovery"; });
    CHECK(it->residual > 1e-3);
    CHECK(it->point.size() == 2);
  }
}

TEST_CASE("a wrong expected value is reported, not thrown") {
  json doc = builtin("sw2").source;
  doc["expected"][0]["value"] = -1.4;
  const auto failures = validate(fixture_from_json(doc));
  REQUIRE(failures.size() == 1);
  CHECK(failures[0].check == "expected:T_hat");
  CHECK(failures[0].residual == doctest::Approx(0.1));
}

TEST_CASE("structurally invalid configs are rejected") {
  const json base = builtin("sw2").source;

  SUBCASE("non-symmetric metric") {
    json doc = base;
    doc["metric"] = {{"1", "x1"}, {"0", "1"}};
    CHECK_THROWS_AS(fixture_from_json(doc), ConfigError);
  }
  SUBCASE("missing field") {
    json doc = base;
    doc.erase("metric");
    CHECK_THROWS_AS(fixture_from_json(doc), ConfigError);
  }
  SUBCASE("bad expression") {
    json doc = base;
    doc["potentials"][0] = "x1^^2";
    CHECK_THROWS_AS(fixture_from_json(doc), ConfigError);
  }
  SUBCASE("wrong family size") {
    json doc = base;
    doc["potentials"].erase(3);
    CHECK_THROWS_AS(fixture_from_json(doc), ConfigError);
  }
  SUBCASE("empty domain") {
    json doc = base;
    doc["domain"][0] = {3, 0.5};
    CHECK_THROWS_AS(fixture_from_json(doc), ConfigError);
  }
  SUBCASE("not JSON") {
    CHECK_THROWS_AS(load_fixture(write_temp("broken.json", "{\"dimension\": 2,")), ConfigError);
  }
}

TEST_CASE("sample points keep away from the singular loci") {
  json doc = builtin("sw2").source;
  doc["domain"] = {{-1, 1}, {0.5, 3}};
  const Fixture f = fixture_from_json(doc);
  const auto pts = f.sample_points(5);
  CHECK(pts.size() == 20);
  for (const Point& p : pts) CHECK(std::abs(p[0]) > 1e-3);
}

TEST_CASE("structure components by name") {
  const Fixture f = builtin("sw2-weak");
  Point p(2);
  p << 1, 2;
  const PointStructure s = f.model().at(p);
  CHECK(structure_component(s, "s_hat", {0}) == doctest::Approx(-3.0));
  CHECK(structure_component(s, "s_hat", {1}) == doctest::Approx(-1.5));
  CHECK_THROWS_AS(structure_component(s, "s_hat", {2}), Error);
  CHECK_THROWS_AS(structure_component(s, "nonsense", {0}), Error);
}
