#pragma once

// Verification suites. Each suite evaluates a list of claims on a fixture's
// sample grid and returns residuals, tolerances and verdicts. A claim passes
// when its outcome matches what is expected of it, so negative controls pass
// by failing.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualgeo/connections.hpp"
#include "dualgeo/fixtures.hpp"
#include "dualgeo/geodesics.hpp"

namespace dualgeo {

/// The connection a tag names, built from the fixture's structure tensors.
/// ±F needs ζ (the fixture's unless `zeta` is given); ±D and ±dagger need a semi-degenerate fixture.
AffineConnection connection_for(const Fixture& f, ConnectionTag tag, const Expression* zeta = nullptr);

struct RunOptions {
  int per_axis = 5;
  unsigned long seed = 20240611;
  double algebraic_tol = 1e-9;
  double coefficient_tol = 1e-10;
  double classify_tol = 1e-8;
  double identity_tol = 1e-8;
  double symmetry_tol = 1e-8;
  double trajectory_tol = 1e-6;
  double uniqueness_threshold = 1e-3;
  double strong_threshold = 1e-2;
  int trajectories = 10;
  int steps = 2000;
  double h = 1e-3;
  /// Trajectories halt (flagged) once a single step moves farther than this.
  double max_step_length = 0.02;
  int perturbed_candidates = 5;
};

nlohmann::json to_json(const RunOptions& o);

/// Whether the residual must stay below the tolerance or exceed it.
enum class Bound { Below, Above };

struct Claim {
  std::string id;
  std::string anchor;
  std::string statement;
  double max_residual = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::Below;
  bool holds = false;
  bool expected_to_hold = true;
  std::string note;
  nlohmann::json details = nlohmann::json::object();

  bool pass() const { return holds == expected_to_hold; }
};

struct SuiteResult {
  std::string suite;
  std::vector<Claim> claims;
  bool pass() const;
};

/// Raised when a suite does not apply to the fixture (wrong kind, dimension, missing ζ).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

SuiteResult verify_theorem1(const Fixture& f, const RunOptions& o = {});
SuiteResult verify_theorem2(const Fixture& f, const RunOptions& o = {});
SuiteResult verify_weyl_symmetry(const Fixture& f, const RunOptions& o = {});
/// Runs on the fixture's ζ plus injected ζ = x1 and ζ = 5.
SuiteResult verify_remark_digamma(const Fixture& f, const RunOptions& o = {});

/// Suites that apply to the fixture, in the order theorem1, theorem2, weyl, digamma.
std::vector<std::string> applicable_suites(const Fixture& f);
SuiteResult run_suite(const std::string& name, const Fixture& f, const RunOptions& o);

struct Report {
  std::string fixture;
  GridSpec grid;
  int points = 0;
  RunOptions options;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<SuiteResult> suites;

  bool pass() const;
};

Report make_report(const Fixture& f, const RunOptions& o, std::vector<SuiteResult> suites,
                   nlohmann::json inputs = nlohmann::json::object());

inline constexpr const char* kReportSchema = "dualgeo-report/1";

/// Deterministic: no timestamps, keys in fixed order, claims ordered by id within a suite.
nlohmann::json to_json(const Report& r);

/// Identity residual of the β-condition at p: max over (X,Y,Z) of
/// |A_{XYZ} − (N_{YZX} − N_{XZY} + β_X g_{YZ} − β_Y g_{XZ})| with A from ∇^{+D}.
double beta_condition_residual(const Fixture& f, const Point& p);

}  // namespace dualgeo
