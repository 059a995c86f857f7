#pragma once

// Example systems: built-in registry plus JSON configs.
//
// Built-ins are stored as the same JSON documents a user would write, so a
// config that copies one verbatim behaves identically.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualgeo/geometry.hpp"
#include "dualgeo/grid.hpp"
#include "dualgeo/structure.hpp"

namespace dualgeo {

/// Value a fixture promises at a point: tensor name, component multi-index (0-based), value.
struct SpotCheck {
  Point point;
  std::string tensor;
  std::vector<int> component;
  double value = 0.0;
  double tol = 1e-9;
};

struct Fixture {
  std::string name;
  std::string description;
  Metric metric;
  Chart chart;
  FamilyKind kind = FamilyKind::Nondegenerate;
  std::vector<Expression> potentials;
  /// Prescribed D̂^k_{ij} for tensor-level fixtures (empty otherwise).
  std::vector<std::vector<std::vector<Expression>>> d_hat;
  std::vector<KillingEntry> killing;
  std::optional<Expression> zeta;
  std::optional<Classification> expected_classification;
  std::vector<SpotCheck> expected;
  /// The config document this fixture was built from.
  nlohmann::json source;

  int dim() const { return metric.dim(); }
  StructureModel model() const;
  GridSpec grid(int per_axis) const;
  /// Grid points inside the chart (points too close to a singular locus are dropped).
  std::vector<Point> sample_points(int per_axis) const;
  /// Sum of the basis potentials; the potential whose integrals the W entries describe.
  Expression total_potential() const;
};

/// Malformed config: bad JSON, missing field, or an expression that does not parse.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ValidationFailure {
  std::string check;
  Point point;
  double residual = 0.0;
  std::string detail;
};

/// Fixture whose validation checks did not pass.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& fixture, std::vector<ValidationFailure> failures);
  const std::vector<ValidationFailure>& failures() const { return failures_; }

 private:
  std::vector<ValidationFailure> failures_;
};

struct ValidationOptions {
  int per_axis = 5;
  double killing_tol = 1e-8;
  double bertrand_darboux_tol = 1e-8;
  double poisson_tol = 1e-7;
  int momenta_per_point = 3;
  unsigned long seed = 1;
};

std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
/// Throws Error for an unknown name.
Fixture builtin(const std::string& name);

/// Builds a fixture from a config document without running validation.
Fixture fixture_from_json(const nlohmann::json& doc);
/// Reads, builds and validates a config file; throws ConfigError or ValidationError.
Fixture load_fixture(const std::string& path, const ValidationOptions& opts = {});
/// Built-in name or config path.
Fixture resolve_fixture(const std::string& source, const ValidationOptions& opts = {});

/// All validation checks; never throws for numerical failures, which are returned instead.
std::vector<ValidationFailure> validate(const Fixture& f, const ValidationOptions& opts = {});

/// Component of a named tensor in a PointStructure (T_hat, t, tau, S, B_hat, D_hat, s_hat, d, N, beta).
double structure_component(const PointStructure& s, const std::string& tensor, const std::vector<int>& index);

nlohmann::json validation_json(const std::vector<ValidationFailure>& failures);

}  // namespace dualgeo
