#pragma once

// Torsion-free affine connections on a chart and the equivalence tests
// between them.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualgeo/conventions.hpp"
#include "dualgeo/geometry.hpp"

namespace dualgeo {

enum class ConnectionTag {
  LeviCivita,
  PlusT,
  MinusT,
  PlusB,
  MinusB,
  PlusD,
  MinusD,
  PlusDigamma,
  MinusDigamma,
  PlusDagger,
  MinusDagger,
  Custom
};

/// Short command-line name: LC, +T, -T, +B, -B, +D, -D, +F, -F, +dagger, -dagger, custom.
std::string to_string(ConnectionTag t);
/// Inverse of to_string; throws Error on an unknown name.
ConnectionTag parse_connection_tag(const std::string& s);

using CoefficientFn = std::function<TensorValue(const Point&)>;
using CovectorFn = std::function<Vec(const Point&)>;

class AffineConnection {
 public:
  AffineConnection() = default;
  AffineConnection(Metric g, CoefficientFn coefficients, ConnectionTag tag, std::string label = {});

  static AffineConnection levi_civita(const Metric& g);

  const Metric& metric() const { return g_; }
  int dim() const { return g_.dim(); }
  /// Γ'^k_{ij} at p.
  TensorValue coefficients(const Point& p) const { return coeffs_(p); }
  ConnectionTag tag() const { return tag_; }
  const std::string& label() const { return label_; }

 private:
  Metric g_;
  CoefficientFn coeffs_;
  ConnectionTag tag_ = ConnectionTag::Custom;
  std::string label_;
};

/// ∇^{±A} = ∇ ∓ A over the Levi-Civita connection of g. A must be symmetric
/// in its covariant pair; evaluation throws Error where it is not.
AffineConnection from_difference(const Metric& g, conv::Sign sign, CoefficientFn a, ConnectionTag tag,
                                 std::string label = {});

/// base + α^♯⊗g, i.e. Γ'^k_{ij} = Γ^k_{ij} + α^k g_{ij} for the covector field α.
AffineConnection shift_by_covector(const AffineConnection& base, CovectorFn alpha, ConnectionTag tag,
                                   std::string label = {});

/// base + P with an arbitrary (possibly non-symmetric) P; for negative controls.
AffineConnection add_tensor(const AffineConnection& base, CoefficientFn p, std::string label);

/// Γa − Γb at p; throws Error on dimension mismatch.
TensorValue difference_tensor(const AffineConnection& a, const AffineConnection& b, const Point& p);

/// max |Γ^k_{ij} − Γ^k_{ji}| at p.
double torsion(const AffineConnection& c, const Point& p);

inline constexpr double kTorsionTol = 1e-10;

struct DualProjectiveResult {
  bool holds = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  /// α_i (lowered) at each sample point; empty when the verdict is false.
  std::vector<Vec> alpha;
};

/// Whether a = b + α^♯⊗g for some 1-form α on the sample points.
/// Throws Error when either connection has torsion.
DualProjectiveResult dual_projective_test(const AffineConnection& a, const AffineConnection& b,
                                          const std::vector<Point>& points, double tol);

/// Which way the right-hand side of the semi-compatibility identity is read.
///   Definition:    A_{ijk} = β_j h_{ik} − β_i h_{jk}
///   BetaCondition: A_{ijk} = β_i h_{jk} − β_j h_{ik}
/// with A_{ijk} = (∇'_i h)_{jk} − (∇'_j h)_{ik}.
enum class SemiForm { Definition, BetaCondition };

struct SemiCompatibilityResult {
  bool holds = false;
  /// Residual against the supplied β, or against the extracted α when none was given.
  double max_residual = 0.0;
  double tolerance = 0.0;
  /// Residual of the best-fitting α (always reported).
  double max_free_residual = 0.0;
  /// max |A|: the compatibility residual.
  double max_antisymmetrized = 0.0;
  /// Extracted α_j = h^{ik} A_{ijk} / (n − 1) per point (Definition orientation).
  std::vector<Vec> alpha;
  /// max |α − β| (Definition) or |α + β| (BetaCondition) when β was supplied.
  std::optional<double> max_beta_gap;
};

/// A_{ijk} = (∇'_i h)_{jk} − (∇'_j h)_{ik} with exact metric derivatives.
TensorValue antisymmetrized_derivative(const AffineConnection& c, const Metric& h, const Point& p);

SemiCompatibilityResult semi_compatibility_test(const AffineConnection& c, const Metric& h,
                                                const std::vector<Point>& points, double tol,
                                                const CovectorFn* expected_beta = nullptr,
                                                SemiForm form = SemiForm::Definition);

/// Partials of the coefficients by central differences: dgamma(k,i,j,l) = ∂_l Γ'^k_{ij}.
TensorValue coefficient_partials(const AffineConnection& c, const Point& p, const Chart* domain);

/// max |Ric_{ij} − Ric_{ji}| of the connection over the sample points.
double connection_ricci_asymmetry(const AffineConnection& c, const std::vector<Point>& points,
                                  const Chart* domain);

}  // namespace dualgeo
