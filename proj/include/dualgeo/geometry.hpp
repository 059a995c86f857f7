#pragma once

// Metric-dependent calculus on a single coordinate chart.
//
// Index conventions used throughout the library:
//   Christoffel symbols  gamma(k, i, j) = Γ^k_{ij},  ∇_{∂i} ∂j = Γ^k_{ij} ∂k
//   Riemann tensor       R(l, i, j, k) = R^l_{ijk},  R(∂i, ∂j) ∂k = R^l_{ijk} ∂l
//   Ricci tensor         Ric_{jk} = R^i_{ijk}
//   Covariant derivative (∇T)(..., l): the derivative slot is appended last.

#include <functional>
#include <optional>
#include <vector>

#include "dualgeo/expr.hpp"
#include "dualgeo/tensor.hpp"
#include "dualgeo/types.hpp"

namespace dualgeo {

/// Hyperplane x_axis = value on which the fixture's data blow up.
struct SingularLocus {
  int axis = 0;
  double value = 0.0;
};

/// Coordinate patch: a sampling box plus the singular loci to keep away from.
struct Chart {
  int dim = 2;
  Vec lo;
  Vec hi;
  std::vector<SingularLocus> singular;
  double singular_margin = 1e-3;

  bool in_box(const Point& p) const;
  /// Finite and farther than singular_margin from every singular locus.
  bool contains(const Point& p) const;
  double distance_to_singular(const Point& p) const;
};

/// Forward-difference-free step heuristic: cbrt(eps) * (1 + |x|).
double fd_step(double x);

class Metric {
 public:
  Metric() = default;
  /// Throws Error if g_ij and g_ji are not the same expression tree.
  explicit Metric(std::vector<std::vector<Expression>> components, double condition_bound = 1e8);

  static Metric euclidean(int dim);

  int dim() const { return dim_; }
  const Expression& component(int i, int j) const;
  double condition_bound() const { return condition_bound_; }

  /// g_ij at p; throws SingularMetricError when ill-conditioned.
  Mat at(const Point& p) const;

 private:
  int dim_ = 0;
  std::vector<std::vector<Expression>> g_;
  double condition_bound_ = 1e8;
};

/// g, its inverse, and exact first and second partials at one point, together
/// with the Levi-Civita connection and its first partials.
struct LocalGeometry {
  int n = 0;
  Point p;
  Mat g;
  Mat g_inv;
  double sqrt_det = 0.0;
  std::vector<Mat> dg;                // dg[l](i, j) = ∂_l g_ij
  std::vector<std::vector<Mat>> ddg;  // ddg[l][m](i, j) = ∂_l ∂_m g_ij
  TensorValue gamma;                  // Γ^k_{ij}
  TensorValue dgamma;                 // dgamma(k, i, j, l) = ∂_l Γ^k_{ij}
};

LocalGeometry local_geometry(const Metric& g, const Point& p);

TensorValue christoffel(const Metric& g, const Point& p);

/// R^l_{ijk} from connection coefficients and their partials (dgamma(k,i,j,l) = ∂_l Γ^k_{ij}).
TensorValue riemann_from(const TensorValue& gamma, const TensorValue& dgamma);
/// Ric_{jk} = R^i_{ijk}; not symmetric for a general affine connection.
Mat ricci_from(const TensorValue& riemann);

TensorValue riemann(const Metric& g, const Point& p);
Mat ricci(const Metric& g, const Point& p);
/// Max |R^l_{ijk} + R^l_{jki} + R^l_{kij}|.
double first_bianchi_defect(const TensorValue& riemann);

/// (∇²V)_ij = ∂i∂jV − Γ^k_ij ∂kV.
Mat hessian(const LocalGeometry& geo, const Jet2<double>& v);
Mat hessian(const Metric& g, const Expression& v, const Point& p);
/// tr_g of the covariant Hessian.
double laplacian(const Metric& g, const Expression& v, const Point& p);
/// (1/√det g) ∂i(√det g g^{ij} ∂jV), computed without Christoffel symbols.
double laplacian_divergence(const Metric& g, const Expression& v, const Point& p);

/// Gradient covector of a jet as a vector.
Vec gradient(const Jet2<double>& v);

/// A tensor field on the chart. If `partials` is set it returns exact ∂_l of
/// the components (one TensorValue per l); otherwise central differences are used.
struct TensorField {
  std::vector<Variance> slots;
  std::function<TensorValue(const Point&)> value;
  std::function<std::vector<TensorValue>(const Point&)> partials;
};

TensorField metric_field(const Metric& g);

/// Partials ∂_l of the field components at p (exact or central differences).
/// Throws DomainError if a stencil point leaves `domain`.
std::vector<TensorValue> field_partials(const TensorField& f, const Point& p, const Chart* domain);

/// ∇T with respect to connection coefficients `gamma` at p; derivative slot appended last.
TensorValue covariant_derivative(const TensorValue& gamma, const TensorField& field, const Point& p,
                                 const Chart* domain = nullptr);

}  // namespace dualgeo
