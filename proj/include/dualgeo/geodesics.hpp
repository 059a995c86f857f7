#pragma once

// Dual-geodesics: curves with ∇_γ̇ γ̇^♭ = q(τ) γ̇^♭, integrated in the
// variables (x, p = γ̇^♭) as
//     ẋ^i = g^{ij} p_j,   ṗ_i = Γ'^k_{ji} ẋ^j p_k + q(τ) p_i
// with a fixed-step classical Runge–Kutta scheme.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualgeo/connections.hpp"

namespace dualgeo {

struct DualGeodesicState {
  double tau = 0.0;
  Vec x;
  Vec p;  // covelocity γ̇^♭
  Vec v;  // velocity γ̇ = g^{-1}p, used for Hermite interpolation between samples
};

enum class HaltReason { None, DomainExit, NonFinite, SingularMetric, Evaluation, UnderResolved };

std::string to_string(HaltReason r);

struct Trajectory {
  std::vector<DualGeodesicState> states;
  std::string method = "rk4";
  double h = 0.0;
  std::string connection;
  bool halted = false;
  HaltReason reason = HaltReason::None;
  std::string halt_detail;

  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().x.size()); }
  std::vector<Point> positions() const;
};

using ParameterFn = std::function<double(double)>;

struct IntegrationOptions {
  int steps = 1000;
  double h = 1e-3;
  ParameterFn q;                  // empty: affine parametrization
  const Chart* domain = nullptr;  // halt when a stage leaves its box or nears a singular locus
  /// Halt once one step moves x farther than this: the parametrization has sped up
  /// past what the fixed step resolves. Infinite by default.
  double max_step_length = std::numeric_limits<double>::infinity();
};

/// Throws DomainError if x0 is outside the domain and Error if w0 = 0.
/// Problems after the first step halt the trajectory instead (last valid state kept).
Trajectory integrate_dual_geodesic(const AffineConnection& c, const Point& x0, const Vec& w0,
                                   const IntegrationOptions& opts);

struct InitialCondition {
  Point x0;
  Vec w0;
};

/// Independent trajectories, integrated in parallel, returned in input order.
std::vector<Trajectory> integrate_batch(const AffineConnection& c, const std::vector<InitialCondition>& ics,
                                        const IntegrationOptions& opts);
std::vector<Trajectory> integrate_batch_serial(const AffineConnection& c,
                                               const std::vector<InitialCondition>& ics,
                                               const IntegrationOptions& opts);

/// n seeded initial conditions: x0 uniform in the box (resampled until the
/// chart contains it), w0 uniform on the Euclidean unit circle/sphere.
std::vector<InitialCondition> random_initial_conditions(const Chart& chart, int count, unsigned long seed);

inline constexpr double kCoincidenceTol = 1e-6;

struct CoincidenceResult {
  bool coincide = false;
  double a_to_b = 0.0;  // max over samples of a in the overlap of the distance to polyline b
  double b_to_a = 0.0;
  double tolerance = 0.0;
  double overlap_a = 0.0;  // arc length of a inside the overlap
  double overlap_b = 0.0;
};

/// Discrete one-sided Hausdorff distances on the overlapping arc. The overlap
/// on each curve runs between the projections of the other curve's endpoints.
/// Samples of one curve are measured against the other curve's cubic Hermite
/// interpolant (positions and velocities), whose error is O(Δs⁴) instead of the
/// O(Δs²) chord error of a polyline.
CoincidenceResult curves_coincide(const Trajectory& a, const Trajectory& b, double tol = kCoincidenceTol);

/// Integrates with q and with q ≡ 0 from the same data and compares the curves.
CoincidenceResult reparametrization_check(const AffineConnection& c, const Point& x0, const Vec& w0,
                                          const ParameterFn& q, IntegrationOptions opts,
                                          double tol = kCoincidenceTol);

/// `tau,x1..xn,p1..pn` with 17 significant digits.
std::string trajectory_csv(const Trajectory& t);
nlohmann::json trajectory_json(const Trajectory& t);

}  // namespace dualgeo
