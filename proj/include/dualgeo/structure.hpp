#pragma once

// Structure tensors of second-order superintegrable systems: recovery from a
// potential family, the S/t decomposition, B, ŝ, D̂, the obstruction N, and
// the checks used to validate a system (Killing, Bertrand–Darboux, Poisson).

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualgeo/conventions.hpp"
#include "dualgeo/geometry.hpp"

namespace dualgeo {

enum class FamilyKind { Nondegenerate, Semidegenerate };

std::string to_string(FamilyKind k);

struct PotentialFamily {
  std::vector<Expression> potentials;
  FamilyKind kind = FamilyKind::Nondegenerate;
};

/// A Killing tensor K_{ij} (lower indices) and optionally the scalar part W of
/// the integral F = K^{ij}p_i p_j + W belonging to the sum of the family's basis potentials.
struct KillingEntry {
  std::string name;
  std::vector<std::vector<Expression>> k;
  std::optional<Expression> w;
};

class RecoveryError : public Error {
 public:
  enum class Kind { Degenerate, RankDeficient, Residual };
  RecoveryError(Kind kind, const Point& p, double residual, const std::string& what);
  Kind kind() const { return kind_; }
  const Point& point() const { return point_; }
  double residual() const { return residual_; }

 private:
  Kind kind_;
  Point point_;
  double residual_;
};

inline constexpr double kRankThreshold = 1e-10;
inline constexpr double kRecoveryResidual = 1e-8;

struct TensorRecovery {
  TensorValue tensor;     // (1,2), symmetric in the covariant pair
  double residual = 0.0;  // ‖Ax − b‖ / max(1, ‖b‖)
  int unknowns = 0;
  int equations = 0;
};

/// T̂ at p from ∇²V_a − (1/n) g ΔV_a = T̂(dV_a), with T̂ symmetric and
/// g-trace-free in its covariant pair.
TensorRecovery recover_structure_tensor(const Metric& g, const std::vector<Expression>& family, const Point& p,
                                        double residual_tol = kRecoveryResidual);

/// D̂ at p from ∇²V_a = D̂(dV_a), symmetric in its covariant pair, no trace condition.
TensorRecovery recover_d_tensor(const Metric& g, const std::vector<Expression>& family, const Point& p,
                                double residual_tol = kRecoveryResidual);

struct VectorRecovery {
  Vec value;
  double residual = 0.0;
};

/// ŝ^k at p from ΔV_a = ŝ^k ∂_k V_a.
VectorRecovery recover_s(const Metric& g, const std::vector<Expression>& family, const Point& p,
                         double residual_tol = kRecoveryResidual);

struct Decomposition {
  Vec tau;           // τ_j = T^i_{ij}
  Vec t;             // n/((n−1)(n+2)) τ
  TensorValue flat;  // T_{ijk} = g_{kl}T^l_{ij}
  TensorValue s;     // remainder T − (t_i g_{jk} + t_j g_{ik} + t_k g_{ij})
  double reconstruction_defect = 0.0;
  double s_symmetry_defect = 0.0;
  double s_trace_defect = 0.0;  // max over the three g-traces of S
};

double t_coefficient(int n);

Decomposition decompose(const TensorValue& t_hat, const Mat& g, const Mat& g_inv);

struct BTensor {
  TensorValue flat;  // B_{ijk} = T_{ijk} + ((n+2)/n) g_{ij} t_k
  TensorValue hat;   // B^l_{ij}
};

BTensor build_b(const TensorValue& t_flat, const Vec& t, const Mat& g, const Mat& g_inv);

/// t for a semi-degenerate system: n/((n−1)(n+2)) (τ(D̂) − s/n).
Vec t_from_d(const TensorValue& d_hat, const Vec& s_flat);

/// N from D̂ and 𝚍 under the given placement of D's output slot.
TensorValue n_tensor(const TensorValue& d_hat, const Mat& g, const Vec& dd,
                     conv::NPlacement placement = conv::kNPlacement);

/// Everything the library derives from a system at one point.
struct PointStructure {
  Point p;
  Mat g;
  Mat g_inv;

  // Nondegenerate data (recovered or extracted from D̂ − (1/n) g⊗ŝ).
  bool has_t_hat = false;
  TensorValue t_hat;
  double t_residual = 0.0;
  Decomposition dec;
  BTensor b;

  // Semi-degenerate data.
  bool has_d_hat = false;
  TensorValue d_hat;
  double d_residual = 0.0;
  Vec s_up;    // ŝ^k
  Vec s_flat;  // s_k
  double s_residual = 0.0;
  Vec dd;      // 𝚍 = (n+2)t − s
  TensorValue n;
  Vec beta;    // (1/n)(s − (n+2)t)
};

/// How a system provides its structure: a potential family or a prescribed D̂.
class StructureModel {
 public:
  StructureModel() = default;
  static StructureModel nondegenerate(Metric g, std::vector<Expression> family);
  static StructureModel semidegenerate(Metric g, std::vector<Expression> family);
  /// Tensor-level semi-degenerate input: D̂^k_{ij} expressions, ŝ = g^{ij}D̂^k_{ij}.
  static StructureModel prescribed_d(Metric g, std::vector<std::vector<std::vector<Expression>>> d_hat);

  const Metric& metric() const { return g_; }
  int dim() const { return g_.dim(); }
  FamilyKind kind() const { return kind_; }
  bool prescribed() const { return !d_expr_.empty(); }
  const std::vector<Expression>& family() const { return family_; }

  PointStructure at(const Point& p) const;

  /// Pointwise T̂ (recovered or extracted), B̂, D̂ and t.
  TensorValue t_hat(const Point& p) const;
  TensorValue b_hat(const Point& p) const;
  TensorValue d_hat(const Point& p) const;

 private:
  Metric g_;
  FamilyKind kind_ = FamilyKind::Nondegenerate;
  std::vector<Expression> family_;
  std::vector<std::vector<std::vector<Expression>>> d_expr_;
};

enum class Classification { Weak, Strong };

std::string to_string(Classification c);

struct ClassifyResult {
  Classification verdict = Classification::Strong;
  double max_n = 0.0;
  double tolerance = 0.0;
  /// Extracted T̂ = D̂ − (1/n) g⊗ŝ per point when WEAK.
  std::vector<TensorValue> t_hat;
};

ClassifyResult classify(const StructureModel& m, const std::vector<Point>& points, double tol = 1e-8);

struct QHatIngredients {
  TensorValue theta;  // Θ^k_{ijl}
  Mat calT;           // 𝒯^k_i
  Mat q_hat;          // q̂^k_i
  Mat q;              // q_{ij} = g_{kj} q̂^k_i
  double q_symmetry_defect = 0.0;
};

/// q̂ = tr_g(∇T̂) + 𝒯 − Ric^♯, with ∇T̂ from central differences of the field.
QHatIngredients q_hat_ingredients(const StructureModel& m, const Point& p, const Chart* domain);

struct ZetaCheck {
  Mat z;                     // 𝒵_{ij}
  Mat z_tracefree;           // 𝒵̊
  Mat hess_zeta_tracefree;   // ∇̊²ζ
  double zeta_residual = 0.0;
  TensorValue digamma_flat;  // Ϝ_{ijk}
  TensorValue digamma_hat;   // Ϝ̂^l_{ij}
};

/// 𝒵, its trace-free part against ∇̊²ζ, and Ϝ = B + (1/(2(n−2))) Π_Sym g⊗dζ. Needs n ≥ 3.
ZetaCheck z_and_digamma(const PointStructure& s, const Metric& g, const Expression& zeta);

/// Ϝ̂ alone (cheaper; used as connection coefficients).
TensorValue digamma_hat(const PointStructure& s, const Expression& zeta);

/// Max of the symmetrized ∇_{(i}K_{jk)} at p.
double killing_residual(const Metric& g, const KillingEntry& k, const Point& p);
/// Max |d(K(dV))| at p.
double bertrand_darboux_residual(const Metric& g, const KillingEntry& k, const Expression& v, const Point& p);
/// Max |{H, F}| over the supplied momenta, H = g^{ij}p_ip_j + V, F = K^{ij}p_ip_j + W.
double poisson_residual(const Metric& g, const Expression& v, const KillingEntry& k, const Point& p,
                        const std::vector<Vec>& momenta);

/// {"variance": "^__", "components": [...]} in row-major slot order.
nlohmann::json tensor_json(const TensorValue& t);
nlohmann::json to_json(const PointStructure& s);

}  // namespace dualgeo
