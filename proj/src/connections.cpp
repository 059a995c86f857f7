#include "dualgeo/connections.hpp"

#include <cmath>
#include <utility>

#include "dualgeo/grid.hpp"

namespace dualgeo {

namespace {

struct TagName {
  ConnectionTag tag;
  const char* name;
};

constexpr TagName kTagNames[] = {
    {ConnectionTag::LeviCivita, "LC"},     {ConnectionTag::PlusT, "+T"},
    {ConnectionTag::MinusT, "-T"},         {ConnectionTag::PlusB, "+B"},
    {ConnectionTag::MinusB, "-B"},         {ConnectionTag::PlusD, "+D"},
    {ConnectionTag::MinusD, "-D"},         {ConnectionTag::PlusDigamma, "+F"},
    {ConnectionTag::MinusDigamma, "-F"},   {ConnectionTag::PlusDagger, "+dagger"},
    {ConnectionTag::MinusDagger, "-dagger"}, {ConnectionTag::Custom, "custom"},
};

double pair_asymmetry(const TensorValue& a) {
  const int n = a.dim();
  double m = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(k, i, j) - a(k, j, i)));
  return m;
}

}  // namespace

std::string to_string(ConnectionTag t) {
  for (const auto& e : kTagNames)
    if (e.tag == t) return e.name;
  return "custom";
}

ConnectionTag parse_connection_tag(const std::string& s) {
  for (const auto& e : kTagNames)
    if (s == e.name) return e.tag;
  if (s == "dagger") return ConnectionTag::PlusDagger;
  if (s == "T") return ConnectionTag::PlusT;
  if (s == "B") return ConnectionTag::PlusB;
  if (s == "D") return ConnectionTag::PlusD;
  throw Error("unknown connection '" + s + "' (expected LC, +T, -T, +B, -B, +D, -D, +F, -F, +dagger, -dagger)");
}

AffineConnection::AffineConnection(Metric g, CoefficientFn coefficients, ConnectionTag tag, std::string label)
    : g_(std::move(g)), coeffs_(std::move(coefficients)), tag_(tag), label_(std::move(label)) {
  if (label_.empty()) label_ = to_string(tag_);
}

AffineConnection AffineConnection::levi_civita(const Metric& g) {
  return AffineConnection(g, [g](const Point& p) { return christoffel(g, p); }, ConnectionTag::LeviCivita);
}

AffineConnection from_difference(const Metric& g, conv::Sign sign, CoefficientFn a, ConnectionTag tag,
                                 std::string label) {
  const double c = conv::connection_coefficient(sign);
  auto coeffs = [g, a = std::move(a), c](const Point& p) {
    const TensorValue diff = a(p);
    if (pair_asymmetry(diff) > 1e-12 * (1.0 + diff.max_abs())) {
      throw Error("difference tensor is not symmetric in its covariant slots at " + format_point(p));
    }
    TensorValue gamma = christoffel(g, p);
    for (std::size_t i = 0; i < gamma.data().size(); ++i) gamma.data()[i] += c * diff.data()[i];
    return gamma;
  };
  return AffineConnection(g, std::move(coeffs), tag, std::move(label));
}

AffineConnection shift_by_covector(const AffineConnection& base, CovectorFn alpha, ConnectionTag tag,
                                   std::string label) {
  auto coeffs = [base, alpha = std::move(alpha)](const Point& p) {
    const Mat g = base.metric().at(p);
    const Vec up = g.ldlt().solve(alpha(p));
    return base.coefficients(p) + conv::g_times_vector(g, up);
  };
  return AffineConnection(base.metric(), std::move(coeffs), tag, std::move(label));
}

AffineConnection add_tensor(const AffineConnection& base, CoefficientFn p, std::string label) {
  auto coeffs = [base, p = std::move(p)](const Point& x) { return base.coefficients(x) + p(x); };
  return AffineConnection(base.metric(), std::move(coeffs), ConnectionTag::Custom, std::move(label));
}

TensorValue difference_tensor(const AffineConnection& a, const AffineConnection& b, const Point& p) {
  if (a.dim() != b.dim()) throw Error("connections live on charts of different dimension");
  return a.coefficients(p) - b.coefficients(p);
}

double torsion(const AffineConnection& c, const Point& p) { return pair_asymmetry(c.coefficients(p)); }

DualProjectiveResult dual_projective_test(const AffineConnection& a, const AffineConnection& b,
                                          const std::vector<Point>& points, double tol) {
  if (a.dim() != b.dim()) throw Error("connections live on charts of different dimension");
  struct PointResult {
    double torsion = 0.0;
    double residual = 0.0;
    Vec alpha;
  };
  const int n = a.dim();
  const auto per_point = sweep<PointResult>(points, [&](const Point& p) {
    PointResult r;
    const TensorValue ga = a.coefficients(p);
    const TensorValue gb = b.coefficients(p);
    r.torsion = std::max(pair_asymmetry(ga), pair_asymmetry(gb));
    const TensorValue d = ga - gb;
    const Mat g = a.metric().at(p);
    const Mat gi = g.inverse();
    const Vec alpha_up = conv::pair_trace(gi, d) / n;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.residual = std::max(r.residual, std::abs(d(k, i, j) - alpha_up[k] * g(i, j)));
    r.alpha = g * alpha_up;
    return r;
  });
  const double tor = max_over(per_point, [](const PointResult& r) { return r.torsion; });
  if (tor > kTorsionTol) {
    throw Error("connection has torsion " + std::to_string(tor) + "; the dual-projective criterion needs torsion-free input");
  }
  DualProjectiveResult out;
  out.tolerance = tol;
  out.max_residual = max_over(per_point, [](const PointResult& r) { return r.residual; });
  out.holds = out.max_residual < tol;
  if (out.holds)
    for (const auto& r : per_point) out.alpha.push_back(r.alpha);
  return out;
}

TensorValue antisymmetrized_derivative(const AffineConnection& c, const Metric& h, const Point& p) {
  const LocalGeometry geo = local_geometry(h, p);
  const TensorValue gam = c.coefficients(p);
  const int n = geo.n;
  // Dh(j, k, i) = (∇'_i h)_{jk}
  auto dh = [&](int j, int k, int i) {
    double acc = geo.dg[i](j, k);
    for (int m = 0; m < n; ++m) acc -= gam(m, i, j) * geo.g(m, k) + gam(m, i, k) * geo.g(j, m);
    return acc;
  };
  TensorValue a = TensorValue::covariant(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) a(i, j, k) = dh(j, k, i) - dh(i, k, j);
  return a;
}

SemiCompatibilityResult semi_compatibility_test(const AffineConnection& c, const Metric& h,
                                                const std::vector<Point>& points, double tol,
                                                const CovectorFn* expected_beta, SemiForm form) {
  const int n = c.dim();
  if (n < 2) throw Error("semi-compatibility needs dimension at least 2");
  struct PointResult {
    double torsion = 0.0;
    double free = 0.0;
    double against_beta = 0.0;
    double beta_gap = 0.0;
    double antisym = 0.0;
    Vec alpha;
  };
  const auto per_point = sweep<PointResult>(points, [&](const Point& p) {
    PointResult r;
    r.torsion = torsion(c, p);
    const TensorValue a = antisymmetrized_derivative(c, h, p);
    const Mat hm = h.at(p);
    const Mat hi = hm.inverse();
    r.alpha = Vec::Zero(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) r.alpha[j] += hi(i, k) * a(i, j, k);
    r.alpha /= (n - 1);
    Vec beta;
    if (expected_beta) {
      beta = (*expected_beta)(p);
      r.beta_gap = form == SemiForm::Definition ? (r.alpha - beta).cwiseAbs().maxCoeff()
                                                : (r.alpha + beta).cwiseAbs().maxCoeff();
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          r.antisym = std::max(r.antisym, std::abs(a(i, j, k)));
          const double fit = r.alpha[j] * hm(i, k) - r.alpha[i] * hm(j, k);
          r.free = std::max(r.free, std::abs(a(i, j, k) - fit));
          if (expected_beta) {
            double rhs = beta[j] * hm(i, k) - beta[i] * hm(j, k);
            if (form == SemiForm::BetaCondition) rhs = -rhs;
            r.against_beta = std::max(r.against_beta, std::abs(a(i, j, k) - rhs));
          }
        }
    return r;
  });
  const double tor = max_over(per_point, [](const PointResult& r) { return r.torsion; });
  if (tor > kTorsionTol) throw Error("connection has torsion; semi-compatibility needs a torsion-free connection");

  SemiCompatibilityResult out;
  out.tolerance = tol;
  out.max_free_residual = max_over(per_point, [](const PointResult& r) { return r.free; });
  out.max_antisymmetrized = max_over(per_point, [](const PointResult& r) { return r.antisym; });
  if (expected_beta) {
    out.max_residual = max_over(per_point, [](const PointResult& r) { return r.against_beta; });
    out.max_beta_gap = max_over(per_point, [](const PointResult& r) { return r.beta_gap; });
  } else {
    out.max_residual = out.max_free_residual;
  }
  out.holds = out.max_residual < tol;
  for (const auto& r : per_point) out.alpha.push_back(r.alpha);
  return out;
}

TensorValue coefficient_partials(const AffineConnection& c, const Point& p, const Chart* domain) {
  TensorField f;
  f.slots = {Variance::Contra, Variance::Co, Variance::Co};
  f.value = [&c](const Point& x) { return c.coefficients(x); };
  const auto parts = field_partials(f, p, domain);
  const int n = c.dim();
  TensorValue d(n, {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) d(k, i, j, l) = parts[static_cast<std::size_t>(l)](k, i, j);
  return d;
}

double connection_ricci_asymmetry(const AffineConnection& c, const std::vector<Point>& points,
                                  const Chart* domain) {
  const auto per_point = sweep<double>(points, [&](const Point& p) {
    const Mat ric = ricci_from(riemann_from(c.coefficients(p), coefficient_partials(c, p, domain)));
    return (ric - ric.transpose()).cwiseAbs().maxCoeff();
  });
  return max_over(per_point, [](double v) { return v; });
}

}  // namespace dualgeo
