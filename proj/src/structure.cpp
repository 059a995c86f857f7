#include "dualgeo/structure.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/QR>

#include "dualgeo/grid.hpp"

namespace dualgeo {

std::string to_string(FamilyKind k) { return k == FamilyKind::Nondegenerate ? "nondegenerate" : "semidegenerate"; }

std::string to_string(Classification c) { return c == Classification::Weak ? "WEAK" : "STRONG"; }

RecoveryError::RecoveryError(Kind kind, const Point& p, double residual, const std::string& what)
    : Error(what), kind_(kind), point_(p), residual_(residual) {}

namespace {

struct Evaluated {
  std::vector<Jet2<double>> v;
  LocalGeometry geo;
};

Evaluated evaluate_family(const Metric& g, const std::vector<Expression>& family, const Point& p) {
  Evaluated e;
  e.geo = local_geometry(g, p);
  for (const auto& f : family) e.v.push_back(f.eval_jet2(p));
  return e;
}

void require_spanning(const Evaluated& e, const Point& p) {
  const int n = e.geo.n;
  Mat grads(static_cast<Eigen::Index>(e.v.size()), n);
  for (std::size_t a = 0; a < e.v.size(); ++a)
    for (int k = 0; k < n; ++k) grads(static_cast<Eigen::Index>(a), k) = e.v[a].grad[k];
  Eigen::ColPivHouseholderQR<Mat> qr(grads);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < n) {
    throw RecoveryError(RecoveryError::Kind::Degenerate, p, 0.0,
                        "potential gradients do not span the cotangent space at " + format_point(p));
  }
}

struct LsqResult {
  Vec x;
  double residual;
};

LsqResult least_squares(const Mat& a, const Vec& b, const Point& p, double tol, const char* what) {
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < a.cols()) {
    throw RecoveryError(RecoveryError::Kind::RankDeficient, p, 0.0,
                        std::string(what) + ": rank " + std::to_string(qr.rank()) + " < " +
                            std::to_string(a.cols()) + " unknowns at " + format_point(p));
  }
  LsqResult r;
  r.x = qr.solve(b);
  r.residual = (a * r.x - b).norm() / std::max(1.0, b.norm());
  if (!(r.residual < tol)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.residual);
    throw RecoveryError(RecoveryError::Kind::Residual, p, r.residual,
                        std::string(what) + ": residual " + buf + " at " + format_point(p));
  }
  return r;
}

// Linear parametrization of a (1,2) tensor symmetric in its pair: component
// (k,i,j) = Σ_u M((k*n+i)*n+j, u) x_u. With trace_free, T^k_{nn} is eliminated
// through g^{ij}T^k_{ij} = 0.
Mat pair_parametrization(int n, const Mat* g_inv) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (!(g_inv && i == n - 1 && j == n - 1)) pairs.emplace_back(i, j);
  const int per_k = static_cast<int>(pairs.size());
  Mat m = Mat::Zero(n * n * n, n * per_k);
  auto row = [n](int k, int i, int j) { return (k * n + i) * n + j; };
  for (int k = 0; k < n; ++k)
    for (int u = 0; u < per_k; ++u) {
      const auto [i, j] = pairs[static_cast<std::size_t>(u)];
      const int col = k * per_k + u;
      m(row(k, i, j), col) = 1.0;
      m(row(k, j, i), col) = 1.0;
      if (g_inv) {
        const double w = (i == j ? 1.0 : 2.0) * (*g_inv)(i, j) / (*g_inv)(n - 1, n - 1);
        m(row(k, n - 1, n - 1), col) -= w;
      }
    }
  return m;
}

TensorValue unpack(int n, const Mat& m, const Vec& x) {
  TensorValue t = TensorValue::mixed12(n);
  const Vec flat = m * x;
  for (int i = 0; i < n * n * n; ++i) t.data()[static_cast<std::size_t>(i)] = flat[i];
  return t;
}

// Rows Σ_k A^k_{ij} ∂_kV_a = rhs_a(i,j) over potentials a and pairs i ≤ j.
TensorRecovery solve_pair_system(const Evaluated& e, const Mat& m, const std::vector<Mat>& rhs, const Point& p,
                                 double tol, const char* what) {
  const int n = e.geo.n;
  const int npairs = n * (n + 1) / 2;
  const auto na = static_cast<int>(e.v.size());
  Mat a = Mat::Zero(na * npairs, m.cols());
  Vec b = Vec::Zero(na * npairs);
  int r = 0;
  for (int f = 0; f < na; ++f)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++r) {
        for (int k = 0; k < n; ++k) a.row(r) += e.v[static_cast<std::size_t>(f)].grad[k] * m.row((k * n + i) * n + j);
        b[r] = rhs[static_cast<std::size_t>(f)](i, j);
      }
  const LsqResult sol = least_squares(a, b, p, tol, what);
  TensorRecovery out;
  out.tensor = unpack(n, m, sol.x);
  out.residual = sol.residual;
  out.unknowns = static_cast<int>(m.cols());
  out.equations = static_cast<int>(a.rows());
  return out;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TensorRecovery recover_structure_tensor(const Metric& g, const std::vector<Expression>& family, const Point& p,
                                        double residual_tol) {
  const Evaluated e = evaluate_family(g, family, p);
  require_spanning(e, p);
  const int n = e.geo.n;
  std::vector<Mat> rhs;
  for (const auto& v : e.v) {
    const Mat h = hessian(e.geo, v);
    const double lap = (e.geo.g_inv.cwiseProduct(h)).sum();
    rhs.push_back(h - lap / n * e.geo.g);
  }
  return solve_pair_system(e, pair_parametrization(n, &e.geo.g_inv), rhs, p, residual_tol, "structure tensor");
}

TensorRecovery recover_d_tensor(const Metric& g, const std::vector<Expression>& family, const Point& p,
                                double residual_tol) {
  const Evaluated e = evaluate_family(g, family, p);
  require_spanning(e, p);
  std::vector<Mat> rhs;
  for (const auto& v : e.v) rhs.push_back(hessian(e.geo, v));
  return solve_pair_system(e, pair_parametrization(e.geo.n, nullptr), rhs, p, residual_tol, "D tensor");
}

VectorRecovery recover_s(const Metric& g, const std::vector<Expression>& family, const Point& p,
                         double residual_tol) {
  const Evaluated e = evaluate_family(g, family, p);
  require_spanning(e, p);
  const int n = e.geo.n;
  const auto na = static_cast<Eigen::Index>(e.v.size());
  Mat a(na, n);
  Vec b(na);
  for (Eigen::Index f = 0; f < na; ++f) {
    const auto& v = e.v[static_cast<std::size_t>(f)];
    for (int k = 0; k < n; ++k) a(f, k) = v.grad[k];
    b[f] = (e.geo.g_inv.cwiseProduct(hessian(e.geo, v))).sum();
  }
  const LsqResult sol = least_squares(a, b, p, residual_tol, "s vector");
  return {sol.x, sol.residual};
}

double t_coefficient(int n) { return static_cast<double>(n) / ((n - 1.0) * (n + 2.0)); }

Decomposition decompose(const TensorValue& t_hat, const Mat& g, const Mat& g_inv) {
  const int n = t_hat.dim();
  Decomposition d;
  d.tau = conv::output_trace(t_hat);
  d.t = t_coefficient(n) * d.tau;
  d.flat = conv::lower_output(g, t_hat);
  d.s = d.flat;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) d.s(i, j, k) -= d.t[i] * g(j, k) + d.t[j] * g(i, k) + d.t[k] * g(i, j);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double back = d.s(i, j, k) + d.t[i] * g(j, k) + d.t[j] * g(i, k) + d.t[k] * g(i, j);
        d.reconstruction_defect = std::max(d.reconstruction_defect, std::abs(back - d.flat(i, j, k)));
      }
  d.s_symmetry_defect = total_symmetry_defect(d.s);
  for (int a = 0; a < n; ++a) {
    double t01 = 0.0, t02 = 0.0, t12 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        t01 += g_inv(i, j) * d.s(i, j, a);
        t02 += g_inv(i, j) * d.s(i, a, j);
        t12 += g_inv(i, j) * d.s(a, i, j);
      }
    d.s_trace_defect = std::max({d.s_trace_defect, std::abs(t01), std::abs(t02), std::abs(t12)});
  }
  return d;
}

BTensor build_b(const TensorValue& t_flat, const Vec& t, const Mat& g, const Mat& g_inv) {
  const int n = t_flat.dim();
  BTensor b;
  b.flat = t_flat + (n + 2.0) / n * conv::g_times(g, t);
  b.hat = conv::raise_output(g_inv, b.flat);
  return b;
}

Vec t_from_d(const TensorValue& d_hat, const Vec& s_flat) {
  const int n = d_hat.dim();
  return t_coefficient(n) * (conv::output_trace(d_hat) - s_flat / n);
}

TensorValue n_tensor(const TensorValue& d_hat, const Mat& g, const Vec& dd, conv::NPlacement placement) {
  const int n = d_hat.dim();
  const TensorValue d = conv::placed(conv::lower_output(g, d_hat), placement);
  TensorValue out = TensorValue::covariant(n, 3);
  const double c = 1.0 / (3.0 * (n - 1));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        out(x, y, z) = (2 * d(x, y, z) - d(x, z, y) - d(y, z, x)) / 3.0 +
                       c * (2 * g(x, y) * dd[z] - g(x, z) * dd[y] - g(y, z) * dd[x]);
  return out;
}

StructureModel StructureModel::nondegenerate(Metric g, std::vector<Expression> family) {
  StructureModel m;
  m.g_ = std::move(g);
  m.kind_ = FamilyKind::Nondegenerate;
  m.family_ = std::move(family);
  return m;
}

StructureModel StructureModel::semidegenerate(Metric g, std::vector<Expression> family) {
  StructureModel m;
  m.g_ = std::move(g);
  m.kind_ = FamilyKind::Semidegenerate;
  m.family_ = std::move(family);
  return m;
}

StructureModel StructureModel::prescribed_d(Metric g, std::vector<std::vector<std::vector<Expression>>> d_hat) {
  const int n = g.dim();
  if (static_cast<int>(d_hat.size()) != n) throw Error("prescribed D tensor has the wrong dimension");
  for (int k = 0; k < n; ++k) {
    if (static_cast<int>(d_hat[k].size()) != n) throw Error("prescribed D tensor has the wrong dimension");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(d_hat[k][i].size()) != n) throw Error("prescribed D tensor has the wrong dimension");
      for (int j = 0; j < i; ++j)
        if (!(d_hat[k][i][j] == d_hat[k][j][i])) throw Error("prescribed D tensor is not symmetric in its covariant pair");
    }
  }
  StructureModel m;
  m.g_ = std::move(g);
  m.kind_ = FamilyKind::Semidegenerate;
  m.d_expr_ = std::move(d_hat);
  return m;
}

PointStructure StructureModel::at(const Point& p) const {
  PointStructure s;
  const int n = dim();
  s.p = p;
  s.g = g_.at(p);
  s.g_inv = s.g.inverse();
  if (kind_ == FamilyKind::Nondegenerate) {
    const TensorRecovery r = recover_structure_tensor(g_, family_, p);
    s.has_t_hat = true;
    s.t_hat = r.tensor;
    s.t_residual = r.residual;
  } else {
    s.has_d_hat = true;
    if (prescribed()) {
      s.d_hat = TensorValue::mixed12(n);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s.d_hat(k, i, j) = d_expr_[k][i][j].eval(p);
      s.s_up = conv::pair_trace(s.g_inv, s.d_hat);
    } else {
      const TensorRecovery r = recover_d_tensor(g_, family_, p);
      s.d_hat = r.tensor;
      s.d_residual = r.residual;
      const VectorRecovery sv = recover_s(g_, family_, p);
      s.s_up = sv.value;
      s.s_residual = sv.residual;
    }
    s.s_flat = s.g * s.s_up;
    const Vec t = t_from_d(s.d_hat, s.s_flat);
    s.dd = (n + 2.0) * t - s.s_flat;
    s.beta = -s.dd / n;
    s.n = n_tensor(s.d_hat, s.g, s.dd);
    s.has_t_hat = true;
    s.t_hat = s.d_hat - (1.0 / n) * conv::g_times_vector(s.g, s.s_up);
  }
  s.dec = decompose(s.t_hat, s.g, s.g_inv);
  s.b = build_b(s.dec.flat, s.dec.t, s.g, s.g_inv);
  return s;
}

TensorValue StructureModel::t_hat(const Point& p) const {
  if (kind_ == FamilyKind::Nondegenerate) return recover_structure_tensor(g_, family_, p).tensor;
  return at(p).t_hat;
}

TensorValue StructureModel::b_hat(const Point& p) const { return at(p).b.hat; }

TensorValue StructureModel::d_hat(const Point& p) const {
  if (kind_ != FamilyKind::Semidegenerate) throw Error("D tensor requires a semi-degenerate system");
  return at(p).d_hat;
}

ClassifyResult classify(const StructureModel& m, const std::vector<Point>& points, double tol) {
  if (m.kind() != FamilyKind::Semidegenerate) throw Error("classification applies to semi-degenerate systems only");
  const auto per_point = sweep<PointStructure>(points, [&](const Point& p) { return m.at(p); });
  ClassifyResult r;
  r.tolerance = tol;
  r.max_n = max_over(per_point, [](const PointStructure& s) { return s.n.max_abs(); });
  r.verdict = r.max_n < tol ? Classification::Weak : Classification::Strong;
  if (r.verdict == Classification::Weak)
    for (const auto& s : per_point) r.t_hat.push_back(s.t_hat);
  return r;
}

QHatIngredients q_hat_ingredients(const StructureModel& m, const Point& p, const Chart* domain) {
  const Metric& g = m.metric();
  const int n = g.dim();
  const LocalGeometry geo = local_geometry(g, p);
  const TensorValue t = m.t_hat(p);

  TensorField field;
  field.slots = {Variance::Contra, Variance::Co, Variance::Co};
  field.value = [&m](const Point& x) { return m.t_hat(x); };
  const TensorValue nabla_t = covariant_derivative(geo.gamma, field, p, domain);

  QHatIngredients q;
  q.theta = conv::theta(t);
  q.calT = Mat::Zero(n, n);
  Mat div = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          q.calT(k, i) += geo.g_inv(a, b) * q.theta(k, i, a, b);
          div(k, i) += geo.g_inv(a, b) * nabla_t(k, b, i, a);
        }
  const Mat ric = ricci_from(riemann_from(geo.gamma, geo.dgamma));
  const Mat ric_up = geo.g_inv * (0.5 * (ric + ric.transpose()));
  q.q_hat = div + q.calT - ric_up;
  q.q = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) q.q(i, j) += geo.g(k, j) * q.q_hat(k, i);
  q.q_symmetry_defect = max_abs(q.q - q.q.transpose());
  return q;
}

namespace {

Mat trace_free(const Mat& x, const Mat& g, const Mat& g_inv) {
  const double tr = (g_inv.cwiseProduct(x)).sum();
  return x - tr / static_cast<double>(g.rows()) * g;
}

double digamma_coefficient(int n) { return 1.0 / (2.0 * (n - 2)); }

}  // namespace

TensorValue digamma_hat(const PointStructure& s, const Expression& zeta) {
  const int n = static_cast<int>(s.g.rows());
  if (n < 3) throw Error("the digamma tensor needs dimension at least 3");
  const Vec dz = gradient(zeta.eval_jet2(s.p));
  const TensorValue f = s.b.flat + digamma_coefficient(n) * conv::sym_g_times(s.g, dz);
  return conv::raise_output(s.g_inv, f);
}

ZetaCheck z_and_digamma(const PointStructure& s, const Metric& g, const Expression& zeta) {
  const int n = static_cast<int>(s.g.rows());
  if (n < 3) throw Error("the zeta equation and digamma tensor need dimension at least 3");
  const LocalGeometry geo = local_geometry(g, s.p);
  const Jet2<double> zj = zeta.eval_jet2(s.p);
  const Vec t_up = s.g_inv * s.dec.t;

  Mat s_of_t = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s_of_t(i, j) += s.dec.s(i, j, k) * t_up[k];
  const Mat ric = ricci_from(riemann_from(geo.gamma, geo.dgamma));

  ZetaCheck z;
  z.z = conv::s_square(s.g_inv, s.dec.s) - (n - 2.0) * (s_of_t + s.dec.t * s.dec.t.transpose()) -
        0.5 * (ric + ric.transpose());
  z.z_tracefree = trace_free(z.z, s.g, s.g_inv);
  z.hess_zeta_tracefree = trace_free(hessian(geo, zj), s.g, s.g_inv);
  z.zeta_residual = max_abs(z.z_tracefree - z.hess_zeta_tracefree);
  z.digamma_flat = s.b.flat + digamma_coefficient(n) * conv::sym_g_times(s.g, gradient(zj));
  z.digamma_hat = conv::raise_output(s.g_inv, z.digamma_flat);
  return z;
}

namespace {

struct KillingJets {
  Mat k;
  std::vector<Mat> dk;
};

KillingJets killing_jets(const KillingEntry& e, int n, const Point& p) {
  KillingJets j;
  j.k = Mat::Zero(n, n);
  j.dk.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Jet2<double> c = e.k[a][b].eval_jet2(p);
      j.k(a, b) = c.value;
      for (int l = 0; l < n; ++l) j.dk[l](a, b) = c.grad[l];
    }
  return j;
}

}  // namespace

double killing_residual(const Metric& g, const KillingEntry& e, const Point& p) {
  const LocalGeometry geo = local_geometry(g, p);
  const int n = geo.n;
  const KillingJets kj = killing_jets(e, n, p);
  // nk(i, j, l) = (∇_l K)_{ij}
  auto nk = [&](int i, int j, int l) {
    double acc = kj.dk[l](i, j);
    for (int m = 0; m < n; ++m) acc -= geo.gamma(m, l, i) * kj.k(m, j) + geo.gamma(m, l, j) * kj.k(i, m);
    return acc;
  };
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) worst = std::max(worst, std::abs(nk(i, j, l) + nk(j, l, i) + nk(l, i, j)) / 3.0);
  return worst;
}

double bertrand_darboux_residual(const Metric& g, const KillingEntry& e, const Expression& v, const Point& p) {
  const LocalGeometry geo = local_geometry(g, p);
  const int n = geo.n;
  const KillingJets kj = killing_jets(e, n, p);
  const Jet2<double> vj = v.eval_jet2(p);
  const Vec dv = gradient(vj);
  // ω_i = K_{ia} g^{aj} ∂_j V and its partials
  Mat d_omega(n, n);  // d_omega(l, i) = ∂_l ω_i
  for (int l = 0; l < n; ++l) {
    const Mat dgi = -geo.g_inv * geo.dg[l] * geo.g_inv;
    Vec ddv(n);
    for (int j = 0; j < n; ++j) ddv[j] = vj.h(l, j);
    const Vec row = kj.dk[l] * geo.g_inv * dv + kj.k * dgi * dv + kj.k * geo.g_inv * ddv;
    d_omega.row(l) = row.transpose();
  }
  return max_abs(d_omega - d_omega.transpose());
}

double poisson_residual(const Metric& g, const Expression& v, const KillingEntry& e, const Point& p,
                        const std::vector<Vec>& momenta) {
  if (!e.w) throw Error("Poisson check needs the scalar part W of the integral");
  const LocalGeometry geo = local_geometry(g, p);
  const int n = geo.n;
  const KillingJets kj = killing_jets(e, n, p);
  const Vec dv = gradient(v.eval_jet2(p));
  const Vec dw = gradient(e.w->eval_jet2(p));
  const Mat k_up = geo.g_inv * kj.k * geo.g_inv;
  std::vector<Mat> dgi(static_cast<std::size_t>(n)), dk_up(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    dgi[l] = -geo.g_inv * geo.dg[l] * geo.g_inv;
    dk_up[l] = dgi[l] * kj.k * geo.g_inv + geo.g_inv * kj.dk[l] * geo.g_inv + geo.g_inv * kj.k * dgi[l];
  }
  double worst = 0.0;
  for (const Vec& mom : momenta) {
    double bracket = 0.0;
    const Vec dh_dp = 2.0 * geo.g_inv * mom;
    const Vec df_dp = 2.0 * k_up * mom;
    for (int l = 0; l < n; ++l) {
      const double dh_dx = mom.dot(dgi[l] * mom) + dv[l];
      const double df_dx = mom.dot(dk_up[l] * mom) + dw[l];
      bracket += dh_dx * df_dp[l] - dh_dp[l] * df_dx;
    }
    worst = std::max(worst, std::abs(bracket));
  }
  return worst;
}

nlohmann::json tensor_json(const TensorValue& t) {
  std::string variance;
  for (Variance v : t.slots()) variance += v == Variance::Contra ? '^' : '_';
  return {{"variance", variance}, {"dimension", t.dim()}, {"components", t.data()}};
}

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Vec r = m.row(i).transpose();
    rows.push_back(vec_json(r));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const PointStructure& s) {
  nlohmann::json j;
  j["point"] = vec_json(s.p);
  j["metric"] = mat_json(s.g);
  if (s.has_t_hat) {
    j["T_hat"] = tensor_json(s.t_hat);
    j["tau"] = vec_json(s.dec.tau);
    j["t"] = vec_json(s.dec.t);
    j["S"] = tensor_json(s.dec.s);
    j["B_hat"] = tensor_json(s.b.hat);
    j["S_symmetry_defect"] = s.dec.s_symmetry_defect;
    j["S_trace_defect"] = s.dec.s_trace_defect;
    j["T_residual"] = s.t_residual;
  }
  if (s.has_d_hat) {
    j["D_hat"] = tensor_json(s.d_hat);
    j["s_hat"] = vec_json(s.s_up);
    j["d"] = vec_json(s.dd);
    j["beta"] = vec_json(s.beta);
    j["N"] = tensor_json(s.n);
    j["N_placement"] = conv::to_string(conv::kNPlacement);
    j["D_residual"] = s.d_residual;
    j["s_residual"] = s.s_residual;
  }
  return j;
}

}  // namespace dualgeo
