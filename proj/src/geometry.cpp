#include "dualgeo/geometry.hpp"

#include <cmath>
#include <limits>

namespace dualgeo {

bool Chart::in_box(const Point& p) const {
  for (int i = 0; i < dim; ++i)
    if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
  return true;
}

double Chart::distance_to_singular(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : singular) d = std::min(d, std::abs(p[s.axis] - s.value));
  return d;
}

bool Chart::contains(const Point& p) const {
  if (p.size() != dim || !p.allFinite()) return false;
  return distance_to_singular(p) > singular_margin;
}

double fd_step(double x) { return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x)); }

Metric::Metric(std::vector<std::vector<Expression>> components, double condition_bound)
    : dim_(static_cast<int>(components.size())), g_(std::move(components)), condition_bound_(condition_bound) {
  if (dim_ < 2) throw Error("metric dimension must be at least 2");
  for (const auto& row : g_)
    if (static_cast<int>(row.size()) != dim_) throw Error("metric must be a square array");
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      if (!(g_[i][j] == g_[j][i])) {
        throw Error("metric is not symmetric: g" + std::to_string(i + 1) + std::to_string(j + 1) + " = " +
                    g_[i][j].print() + " but g" + std::to_string(j + 1) + std::to_string(i + 1) + " = " +
                    g_[j][i].print());
      }
}

Metric Metric::euclidean(int dim) {
  std::vector<std::vector<Expression>> g(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g[i].push_back(Expression::constant(i == j ? 1.0 : 0.0, dim));
  return Metric(std::move(g));
}

const Expression& Metric::component(int i, int j) const { return g_[i][j]; }

namespace {

void check_conditioning(const Mat& g, double bound, const Point& p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > bound) {
    throw SingularMetricError("metric singular or ill-conditioned at " + format_point(p));
  }
}

}  // namespace

Mat Metric::at(const Point& p) const {
  Mat g(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) g(i, j) = g(j, i) = g_[i][j].eval(p);
  check_conditioning(g, condition_bound_, p);
  return g;
}

LocalGeometry local_geometry(const Metric& metric, const Point& p) {
  const int n = metric.dim();
  LocalGeometry geo;
  geo.n = n;
  geo.p = p;
  geo.g = Mat::Zero(n, n);
  geo.dg.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  geo.ddg.assign(static_cast<std::size_t>(n), std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet2<double> c = metric.component(i, j).eval_jet2(p);
      geo.g(i, j) = geo.g(j, i) = c.value;
      for (int l = 0; l < n; ++l) {
        geo.dg[l](i, j) = geo.dg[l](j, i) = c.grad[l];
        for (int m = 0; m < n; ++m) geo.ddg[l][m](i, j) = geo.ddg[l][m](j, i) = c.h(l, m);
      }
    }
  check_conditioning(geo.g, metric.condition_bound(), p);
  geo.g_inv = geo.g.ldlt().solve(Mat::Identity(n, n));
  geo.g_inv = 0.5 * (geo.g_inv + geo.g_inv.transpose()).eval();
  geo.sqrt_det = std::sqrt(geo.g.determinant());

  // C(i,j,m) = ∂i g_jm + ∂j g_im − ∂m g_ij
  auto C = [&](int i, int j, int m) { return geo.dg[i](j, m) + geo.dg[j](i, m) - geo.dg[m](i, j); };
  auto dC = [&](int i, int j, int m, int l) {
    return geo.ddg[l][i](j, m) + geo.ddg[l][j](i, m) - geo.ddg[l][m](i, j);
  };

  geo.gamma = TensorValue::mixed12(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m) acc += geo.g_inv(k, m) * C(i, j, m);
        geo.gamma(k, i, j) = geo.gamma(k, j, i) = 0.5 * acc;
      }

  std::vector<Mat> dg_inv(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) dg_inv[l] = -geo.g_inv * geo.dg[l] * geo.g_inv;

  geo.dgamma = TensorValue(n, {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int m = 0; m < n; ++m) acc += dg_inv[l](k, m) * C(i, j, m) + geo.g_inv(k, m) * dC(i, j, m, l);
          geo.dgamma(k, i, j, l) = geo.dgamma(k, j, i, l) = 0.5 * acc;
        }
  return geo;
}

TensorValue christoffel(const Metric& g, const Point& p) { return local_geometry(g, p).gamma; }

TensorValue riemann_from(const TensorValue& gamma, const TensorValue& dgamma) {
  const int n = gamma.dim();
  TensorValue r(n, {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double acc = dgamma(l, j, k, i) - dgamma(l, i, k, j);
          for (int m = 0; m < n; ++m) acc += gamma(l, i, m) * gamma(m, j, k) - gamma(l, j, m) * gamma(m, i, k);
          r(l, i, j, k) = acc;
        }
  return r;
}

Mat ricci_from(const TensorValue& riemann) {
  const int n = riemann.dim();
  Mat ric = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) ric(j, k) += riemann(i, i, j, k);
  return ric;
}

TensorValue riemann(const Metric& g, const Point& p) {
  const LocalGeometry geo = local_geometry(g, p);
  return riemann_from(geo.gamma, geo.dgamma);
}

Mat ricci(const Metric& g, const Point& p) {
  Mat ric = ricci_from(riemann(g, p));
  return 0.5 * (ric + ric.transpose());
}

double first_bianchi_defect(const TensorValue& r) {
  const int n = r.dim();
  double m = 0.0;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) m = std::max(m, std::abs(r(l, i, j, k) + r(l, j, k, i) + r(l, k, i, j)));
  return m;
}

Vec gradient(const Jet2<double>& v) {
  Vec d(v.n);
  for (int i = 0; i < v.n; ++i) d[i] = v.grad[i];
  return d;
}

Mat hessian(const LocalGeometry& geo, const Jet2<double>& v) {
  const int n = geo.n;
  Mat h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double acc = v.h(i, j);
      for (int k = 0; k < n; ++k) acc -= geo.gamma(k, i, j) * v.grad[k];
      h(i, j) = h(j, i) = acc;
    }
  return h;
}

Mat hessian(const Metric& g, const Expression& v, const Point& p) {
  return hessian(local_geometry(g, p), v.eval_jet2(p));
}

double laplacian(const Metric& g, const Expression& v, const Point& p) {
  const LocalGeometry geo = local_geometry(g, p);
  return (geo.g_inv.cwiseProduct(hessian(geo, v.eval_jet2(p)))).sum();
}

double laplacian_divergence(const Metric& metric, const Expression& v, const Point& p) {
  const int n = metric.dim();
  Mat g(n, n);
  std::vector<Mat> dg(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet2<double> c = metric.component(i, j).eval_jet2(p);
      g(i, j) = g(j, i) = c.value;
      for (int l = 0; l < n; ++l) dg[l](i, j) = dg[l](j, i) = c.grad[l];
    }
  const Mat gi = g.inverse();
  const Jet2<double> u = v.eval_jet2(p);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    // ∂i log √det g = ½ tr(g⁻¹ ∂i g)
    const double dlog = 0.5 * (gi * dg[i]).trace();
    const Mat dgi = -gi * dg[i] * gi;
    for (int j = 0; j < n; ++j) acc += (dlog * gi(i, j) + dgi(i, j)) * u.grad[j] + gi(i, j) * u.h(i, j);
  }
  return acc;
}

TensorField metric_field(const Metric& g) {
  TensorField f;
  f.slots = {Variance::Co, Variance::Co};
  f.value = [g](const Point& p) { return TensorValue::from_matrix(g.at(p)); };
  f.partials = [g](const Point& p) {
    const LocalGeometry geo = local_geometry(g, p);
    std::vector<TensorValue> out;
    for (int l = 0; l < geo.n; ++l) out.push_back(TensorValue::from_matrix(geo.dg[l]));
    return out;
  };
  return f;
}

std::vector<TensorValue> field_partials(const TensorField& f, const Point& p, const Chart* domain) {
  if (f.partials) return f.partials(p);
  const int n = static_cast<int>(p.size());
  std::vector<TensorValue> out;
  for (int l = 0; l < n; ++l) {
    const double h = fd_step(p[l]);
    Point a = p, b = p;
    a[l] += h;
    b[l] -= h;
    if (domain && (!domain->contains(a) || !domain->contains(b))) {
      throw DomainError("finite-difference stencil leaves the domain at " + format_point(p));
    }
    TensorValue d = f.value(a) - f.value(b);
    d *= 1.0 / (a[l] - b[l]);
    out.push_back(std::move(d));
  }
  return out;
}

TensorValue covariant_derivative(const TensorValue& gamma, const TensorField& field, const Point& p,
                                 const Chart* domain) {
  const TensorValue val = field.value(p);
  const std::vector<TensorValue> dv = field_partials(field, p, domain);
  const int n = val.dim();
  const int r = val.rank();
  std::vector<Variance> slots = val.slots();
  slots.push_back(Variance::Co);
  TensorValue out(n, slots);

  std::vector<int> idx(static_cast<std::size_t>(r));
  const std::size_t count = val.data().size();
  for (std::size_t off = 0; off < count; ++off) {
    std::size_t rem = off;
    for (int s = r - 1; s >= 0; --s) {
      idx[static_cast<std::size_t>(s)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    for (int l = 0; l < n; ++l) {
      double acc = dv[static_cast<std::size_t>(l)].data()[off];
      for (int s = 0; s < r; ++s) {
        const int a = idx[static_cast<std::size_t>(s)];
        std::vector<int> j = idx;
        for (int m = 0; m < n; ++m) {
          j[static_cast<std::size_t>(s)] = m;
          std::size_t o = 0;
          for (int q : j) o = o * static_cast<std::size_t>(n) + static_cast<std::size_t>(q);
          if (val.slots()[static_cast<std::size_t>(s)] == Variance::Contra) {
            acc += gamma(a, l, m) * val.data()[o];
          } else {
            acc -= gamma(m, l, a) * val.data()[o];
          }
        }
      }
      out.data()[off * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)] = acc;
    }
  }
  return out;
}

}  // namespace dualgeo
