#pragma once

// Independent reference computations for the tests. Everything here works
// from plain point evaluations by finite differences, or from closed forms
// written out by hand, and never touches the library's jets, Christoffel code
// or solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dualgeo/expr.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FdJet {
  double value = 0.0;
  VectorXd grad;
  MatrixXd hess;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Central differences for gradient and Hessian of a scalar function.
inline FdJet fd_jet(const std::function<double(const VectorXd&)>& f, const VectorXd& p, double h) {
  const auto n = p.size();
  FdJet out;
  out.value = f(p);
  out.grad = VectorXd::Zero(n);
  out.hess = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd a = p, b = p;
    a[i] += h;
    b[i] -= h;
    out.grad[i] = (f(a) - f(b)) / (2 * h);
    out.hess(i, i) = (f(a) - 2 * out.value + f(b)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      VectorXd pp = p, pm = p, mp = p, mm = p;
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      out.hess(i, j) = out.hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
    }
  }
  return out;
}

inline FdJet fd_jet(const dualgeo::Expression& e, const VectorXd& p, double h) {
  return fd_jet([&](const VectorXd& x) { return e.eval(x); }, p, h);
}

using MetricFn = std::function<MatrixXd(const VectorXd&)>;

/// Γ^k_{ij} as a flat vector indexed (k*n + i)*n + j, from differenced metric values.
inline std::vector<double> fd_christoffel(const MetricFn& g, const VectorXd& p, double h = 1e-5) {
  const auto n = p.size();
  std::vector<MatrixXd> dg(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < n; ++l) {
    VectorXd a = p, b = p;
    a[l] += h;
    b[l] -= h;
    dg[static_cast<std::size_t>(l)] = (g(a) - g(b)) / (2 * h);
  }
  const MatrixXd gi = g(p).inverse();
  std::vector<double> out(static_cast<std::size_t>(n * n * n), 0.0);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Eigen::Index m = 0; m < n; ++m)
          s += gi(k, m) * (dg[i](j, m) + dg[j](i, m) - dg[m](i, j));
        out[static_cast<std::size_t>((k * n + i) * n + j)] = 0.5 * s;
      }
  return out;
}

struct Basis {
  VectorXd grad;
  MatrixXd hess;
};

// Gradients and Hessians of x1^2 + x2^2, 1/x1^2, 1/x2^2 written out by hand.
// The constant potential carries no equations.
inline std::vector<Basis> sw_basis(const VectorXd& p) {
  const double x = p[0], y = p[1];
  Basis ho{VectorXd(2), MatrixXd::Identity(2, 2) * 2.0};
  ho.grad << 2 * x, 2 * y;
  Basis ix{VectorXd(2), MatrixXd::Zero(2, 2)};
  ix.grad << -2 / std::pow(x, 3), 0;
  ix.hess(0, 0) = 6 / std::pow(x, 4);
  Basis iy{VectorXd(2), MatrixXd::Zero(2, 2)};
  iy.grad << 0, -2 / std::pow(y, 3);
  iy.hess(1, 1) = 6 / std::pow(y, 4);
  return {ho, ix, iy};
}

// Brute-force least squares over all n^3 components of T^k_ij on the flat
// plane, with symmetry and trace conditions as extra rows.
/// Empty when the system is rank deficient.
inline std::vector<double> sw_t_hat(const VectorXd& p) {
  constexpr int n = 2;
  auto idx = [](int k, int i, int j) { return (k * n + i) * n + j; };
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const Basis& b : sw_basis(p)) {
    const double lap = b.hess.trace();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::vector<double> r(n * n * n, 0.0);
        for (int k = 0; k < n; ++k) r[idx(k, i, j)] = b.grad[k];
        rows.push_back(r);
        rhs.push_back(b.hess(i, j) - (i == j ? lap / n : 0.0));
      }
  }
  for (int k = 0; k < n; ++k) {
    std::vector<double> sym(n * n * n, 0.0), tr(n * n * n, 0.0);
    sym[idx(k, 0, 1)] = 1;
    sym[idx(k, 1, 0)] = -1;
    tr[idx(k, 0, 0)] = tr[idx(k, 1, 1)] = 1;
    rows.push_back(sym);
    rhs.push_back(0);
    rows.push_back(tr);
    rhs.push_back(0);
  }
  Eigen::MatrixXd a(rows.size(), n * n * n);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < n * n * n; ++c) a(r, c) = rows[r][c];
    b[r] = rhs[r];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.rank() != n * n * n) return {};
  const Eigen::VectorXd x = svd.solve(b);
  return {x.data(), x.data() + x.size()};
}

}  // namespace oracle
