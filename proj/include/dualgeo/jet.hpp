#pragma once

// Truncated Taylor arithmetic in up to kMaxDim variables.
//
// Jet2<S> carries value, gradient and Hessian over a scalar type S. With
// S = double this gives exact first and second derivatives; with S = Dual the
// Hessian entries themselves carry a gradient, which yields third derivatives
// (jet-of-jet nesting).

#include <array>
#include <cmath>
#include <cstddef>

namespace dualgeo {

inline constexpr int kMaxDim = 4;

/// First-order forward-mode dual number with kMaxDim directions.
struct Dual {
  double v = 0.0;
  std::array<double, kMaxDim> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit lift from constants

  static Dual variable(double value, int direction) {
    Dual r(value);
    r.d[direction] = 1.0;
    return r;
  }
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

inline Dual operator+(const Dual& a, const Dual& b) {
  Dual r(a.v + b.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
inline Dual operator-(const Dual& a, const Dual& b) {
  Dual r(a.v - b.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
inline Dual operator-(const Dual& a) {
  Dual r(-a.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = -a.d[i];
  return r;
}
inline Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
inline Dual operator/(const Dual& a, const Dual& b) {
  Dual r(a.v / b.v);
  const double inv2 = 1.0 / (b.v * b.v);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
  return r;
}
inline Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }

namespace detail {
inline Dual chain(const Dual& u, double f, double df) {
  Dual r(f);
  for (int i = 0; i < kMaxDim; ++i) r.d[i] = df * u.d[i];
  return r;
}
}  // namespace detail

inline Dual sin(const Dual& u) { return detail::chain(u, std::sin(u.v), std::cos(u.v)); }
inline Dual cos(const Dual& u) { return detail::chain(u, std::cos(u.v), -std::sin(u.v)); }
inline Dual tan(const Dual& u) {
  const double c = std::cos(u.v);
  return detail::chain(u, std::tan(u.v), 1.0 / (c * c));
}
inline Dual exp(const Dual& u) {
  const double e = std::exp(u.v);
  return detail::chain(u, e, e);
}
inline Dual log(const Dual& u) { return detail::chain(u, std::log(u.v), 1.0 / u.v); }
inline Dual sqrt(const Dual& u) {
  const double s = std::sqrt(u.v);
  return detail::chain(u, s, 0.5 / s);
}
inline Dual powi(const Dual& u, int k) {
  if (k == 0) return Dual(1.0);
  return detail::chain(u, std::pow(u.v, k), k * std::pow(u.v, k - 1));
}

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double powi(double x, int k) { return k == 0 ? 1.0 : std::pow(x, k); }

/// Value, gradient and symmetric Hessian of a scalar function of n variables.
template <class S>
struct Jet2 {
  int n = 0;
  S value{};
  std::array<S, kMaxDim> grad{};
  std::array<S, kMaxDim * kMaxDim> hess{};

  S& h(int i, int j) { return hess[static_cast<std::size_t>(i * kMaxDim + j)]; }
  const S& h(int i, int j) const { return hess[static_cast<std::size_t>(i * kMaxDim + j)]; }

  static Jet2 constant(int dim, const S& c) {
    Jet2 r;
    r.n = dim;
    r.value = c;
    return r;
  }
};

template <class S>
Jet2<S> operator+(const Jet2<S>& a, const Jet2<S>& b) {
  Jet2<S> r = Jet2<S>::constant(a.n, a.value + b.value);
  for (int i = 0; i < a.n; ++i) {
    r.grad[i] = a.grad[i] + b.grad[i];
    for (int j = i; j < a.n; ++j) r.h(i, j) = r.h(j, i) = a.h(i, j) + b.h(i, j);
  }
  return r;
}

template <class S>
Jet2<S> operator-(const Jet2<S>& a, const Jet2<S>& b) {
  Jet2<S> r = Jet2<S>::constant(a.n, a.value - b.value);
  for (int i = 0; i < a.n; ++i) {
    r.grad[i] = a.grad[i] - b.grad[i];
    for (int j = i; j < a.n; ++j) r.h(i, j) = r.h(j, i) = a.h(i, j) - b.h(i, j);
  }
  return r;
}

template <class S>
Jet2<S> operator-(const Jet2<S>& a) {
  Jet2<S> r = Jet2<S>::constant(a.n, -a.value);
  for (int i = 0; i < a.n; ++i) {
    r.grad[i] = -a.grad[i];
    for (int j = i; j < a.n; ++j) r.h(i, j) = r.h(j, i) = -a.h(i, j);
  }
  return r;
}

template <class S>
Jet2<S> operator*(const Jet2<S>& a, const Jet2<S>& b) {
  Jet2<S> r = Jet2<S>::constant(a.n, a.value * b.value);
  for (int i = 0; i < a.n; ++i) {
    r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
    for (int j = i; j < a.n; ++j) {
      r.h(i, j) = r.h(j, i) = a.h(i, j) * b.value + a.grad[i] * b.grad[j] +
                              a.grad[j] * b.grad[i] + a.value * b.h(i, j);
    }
  }
  return r;
}

/// Compose u with a univariate function given f(u), f'(u), f''(u).
template <class S>
Jet2<S> compose(const Jet2<S>& u, const S& f0, const S& f1, const S& f2) {
  Jet2<S> r = Jet2<S>::constant(u.n, f0);
  for (int i = 0; i < u.n; ++i) {
    r.grad[i] = f1 * u.grad[i];
    for (int j = i; j < u.n; ++j) {
      r.h(i, j) = r.h(j, i) = f2 * u.grad[i] * u.grad[j] + f1 * u.h(i, j);
    }
  }
  return r;
}

template <class S>
Jet2<S> reciprocal(const Jet2<S>& u) {
  const S inv = S(1.0) / u.value;
  return compose(u, inv, -(inv * inv), S(2.0) * inv * inv * inv);
}

template <class S>
Jet2<S> operator/(const Jet2<S>& a, const Jet2<S>& b) {
  return a * reciprocal(b);
}

template <class S>
Jet2<S> sin(const Jet2<S>& u) {
  const S s = sin(u.value);
  return compose(u, s, cos(u.value), -s);
}
template <class S>
Jet2<S> cos(const Jet2<S>& u) {
  const S c = cos(u.value);
  return compose(u, c, -sin(u.value), -c);
}
template <class S>
Jet2<S> tan(const Jet2<S>& u) {
  const S t = tan(u.value);
  const S sec2 = S(1.0) + t * t;
  return compose(u, t, sec2, S(2.0) * t * sec2);
}
template <class S>
Jet2<S> exp(const Jet2<S>& u) {
  const S e = exp(u.value);
  return compose(u, e, e, e);
}
template <class S>
Jet2<S> log(const Jet2<S>& u) {
  const S inv = S(1.0) / u.value;
  return compose(u, log(u.value), inv, -(inv * inv));
}
template <class S>
Jet2<S> sqrt(const Jet2<S>& u) {
  const S s = sqrt(u.value);
  const S d1 = S(0.5) / s;
  return compose(u, s, d1, -(d1 / (S(2.0) * u.value)));
}
template <class S>
Jet2<S> powi(const Jet2<S>& u, int k) {
  if (k == 0) return Jet2<S>::constant(u.n, S(1.0));
  const S f1 = S(static_cast<double>(k)) * powi(u.value, k - 1);
  const S f2 = (k == 1) ? S(0.0) : S(static_cast<double>(k) * (k - 1)) * powi(u.value, k - 2);
  return compose(u, powi(u.value, k), f1, f2);
}

}  // namespace dualgeo
