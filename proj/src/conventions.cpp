#include "dualgeo/conventions.hpp"

namespace dualgeo::conv {

TensorValue lower_output(const Mat& g, const TensorValue& a) {
  const int n = a.dim();
  TensorValue out = TensorValue::covariant(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += g(k, l) * a(l, i, j);
        out(i, j, k) = acc;
      }
  return out;
}

TensorValue raise_output(const Mat& g_inv, const TensorValue& a) {
  const int n = a.dim();
  TensorValue out = TensorValue::mixed12(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += g_inv(l, k) * a(i, j, k);
        out(l, i, j) = acc;
      }
  return out;
}

TensorValue g_times(const Mat& g, const Vec& w) {
  const int n = static_cast<int>(g.rows());
  TensorValue out = TensorValue::covariant(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = g(i, j) * w[k];
  return out;
}

TensorValue g_times_vector(const Mat& g, const Vec& w_up) {
  const int n = static_cast<int>(g.rows());
  TensorValue out = TensorValue::mixed12(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(k, i, j) = g(i, j) * w_up[k];
  return out;
}

TensorValue sym_g_times(const Mat& g, const Vec& w) {
  const int n = static_cast<int>(g.rows());
  TensorValue out = TensorValue::covariant(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = (g(i, j) * w[k] + g(i, k) * w[j] + g(j, k) * w[i]) / 3.0;
  return out;
}

Vec pair_trace(const Mat& g_inv, const TensorValue& a) {
  const int n = a.dim();
  Vec s = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s[k] += g_inv(i, j) * a(k, i, j);
  return s;
}

Vec output_trace(const TensorValue& a) {
  const int n = a.dim();
  Vec tau = Vec::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) tau[j] += a(i, i, j);
  return tau;
}

std::string to_string(NPlacement p) {
  switch (p) {
    case NPlacement::OutputLast: return "output-last";
    case NPlacement::OutputFirst: return "output-first";
    case NPlacement::OutputMiddle: return "output-middle";
  }
  return "?";
}

TensorValue placed(const TensorValue& e, NPlacement p) {
  const int n = e.dim();
  TensorValue out = TensorValue::covariant(n, 3);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        switch (p) {
          case NPlacement::OutputLast: out(x, y, z) = e(x, y, z); break;
          case NPlacement::OutputFirst: out(x, y, z) = e(y, z, x); break;
          case NPlacement::OutputMiddle: out(x, y, z) = e(x, z, y); break;
        }
      }
  return out;
}

Mat s_square(const Mat& g_inv, const TensorValue& s) {
  const int n = s.dim();
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            for (int q = 0; q < n; ++q) out(i, j) += s(i, k, l) * s(j, m, q) * g_inv(k, m) * g_inv(l, q);
  return out;
}

TensorValue theta(const TensorValue& t) {
  const int n = t.dim();
  TensorValue out(n, {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int m = 0; m < n; ++m) acc += t(m, i, j) * t(k, m, l);
          out(k, i, j, l) = acc;
        }
  return out;
}

}  // namespace dualgeo::conv
