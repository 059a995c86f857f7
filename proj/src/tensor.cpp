#include "dualgeo/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace dualgeo {

namespace {

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

void require_same_shape(const TensorValue& a, const TensorValue& b) {
  if (a.dim() != b.dim() || a.slots() != b.slots()) throw Error("tensor shape or variance mismatch");
}

// Unravel a flat offset into a multi-index.
void unravel(std::size_t off, int dim, int rank, std::vector<int>& idx) {
  for (int s = rank - 1; s >= 0; --s) {
    idx[static_cast<std::size_t>(s)] = static_cast<int>(off % static_cast<std::size_t>(dim));
    off /= static_cast<std::size_t>(dim);
  }
}

std::size_t ravel(const std::vector<int>& idx, int dim) {
  std::size_t off = 0;
  for (int i : idx) off = off * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return off;
}

TensorValue transform_slot(const Mat& m, const TensorValue& t, int slot, Variance to) {
  std::vector<Variance> slots = t.slots();
  slots[static_cast<std::size_t>(slot)] = to;
  TensorValue out(t.dim(), slots);
  std::vector<int> idx(static_cast<std::size_t>(t.rank()));
  const std::size_t total = t.data().size();
  for (std::size_t off = 0; off < total; ++off) {
    unravel(off, t.dim(), t.rank(), idx);
    const int a = idx[static_cast<std::size_t>(slot)];
    double acc = 0.0;
    for (int b = 0; b < t.dim(); ++b) {
      idx[static_cast<std::size_t>(slot)] = b;
      acc += m(a, b) * t.data()[ravel(idx, t.dim())];
    }
    out.data()[off] = acc;
  }
  return out;
}

}  // namespace

TensorValue::TensorValue(int dim, std::vector<Variance> slots)
    : dim_(dim), slots_(std::move(slots)), data_(ipow(dim, static_cast<int>(slots_.size())), 0.0) {}

TensorValue TensorValue::from_matrix(const Mat& m) {
  TensorValue t = covariant(static_cast<int>(m.rows()), 2);
  for (int i = 0; i < t.dim_; ++i)
    for (int j = 0; j < t.dim_; ++j) t(i, j) = m(i, j);
  return t;
}

std::size_t TensorValue::offset(std::initializer_list<int> idx) const {
  std::size_t off = 0;
  for (int i : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  return off;
}

double TensorValue::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Mat TensorValue::as_matrix() const {
  if (rank() != 2) throw Error("as_matrix requires a rank-2 tensor");
  Mat m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

TensorValue& TensorValue::operator+=(const TensorValue& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

TensorValue& TensorValue::operator-=(const TensorValue& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

TensorValue& TensorValue::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

TensorValue operator+(TensorValue a, const TensorValue& b) { return a += b; }
TensorValue operator-(TensorValue a, const TensorValue& b) { return a -= b; }
TensorValue operator*(double s, TensorValue a) { return a *= s; }

double max_abs_diff(const TensorValue& a, const TensorValue& b) {
  require_same_shape(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

TensorValue sharp(const Mat& g_inv, const TensorValue& t, int slot) {
  if (slot < 0 || slot >= t.rank()) throw Error("sharp: slot " + std::to_string(slot) + " does not exist");
  if (t.slots()[static_cast<std::size_t>(slot)] != Variance::Co) throw Error("sharp: slot is not covariant");
  return transform_slot(g_inv, t, slot, Variance::Contra);
}

TensorValue flat(const Mat& g, const TensorValue& t, int slot) {
  if (slot < 0 || slot >= t.rank()) throw Error("flat: slot " + std::to_string(slot) + " does not exist");
  if (t.slots()[static_cast<std::size_t>(slot)] != Variance::Contra) throw Error("flat: slot is not contravariant");
  return transform_slot(g, t, slot, Variance::Co);
}

TensorValue permute(const TensorValue& t, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != t.rank()) throw Error("permute: order has wrong length");
  std::vector<Variance> slots(order.size());
  for (std::size_t s = 0; s < order.size(); ++s) slots[s] = t.slots()[static_cast<std::size_t>(order[s])];
  TensorValue out(t.dim(), slots);
  std::vector<int> idx(order.size()), src(order.size());
  for (std::size_t off = 0; off < out.data().size(); ++off) {
    unravel(off, t.dim(), t.rank(), idx);
    for (std::size_t s = 0; s < order.size(); ++s) src[static_cast<std::size_t>(order[s])] = idx[s];
    out.data()[off] = t.data()[ravel(src, t.dim())];
  }
  return out;
}

double symmetry_defect(const TensorValue& t, int a, int b) {
  std::vector<int> order(static_cast<std::size_t>(t.rank()));
  for (int s = 0; s < t.rank(); ++s) order[static_cast<std::size_t>(s)] = s;
  std::swap(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
  const TensorValue swapped = permute(t, order);
  double m = 0.0;
  for (std::size_t i = 0; i < t.data().size(); ++i) m = std::max(m, std::abs(t.data()[i] - swapped.data()[i]));
  return m;
}

double total_symmetry_defect(const TensorValue& t) {
  if (t.rank() != 3) throw Error("total_symmetry_defect requires rank 3");
  double m = 0.0;
  std::vector<int> order = {0, 1, 2};
  do {
    const TensorValue p = permute(t, order);
    for (std::size_t i = 0; i < t.data().size(); ++i) m = std::max(m, std::abs(t.data()[i] - p.data()[i]));
  } while (std::next_permutation(order.begin(), order.end()));
  return m;
}

}  // namespace dualgeo
