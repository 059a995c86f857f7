#pragma once

// Dense tensor components at a single point, with the variance of every slot
// recorded. Components are stored row-major in slot order, so for a (1,2)
// tensor with slots {Contra, Co, Co} the element (k, i, j) is A^k_{ij}.

#include <initializer_list>
#include <string>
#include <vector>

#include "dualgeo/types.hpp"

namespace dualgeo {

enum class Variance { Co, Contra };

class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(int dim, std::vector<Variance> slots);

  /// Slots {Contra, Co, Co}: connection coefficients and difference tensors, A^k_{ij}.
  static TensorValue mixed12(int dim) { return TensorValue(dim, {Variance::Contra, Variance::Co, Variance::Co}); }
  static TensorValue covariant(int dim, int rank) { return TensorValue(dim, std::vector<Variance>(rank, Variance::Co)); }
  static TensorValue from_matrix(const Mat& m);  // (0,2)

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& slots() const { return slots_; }

  template <class... I>
  double& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  double operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const;
  Mat as_matrix() const;  // rank 2 only

  TensorValue& operator+=(const TensorValue& o);
  TensorValue& operator-=(const TensorValue& o);
  TensorValue& operator*=(double s);

 private:
  std::size_t offset(std::initializer_list<int> idx) const;

  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<double> data_;
};

TensorValue operator+(TensorValue a, const TensorValue& b);
TensorValue operator-(TensorValue a, const TensorValue& b);
TensorValue operator*(double s, TensorValue a);

/// Max-norm of a - b; throws on shape or variance mismatch.
double max_abs_diff(const TensorValue& a, const TensorValue& b);

/// Raise the named covariant slot with g^{-1}.
TensorValue sharp(const Mat& g_inv, const TensorValue& t, int slot);
/// Lower the named contravariant slot with g.
TensorValue flat(const Mat& g, const TensorValue& t, int slot);

/// Result slot s is input slot order[s].
TensorValue permute(const TensorValue& t, const std::vector<int>& order);

/// Max deviation from symmetry under swapping slots a and b.
double symmetry_defect(const TensorValue& t, int a, int b);
/// Max deviation of a rank-3 tensor from total symmetry over all six orders.
double total_symmetry_defect(const TensorValue& t);

}  // namespace dualgeo
