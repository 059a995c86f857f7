#pragma once

// Slot conventions shared by every tensor construction in the library.
//
// A (1,2) tensor A^k_{ij} is symmetric in its covariant pair (i,j); k is the
// output slot. Flattening lowers the output slot and appends it last:
//     A_{ijk} = g_{kl} A^l_{ij}.
// In a product written g⊗w, g fills the symmetric pair and w the output slot:
//     (g⊗w)_{ijk} = g_{ij} w_k.
// Affine connections built from a tensor subtract it for the + sign:
//     ∇^{+A} = ∇ − A,  ∇^{−A} = ∇ + A.

#include <string>

#include "dualgeo/tensor.hpp"
#include "dualgeo/types.hpp"

namespace dualgeo::conv {

/// Sign of a connection variant: +1 for ∇^{+X}, −1 for ∇^{−X}.
using Sign = int;

/// Coefficient applied to X in Γ' = Γ + coefficient·X.
inline double connection_coefficient(Sign s) { return s > 0 ? -1.0 : 1.0; }

/// A_{ijk} = g_{kl} A^l_{ij}.
TensorValue lower_output(const Mat& g, const TensorValue& a);
/// A^l_{ij} = g^{lk} A_{ijk}.
TensorValue raise_output(const Mat& g_inv, const TensorValue& a);

/// (g⊗w)_{ijk} = g_{ij} w_k for a covector w.
TensorValue g_times(const Mat& g, const Vec& w);
/// (g⊗w♯)^k_{ij} = g_{ij} w^k for a vector w^k.
TensorValue g_times_vector(const Mat& g, const Vec& w_up);

/// Π_Sym(g⊗w)_{ijk} = (g_{ij}w_k + g_{ik}w_j + g_{jk}w_i)/3.
TensorValue sym_g_times(const Mat& g, const Vec& w);

/// Pair trace g^{ij} A^k_{ij}.
Vec pair_trace(const Mat& g_inv, const TensorValue& a);
/// Output trace τ_j = A^i_{ij}.
Vec output_trace(const TensorValue& a);

/// Where the output index of D sits when D is read as a trilinear form in
/// the semi-degenerate obstruction N.
enum class NPlacement {
  OutputLast,   // D(X,Y,Z) = g(D̂(X,Y), Z)
  OutputFirst,  // D(X,Y,Z) = g(X, D̂(Y,Z))
  OutputMiddle  // D(X,Y,Z) = g(Y, D̂(X,Z))
};

/// All three placements pass the weak/strong calibration in tests/test_structure.cpp;
/// OutputLast is the one that agrees with the flattening convention above.
inline constexpr NPlacement kNPlacement = NPlacement::OutputLast;

std::string to_string(NPlacement p);

/// The trilinear form D(X,Y,Z) under a placement, from the flattened E_{ijk} = g_{kl}D^l_{ij}.
TensorValue placed(const TensorValue& e_flat, NPlacement p);

/// 𝒮_{ij} = S_{ikl} S_{jmn} g^{km} g^{ln}.
Mat s_square(const Mat& g_inv, const TensorValue& s);

/// Θ^k_{ijl} = T^m_{ij} T^k_{ml}: the output of T(X,Y) fed into the first covariant slot of T(·, Z).
TensorValue theta(const TensorValue& t);

}  // namespace dualgeo::conv
