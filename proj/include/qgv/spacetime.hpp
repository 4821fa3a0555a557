#pragma once

// Finite-dimensional spacetime symmetry representations.
//
// Lorentz side: A in SL(2,C) acts on undotted indices as A and on dotted ones
// as conj(A); the induced vector action x -> Lambda(A)x comes from
// X = x^mu sigma_mu |-> A X A^dag and preserves eta = diag(+,-,-,-).
//
// Euclidean side: (U,V) in SU(2) x SU(2) acts through X = x^0 + i x.sigma
// |-> U X V^dag, giving R(U,V) in SO(4). Both double covers satisfy
// rep(-g) = rep(g) on vectors.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qgv {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Per-slot spinor index counts: l_k undotted, m_k dotted. The representation
// space is the tensor product over slots of (C^2)^{l_k} (x) (C^2)^{m_k}.
struct SpinorIndexSet {
  struct Slot { int undotted = 0; int dotted = 0; };
  std::vector<Slot> slots;

  int total_factors() const {
    int n = 0;
    for (const auto& s : slots) n += s.undotted + s.dotted;
    return n;
  }
  long dimension() const { return 1L << total_factors(); }
};

Mat kron(const Mat& a, const Mat& b);

// Tensor-product spinor representation. Lorentz: undotted factor A, dotted
// factor conj(A). Euclidean: undotted factor U, dotted factor conj(V).
Mat spinor_rep_lorentz(const Mat& a, const SpinorIndexSet& idx);
Mat spinor_rep_euclidean(const Mat& u, const Mat& v, const SpinorIndexSet& idx);

// Induced 4x4 real vector representations.
Eigen::Matrix4d vector_rep_lorentz(const Mat& a);
Eigen::Matrix4d vector_rep_euclidean(const Mat& u, const Mat& v);

// Minkowski metric diag(+1,-1,-1,-1).
Eigen::Matrix4d minkowski_metric();

}  // namespace qgv
