#include "qgv/spacetime.hpp"

#include <stdexcept>

namespace qgv {

namespace {

const cplx I(0.0, 1.0);

std::vector<Mat> pauli() {
  std::vector<Mat> s(3, Mat::Zero(2, 2));
  s[0] << 0, 1, 1, 0;
  s[1] << 0, -I, I, 0;
  s[2] << 1, 0, 0, -1;
  return s;
}

Mat tensor_rep(const Mat& undotted, const Mat& dotted, const SpinorIndexSet& idx) {
  Mat rep = Mat::Identity(1, 1);
  for (const auto& slot : idx.slots) {
    for (int k = 0; k < slot.undotted; ++k) rep = kron(rep, undotted);
    for (int k = 0; k < slot.dotted; ++k) rep = kron(rep, dotted);
  }
  return rep;
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

Mat spinor_rep_lorentz(const Mat& a, const SpinorIndexSet& idx) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("SL(2,C) element must be 2x2");
  return tensor_rep(a, a.conjugate(), idx);
}

Mat spinor_rep_euclidean(const Mat& u, const Mat& v, const SpinorIndexSet& idx) {
  if (u.rows() != 2 || v.rows() != 2) throw std::invalid_argument("SU(2) elements must be 2x2");
  return tensor_rep(u, v.conjugate(), idx);
}

Eigen::Matrix4d vector_rep_lorentz(const Mat& a) {
  const auto s = pauli();
  std::vector<Mat> sig(4, Mat::Identity(2, 2));
  for (int k = 0; k < 3; ++k) sig[k + 1] = s[k];
  Eigen::Matrix4d lam;
  for (int nu = 0; nu < 4; ++nu) {
    const Mat img = a * sig[nu] * a.adjoint();
    // Decompose img = sum_mu x^mu sigma_mu: x^0 = tr/2, x^k = tr(sigma_k .)/2.
    for (int mu = 0; mu < 4; ++mu) {
      const cplx comp = (sig[mu] * img).trace() / 2.0;
      lam(mu, nu) = comp.real();
    }
  }
  return lam;
}

Eigen::Matrix4d vector_rep_euclidean(const Mat& u, const Mat& v) {
  const auto s = pauli();
  // Basis quaternions q_mu: q_0 = 1, q_k = i sigma_k.
  std::vector<Mat> q(4);
  q[0] = Mat::Identity(2, 2);
  for (int k = 0; k < 3; ++k) q[k + 1] = I * s[k];
  Eigen::Matrix4d rot;
  for (int nu = 0; nu < 4; ++nu) {
    const Mat img = u * q[nu] * v.adjoint();
    // x^0 = Re tr/2, x^k = Im tr(sigma_k .)/2... extract via tr(q_mu^dag img)/2.
    for (int mu = 0; mu < 4; ++mu) {
      const cplx comp = (q[mu].adjoint() * img).trace() / 2.0;
      rot(mu, nu) = comp.real();
    }
  }
  return rot;
}

Eigen::Matrix4d minkowski_metric() {
  Eigen::Matrix4d eta = Eigen::Matrix4d::Zero();
  eta(0, 0) = 1;
  eta(1, 1) = eta(2, 2) = eta(3, 3) = -1;
  return eta;
}

}  // namespace qgv
