#include "qgv/group.hpp"

#include <cmath>

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

std::vector<Mat> gell_mann() {
  std::vector<Mat> l(8, Mat::Zero(3, 3));
  l[0](0, 1) = 1; l[0](1, 0) = 1;
  l[1](0, 1) = -I; l[1](1, 0) = I;
  l[2](0, 0) = 1; l[2](1, 1) = -1;
  l[3](0, 2) = 1; l[3](2, 0) = 1;
  l[4](0, 2) = -I; l[4](2, 0) = I;
  l[5](1, 2) = 1; l[5](2, 1) = 1;
  l[6](1, 2) = -I; l[6](2, 1) = I;
  l[7](0, 0) = 1; l[7](1, 1) = 1; l[7](2, 2) = -2;
  l[7] /= std::sqrt(3.0);
  return l;
}

std::vector<Mat> make_generators(GroupId id) {
  switch (id) {
    case GroupId::U1: {
      Mat t(1, 1);
      t(0, 0) = I;
      return {t};
    }
    case GroupId::SU2: {
      std::vector<Mat> g;
      for (const Mat& s : pauli()) g.push_back(-I / 2.0 * s);
      return g;
    }
    case GroupId::SU3: {
      std::vector<Mat> g;
      for (const Mat& l : gell_mann()) g.push_back(-I / 2.0 * l);
      return g;
    }
  }
  throw std::logic_error("unknown group id");
}

}  // namespace

const char* group_name(GroupId g) {
  switch (g) {
    case GroupId::U1: return "u1";
    case GroupId::SU2: return "su2";
    case GroupId::SU3: return "su3";
  }
  return "?";
}

GroupId group_from_name(const std::string& name) {
  if (name == "u1" || name == "U1") return GroupId::U1;
  if (name == "su2" || name == "SU2") return GroupId::SU2;
  if (name == "su3" || name == "SU3") return GroupId::SU3;
  throw std::invalid_argument("unknown gauge group: " + name);
}

GaugeGroup::GaugeGroup(GroupId id) : id_(id), gens_(make_generators(id)) {
  // Structure constants from the commutators themselves; the basis is trace-
  // orthogonal so coefficient extraction is a scaled trace.
  const int n = algebra_dim();
  C_.assign(n, Eigen::MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Mat comm = gens_[a] * gens_[b] - gens_[b] * gens_[a];
      const Eigen::VectorXd c = algebra_coefficients(comm, 1e-12);
      for (int g = 0; g < n; ++g) C_[g](a, b) = c[g];
    }
  }
}

Eigen::VectorXd GaugeGroup::algebra_coefficients(const Mat& X, double tol) const {
  const int n = algebra_dim();
  Eigen::VectorXd c(n);
  double resid = 0.0;
  Mat rebuilt = Mat::Zero(X.rows(), X.cols());
  for (int g = 0; g < n; ++g) {
    const cplx num = (gens_[g].adjoint() * X).trace();
    const double den = (gens_[g].adjoint() * gens_[g]).trace().real();
    resid = std::max(resid, std::abs(num.imag()) / den);
    c[g] = num.real() / den;
    rebuilt += c[g] * gens_[g];
  }
  resid = std::max(resid, (X - rebuilt).norm());
  if (resid > tol * std::max(1.0, X.norm()))
    throw std::invalid_argument("matrix is not in the algebra span");
  return c;
}

Mat GaugeGroup::exp_map(const Eigen::VectorXd& coeffs, double scale) const {
  if (coeffs.size() != algebra_dim())
    throw std::invalid_argument("coefficient count != algebra dimension");
  Mat X = Mat::Zero(matrix_dim(), matrix_dim());
  for (int g = 0; g < algebra_dim(); ++g) X += (scale * coeffs[g]) * gens_[g];
  if (matrix_dim() == 1) {
    Mat r(1, 1);
    r(0, 0) = std::exp(X(0, 0));
    return r;
  }
  // X anti-Hermitian => H = -iX Hermitian; exp(X) = V e^{i diag} V^dag.
  Eigen::SelfAdjointEigenSolver<Mat> es(-I * X);
  Mat phase = Mat::Zero(matrix_dim(), matrix_dim());
  for (int k = 0; k < matrix_dim(); ++k) phase(k, k) = std::exp(I * es.eigenvalues()[k]);
  return es.eigenvectors() * phase * es.eigenvectors().adjoint();
}

Mat GaugeGroup::adjoint_generator(int gamma) const {
  const int n = algebra_dim();
  if (gamma < 0 || gamma >= n) throw std::out_of_range("adjoint generator index");
  Mat A = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int d = 0; d < n; ++d) A(a, d) = -I * C_[a](d, gamma);
  return A;
}

Mat GaugeGroup::haar_sample(RngStream& rng) const {
  switch (id_) {
    case GroupId::U1: {
      Mat u(1, 1);
      u(0, 0) = std::exp(I * rng.uniform(0.0, 2.0 * M_PI));
      return u;
    }
    case GroupId::SU2: {
      // Uniform point on S^3 as a unit quaternion.
      Eigen::Vector4d q;
      do {
        for (int k = 0; k < 4; ++k) q[k] = rng.normal();
      } while (q.norm() < 1e-12);
      q.normalize();
      Mat u(2, 2);
      u << cplx(q[0], q[3]), cplx(q[2], q[1]),
           cplx(-q[2], q[1]), cplx(q[0], -q[3]);
      return u;
    }
    case GroupId::SU3: {
      // QR of a complex Ginibre matrix with the R-diagonal phase fix gives
      // Haar on U(3); dividing by det^{1/3} pushes it to SU(3) (the leftover
      // center element is Haar-invariant).
      Mat z(3, 3);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z(r, c) = cplx(rng.normal(), rng.normal());
      Eigen::HouseholderQR<Mat> qr(z);
      Mat q = qr.householderQ();
      Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int k = 0; k < 3; ++k) {
        cplx d = r(k, k);
        q.col(k) *= (std::abs(d) > 0 ? d / std::abs(d) : cplx(1, 0));
      }
      const cplx det = q.determinant();
      return q * std::exp(-I * std::arg(det) / 3.0);
    }
  }
  throw std::logic_error("unknown group id");
}

Mat GaugeGroup::project_to_group(const Mat& near) const {
  if (matrix_dim() == 1) {
    Mat r(1, 1);
    const double a = std::abs(near(0, 0));
    r(0, 0) = a > 0 ? near(0, 0) / a : cplx(1, 0);
    return r;
  }
  Eigen::JacobiSVD<Mat> svd(near, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU() * svd.matrixV().adjoint();
  // Pull the determinant phase back to 1 (principal root; near ~ SU(N) so the
  // phase is small and the branch unambiguous).
  const cplx det = u.determinant();
  return u * std::exp(-I * std::arg(det) / double(matrix_dim()));
}

Mat GaugeGroup::random_algebra_element(RngStream& rng, double width) const {
  Eigen::VectorXd c(algebra_dim());
  for (int g = 0; g < algebra_dim(); ++g) c[g] = width * rng.normal();
  Mat X = Mat::Zero(matrix_dim(), matrix_dim());
  for (int g = 0; g < algebra_dim(); ++g) X += c[g] * gens_[g];
  return X;
}

}  // namespace qgv
