#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "qgv/group.hpp"
#include "qgv/rng.hpp"

using namespace qgv;

namespace {

// Independent matrix exponential: plain Taylor series with scaling and squaring.
Mat taylor_exp(const Mat& x) {
  const int n = int(x.rows());
  double norm = x.cwiseAbs().sum();
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const Mat xs = x / std::pow(2.0, squarings);
  Mat term = Mat::Identity(n, n);
  Mat sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * xs / double(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

double epsilon3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0.0;
  // parity of the permutation (a,b,c) of (0,1,2)
  int swaps = 0;
  int p[3] = {a, b, c};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) {
        std::swap(p[i], p[j]);
        ++swaps;
      }
  return swaps % 2 == 0 ? 1.0 : -1.0;
}

}  // namespace

TEST_CASE("generator normalization") {
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    const auto& ts = g.generators();
    for (std::size_t a = 0; a < ts.size(); ++a) {
      // anti-Hermitian
      CHECK(((ts[a] + ts[a].adjoint()).cwiseAbs().maxCoeff()) < 1e-14);
      for (std::size_t b = 0; b < ts.size(); ++b) {
        const cplx tr = (ts[a] * ts[b]).trace();
        const double expect = id == GroupId::U1 ? -1.0 : (a == b ? -0.5 : 0.0);
        CHECK(std::abs(tr - cplx(expect, 0)) < 1e-14);
      }
    }
  }
}

TEST_CASE("su2 structure constants are epsilon") {
  GaugeGroup g(GroupId::SU2);
  const auto& c = g.structure_constants();
  for (int gamma = 0; gamma < 3; ++gamma)
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int beta = 0; beta < 3; ++beta)
        CHECK(c[gamma](alpha, beta) == doctest::Approx(epsilon3(gamma, alpha, beta)).epsilon(1e-12));
}

TEST_CASE("su3 structure constants, frozen entries") {
  GaugeGroup g(GroupId::SU3);
  const auto& c = g.structure_constants();
  // zero-based labels: C[gamma](alpha, beta)
  CHECK(c[2](0, 1) == doctest::Approx(1.0));            // 123
  CHECK(std::abs(c[6](3, 4)) < 1e-12);                  // 745 vanishes
  CHECK(c[6](0, 3) == doctest::Approx(0.5));            // 714 -> f_147
  CHECK(c[6](1, 4) == doctest::Approx(0.5));            // 725 -> f_257
  CHECK(c[2](3, 4) == doctest::Approx(0.5));            // 345
  CHECK(c[7](3, 4) == doctest::Approx(std::sqrt(3.0) / 2));  // 845
  // antisymmetry in the lower pair
  for (int gamma = 0; gamma < 8; ++gamma)
    CHECK((c[gamma] + c[gamma].transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("commutators close on the structure constants") {
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    const auto& ts = g.generators();
    const auto& c = g.structure_constants();
    const int n = g.algebra_dim();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Mat lhs = ts[a] * ts[b] - ts[b] * ts[a];
        for (int gamma = 0; gamma < n; ++gamma) lhs -= c[gamma](a, b) * ts[gamma];
        CHECK(lhs.cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("adjoint generators satisfy the bracket with an i") {
  for (auto id : {GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    const int n = g.algebra_dim();
    const auto& c = g.structure_constants();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const Mat aa = g.adjoint_generator(a);
        const Mat ab = g.adjoint_generator(b);
        Mat lhs = aa * ab - ab * aa;
        for (int gamma = 0; gamma < n; ++gamma)
          lhs -= cplx(0, 1) * c[gamma](a, b) * g.adjoint_generator(gamma);
        CHECK(lhs.cwiseAbs().maxCoeff() < 1e-12);
      }
    // adjoint generators are Hermitian in this convention
    for (int a = 0; a < n; ++a)
      CHECK((g.adjoint_generator(a) - g.adjoint_generator(a).adjoint()).cwiseAbs().maxCoeff() <
            1e-12);
  }
}

TEST_CASE("exp_map agrees with an independent Taylor exponential") {
  RngStream rng = RngStream::derive(7771, {1});
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd coeff(g.algebra_dim());
      for (int i = 0; i < coeff.size(); ++i) coeff[i] = rng.uniform(-1.5, 1.5);
      Mat x = Mat::Zero(g.matrix_dim(), g.matrix_dim());
      for (int i = 0; i < coeff.size(); ++i) x += coeff[i] * g.generators()[i];
      const Mat via_lib = g.exp_map(coeff);
      const Mat via_taylor = taylor_exp(x);
      CHECK((via_lib - via_taylor).cwiseAbs().maxCoeff() < 1e-12);
      // group element: unitary, unit determinant for SU(N)
      CHECK((via_lib * via_lib.adjoint() - Mat::Identity(g.matrix_dim(), g.matrix_dim()))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      if (id != GroupId::U1) CHECK(std::abs(via_lib.determinant() - cplx(1, 0)) < 1e-12);
    }
  }
}

TEST_CASE("algebra_coefficients round trip and rejection") {
  RngStream rng = RngStream::derive(7771, {2});
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    Eigen::VectorXd coeff(g.algebra_dim());
    for (int i = 0; i < coeff.size(); ++i) coeff[i] = rng.uniform(-2, 2);
    Mat x = Mat::Zero(g.matrix_dim(), g.matrix_dim());
    for (int i = 0; i < coeff.size(); ++i) x += coeff[i] * g.generators()[i];
    const Eigen::VectorXd back = g.algebra_coefficients(x);
    CHECK((back - coeff).cwiseAbs().maxCoeff() < 1e-12);
  }
  GaugeGroup su2(GroupId::SU2);
  CHECK_THROWS(su2.algebra_coefficients(Mat::Identity(2, 2)));
}

TEST_CASE("haar samples: unitarity and character statistics") {
  // E |tr U|^2 = 1 over Haar for the fundamental of a compact simple group;
  // E tr U = 0. Statistical tolerance 4 sigma with sigma ~ 1/sqrt(N).
  const int N = 20000;
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    RngStream rng = RngStream::derive(991100, {uint64_t(id)});
    cplx mean_tr(0, 0);
    double mean_abs2 = 0;
    for (int i = 0; i < N; ++i) {
      const Mat u = g.haar_sample(rng);
      CHECK((u * u.adjoint() - Mat::Identity(g.matrix_dim(), g.matrix_dim()))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      if (id != GroupId::U1) REQUIRE(std::abs(u.determinant() - cplx(1, 0)) < 1e-12);
      const cplx tr = u.trace();
      mean_tr += tr;
      mean_abs2 += std::norm(tr);
    }
    mean_tr /= double(N);
    mean_abs2 /= double(N);
    const double tol = 4.0 / std::sqrt(double(N));
    CHECK(std::abs(mean_tr) < 2 * tol);
    CHECK(std::abs(mean_abs2 - 1.0) < 4 * tol);
  }
}

TEST_CASE("project_to_group restores nearby unitaries") {
  RngStream rng = RngStream::derive(31337, {5});
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3}) {
    GaugeGroup g(id);
    const Mat u = g.haar_sample(rng);
    // exact elements are fixed points
    CHECK((g.project_to_group(u) - u).cwiseAbs().maxCoeff() < 1e-12);
    // perturbed elements come back to the group
    Mat noisy = u;
    for (int i = 0; i < noisy.rows(); ++i)
      for (int j = 0; j < noisy.cols(); ++j)
        noisy(i, j) += cplx(rng.uniform(-1e-4, 1e-4), rng.uniform(-1e-4, 1e-4));
    const Mat fixed = g.project_to_group(noisy);
    CHECK((fixed * fixed.adjoint() - Mat::Identity(g.matrix_dim(), g.matrix_dim()))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    if (id != GroupId::U1) CHECK(std::abs(fixed.determinant() - cplx(1, 0)) < 1e-13);
    CHECK((fixed - u).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("group names round trip") {
  for (auto id : {GroupId::U1, GroupId::SU2, GroupId::SU3})
    CHECK(group_from_name(group_name(id)) == id);
  CHECK_THROWS(group_from_name("so10"));
}
