#pragma once

// Test functions on R^4.
//
// The closed-form working set is P(x-c) * exp(-|x-c|^2/(2 sigma^2)) with P a
// complex-coefficient polynomial. This set is closed under everything the
// correlator machinery needs: derivatives, products, orthogonal affine
// pullbacks, time reflection, conjugation. A sampled-grid kind exists for
// functionals that only arrive as lattice data; it supports evaluation and
// low-order finite-difference seminorms and nothing fancier.

#include <array>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qgv {

using cplx = std::complex<double>;
using Vec4 = Eigen::Vector4d;
using MultiIndex = std::array<int, 4>;

// Polynomial in four variables, sparse monomial map.
class Poly4 {
 public:
  Poly4() = default;
  static Poly4 constant(cplx c);
  static Poly4 monomial(const MultiIndex& e, cplx c);

  const std::map<MultiIndex, cplx>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  Poly4& add_term(const MultiIndex& e, cplx c);
  Poly4 operator+(const Poly4& o) const;
  Poly4 operator-(const Poly4& o) const;
  Poly4 operator*(const Poly4& o) const;
  Poly4 scaled(cplx s) const;

  Poly4 derivative(int mu) const;
  // P(u) -> P(u + d)
  Poly4 shifted(const Vec4& d) const;
  // P(u) -> P(M u)
  Poly4 linear_substitution(const Eigen::Matrix4d& m) const;
  Poly4 conjugated() const;

  cplx eval(const Vec4& u) const;

 private:
  std::map<MultiIndex, cplx> terms_;
  void prune();
};

struct GridData {
  Vec4 origin = Vec4::Zero();
  double spacing = 1.0;
  std::array<int, 4> extent = {0, 0, 0, 0};
  std::vector<double> values;  // row-major, axis 3 fastest
};

class TestFunction {
 public:
  enum class Kind { GaussianPoly, Grid };

  static TestFunction gaussian(const Vec4& center, double width);
  static TestFunction gaussian_poly(const Vec4& center, double width, Poly4 p);
  static TestFunction grid(GridData data);

  Kind kind() const { return kind_; }
  const Vec4& center() const { return center_; }
  double width() const { return width_; }
  const Poly4& poly() const { return poly_; }
  const GridData& grid_data() const { return grid_; }

  cplx eval(const Vec4& x) const;
  // \int f(x) e^{-i p.x} d^4x  (closed form; GaussianPoly only)
  cplx fourier(const Vec4& p) const;
  cplx integral() const;

  TestFunction derivative(int mu) const;
  TestFunction scaled(cplx s) const;
  // product of two closed-form functions (Gaussian algebra, recentered)
  static TestFunction product(const TestFunction& a, const TestFunction& b);
  // f(R^{-1}(x - a)) for orthogonal R; throws if R is not an isometry.
  TestFunction affine_pullback(const Eigen::Matrix4d& r, const Vec4& a) const;
  TestFunction translated(const Vec4& a) const;
  // (Theta f)(x) = conj(f(-x^0, vec x))
  TestFunction theta_reflected() const;
  TestFunction conjugated() const;

  // sup over x, |gamma| <= 4c of (1 + |x|^2)^{c/2} |d^gamma f(x)|.
  // GaussianPoly: symbolic derivatives + multistart coordinate-ascent search.
  // Grid: finite differences; throws if 4c exceeds the stencil capability.
  double schwartz_seminorm(int c) const;

  bool is_real() const;

 private:
  Kind kind_ = Kind::GaussianPoly;
  Vec4 center_ = Vec4::Zero();
  double width_ = 1.0;
  Poly4 poly_;
  GridData grid_;
};

}  // namespace qgv
