#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "qgv/quad.hpp"
#include "qgv/rng.hpp"
#include "qgv/testfunc.hpp"

using namespace qgv;

namespace {

Vec4 rand_point(RngStream& rng, double scale = 2.0) {
  return Vec4(rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale),
              rng.uniform(-scale, scale));
}

Poly4 sample_poly(RngStream& rng, int deg) {
  Poly4 p;
  for (int t = 0; t < 5; ++t) {
    MultiIndex e{};
    int budget = deg;
    for (int mu = 0; mu < 4; ++mu) {
      e[mu] = int(rng.below(uint64_t(budget + 1)));
      budget -= e[mu];
    }
    p.add_term(e, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
  }
  return p;
}

// 1D oracle: \int (x^k) e^{-x^2/(2 s^2)} e^{-i p x} dx  computed numerically
cplx moment_fourier_1d(int k, double s, double p) {
  auto re = [&](double x) { return std::pow(x, k) * std::exp(-x * x / (2 * s * s)) * std::cos(p * x); };
  auto im = [&](double x) { return -std::pow(x, k) * std::exp(-x * x / (2 * s * s)) * std::sin(p * x); };
  const double lim = 12 * s;
  return cplx(integrate_adaptive(re, -lim, lim, 1e-13), integrate_adaptive(im, -lim, lim, 1e-13));
}

}  // namespace

TEST_CASE("poly algebra: ring identities at random points") {
  RngStream rng = RngStream::derive(88, {1});
  const Poly4 p = sample_poly(rng, 3), q = sample_poly(rng, 2), r = sample_poly(rng, 2);
  const Poly4 lhs = (p + q) * r;
  const Poly4 rhs = p * r + q * r;
  for (int i = 0; i < 10; ++i) {
    const Vec4 x = rand_point(rng);
    CHECK(std::abs(lhs.eval(x) - rhs.eval(x)) < 1e-12 * (1 + std::abs(lhs.eval(x))));
    CHECK(std::abs((p * q).eval(x) - p.eval(x) * q.eval(x)) < 1e-11);
  }
}

TEST_CASE("poly shift: Q = P.shifted(d) means Q(u) = P(u + d)") {
  RngStream rng = RngStream::derive(88, {2});
  const Poly4 p = sample_poly(rng, 3);
  const Vec4 d = rand_point(rng, 1.0);
  const Poly4 q = p.shifted(d);
  for (int i = 0; i < 10; ++i) {
    const Vec4 u = rand_point(rng);
    CHECK(std::abs(q.eval(u) - p.eval(u + d)) < 1e-11);
  }
}

TEST_CASE("poly derivative matches finite differences") {
  RngStream rng = RngStream::derive(88, {3});
  const Poly4 p = sample_poly(rng, 4);
  const double h = 1e-5;
  for (int mu = 0; mu < 4; ++mu) {
    const Poly4 dp = p.derivative(mu);
    for (int i = 0; i < 5; ++i) {
      Vec4 x = rand_point(rng);
      Vec4 xp = x, xm = x;
      xp[mu] += h;
      xm[mu] -= h;
      const cplx fd = (p.eval(xp) - p.eval(xm)) / (2 * h);
      CHECK(std::abs(dp.eval(x) - fd) < 1e-6);
    }
  }
}

TEST_CASE("poly linear substitution: P.linear_substitution(M)(u) = P(M u)") {
  RngStream rng = RngStream::derive(88, {4});
  const Poly4 p = sample_poly(rng, 3);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-1, 1);
  const Poly4 q = p.linear_substitution(m);
  for (int i = 0; i < 8; ++i) {
    const Vec4 u = rand_point(rng, 1.0);
    CHECK(std::abs(q.eval(u) - p.eval(m * u)) < 1e-10);
  }
}

TEST_CASE("gaussian products multiply pointwise") {
  RngStream rng = RngStream::derive(88, {5});
  const TestFunction f = TestFunction::gaussian_poly(Vec4(0.3, -0.2, 0.5, 0.1), 0.8,
                                                     sample_poly(rng, 2));
  const TestFunction g = TestFunction::gaussian_poly(Vec4(-0.4, 0.6, 0.0, -0.3), 1.3,
                                                     sample_poly(rng, 3));
  const TestFunction fg = TestFunction::product(f, g);
  for (int i = 0; i < 12; ++i) {
    const Vec4 x = rand_point(rng);
    const cplx expect = f.eval(x) * g.eval(x);
    CHECK(std::abs(fg.eval(x) - expect) < 1e-12 * (1 + std::abs(expect)));
  }
}

TEST_CASE("test-function derivative matches finite differences") {
  RngStream rng = RngStream::derive(88, {6});
  const TestFunction f = TestFunction::gaussian_poly(Vec4(0.2, 0.1, -0.4, 0.0), 1.1,
                                                     sample_poly(rng, 3));
  const double h = 1e-5;
  for (int mu = 0; mu < 4; ++mu) {
    const TestFunction df = f.derivative(mu);
    for (int i = 0; i < 4; ++i) {
      Vec4 x = rand_point(rng, 1.5);
      Vec4 xp = x, xm = x;
      xp[mu] += h;
      xm[mu] -= h;
      const cplx fd = (f.eval(xp) - f.eval(xm)) / (2 * h);
      CHECK(std::abs(df.eval(x) - fd) < 1e-6);
    }
  }
}

TEST_CASE("fourier transform against per-axis quadrature") {
  RngStream rng = RngStream::derive(88, {7});
  // single-axis polynomial so the 4D transform factorizes into 1D oracles
  Poly4 p;
  p.add_term({0, 0, 0, 0}, cplx(0.7, 0.2));
  p.add_term({2, 0, 0, 0}, cplx(-0.4, 0.0));
  p.add_term({3, 0, 0, 0}, cplx(0.0, 0.5));
  const double s = 0.9;
  const Vec4 c(0.25, -0.5, 0.1, 0.0);
  const TestFunction f = TestFunction::gaussian_poly(c, s, p);
  for (int trial = 0; trial < 4; ++trial) {
    const Vec4 q = rand_point(rng, 1.2);
    // oracle: shift x -> c + u, pick up phase e^{-i q.c}
    cplx expect = std::exp(cplx(0, -q.dot(c)));
    cplx axis0(0, 0);
    axis0 += cplx(0.7, 0.2) * moment_fourier_1d(0, s, q[0]);
    axis0 += cplx(-0.4, 0.0) * moment_fourier_1d(2, s, q[0]);
    axis0 += cplx(0.0, 0.5) * moment_fourier_1d(3, s, q[0]);
    expect *= axis0;
    for (int mu = 1; mu < 4; ++mu) expect *= moment_fourier_1d(0, s, q[mu]);
    const cplx got = f.fourier(q);
    CHECK(std::abs(got - expect) < 1e-10 * (1 + std::abs(expect)));
  }
}

TEST_CASE("integral equals fourier at zero") {
  RngStream rng = RngStream::derive(88, {8});
  const TestFunction f = TestFunction::gaussian_poly(Vec4(0.3, 0.0, -0.2, 0.4), 1.4,
                                                     sample_poly(rng, 2));
  CHECK(std::abs(f.integral() - f.fourier(Vec4::Zero())) < 1e-13 * (1 + std::abs(f.integral())));
}

TEST_CASE("euclidean motions act by pullback") {
  RngStream rng = RngStream::derive(88, {9});
  const TestFunction f = TestFunction::gaussian_poly(Vec4(0.5, -0.1, 0.2, 0.0), 1.0,
                                                     sample_poly(rng, 2));
  // rotation in the (0,1) plane plus a translation
  const double th = 0.77;
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r(0, 0) = std::cos(th);
  r(0, 1) = -std::sin(th);
  r(1, 0) = std::sin(th);
  r(1, 1) = std::cos(th);
  const Vec4 a(0.3, -0.6, 0.1, 0.9);
  const TestFunction moved = f.affine_pullback(r, a);
  for (int i = 0; i < 10; ++i) {
    const Vec4 x = rand_point(rng);
    const cplx expect = f.eval(r.transpose() * (x - a));
    CHECK(std::abs(moved.eval(x) - expect) < 1e-12 * (1 + std::abs(expect)));
  }
  CHECK_THROWS(f.affine_pullback(2 * r, a));  // not orthogonal

  const TestFunction shifted = f.translated(a);
  const Vec4 y = rand_point(rng);
  CHECK(std::abs(shifted.eval(y) - f.eval(y - a)) < 1e-12);
}

TEST_CASE("theta reflection conjugates and flips time") {
  RngStream rng = RngStream::derive(88, {10});
  const TestFunction f = TestFunction::gaussian_poly(Vec4(0.5, -0.1, 0.2, 0.3), 0.9,
                                                     sample_poly(rng, 3));
  const TestFunction tf = f.theta_reflected();
  for (int i = 0; i < 10; ++i) {
    const Vec4 x = rand_point(rng);
    const Vec4 rx(-x[0], x[1], x[2], x[3]);
    CHECK(std::abs(tf.eval(x) - std::conj(f.eval(rx))) < 1e-12);
  }
  // involution
  const TestFunction ttf = tf.theta_reflected();
  const Vec4 x = rand_point(rng);
  CHECK(std::abs(ttf.eval(x) - f.eval(x)) < 1e-13);
}

TEST_CASE("frozen seminorm: unit gaussian at order 1 gives 3") {
  const TestFunction f = TestFunction::gaussian(Vec4::Zero(), 1.0);
  CHECK(f.schwartz_seminorm(1) == doctest::Approx(3.0).epsilon(1e-6));
  // order 0 is the sup of the function itself
  CHECK(f.schwartz_seminorm(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("seminorm: dense-sampling oracle on a shifted gaussian") {
  const TestFunction f = TestFunction::gaussian(Vec4(0.4, 0.0, -0.3, 0.2), 1.2);
  const double got = f.schwartz_seminorm(1);
  // oracle: scan weighted first and fourth time-derivatives on a dense axis grid
  double best = 0;
  const auto d1 = f.derivative(0);
  const auto d4 = f.derivative(0).derivative(0).derivative(0).derivative(0);
  for (double t = -8; t <= 8; t += 0.002) {
    const Vec4 x(t, 0.0, -0.3, 0.2);
    const double w = std::pow(1 + x.squaredNorm(), 0.5);
    best = std::max(best, w * std::abs(f.eval(x)));
    best = std::max(best, w * std::abs(d1.eval(x)));
    best = std::max(best, w * std::abs(d4.eval(x)));
  }
  CHECK(got >= best - 1e-7);
  CHECK(got < 20 * best);  // same scale
}

TEST_CASE("grid functions: eval, seminorm agreement, stencil limits") {
  // sample a unit gaussian onto a grid and compare the order-1 seminorm
  const TestFunction g = TestFunction::gaussian(Vec4::Zero(), 1.0);
  GridData grid;
  grid.origin = Vec4(-4, -4, -4, -4);
  grid.spacing = 0.5;
  grid.extent = {17, 17, 17, 17};
  grid.values.resize(std::size_t(17) * 17 * 17 * 17);
  std::size_t flat = 0;
  for (long i0 = 0; i0 < 17; ++i0)
    for (long i1 = 0; i1 < 17; ++i1)
      for (long i2 = 0; i2 < 17; ++i2)
        for (long i3 = 0; i3 < 17; ++i3) {
          const Vec4 x = grid.origin + grid.spacing * Vec4(double(i0), double(i1), double(i2), double(i3));
          grid.values[flat++] = g.eval(x).real();
        }
  const TestFunction gf = TestFunction::grid(grid);
  CHECK(std::abs(gf.eval(Vec4::Zero()) - cplx(1, 0)) < 1e-12);
  const double sm_grid = gf.schwartz_seminorm(1);
  const double sm_exact = g.schwartz_seminorm(1);
  CHECK(sm_grid == doctest::Approx(sm_exact).epsilon(0.08));  // stencil + lattice error
  // derivatives above the stencil order are refused
  CHECK_THROWS_AS((void)gf.schwartz_seminorm(2), std::domain_error);
}

TEST_CASE("is_real flags complex coefficients") {
  Poly4 p;
  p.add_term({0, 0, 0, 0}, cplx(1, 0));
  const TestFunction f = TestFunction::gaussian_poly(Vec4::Zero(), 1.0, p);
  CHECK(f.is_real());
  Poly4 q;
  q.add_term({1, 0, 0, 0}, cplx(0, 1));
  const TestFunction g = TestFunction::gaussian_poly(Vec4::Zero(), 1.0, q);
  CHECK(!g.is_real());
  const TestFunction sum_check = g.conjugated();
  const Vec4 x(0.3, 0.1, 0.0, -0.2);
  CHECK(std::abs(sum_check.eval(x) - std::conj(g.eval(x))) < 1e-14);
}
