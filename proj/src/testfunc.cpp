#include "qgv/testfunc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qgv {

namespace {
constexpr double kPruneTol = 0.0;  // exact zero pruning only; keep algebra exact

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
  return r;
}
}  // namespace

Poly4 Poly4::constant(cplx c) {
  Poly4 p;
  p.add_term({0, 0, 0, 0}, c);
  return p;
}

Poly4 Poly4::monomial(const MultiIndex& e, cplx c) {
  Poly4 p;
  p.add_term(e, c);
  return p;
}

int Poly4::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2] + e[3]);
  return d;
}

Poly4& Poly4::add_term(const MultiIndex& e, cplx c) {
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (c != cplx(0, 0)) terms_[e] = c;
  } else {
    it->second += c;
    if (it->second == cplx(0, 0)) terms_.erase(it);
  }
  return *this;
}

void Poly4::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= kPruneTol) it = terms_.erase(it);
    else ++it;
  }
}

Poly4 Poly4::operator+(const Poly4& o) const {
  Poly4 r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Poly4 Poly4::operator-(const Poly4& o) const {
  Poly4 r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

Poly4 Poly4::operator*(const Poly4& o) const {
  Poly4 r;
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_)
      r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]}, ca * cb);
  return r;
}

Poly4 Poly4::scaled(cplx s) const {
  Poly4 r;
  if (s == cplx(0, 0)) return r;
  for (const auto& [e, c] : terms_) r.add_term(e, c * s);
  return r;
}

Poly4 Poly4::derivative(int mu) const {
  Poly4 r;
  for (const auto& [e, c] : terms_) {
    if (e[mu] == 0) continue;
    MultiIndex d = e;
    d[mu] -= 1;
    r.add_term(d, c * double(e[mu]));
  }
  return r;
}

Poly4 Poly4::shifted(const Vec4& d) const {
  Poly4 r;
  for (const auto& [e, c] : terms_) {
    // (u+d)^e expanded coordinate-wise
    std::array<std::vector<cplx>, 4> axis;  // axis[mu][k] = coeff of u^k
    for (int mu = 0; mu < 4; ++mu) {
      axis[mu].assign(e[mu] + 1, cplx(0, 0));
      for (int k = 0; k <= e[mu]; ++k)
        axis[mu][k] = binom(e[mu], k) * std::pow(d[mu], double(e[mu] - k));
    }
    for (int k0 = 0; k0 <= e[0]; ++k0)
      for (int k1 = 0; k1 <= e[1]; ++k1)
        for (int k2 = 0; k2 <= e[2]; ++k2)
          for (int k3 = 0; k3 <= e[3]; ++k3)
            r.add_term({k0, k1, k2, k3},
                       c * axis[0][k0] * axis[1][k1] * axis[2][k2] * axis[3][k3]);
  }
  return r;
}

Poly4 Poly4::linear_substitution(const Eigen::Matrix4d& m) const {
  Poly4 r;
  for (const auto& [e, c] : terms_) {
    // product over mu of (sum_nu m(mu,nu) u_nu)^{e_mu}
    Poly4 term = Poly4::constant(c);
    for (int mu = 0; mu < 4; ++mu) {
      Poly4 lin;
      for (int nu = 0; nu < 4; ++nu) {
        if (m(mu, nu) == 0.0) continue;
        MultiIndex one = {0, 0, 0, 0};
        one[nu] = 1;
        lin.add_term(one, m(mu, nu));
      }
      for (int k = 0; k < e[mu]; ++k) term = term * lin;
    }
    r = r + term;
  }
  return r;
}

Poly4 Poly4::conjugated() const {
  Poly4 r;
  for (const auto& [e, c] : terms_) r.add_term(e, std::conj(c));
  return r;
}

cplx Poly4::eval(const Vec4& u) const {
  cplx v(0, 0);
  for (const auto& [e, c] : terms_) {
    double mono = 1.0;
    for (int mu = 0; mu < 4; ++mu)
      for (int k = 0; k < e[mu]; ++k) mono *= u[mu];
    v += c * mono;
  }
  return v;
}

// ---------------------------------------------------------------------------

TestFunction TestFunction::gaussian(const Vec4& center, double width) {
  return gaussian_poly(center, width, Poly4::constant(cplx(1, 0)));
}

TestFunction TestFunction::gaussian_poly(const Vec4& center, double width, Poly4 p) {
  if (width <= 0) throw std::invalid_argument("gaussian width must be positive");
  TestFunction f;
  f.kind_ = Kind::GaussianPoly;
  f.center_ = center;
  f.width_ = width;
  f.poly_ = std::move(p);
  return f;
}

TestFunction TestFunction::grid(GridData data) {
  std::size_t n = 1;
  for (int mu = 0; mu < 4; ++mu) n *= std::size_t(std::max(0, data.extent[mu]));
  if (data.values.size() != n) throw std::invalid_argument("grid value count mismatch");
  if (data.spacing <= 0) throw std::invalid_argument("grid spacing must be positive");
  TestFunction f;
  f.kind_ = Kind::Grid;
  f.grid_ = std::move(data);
  return f;
}

cplx TestFunction::eval(const Vec4& x) const {
  if (kind_ == Kind::Grid) {
    // nearest-sample lookup; grid functions are step-like by construction
    const auto& g = grid_;
    std::size_t idx = 0;
    for (int mu = 0; mu < 4; ++mu) {
      const double t = (x[mu] - g.origin[mu]) / g.spacing;
      const long i = std::lround(t);
      if (i < 0 || i >= g.extent[mu]) return 0.0;
      idx = idx * std::size_t(g.extent[mu]) + std::size_t(i);
    }
    return g.values[idx];
  }
  const Vec4 u = x - center_;
  return poly_.eval(u) * std::exp(-u.squaredNorm() / (2 * width_ * width_));
}

namespace {
// 1D moment transforms q_k with \int u^k e^{-u^2/2s^2} e^{-ipu} du
//   = q_k(p) e^{-s^2 p^2/2}; built once per degree as polynomial coefficients.
std::vector<std::vector<cplx>> fourier_polys(double s2, int max_deg) {
  // q_0 = sqrt(2 pi s^2); q_k = i (q_{k-1}' - s^2 p q_{k-1})
  std::vector<std::vector<cplx>> q(max_deg + 1);
  q[0] = {cplx(std::sqrt(2 * M_PI * s2), 0)};
  const cplx I(0, 1);
  for (int k = 1; k <= max_deg; ++k) {
    const auto& prev = q[k - 1];
    std::vector<cplx> cur(prev.size() + 1, cplx(0, 0));
    for (std::size_t j = 0; j + 1 < prev.size() + 1; ++j) {
      if (j + 1 < prev.size()) cur[j] += I * double(j + 1) * prev[j + 1];  // derivative
    }
    for (std::size_t j = 0; j < prev.size(); ++j) cur[j + 1] += -I * s2 * prev[j];
    q[k] = std::move(cur);
  }
  return q;
}

cplx eval_poly1(const std::vector<cplx>& coef, double p) {
  cplx v(0, 0);
  for (std::size_t j = coef.size(); j-- > 0;) v = v * p + coef[j];
  return v;
}
}  // namespace

cplx TestFunction::fourier(const Vec4& p) const {
  if (kind_ != Kind::GaussianPoly) throw std::logic_error("fourier: closed-form kind only");
  const double s2 = width_ * width_;
  const auto q = fourier_polys(s2, poly_.degree());
  cplx sum(0, 0);
  for (const auto& [e, c] : poly_.terms()) {
    cplx term = c;
    for (int mu = 0; mu < 4; ++mu) term *= eval_poly1(q[e[mu]], p[mu]) * std::exp(-s2 * p[mu] * p[mu] / 2);
    sum += term;
  }
  const cplx I(0, 1);
  return sum * std::exp(-I * p.dot(center_));
}

cplx TestFunction::integral() const {
  if (kind_ == Kind::Grid) {
    double s = 0;
    for (double v : grid_.values) s += v;
    return s * std::pow(grid_.spacing, 4);
  }
  return fourier(Vec4::Zero());
}

TestFunction TestFunction::derivative(int mu) const {
  if (kind_ != Kind::GaussianPoly) throw std::logic_error("derivative: closed-form kind only");
  // d/dx_mu [P(u) G(u)] = [dP - P u_mu / s^2] G,  u = x - c
  MultiIndex one = {0, 0, 0, 0};
  one[mu] = 1;
  Poly4 p = poly_.derivative(mu) - (poly_ * Poly4::monomial(one, cplx(1, 0))).scaled(1.0 / (width_ * width_));
  return gaussian_poly(center_, width_, std::move(p));
}

TestFunction TestFunction::scaled(cplx s) const {
  if (kind_ == Kind::Grid) {
    if (s.imag() != 0) throw std::logic_error("grid functions are real-valued");
    GridData g = grid_;
    for (double& v : g.values) v *= s.real();
    return grid(std::move(g));
  }
  return gaussian_poly(center_, width_, poly_.scaled(s));
}

TestFunction TestFunction::product(const TestFunction& a, const TestFunction& b) {
  if (a.kind_ != Kind::GaussianPoly || b.kind_ != Kind::GaussianPoly)
    throw std::logic_error("product: closed-form kind only");
  const double sa2 = a.width_ * a.width_, sb2 = b.width_ * b.width_;
  const double s2 = sa2 * sb2 / (sa2 + sb2);
  const Vec4 m = (sb2 * a.center_ + sa2 * b.center_) / (sa2 + sb2);
  const double damp = std::exp(-(a.center_ - b.center_).squaredNorm() / (2 * (sa2 + sb2)));
  Poly4 pa = a.poly_.shifted(m - a.center_);
  Poly4 pb = b.poly_.shifted(m - b.center_);
  return gaussian_poly(m, std::sqrt(s2), (pa * pb).scaled(damp));
}

TestFunction TestFunction::affine_pullback(const Eigen::Matrix4d& r, const Vec4& a) const {
  if (kind_ != Kind::GaussianPoly) throw std::logic_error("pullback: closed-form kind only");
  if ((r.transpose() * r - Eigen::Matrix4d::Identity()).norm() > 1e-10)
    throw std::invalid_argument("pullback map must be an isometry (orthogonal linear part)");
  return gaussian_poly(r * center_ + a, width_, poly_.linear_substitution(r.transpose()));
}

TestFunction TestFunction::translated(const Vec4& a) const {
  if (kind_ == Kind::Grid) {
    GridData g = grid_;
    g.origin += a;
    return grid(std::move(g));
  }
  return gaussian_poly(center_ + a, width_, poly_);
}

TestFunction TestFunction::theta_reflected() const {
  Eigen::Matrix4d th = Eigen::Matrix4d::Identity();
  th(0, 0) = -1;
  return affine_pullback(th, Vec4::Zero()).conjugated();
}

TestFunction TestFunction::conjugated() const {
  if (kind_ == Kind::Grid) return *this;
  return gaussian_poly(center_, width_, poly_.conjugated());
}

bool TestFunction::is_real() const {
  if (kind_ == Kind::Grid) return true;
  for (const auto& [e, c] : poly_.terms())
    if (std::abs(c.imag()) > 1e-14 * (1 + std::abs(c))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Schwartz seminorms

namespace {

// all multi-indices with |gamma| <= cap
std::vector<MultiIndex> multi_indices_up_to(int cap) {
  std::vector<MultiIndex> out;
  for (int a = 0; a <= cap; ++a)
    for (int b = 0; a + b <= cap; ++b)
      for (int c = 0; a + b + c <= cap; ++c)
        for (int d = 0; a + b + c + d <= cap; ++d) out.push_back({a, b, c, d});
  return out;
}

}  // namespace

double TestFunction::schwartz_seminorm(int c) const {
  if (c < 0) throw std::invalid_argument("seminorm order must be >= 0");
  const int dcap = 4 * c;

  if (kind_ == Kind::Grid) {
    // central finite differences, per-axis order limited by the 5-point stencil
    const auto& g = grid_;
    for (int mu = 0; mu < 4; ++mu)
      if (g.extent[mu] < 9 && dcap > 0)
        throw std::domain_error("grid too coarse for requested derivative order");
    if (dcap > 4)
      throw std::domain_error("grid stencil supports derivative orders up to 4 (requested " +
                              std::to_string(dcap) + ")");
    static const std::vector<std::vector<double>> stencil = {
        {1},                      // order 0
        {-0.5, 0, 0.5},           // d/dx
        {1, -2, 1},               // d2
        {-0.5, 1, 0, -1, 0.5},    // d3
        {1, -4, 6, -4, 1},        // d4
    };
    const auto gammas = multi_indices_up_to(dcap);
    auto value_at = [&](const std::array<long, 4>& idx) -> double {
      std::size_t flat = 0;
      for (int mu = 0; mu < 4; ++mu) {
        if (idx[mu] < 0 || idx[mu] >= g.extent[mu]) return 0.0;
        flat = flat * std::size_t(g.extent[mu]) + std::size_t(idx[mu]);
      }
      return g.values[flat];
    };
    double best = 0.0;
    std::array<long, 4> idx;
    for (idx[0] = 0; idx[0] < g.extent[0]; ++idx[0])
      for (idx[1] = 0; idx[1] < g.extent[1]; ++idx[1])
        for (idx[2] = 0; idx[2] < g.extent[2]; ++idx[2])
          for (idx[3] = 0; idx[3] < g.extent[3]; ++idx[3]) {
            Vec4 x;
            for (int mu = 0; mu < 4; ++mu) x[mu] = g.origin[mu] + g.spacing * double(idx[mu]);
            const double w = std::pow(1 + x.squaredNorm(), c / 2.0);
            for (const auto& gam : gammas) {
              bool per_axis_ok = true;
              for (int mu = 0; mu < 4; ++mu) per_axis_ok &= gam[mu] <= 4;
              if (!per_axis_ok) throw std::domain_error("grid stencil cannot form this derivative");
              // separable stencil application
              double acc = 0.0;
              std::array<long, 4> off;
              const auto& s0 = stencil[gam[0]];
              const auto& s1 = stencil[gam[1]];
              const auto& s2 = stencil[gam[2]];
              const auto& s3 = stencil[gam[3]];
              const long h0 = long(s0.size() / 2), h1 = long(s1.size() / 2),
                         h2 = long(s2.size() / 2), h3 = long(s3.size() / 2);
              for (std::size_t i0 = 0; i0 < s0.size(); ++i0)
                for (std::size_t i1 = 0; i1 < s1.size(); ++i1)
                  for (std::size_t i2 = 0; i2 < s2.size(); ++i2)
                    for (std::size_t i3 = 0; i3 < s3.size(); ++i3) {
                      off = {idx[0] + long(i0) - h0, idx[1] + long(i1) - h1,
                             idx[2] + long(i2) - h2, idx[3] + long(i3) - h3};
                      acc += s0[i0] * s1[i1] * s2[i2] * s3[i3] * value_at(off);
                    }
              const int order = gam[0] + gam[1] + gam[2] + gam[3];
              acc /= std::pow(g.spacing, order);
              best = std::max(best, w * std::abs(acc));
            }
          }
    return best;
  }

  // closed-form kind: exact symbolic derivatives, then a numeric sup search
  const auto gammas = multi_indices_up_to(dcap);
  std::map<MultiIndex, TestFunction> cache;
  cache.emplace(MultiIndex{0, 0, 0, 0}, *this);
  std::function<const TestFunction&(const MultiIndex&)> deriv_of =
      [&](const MultiIndex& gam) -> const TestFunction& {
    auto it = cache.find(gam);
    if (it != cache.end()) return it->second;
    for (int mu = 0; mu < 4; ++mu) {
      if (gam[mu] > 0) {
        MultiIndex lower = gam;
        lower[mu] -= 1;
        TestFunction d = deriv_of(lower).derivative(mu);
        return cache.emplace(gam, std::move(d)).first->second;
      }
    }
    return cache.at(gam);
  };

  double best = 0.0;
  const double s = width_;
  for (const auto& gam : gammas) {
    const TestFunction& df = deriv_of(gam);
    auto weighted = [&](const Vec4& x) {
      return std::pow(1 + x.squaredNorm(), c / 2.0) * std::abs(df.eval(x));
    };
    // coarse multistart around the center (the Gaussian tail kills far points)
    double loc_best = 0.0;
    Vec4 arg = center_;
    for (double r0 = -5; r0 <= 5; r0 += 1.25)
      for (double r1 = -5; r1 <= 5; r1 += 1.25)
        for (double r2 = -5; r2 <= 5; r2 += 1.25)
          for (double r3 = -5; r3 <= 5; r3 += 1.25) {
            Vec4 x = center_ + s * Vec4(r0, r1, r2, r3);
            const double v = weighted(x);
            if (v > loc_best) { loc_best = v; arg = x; }
          }
    // refine with a few rounds of per-coordinate golden-section ascent
    for (int round = 0; round < 4; ++round) {
      for (int mu = 0; mu < 4; ++mu) {
        Vec4 x = arg;
        const double lo = arg[mu] - 1.5 * s, hi = arg[mu] + 1.5 * s;
        const double phi = (std::sqrt(5.0) - 1) / 2;
        double a = lo, b = hi;
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        x[mu] = x1; double f1 = weighted(x);
        x[mu] = x2; double f2 = weighted(x);
        for (int i = 0; i < 32; ++i) {
          if (f1 < f2) { a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); x[mu] = x2; f2 = weighted(x); }
          else { b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); x[mu] = x1; f1 = weighted(x); }
        }
        arg[mu] = f1 > f2 ? x1 : x2;
        loc_best = std::max(loc_best, std::max(f1, f2));
      }
    }
    best = std::max(best, loc_best);
  }
  return best;
}

}  // namespace qgv
