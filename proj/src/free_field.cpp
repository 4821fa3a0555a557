#include "qgv/free_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qgv/quad.hpp"

namespace qgv {

namespace {

struct GaussView {
  Vec4 c;
  double s2;
  std::vector<std::pair<MultiIndex, cplx>> terms;
  int kmax;  // largest per-coordinate exponent
};

GaussView view_of(const TestFunction& f) {
  if (f.kind() != TestFunction::Kind::GaussianPoly)
    throw std::invalid_argument("exact-family smears need closed-form test functions");
  GaussView v;
  v.c = f.center();
  v.s2 = f.width() * f.width();
  v.kmax = 0;
  for (const auto& [e, coef] : f.poly().terms()) {
    v.terms.emplace_back(e, coef);
    for (int mu = 0; mu < 4; ++mu) v.kmax = std::max(v.kmax, e[mu]);
  }
  return v;
}

}  // namespace

double scalar_schwinger_kernel(double mass, double r) {
  if (r <= 0) throw std::invalid_argument("kernel needs r > 0");
  if (mass == 0.0) return 1.0 / (4 * M_PI * M_PI * r * r);
  return mass * std::cyl_bessel_k(1.0, mass * r) / (4 * M_PI * M_PI * r);
}

double scalar_temporal_slice(double mass, double tau, double pmag) {
  if (mass <= 0) throw std::invalid_argument("temporal slices need mass > 0");
  const double at = std::abs(tau);
  auto kernel = [&](double r) { return scalar_schwinger_kernel(mass, std::hypot(at, r)); };
  if (pmag == 0.0) {
    auto f = [&](double r) { return 4 * M_PI * r * r * kernel(r); };
    return integrate_to_infinity(f, 0.0, 1e-12);
  }
  auto f = [&](double r) { return (4 * M_PI / pmag) * r * std::sin(pmag * r) * kernel(r); };
  // oscillatory but exponentially damped; plain adaptive on a finite window
  const double rmax = (50.0 + 10.0 * at * mass) / mass;
  return integrate_adaptive(f, 0.0, rmax, 1e-12, 0.0, 20000);
}

// --- proper-time Euclidean smears -------------------------------------------

cplx heat_pairing(const TestFunction& f, const TestFunction& g, double t) {
  const GaussView F = view_of(f), G = view_of(g);
  const double alpha = 1 / (2 * F.s2), beta = 1 / (2 * G.s2), gamma = 1 / (4 * t);
  const double D = alpha * beta + gamma * (alpha + beta);

  double pref = 1.0;
  std::array<Eigen::MatrixXd, 4> mom;
  const int ka = F.kmax, kb = G.kmax;
  for (int mu = 0; mu < 4; ++mu) {
    const double c = F.c[mu] - G.c[mu];
    pref *= std::sqrt(M_PI * gamma / D) * std::exp(-alpha * beta * gamma * c * c / D);
    const double mu_u = -gamma * c * beta / D;
    const double mu_v = gamma * c * alpha / D;
    const double suu = (beta + gamma) / (2 * D);
    const double svv = (alpha + gamma) / (2 * D);
    const double suv = gamma / (2 * D);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ka + 1, kb + 1);
    m(0, 0) = 1.0;
    for (int k = 0; k <= ka; ++k)
      for (int l = 0; l <= kb; ++l) {
        if (k == 0 && l == 0) continue;
        if (k > 0) {
          double v = mu_u * m(k - 1, l);
          if (k >= 2) v += (k - 1) * suu * m(k - 2, l);
          if (l >= 1) v += l * suv * m(k - 1, l - 1);
          m(k, l) = v;
        } else {
          double v = mu_v * m(0, l - 1);
          if (l >= 2) v += (l - 1) * svv * m(0, l - 2);
          m(k, l) = v;
        }
      }
    mom[mu] = std::move(m);
  }

  cplx sum(0, 0);
  for (const auto& [ea, ca] : F.terms)
    for (const auto& [eb, cb] : G.terms) {
      double prod = 1.0;
      for (int mu = 0; mu < 4; ++mu) prod *= mom[mu](ea[mu], eb[mu]);
      sum += ca * cb * prod;
    }
  return pref * sum;
}

cplx scalar_pairing(const TestFunction& f, const TestFunction& g, double mass) {
  const GaussView F = view_of(f), G = view_of(g);
  const double t_ref = F.s2 + G.s2;
  const double d2 = (F.c - G.c).squaredNorm();
  const double t_lo = 1e-16 * t_ref;
  double t_hi;
  if (mass > 0)
    t_hi = 50.0 / (mass * mass) + 10 * t_ref + 2 * d2;
  else
    t_hi = 1e10 * (t_ref + d2 + 1.0);

  auto integrand = [&](double s) -> cplx {
    const double t = std::exp(s);
    return t * std::exp(-mass * mass * t) * heat_pairing(f, g, t);
  };
  cplx val = integrate_adaptive(integrand, std::log(t_lo), std::log(t_hi), 1e-13, 0.0, 6000);
  if (mass == 0.0) {
    // analytic tail: G(t) -> (int f)(int g)/(16 pi^2 t^2)
    val += f.integral() * g.integral() / (16 * M_PI * M_PI * t_hi);
  }
  return val;
}

std::vector<std::vector<std::pair<int, int>>> perfect_matchings(int n) {
  std::vector<std::vector<std::pair<int, int>>> out;
  if (n % 2 != 0) return out;
  std::vector<int> items(n);
  for (int i = 0; i < n; ++i) items[i] = i;
  std::vector<std::pair<int, int>> cur;
  std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& rest) {
    if (rest.empty()) {
      out.push_back(cur);
      return;
    }
    const int a = rest.front();
    for (std::size_t j = 1; j < rest.size(); ++j) {
      const int b = rest[j];
      std::vector<int> next;
      for (std::size_t k = 1; k < rest.size(); ++k)
        if (k != j) next.push_back(rest[k]);
      cur.emplace_back(a, b);
      rec(next);
      cur.pop_back();
    }
  };
  rec(items);
  return out;
}

cplx wick_sum(const std::vector<TestFunction>& fs, double mass, int cap) {
  const int n = int(fs.size());
  if (n == 0) return cplx(1, 0);  // empty index, no functions
  if (n > cap) throw std::invalid_argument("wick degree " + std::to_string(n) +
                                           " exceeds cap " + std::to_string(cap));
  if (n % 2 != 0) return cplx(0, 0);
  // pairwise table first, then the matching sum
  Eigen::MatrixXcd pair(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pair(i, j) = scalar_pairing(fs[i], fs[j], mass);
  cplx total(0, 0);
  for (const auto& m : perfect_matchings(n)) {
    cplx prod(1, 0);
    for (auto [a, b] : m) prod *= pair(a, b);
    total += prod;
  }
  return total;
}

// --- field-strength sector ---------------------------------------------------

namespace {
// T_{mu rho} = d_mu d_rho [1/(4 pi^2 r^2)] = (4 n_mu n_rho - delta)/(2 pi^2 r^4)
double massless_hessian(int mu, int rho, const Vec4& xi) {
  const double r2 = xi.squaredNorm();
  const double del = mu == rho ? 1.0 : 0.0;
  return (4 * xi[mu] * xi[rho] / r2 - del) / (2 * M_PI * M_PI * r2 * r2);
}
}  // namespace

double maxwell_F_kernel(int mu, int nu, int rho, int sigma, const Vec4& xi) {
  if (xi.squaredNorm() == 0) throw std::invalid_argument("kernel needs xi != 0");
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  return -(d(nu, sigma) * massless_hessian(mu, rho, xi) +
           d(mu, rho) * massless_hessian(nu, sigma, xi) -
           d(nu, rho) * massless_hessian(mu, sigma, xi) -
           d(mu, sigma) * massless_hessian(nu, rho, xi));
}

cplx maxwell_F_pairing(int mu, int nu, int rho, int sigma, const TestFunction& f,
                       const TestFunction& g) {
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  cplx v(0, 0);
  if (d(nu, sigma) != 0) v += scalar_pairing(f.derivative(mu), g.derivative(rho), 0.0);
  if (d(mu, rho) != 0) v += scalar_pairing(f.derivative(nu), g.derivative(sigma), 0.0);
  if (d(nu, rho) != 0) v -= scalar_pairing(f.derivative(mu), g.derivative(sigma), 0.0);
  if (d(mu, sigma) != 0) v -= scalar_pairing(f.derivative(nu), g.derivative(rho), 0.0);
  return v;
}

double composite_phi2_kernel(double mass, double r) {
  const double k = scalar_schwinger_kernel(mass, r);
  return 2 * k * k;
}

double composite_F2_c8() { return 12.0 / std::pow(M_PI, 4); }

double composite_F2_kernel(double r) {
  if (r <= 0) throw std::invalid_argument("kernel needs r > 0");
  return composite_F2_c8() / std::pow(r, 8);
}

namespace {

// Spectral-density smear \int ds rho(s) * scalar_pairing(f, g, sqrt(s)).
// The upper cutoff is the crossover where the pairing stops decaying in s
// (test-function tails beginning to resolve the thin diagonal); everything
// below it is scheme-independent, the dropped remainder is estimated.
cplx spectral_composite_pairing(const TestFunction& f, const TestFunction& g,
                                const std::function<double(double)>& rho, double s_lo,
                                double* tail_bound) {
  const GaussView F = view_of(f), G = view_of(g);
  const double d = std::sqrt((F.c - G.c).squaredNorm());
  const double sig2 = F.s2 + G.s2;
  if (d < 4 * std::sqrt(sig2))
    throw std::invalid_argument(
        "composite smear needs separated supports (thin-diagonal extension is "
        "scheme-dependent at coinciding points)");
  const double crossover = std::pow(d / sig2, 2);
  const double s_hi = std::max({4 * s_lo + 1.0, crossover, 100.0 / (d * d)});
  auto integrand = [&](double u) -> cplx {
    const double s = std::exp(u);
    return s * rho(s) * scalar_pairing(f, g, std::sqrt(s));
  };
  const double u_lo = std::log(std::max(s_lo, 1e-8 / (d * d + sig2)));
  cplx val = integrate_adaptive(integrand, u_lo, std::log(s_hi), 1e-10, 0.0, 2000);
  // infrared piece for densities supported down to s = 0
  if (s_lo == 0.0) {
    const double s_eps = std::exp(u_lo);
    val += rho(s_eps) * s_eps * scalar_pairing(f, g, 0.0);  // rho ~ const or faster at 0
  }
  if (tail_bound) {
    const double edge = std::abs(rho(s_hi) * s_hi * scalar_pairing(f, g, std::sqrt(s_hi)));
    *tail_bound = 5.0 * edge;  // ~ \int^{100 s_hi} of a 1/s-type residual
  }
  return val;
}

}  // namespace

cplx composite_phi2_pairing(const TestFunction& f, const TestFunction& g, double mass,
                            double* tail_bound) {
  auto rho = [mass](double s) {
    const double th = 1.0 - 4 * mass * mass / s;
    return th > 0 ? std::sqrt(th) / (8 * M_PI * M_PI) : 0.0;
  };
  return spectral_composite_pairing(f, g, rho, 4 * mass * mass, tail_bound);
}

cplx composite_F2_pairing(const TestFunction& f, const TestFunction& g, double* tail_bound) {
  auto rho = [](double s) { return s * s / (16 * M_PI * M_PI); };
  return spectral_composite_pairing(f, g, rho, 0.0, tail_bound);
}

// --- Minkowski ---------------------------------------------------------------

cplx wightman_pairing(const TestFunction& f, const TestFunction& g, double mass) {
  const GaussView F = view_of(f), G = view_of(g);
  if (f.poly().degree() > 0 || g.poly().degree() > 0)
    throw std::invalid_argument("wightman_pairing supports plain Gaussians only");
  cplx amp_f = F.terms.empty() ? cplx(0, 0) : F.terms[0].second;
  cplx amp_g = G.terms.empty() ? cplx(0, 0) : G.terms[0].second;
  const double sig2 = F.s2 + G.s2;
  const double T = F.c[0] - G.c[0];
  const Eigen::Vector3d dvec(F.c[1] - G.c[1], F.c[2] - G.c[2], F.c[3] - G.c[3]);
  const double dist = dvec.norm();
  const cplx A = amp_f * amp_g * std::pow(2 * M_PI * F.s2, 2) * std::pow(2 * M_PI * G.s2, 2);

  auto integrand = [&](double p) -> cplx {
    const double om = std::sqrt(p * p + mass * mass);
    const double sinc = dist > 0 ? std::sin(p * dist) / (p * dist) : 1.0;
    const cplx osc = std::exp(cplx(0.0, -om * T));
    return p * p / (2 * om) * std::exp(-sig2 * (om * om + p * p) / 2) * sinc * osc;
  };
  const double p_max = std::sqrt(90.0 / sig2 + mass * mass) + 10.0 / (1.0 + dist + std::abs(T));
  const cplx integral = integrate_adaptive(integrand, 0.0, p_max, 1e-12, 0.0, 20000);
  return A * integral / (2 * M_PI * M_PI);
}

cplx covariant_photon_pairing(int mu, int nu, const TestFunction& f, const TestFunction& g) {
  if (mu < 0 || mu > 3 || nu < 0 || nu > 3) throw std::out_of_range("vector index");
  const double eta = (mu == nu) ? (mu == 0 ? 1.0 : -1.0) : 0.0;
  if (eta == 0.0) return cplx(0, 0);
  return -eta * wightman_pairing(f, g, 0.0);
}

// --- pointwise Wightman -------------------------------------------------------

cplx scalar_wightman_closed(double mass, double t, double r) {
  if (r < 0) throw std::invalid_argument("radius must be nonnegative");
  const double lam = t * t - r * r;
  if (lam == 0) throw std::invalid_argument("lightcone point");
  if (mass == 0.0) return cplx(1.0 / (4 * M_PI * M_PI * (r * r - t * t)), 0.0);
  if (lam < 0) {
    const double s = std::sqrt(-lam);
    return cplx(mass * std::cyl_bessel_k(1.0, mass * s) / (4 * M_PI * M_PI * s), 0.0);
  }
  const double y = mass * std::sqrt(lam);
  const cplx val = mass / (8 * M_PI * std::sqrt(lam)) *
                   cplx(std::cyl_neumann(1.0, y), std::cyl_bessel_j(1.0, y));
  return t > 0 ? val : std::conj(val);
}

cplx scalar_wightman_kernel(double mass, double t, double r) {
  if (r <= 0) throw std::invalid_argument("quadrature route needs r > 0");
  if (mass == 0.0) {
    // the damped massless integral is available in closed form; its eps -> 0
    // limit needs no extrapolation
    return 1.0 / (4 * M_PI * M_PI * cplx(r * r - t * t, 0.0));
  }
  const double scale = 1.0 / (4 * M_PI * M_PI * (r * r + t * t));

  auto w_damped = [&](double eps) -> cplx {
    // exact massless part at this damping
    const cplx z(r * r + eps * eps - t * t, 2 * eps * t);
    const cplx w0 = 1.0 / (4 * M_PI * M_PI * z);
    auto integ = [&](double p) -> cplx {
      const double om = std::sqrt(p * p + mass * mass);
      const cplx em = std::exp(cplx(-eps * om, -t * om));
      const cplx e0 = std::exp(cplx(-eps * p, -t * p));
      return std::sin(p * r) * ((p / om) * em - e0);
    };
    const double width = M_PI / (2 * (r + std::abs(t)) + 1.0);
    const cplx rem = integrate_oscillatory(integ, 0.0, width,
                                           std::abs(scale) * 1e-12 * 4 * M_PI * M_PI * r);
    return w0 + rem / (4 * M_PI * M_PI * r);
  };

  // Richardson in the damping parameter: four levels knock out the first
  // three powers of eps
  const double eps0 = 0.02 / (1.0 + mass);
  cplx w[4];
  for (int k = 0; k < 4; ++k) w[k] = w_damped(eps0 / double(1 << k));
  cplx r1[3], r2[2];
  for (int k = 0; k < 3; ++k) r1[k] = 2.0 * w[k + 1] - w[k];
  for (int k = 0; k < 2; ++k) r2[k] = (4.0 * r1[k + 1] - r1[k]) / 3.0;
  return (8.0 * r2[1] - r2[0]) / 7.0;
}

}  // namespace qgv
