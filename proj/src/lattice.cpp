#include "qgv/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

namespace qgv {

namespace {

constexpr int kLanes = 8;

int worker_count() {
  const char* env = std::getenv("QGV_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return std::clamp(n, 1, kLanes);
}

// Runs lane_fn(0..7). Lane-to-thread assignment is round-robin; since every
// lane owns its draws and its disjoint slice of links, results are identical
// for any worker count.
template <typename F>
void run_lanes(int workers, F&& lane_fn) {
  if (workers <= 1) {
    for (int l = 0; l < kLanes; ++l) lane_fn(l);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&lane_fn, t, workers] {
      for (int l = t; l < kLanes; l += workers) lane_fn(l);
    });
  for (auto& th : pool) th.join();
}

struct NeighborTable {
  long V;
  int d;
  std::vector<long> up_, dn_;

  explicit NeighborTable(const Lattice& lat) : V(lat.sites()), d(lat.ndim()), up_(std::size_t(V) * std::size_t(d)), dn_(up_.size()) {
    for (long s = 0; s < V; ++s)
      for (int m = 0; m < d; ++m) {
        up_[std::size_t(s) * std::size_t(d) + std::size_t(m)] = lat.neighbor(s, m, +1);
        dn_[std::size_t(s) * std::size_t(d) + std::size_t(m)] = lat.neighbor(s, m, -1);
      }
  }
  long up(long s, int m) const { return up_[std::size_t(s) * std::size_t(d) + std::size_t(m)]; }
  long dn(long s, int m) const { return dn_[std::size_t(s) * std::size_t(d) + std::size_t(m)]; }
};

// sum over nu != mu of both staples closing a plaquette through link (s, mu);
// the local gauge weight is exp((beta/N) Re tr(U A))
Mat staple_sum(const Lattice& lat, const LatticeConfig& cfg, const NeighborTable& nb, long s,
               int mu) {
  const long sup = nb.up(s, mu);
  const int n = int(cfg.links[0].rows());
  Mat a = Mat::Zero(n, n);
  for (int nu = 0; nu < lat.ndim(); ++nu) {
    if (nu == mu) continue;
    a += cfg.link(lat, sup, nu) * cfg.link(lat, nb.up(s, nu), mu).adjoint() *
         cfg.link(lat, s, nu).adjoint();
    const long sdn = nb.dn(s, nu);
    a += cfg.link(lat, nb.dn(sup, nu), nu).adjoint() * cfg.link(lat, sdn, mu).adjoint() *
         cfg.link(lat, sdn, nu);
  }
  return a;
}

Mat plaquette(const Lattice& lat, const LatticeConfig& cfg, const NeighborTable& nb, long s,
              int mu, int nu) {
  return cfg.link(lat, s, mu) * cfg.link(lat, nb.up(s, mu), nu) *
         cfg.link(lat, nb.up(s, nu), mu).adjoint() * cfg.link(lat, s, nu).adjoint();
}

int site_parity(const Lattice& lat, long s) {
  const auto x = lat.coords(s);
  int p = 0;
  for (int c : x) p ^= (c & 1);
  return p;
}

// P(x0) ~ sqrt(1-x0^2) exp(alpha x0) on [-1,1]. Kennedy-Pendleton for large
// alpha, plain rejection for small alpha (where KP acceptance degrades).
double sample_su2_x0(RngStream& rng, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    // flat exponent: pure semicircle
    for (;;) {
      const double x = rng.uniform(-1.0, 1.0);
      const double r = rng.uniform01();
      if (r * r <= 1.0 - x * x) return x;
    }
  }
  if (alpha < 0.5) {
    for (;;) {
      const double x = rng.uniform(-1.0, 1.0);
      const double r = rng.uniform01();
      if (r * r > 1.0 - x * x) continue;
      if (std::log(rng.uniform01() + 1e-300) < alpha * (x - 1.0)) return x;
    }
  }
  for (;;) {
    const double r1 = 1.0 - rng.uniform01();  // (0,1]
    const double r2 = rng.uniform01();
    const double r3 = 1.0 - rng.uniform01();
    const double c = std::cos(2.0 * M_PI * r2);
    const double u = -(std::log(r1) + c * c * std::log(r3)) / (2.0 * alpha);
    const double r4 = rng.uniform01();
    if (r4 * r4 <= 1.0 - u) return 1.0 - 2.0 * u;
  }
}

// W = x0 + i w.sigma with |w| = sqrt(1-x0^2), direction uniform
Mat su2_from_x0(RngStream& rng, double x0) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double rad = std::sqrt(std::max(0.0, 1.0 - x0 * x0));
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double w1 = rad * s * std::cos(phi), w2 = rad * s * std::sin(phi), w3 = rad * z;
  Mat m(2, 2);
  m << cplx(x0, w3), cplx(w2, w1), cplx(-w2, w1), cplx(x0, -w3);
  return m;
}

// quaternion (SU(2)-proportional) part of a 2x2 complex matrix; Re tr(s B) =
// Re tr(s H) for all s in SU(2)
void quaternion_part(const Mat& b, cplx& a, cplx& bq) {
  a = 0.5 * (b(0, 0) + std::conj(b(1, 1)));
  bq = 0.5 * (b(0, 1) - std::conj(b(1, 0)));
}

struct MatterView {
  const std::vector<cplx>* phi = nullptr;
  double kappa = 0.0, lambda = 0.0;
  bool on = false;
};

// one link update; returns (proposed, accepted) increments
void update_link(const Lattice& lat, const Action& act, const GaugeGroup& grp, LatticeConfig& cfg,
                 const NeighborTable& nb, long s, int mu, RngStream& rng, SweepStats& stats) {
  const Mat a = staple_sum(lat, cfg, nb, s, mu);
  switch (act.group) {
    case GroupId::U1: {
      cplx coeff = act.beta * a(0, 0);
      if (act.has_matter)
        coeff += 2.0 * act.kappa * std::conj(cfg.matter[std::size_t(s)]) *
                 cfg.matter[std::size_t(nb.up(s, mu))];
      cplx u = cfg.link(lat, s, mu)(0, 0);
      for (int hit = 0; hit < 3; ++hit) {
        const double dtheta = rng.uniform(-1.0, 1.0);
        const cplx uprime = u * std::polar(1.0, dtheta);
        const double dlogw = std::real((uprime - u) * coeff);
        ++stats.proposed;
        if (dlogw >= 0 || std::log(rng.uniform01() + 1e-300) < dlogw) {
          u = uprime;
          ++stats.accepted;
        }
      }
      cfg.link(lat, s, mu)(0, 0) = u;
      return;
    }
    case GroupId::SU2: {
      // weight exp((beta/2) Re tr(U A)) = exp(beta k w0) with W = U A / k
      const double k = std::sqrt(std::max(0.0, std::real(a.determinant())));
      ++stats.proposed;
      ++stats.accepted;
      if (act.beta * k < 1e-12) {
        cfg.link(lat, s, mu) = grp.haar_sample(rng);
        return;
      }
      const Mat v = a / k;
      const double x0 = sample_su2_x0(rng, act.beta * k);
      cfg.link(lat, s, mu) = su2_from_x0(rng, x0) * v.adjoint();
      return;
    }
    case GroupId::SU3: {
      // Cabibbo-Marinari: heatbath in the three SU(2) subgroups, weight per
      // subgroup exp((beta/3) Re tr2(s B)) with B the subgroup block of U A
      static const int sub[3][2] = {{0, 1}, {0, 2}, {1, 2}};
      Mat u = cfg.link(lat, s, mu);
      Mat w = u * a;
      for (const auto& ij : sub) {
        const int i = ij[0], j = ij[1];
        Mat b(2, 2);
        b << w(i, i), w(i, j), w(j, i), w(j, j);
        cplx qa, qb;
        quaternion_part(b, qa, qb);
        const double k = std::sqrt(std::norm(qa) + std::norm(qb));
        ++stats.proposed;
        ++stats.accepted;
        Mat s2(2, 2);
        if (act.beta * k < 1e-12) {
          const double x0 = sample_su2_x0(rng, 0.0);
          s2 = su2_from_x0(rng, x0);
        } else {
          Mat v(2, 2);
          v << qa / k, qb / k, -std::conj(qb / k), std::conj(qa / k);
          const double x0 = sample_su2_x0(rng, 2.0 * act.beta * k / 3.0);
          s2 = su2_from_x0(rng, x0) * v.adjoint();
        }
        Mat g = Mat::Identity(3, 3);
        g(i, i) = s2(0, 0);
        g(i, j) = s2(0, 1);
        g(j, i) = s2(1, 0);
        g(j, j) = s2(1, 1);
        u = g * u;
        w = g * w;
      }
      cfg.link(lat, s, mu) = u;
      return;
    }
  }
  throw std::logic_error("unhandled group in update_link");
}

void update_matter_site(const Lattice& lat, const Action& act, LatticeConfig& cfg,
                        const NeighborTable& nb, long s, RngStream& rng, SweepStats& stats) {
  // local action |phi|^2 + lambda(|phi|^2-1)^2 - 2 kappa Re(conj(phi) h)
  cplx h = 0;
  for (int mu = 0; mu < lat.ndim(); ++mu) {
    h += cfg.link(lat, s, mu)(0, 0) * cfg.matter[std::size_t(nb.up(s, mu))];
    const long sd = nb.dn(s, mu);
    h += std::conj(cfg.link(lat, sd, mu)(0, 0)) * cfg.matter[std::size_t(sd)];
  }
  const auto local = [&](cplx p) {
    const double n2 = std::norm(p);
    return n2 + act.lambda * (n2 - 1.0) * (n2 - 1.0) -
           2.0 * act.kappa * std::real(std::conj(p) * h);
  };
  const cplx phi = cfg.matter[std::size_t(s)];
  const cplx prop = phi + 0.4 * cplx(rng.normal(), rng.normal());
  const double ds = local(prop) - local(phi);
  ++stats.proposed;
  if (ds <= 0 || std::log(rng.uniform01() + 1e-300) < -ds) {
    cfg.matter[std::size_t(s)] = prop;
    ++stats.accepted;
  }
}

double mean_plaquette(const Lattice& lat, const LatticeConfig& cfg, const NeighborTable& nb) {
  const int n = int(cfg.links[0].rows());
  double acc = 0;
  long count = 0;
  for (long s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < lat.ndim(); ++mu)
      for (int nu = mu + 1; nu < lat.ndim(); ++nu) {
        acc += plaquette(lat, cfg, nb, s, mu, nu).trace().real() / n;
        ++count;
      }
  return acc / double(count);
}

void validate_action(const Lattice& lat, const Action& act) {
  if (!(act.beta >= 0) || !std::isfinite(act.beta))
    throw std::invalid_argument("coupling beta must be nonnegative");
  if (act.has_matter && act.group != GroupId::U1)
    throw std::invalid_argument("matter updates are implemented only for the abelian model");
  (void)lat;
}

}  // namespace

Lattice::Lattice(std::vector<int> d, double a) : dims(std::move(d)), spacing(a) {
  if (dims.size() < 2 || dims.size() > 4)
    throw std::invalid_argument("lattice needs 2 to 4 dimensions");
  for (int L : dims)
    if (L < 4 || L > 64 || (L % 2) != 0)
      throw std::invalid_argument("lattice extents must be even and between 4 and 64");
  if (!(spacing > 0)) throw std::invalid_argument("lattice spacing must be positive");
}

long Lattice::sites() const {
  long v = 1;
  for (int L : dims) v *= L;
  return v;
}

long Lattice::flat(const std::vector<int>& x) const {
  long idx = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    int c = x[i] % dims[i];
    if (c < 0) c += dims[i];
    idx = idx * dims[i] + c;
  }
  return idx;
}

std::vector<int> Lattice::coords(long site) const {
  std::vector<int> x(dims.size());
  for (int i = int(dims.size()) - 1; i >= 0; --i) {
    x[std::size_t(i)] = int(site % dims[std::size_t(i)]);
    site /= dims[std::size_t(i)];
  }
  return x;
}

long Lattice::neighbor(long site, int mu, int step) const {
  auto x = coords(site);
  x[std::size_t(mu)] += step;
  return flat(x);
}

Vec4 Lattice::position(long site) const {
  const auto x = coords(site);
  Vec4 p = Vec4::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) p[long(i)] = spacing * x[i];
  return p;
}

LatticeConfig cold_config(const Lattice& lat, const Action& act) {
  validate_action(lat, act);
  const GaugeGroup grp(act.group);
  const int n = grp.matrix_dim();
  LatticeConfig cfg;
  cfg.links.assign(std::size_t(lat.sites()) * std::size_t(lat.ndim()), Mat::Identity(n, n));
  if (act.has_matter) cfg.matter.assign(std::size_t(lat.sites()), cplx(1.0, 0.0));
  return cfg;
}

double action_value(const Lattice& lat, const Action& act, const LatticeConfig& cfg) {
  validate_action(lat, act);
  const NeighborTable nb(lat);
  const int n = int(cfg.links[0].rows());
  double s = 0;
  for (long site = 0; site < lat.sites(); ++site)
    for (int mu = 0; mu < lat.ndim(); ++mu)
      for (int nu = mu + 1; nu < lat.ndim(); ++nu)
        s += act.beta * (1.0 - plaquette(lat, cfg, nb, site, mu, nu).trace().real() / n);
  if (act.has_matter) {
    for (long site = 0; site < lat.sites(); ++site) {
      const double n2 = std::norm(cfg.matter[std::size_t(site)]);
      s += n2 + act.lambda * (n2 - 1.0) * (n2 - 1.0);
      for (int mu = 0; mu < lat.ndim(); ++mu)
        s -= 2.0 * act.kappa *
             std::real(std::conj(cfg.matter[std::size_t(site)]) * cfg.link(lat, site, mu)(0, 0) *
                       cfg.matter[std::size_t(nb.up(site, mu))]);
    }
  }
  return s;
}

SweepStats sweep(const Lattice& lat, const Action& act, LatticeConfig& cfg, uint64_t master_seed,
                 long sweep_number) {
  validate_action(lat, act);
  const GaugeGroup grp(act.group);
  const NeighborTable nb(lat);
  const int workers = worker_count();
  std::array<SweepStats, kLanes> lane_stats{};

  // parity-of-site checkerboard: for fixed (parity, mu) no two updated links
  // share a staple link of the same class, so lanes may run concurrently
  for (int parity = 0; parity < 2; ++parity) {
    for (int mu = 0; mu < lat.ndim(); ++mu) {
      run_lanes(workers, [&](int lane) {
        RngStream rng = RngStream::derive(
            master_seed, {0x11, uint64_t(sweep_number), uint64_t(parity), uint64_t(mu),
                          uint64_t(lane)});
        for (long s = 0; s < lat.sites(); ++s) {
          if (site_parity(lat, s) != parity || (s % kLanes) != lane) continue;
          update_link(lat, act, grp, cfg, nb, s, mu, rng, lane_stats[std::size_t(lane)]);
        }
      });
    }
  }
  if (act.has_matter) {
    for (int parity = 0; parity < 2; ++parity) {
      run_lanes(workers, [&](int lane) {
        RngStream rng = RngStream::derive(
            master_seed, {0x12, uint64_t(sweep_number), uint64_t(parity), uint64_t(lane)});
        for (long s = 0; s < lat.sites(); ++s) {
          if (site_parity(lat, s) != parity || (s % kLanes) != lane) continue;
          update_matter_site(lat, act, cfg, nb, s, rng, lane_stats[std::size_t(lane)]);
        }
      });
    }
  }
  for (auto& m : cfg.links) m = grp.project_to_group(m);

  SweepStats total;
  for (const auto& st : lane_stats) {
    total.proposed += st.proposed;
    total.accepted += st.accepted;
  }
  return total;
}

double integrated_autocorrelation(const std::vector<double>& series) {
  const long n = long(series.size());
  if (n < 16) return 0.5;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / double(n);
  const long tmax = n / 4;
  std::vector<double> c(std::size_t(tmax) + 1, 0.0);
  for (long t = 0; t <= tmax; ++t) {
    double acc = 0;
    for (long i = 0; i + t < n; ++i) acc += (series[std::size_t(i)] - mean) * (series[std::size_t(i + t)] - mean);
    c[std::size_t(t)] = acc / double(n - t);
  }
  if (c[0] <= 0) return 0.5;
  double tau = 0.5;
  for (long t = 1; t <= tmax; ++t) {
    tau += c[std::size_t(t)] / c[0];
    if (double(t) >= 5.0 * tau) break;  // Madras-Sokal self-consistent window
  }
  return std::max(tau, 0.5);
}

Ensemble generate_ensemble(const Lattice& lat, const Action& act, uint64_t seed, int n_configs,
                           int thermalization, int stride) {
  validate_action(lat, act);
  if (n_configs <= 0) throw std::invalid_argument("need at least one configuration");
  const NeighborTable nb(lat);
  Ensemble ens;
  ens.lattice = lat;
  ens.action = act;
  ens.provenance.seed = seed;

  LatticeConfig cfg = cold_config(lat, act);
  long sweep_no = 0;
  std::vector<double> series;
  double tau = 0.5;

  if (thermalization < 0) {
    // run in batches until we have discarded 10x the measured
    // autocorrelation time (at least 50 sweeps, capped to stay bounded)
    long target = 50;
    while (sweep_no < target && sweep_no < 5000) {
      sweep(lat, act, cfg, seed, sweep_no++);
      series.push_back(mean_plaquette(lat, cfg, nb));
      if (sweep_no >= target) {
        tau = integrated_autocorrelation(series);
        target = std::max<long>(50, long(std::ceil(10.0 * tau)));
      }
    }
    thermalization = int(sweep_no);
  } else {
    for (int i = 0; i < thermalization; ++i) {
      sweep(lat, act, cfg, seed, sweep_no++);
      series.push_back(mean_plaquette(lat, cfg, nb));
    }
    if (!series.empty()) tau = integrated_autocorrelation(series);
  }
  if (stride < 0) stride = std::max(1, int(std::ceil(2.0 * tau)));

  SweepStats rec;
  ens.configs.reserve(std::size_t(n_configs));
  for (int i = 0; i < n_configs; ++i) {
    if (i > 0) {
      for (int k = 0; k < stride; ++k) {
        const SweepStats st = sweep(lat, act, cfg, seed, sweep_no++);
        rec.proposed += st.proposed;
        rec.accepted += st.accepted;
      }
    }
    ens.configs.push_back(cfg);
  }

  ens.provenance.thermalization_sweeps = thermalization;
  ens.provenance.stride = stride;
  ens.provenance.tau_int = tau;
  ens.provenance.acceptance = rec.proposed ? rec.acceptance() : 1.0;
  return ens;
}

std::pair<double, double> jackknife_reduce(
    const std::vector<Eigen::VectorXd>& per_config,
    const std::function<double(const Eigen::VectorXd&)>& reduce, int bins) {
  const long n = long(per_config.size());
  if (n < bins) throw std::invalid_argument("jackknife needs at least as many samples as bins");
  const long dim = per_config[0].size();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
  for (const auto& v : per_config) total += v;

  std::vector<Eigen::VectorXd> bin_sum(std::size_t(bins), Eigen::VectorXd::Zero(dim));
  std::vector<long> bin_n(std::size_t(bins), 0);
  for (long i = 0; i < n; ++i) {
    const long b = std::min<long>(i * bins / n, bins - 1);
    bin_sum[std::size_t(b)] += per_config[std::size_t(i)];
    ++bin_n[std::size_t(b)];
  }

  const double theta = reduce(total / double(n));
  std::vector<double> loo(std::size_t(bins), 0.0);
  double loo_mean = 0;
  for (int b = 0; b < bins; ++b) {
    const Eigen::VectorXd m = (total - bin_sum[std::size_t(b)]) / double(n - bin_n[std::size_t(b)]);
    loo[std::size_t(b)] = reduce(m);
    loo_mean += loo[std::size_t(b)];
  }
  loo_mean /= bins;
  double var = 0;
  for (int b = 0; b < bins; ++b) var += (loo[std::size_t(b)] - loo_mean) * (loo[std::size_t(b)] - loo_mean);
  var *= double(bins - 1) / double(bins);
  return {theta, std::sqrt(var)};
}

std::pair<double, double> plaquette_average(const Ensemble& ens, int bins) {
  if (long(ens.configs.size()) < bins)
    throw std::invalid_argument("plaquette_average needs at least as many configurations as bins");
  const NeighborTable nb(ens.lattice);
  std::vector<Eigen::VectorXd> vals;
  vals.reserve(ens.configs.size());
  for (const auto& cfg : ens.configs) {
    Eigen::VectorXd v(1);
    v[0] = mean_plaquette(ens.lattice, cfg, nb);
    vals.push_back(v);
  }
  return jackknife_reduce(vals, [](const Eigen::VectorXd& v) { return v[0]; }, bins);
}

double two_dim_plaquette_reference(GroupId group, double beta) {
  // single-plaquette Haar average <Re tr U / N> under weight
  // exp((beta/N) Re tr U); in two dimensions the plaquettes decouple up to
  // torus corrections that are exponentially small in the volume
  switch (group) {
    case GroupId::U1: {
      const int n = 4096;
      double num = 0, den = 0;
      for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * i / n;
        const double w = std::exp(beta * (std::cos(th) - 1.0));  // shift for stability
        num += std::cos(th) * w;
        den += w;
      }
      return num / den;
    }
    case GroupId::SU2: {
      // class measure sqrt(1-x0^2) dx0, Re tr U / 2 = x0
      const int n = 200000;
      double num = 0, den = 0;
      for (int i = 0; i < n; ++i) {
        const double x = -1.0 + 2.0 * (i + 0.5) / n;
        const double w = std::sqrt(1.0 - x * x) * std::exp(beta * (x - 1.0));
        num += x * w;
        den += w;
      }
      return num / den;
    }
    case GroupId::SU3: {
      // Weyl eigenvalue density |Delta|^2 on (th1, th2), th3 = -th1-th2
      const int n = 512;
      double num = 0, den = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double t1 = 2.0 * M_PI * i / n, t2 = 2.0 * M_PI * j / n;
          const double t3 = -t1 - t2;
          const auto dd = [](double a, double b) {
            const double s = std::sin(0.5 * (a - b));
            return 4.0 * s * s;  // |e^{ia}-e^{ib}|^2
          };
          const double dens = dd(t1, t2) * dd(t1, t3) * dd(t2, t3);
          const double c = (std::cos(t1) + std::cos(t2) + std::cos(t3)) / 3.0;
          const double w = dens * std::exp(beta * (c - 1.0));
          num += c * w;
          den += w;
        }
      return num / den;
    }
  }
  throw std::logic_error("unhandled group");
}

LatticeConfig gauge_transform(const Lattice& lat, const LatticeConfig& cfg,
                              const std::vector<Mat>& g) {
  if (long(g.size()) != lat.sites())
    throw std::invalid_argument("gauge transform needs one group element per site");
  LatticeConfig out = cfg;
  for (long s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < lat.ndim(); ++mu)
      out.link(lat, s, mu) =
          g[std::size_t(s)] * cfg.link(lat, s, mu) * g[std::size_t(lat.neighbor(s, mu, +1))].adjoint();
  if (!cfg.matter.empty())
    for (long s = 0; s < lat.sites(); ++s)
      out.matter[std::size_t(s)] = g[std::size_t(s)](0, 0) * cfg.matter[std::size_t(s)];
  return out;
}

// --- observables --------------------------------------------------------------

std::vector<double> observable_field(const Lattice& lat, const Action& act,
                                     const LatticeConfig& cfg, const ObservableSpec& spec) {
  const NeighborTable nb(lat);
  const int n = int(cfg.links[0].rows());
  std::vector<double> field(std::size_t(lat.sites()), 0.0);
  switch (spec.kind) {
    case ObservableSpec::Kind::F2: {
      // clover average of the four plaquette traces touching the site, summed
      // over planes; gauge invariant because each trace is
      for (long s = 0; s < lat.sites(); ++s) {
        double acc = 0;
        for (int mu = 0; mu < lat.ndim(); ++mu)
          for (int nu = mu + 1; nu < lat.ndim(); ++nu) {
            const long sdm = nb.dn(s, mu), sdn = nb.dn(s, nu);
            const double cl = (plaquette(lat, cfg, nb, s, mu, nu).trace().real() +
                               plaquette(lat, cfg, nb, sdm, mu, nu).trace().real() +
                               plaquette(lat, cfg, nb, sdn, mu, nu).trace().real() +
                               plaquette(lat, cfg, nb, nb.dn(sdm, nu), mu, nu).trace().real()) /
                              (4.0 * n);
            acc += 1.0 - cl;
          }
        field[std::size_t(s)] = acc;
      }
      return field;
    }
    case ObservableSpec::Kind::Phi2: {
      if (!act.has_matter || cfg.matter.empty())
        throw std::invalid_argument("phi2 observable needs a matter field");
      for (long s = 0; s < lat.sites(); ++s) field[std::size_t(s)] = std::norm(cfg.matter[std::size_t(s)]);
      return field;
    }
    case ObservableSpec::Kind::WilsonLoop: {
      const int T = spec.loop_t, R = spec.loop_r;
      if (T < 1 || R < 1 || T > lat.dims[0] || R > lat.dims[1])
        throw std::invalid_argument("loop extents must fit the lattice");
      for (long s = 0; s < lat.sites(); ++s) {
        Mat w = Mat::Identity(n, n);
        long x = s;
        for (int t = 0; t < T; ++t) {
          w *= cfg.link(lat, x, 0);
          x = nb.up(x, 0);
        }
        for (int r = 0; r < R; ++r) {
          w *= cfg.link(lat, x, 1);
          x = nb.up(x, 1);
        }
        for (int t = 0; t < T; ++t) {
          x = nb.dn(x, 0);
          w *= cfg.link(lat, x, 0).adjoint();
        }
        for (int r = 0; r < R; ++r) {
          x = nb.dn(x, 1);
          w *= cfg.link(lat, x, 1).adjoint();
        }
        field[std::size_t(s)] = w.trace().real() / n;
      }
      return field;
    }
  }
  throw std::logic_error("unhandled observable kind");
}

LatticeFamily::LatticeFamily(Ensemble ens, ObservableSpec spec, std::string label)
    : ens_(std::move(ens)), spec_(spec), label_(std::move(label)) {
  if (ens_.configs.empty()) throw std::invalid_argument("empty ensemble");
  catalog_.push_back({label_, 1, false});
  fields_.reserve(ens_.configs.size());
  for (const auto& cfg : ens_.configs) {
    const auto f = observable_field(ens_.lattice, ens_.action, cfg, spec_);
    fields_.push_back(Eigen::Map<const Eigen::VectorXd>(f.data(), long(f.size())));
  }
}

std::string LatticeFamily::name() const {
  std::string dims;
  for (std::size_t i = 0; i < ens_.lattice.dims.size(); ++i)
    dims += (i ? "x" : "") + std::to_string(ens_.lattice.dims[i]);
  return std::string("lattice-") + group_name(ens_.action.group) + "-" + dims + ":" + label_;
}

namespace {

void check_lattice_index(const LatticeFamily& fam, const FieldIndex& idx, const std::string& label,
                         std::size_t n_args) {
  if (!idx.gauge.empty())
    throw std::invalid_argument("lattice estimates carry no connection slots");
  if (idx.matter.size() != n_args) throw std::invalid_argument("argument count mismatch");
  if (idx.arity() > std::size_t(fam.degree_cap()))
    throw std::invalid_argument("lattice estimates stop at 2-point correlators");
  for (const auto& m : idx.matter) {
    if (m.label != label) throw std::invalid_argument("unknown field label: " + m.label);
    if (m.component != 0) throw std::invalid_argument("observable has a single component");
  }
}

}  // namespace

EvalResult LatticeFamily::evaluate(const FieldIndex& idx,
                                   const std::vector<TestFunction>& args) const {
  check_lattice_index(*this, idx, label_, args.size());
  if (idx.arity() == 0) return {cplx(1.0, 0.0), 0.0};

  const Lattice& lat = ens_.lattice;
  const double cell = std::pow(lat.spacing, lat.ndim());
  std::vector<Eigen::Vector4d> dummy;
  std::vector<cplx> fvals(std::size_t(lat.sites()));

  // per-config smears A_c = cell * sum_x f(x) O_c(x)
  std::vector<std::vector<cplx>> smears(args.size());
  for (std::size_t a = 0; a < args.size(); ++a) {
    for (long s = 0; s < lat.sites(); ++s) fvals[std::size_t(s)] = args[a].eval(lat.position(s));
    smears[a].reserve(fields_.size());
    for (const auto& field : fields_) {
      cplx acc = 0;
      for (long s = 0; s < lat.sites(); ++s) acc += fvals[std::size_t(s)] * field[s];
      smears[a].push_back(cell * acc);
    }
  }

  std::vector<Eigen::VectorXd> per_config(fields_.size());
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    cplx v = smears[0][c];
    if (args.size() == 2) v *= smears[1][c];
    Eigen::VectorXd row(2);
    row << v.real(), v.imag();
    per_config[c] = row;
  }
  const auto re = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) { return v[0]; });
  const auto im = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) { return v[1]; });
  return {cplx(re.first, im.first), std::hypot(re.second, im.second)};
}

long LatticeFamily::shift_site(long site, const std::vector<int>& sep) const {
  auto x = ens_.lattice.coords(site);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += sep[i];
  return ens_.lattice.flat(x);
}

EvalResult LatticeFamily::correlator_at(const std::vector<int>& sep) const {
  const Lattice& lat = ens_.lattice;
  if (long(sep.size()) != lat.ndim()) throw std::invalid_argument("separation dimension mismatch");
  for (std::size_t i = 0; i < sep.size(); ++i)
    if (std::abs(sep[i]) > lat.dims[i] / 2)
      throw std::invalid_argument("separation exceeds half the lattice extent");
  std::vector<Eigen::VectorXd> per_config(fields_.size());
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    double acc = 0;
    for (long s = 0; s < lat.sites(); ++s) acc += fields_[c][s] * fields_[c][shift_site(s, sep)];
    Eigen::VectorXd row(1);
    row << acc / double(lat.sites());
    per_config[c] = row;
  }
  const auto r = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) { return v[0]; });
  return {cplx(r.first, 0.0), r.second};
}

EvalResult LatticeFamily::connected_at(const std::vector<int>& sep) const {
  const Lattice& lat = ens_.lattice;
  if (long(sep.size()) != lat.ndim()) throw std::invalid_argument("separation dimension mismatch");
  for (std::size_t i = 0; i < sep.size(); ++i)
    if (std::abs(sep[i]) > lat.dims[i] / 2)
      throw std::invalid_argument("separation exceeds half the lattice extent");
  std::vector<Eigen::VectorXd> per_config(fields_.size());
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    double acc = 0;
    for (long s = 0; s < lat.sites(); ++s) acc += fields_[c][s] * fields_[c][shift_site(s, sep)];
    Eigen::VectorXd row(2);
    row << acc / double(lat.sites()), fields_[c].mean();
    per_config[c] = row;
  }
  const auto r = jackknife_reduce(
      per_config, [](const Eigen::VectorXd& v) { return v[0] - v[1] * v[1]; });
  return {cplx(r.first, 0.0), r.second};
}

EvalResult LatticeFamily::site_average() const {
  std::vector<Eigen::VectorXd> per_config(fields_.size());
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    Eigen::VectorXd row(1);
    row << fields_[c].mean();
    per_config[c] = row;
  }
  const auto r = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) { return v[0]; });
  return {cplx(r.first, 0.0), r.second};
}

cplx LatticeFamily::point_eval(const FieldIndex& idx, const std::vector<Vec4>& points) const {
  check_lattice_index(*this, idx, label_, points.size());
  if (idx.arity() == 0) return cplx(1.0, 0.0);
  if (idx.arity() == 1) return site_average().value;

  const Lattice& lat = ens_.lattice;
  const Vec4 d = points[1] - points[0];
  std::vector<int> sep(std::size_t(lat.ndim()));
  for (int i = 0; i < 4; ++i) {
    const double steps = d[i] / lat.spacing;
    const long r = std::lround(steps);
    if (std::abs(steps - double(r)) > 1e-6)
      throw std::invalid_argument("pointwise lattice correlators need site-aligned separations");
    if (i >= lat.ndim()) {
      if (r != 0) throw std::invalid_argument("separation leaves the lattice dimensions");
    } else {
      sep[std::size_t(i)] = int(r);
    }
  }
  return correlator_at(sep).value;
}

EvalResult LatticeFamily::temporal_slice(double tau, double pmag) const {
  const Lattice& lat = ens_.lattice;
  const int lt = lat.dims[0];
  const long vs = lat.sites() / lt;
  const double steps = tau / lat.spacing;
  const int dt = int(std::lround(steps));
  if (std::abs(steps - double(dt)) > 1e-9 || dt < 0 || dt > lt / 2)
    throw std::invalid_argument("slice gap must be a site-aligned time within half the extent");
  const double kstep = 2.0 * M_PI / (lat.dims[1] * lat.spacing);
  const int kn = int(std::lround(pmag / kstep));
  if (std::abs(pmag - kn * kstep) > 1e-9 * (1.0 + std::abs(pmag)))
    throw std::invalid_argument("momentum must sit on the dual lattice of axis 1");

  // slice transforms S_c(t) = sum over spatial sites of O e^{-i k x1}
  std::vector<Eigen::VectorXd> per_config(fields_.size());
  for (std::size_t c = 0; c < fields_.size(); ++c) {
    std::vector<cplx> slice(std::size_t(lt), cplx(0, 0));
    for (long s = 0; s < lat.sites(); ++s) {
      const auto x = lat.coords(s);
      slice[std::size_t(x[0])] +=
          fields_[c][s] * std::polar(1.0, -kstep * kn * lat.spacing * x[1]);
    }
    cplx corr = 0, bar = 0;
    for (int t = 0; t < lt; ++t) {
      corr += std::conj(slice[std::size_t(t)]) * slice[std::size_t((t + dt) % lt)];
      bar += slice[std::size_t(t)];
    }
    corr /= double(lt);
    bar /= double(lt);
    Eigen::VectorXd row(4);
    row << corr.real(), corr.imag(), bar.real(), bar.imag();
    per_config[c] = row;
  }
  const double norm = std::pow(lat.spacing, lat.ndim() - 1) / double(vs);
  const auto re = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) {
    return v[0] - (v[2] * v[2] + v[3] * v[3]);  // connected part
  });
  const auto im = jackknife_reduce(per_config, [](const Eigen::VectorXd& v) { return v[1]; });
  return {norm * cplx(re.first, im.first), norm * std::hypot(re.second, im.second)};
}

// --- reflection positivity ----------------------------------------------------

LatticeConfig link_reflect(const Lattice& lat, const LatticeConfig& cfg) {
  // reflection through the plane between time slices L-1 and 0: site slice t
  // maps to r(t) = L-1-t. A temporal link [t, t+1] lands on the reversed link
  // [r(t)-1, r(t)], hence the adjoint at time r(t+1).
  const int lt = lat.dims[0];
  const auto r = [lt](int t) { return ((lt - 1 - t) % lt + lt) % lt; };
  LatticeConfig out = cfg;
  for (long s = 0; s < lat.sites(); ++s) {
    auto x = lat.coords(s);
    const int t = x[0];
    for (int mu = 0; mu < lat.ndim(); ++mu) {
      auto y = x;
      y[0] = (mu == 0) ? r(t + 1) : r(t);
      const Mat& src = cfg.link(lat, lat.flat(y), mu);
      if (mu == 0)
        out.link(lat, s, mu) = src.adjoint();
      else
        out.link(lat, s, mu) = src;
    }
    if (!cfg.matter.empty()) {
      auto y = x;
      y[0] = r(t);
      out.matter[std::size_t(s)] = std::conj(cfg.matter[std::size_t(lat.flat(y))]);
    }
  }
  return out;
}

PlaquetteFunctional slice_plaquette_functional(const Lattice& lat, int t) {
  PlaquetteFunctional f;
  long count = 0;
  for (long s = 0; s < lat.sites(); ++s)
    if (lat.coords(s)[0] == t) ++count;
  for (long s = 0; s < lat.sites(); ++s)
    if (lat.coords(s)[0] == t) f.weights.push_back({s, cplx(1.0 / double(count), 0.0)});
  return f;
}

OsGram os_gram(const Ensemble& ens, const std::vector<PlaquetteFunctional>& basis, int bins) {
  if (basis.empty()) throw std::invalid_argument("empty functional basis");
  const Lattice& lat = ens.lattice;
  const int lt = lat.dims[0];
  for (const auto& f : basis)
    for (const auto& [site, w] : f.weights) {
      const int t = lat.coords(site)[0];
      // the anchored plaquette also owns links at t+1, which must stay inside
      // the positive-time half (reflection planes sit at t = -1/2 and L/2 - 1/2)
      if (t < 1 || t + 1 > lt / 2 - 1)
        throw std::invalid_argument(
            "functional support touches the reflection plane (anchors need 1 <= t <= L/2-2)");
    }
  if (long(ens.configs.size()) < bins)
    throw std::invalid_argument("os_gram needs at least as many configurations as jackknife bins");

  const NeighborTable nb(lat);
  const int n = int(ens.configs[0].links[0].rows());
  const int m = int(basis.size());

  // plaquette-trace field in the (0,1) plane, original and reflected
  const auto ptr_field = [&](const LatticeConfig& cfg) {
    std::vector<cplx> p(std::size_t(lat.sites()));
    for (long s = 0; s < lat.sites(); ++s)
      p[std::size_t(s)] = plaquette(lat, cfg, nb, s, 0, 1).trace() / double(n);
    return p;
  };

  std::vector<Eigen::VectorXd> per_config(ens.configs.size());
  for (std::size_t c = 0; c < ens.configs.size(); ++c) {
    const auto p = ptr_field(ens.configs[c]);
    const auto pr = ptr_field(link_reflect(lat, ens.configs[c]));
    Eigen::VectorXcd forig(m), frefl(m);
    for (int i = 0; i < m; ++i) {
      cplx vo = 0, vr = 0;
      for (const auto& [site, w] : basis[std::size_t(i)].weights) {
        vo += w * p[std::size_t(site)];
        vr += w * pr[std::size_t(site)];
      }
      forig[i] = vo;
      frefl[i] = vr;
    }
    Eigen::VectorXd row(2 * m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const cplx g = std::conj(frefl[i]) * forig[j];
        row[2 * (i * m + j)] = g.real();
        row[2 * (i * m + j) + 1] = g.imag();
      }
    per_config[c] = row;
  }

  const auto raw_of = [m](const Eigen::VectorXd& v) {
    Eigen::MatrixXcd g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        g(i, j) = cplx(v[2 * (i * m + j)], v[2 * (i * m + j) + 1]);
    return g;
  };
  const auto min_eig_of = [&raw_of](const Eigen::VectorXd& v) {
    const Eigen::MatrixXcd g = raw_of(v);
    const Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    return es.eigenvalues().minCoeff();
  };

  OsGram out;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(2 * m * m);
  for (const auto& v : per_config) total += v;
  const Eigen::MatrixXcd raw = raw_of(total / double(per_config.size()));
  out.herm_asym = 0.5 * (raw - raw.adjoint()).norm();
  out.mean = 0.5 * (raw + raw.adjoint());

  out.entry_err = Eigen::MatrixXd(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const auto re = jackknife_reduce(
          per_config, [i, j, m](const Eigen::VectorXd& v) { return v[2 * (i * m + j)]; }, bins);
      const auto im = jackknife_reduce(
          per_config, [i, j, m](const Eigen::VectorXd& v) { return v[2 * (i * m + j) + 1]; },
          bins);
      out.entry_err(i, j) = std::hypot(re.second, im.second);
    }

  const auto eig = jackknife_reduce(per_config, min_eig_of, bins);
  out.min_eig = min_eig_of(total / double(per_config.size()));
  out.min_eig_err = eig.second;
  return out;
}

// --- ensemble store -----------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "ensemble store assumes a little-endian host");

template <typename T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw std::runtime_error("truncated ensemble file");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

constexpr char kMagic[8] = {'Q', 'G', 'V', 'E', 'N', 'S', '1', '\0'};

std::string serialize_ensemble(const Ensemble& ens) {
  std::string buf;
  buf.append(kMagic, 8);
  put<uint32_t>(buf, uint32_t(ens.lattice.ndim()));
  for (int L : ens.lattice.dims) put<int32_t>(buf, L);
  put<double>(buf, ens.lattice.spacing);
  put<uint32_t>(buf, uint32_t(ens.action.group));
  put<double>(buf, ens.action.beta);
  put<uint8_t>(buf, ens.action.has_matter ? 1 : 0);
  put<double>(buf, ens.action.kappa);
  put<double>(buf, ens.action.lambda);
  put<uint64_t>(buf, ens.provenance.seed);
  put<int32_t>(buf, ens.provenance.thermalization_sweeps);
  put<int32_t>(buf, ens.provenance.stride);
  put<double>(buf, ens.provenance.tau_int);
  put<double>(buf, ens.provenance.acceptance);
  put<uint32_t>(buf, uint32_t(ens.configs.size()));
  const int n = ens.configs.empty() ? GaugeGroup(ens.action.group).matrix_dim()
                                    : int(ens.configs[0].links[0].rows());
  put<uint32_t>(buf, uint32_t(n));
  for (const auto& cfg : ens.configs) {
    for (const auto& mat : cfg.links)
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          put<double>(buf, mat(r, c).real());
          put<double>(buf, mat(r, c).imag());
        }
    for (const cplx& v : cfg.matter) {
      put<double>(buf, v.real());
      put<double>(buf, v.imag());
    }
  }
  return buf;
}

std::array<unsigned char, 32> sha256(const std::string& bytes) {
  std::array<unsigned char, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != 32)
    throw std::runtime_error("sha-256 failed");
  return out;
}

std::string hex(const std::array<unsigned char, 32>& d) {
  static const char* k = "0123456789abcdef";
  std::string s;
  for (unsigned char b : d) {
    s += k[b >> 4];
    s += k[b & 0xf];
  }
  return s;
}

}  // namespace

std::string ensemble_content_hash(const Ensemble& ens) { return hex(sha256(serialize_ensemble(ens))); }

void save_ensemble(const std::string& path, const Ensemble& ens) {
  const std::string body = serialize_ensemble(ens);
  const auto digest = sha256(body);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(body.data(), long(body.size()));
  out.write(reinterpret_cast<const char*>(digest.data()), long(digest.size()));
  if (!out) throw std::runtime_error("short write to " + path);
  out.close();

  nlohmann::json side;
  side["format"] = "QGVENS1";
  side["group"] = group_name(ens.action.group);
  side["dims"] = ens.lattice.dims;
  side["spacing"] = ens.lattice.spacing;
  side["action"] = {{"beta", ens.action.beta},
                    {"kappa", ens.action.kappa},
                    {"lambda", ens.action.lambda},
                    {"matter", ens.action.has_matter}};
  side["provenance"] = {{"seed", ens.provenance.seed},
                        {"thermalization_sweeps", ens.provenance.thermalization_sweeps},
                        {"stride", ens.provenance.stride},
                        {"tau_int", ens.provenance.tau_int},
                        {"acceptance", ens.provenance.acceptance}};
  side["configs"] = ens.configs.size();
  side["sha256"] = hex(digest);
  std::ofstream js(path + ".json", std::ios::trunc);
  js << side.dump(2) << "\n";
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() < 8 + 32) throw std::runtime_error("truncated ensemble file");

  const std::string body = all.substr(0, all.size() - 32);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), all.data() + all.size() - 32, 32) != 0)
    throw std::runtime_error("ensemble content hash mismatch");

  std::size_t pos = 0;
  if (std::memcmp(body.data(), kMagic, 8) != 0) throw std::runtime_error("bad magic");
  pos = 8;
  const auto ndim = take<uint32_t>(body, pos);
  if (ndim < 2 || ndim > 4) throw std::runtime_error("corrupt header: dimensions");
  std::vector<int> dims(ndim);
  for (auto& L : dims) L = take<int32_t>(body, pos);
  const double spacing = take<double>(body, pos);

  Ensemble ens;
  ens.lattice = Lattice(dims, spacing);
  ens.action.group = GroupId(take<uint32_t>(body, pos));
  ens.action.beta = take<double>(body, pos);
  ens.action.has_matter = take<uint8_t>(body, pos) != 0;
  ens.action.kappa = take<double>(body, pos);
  ens.action.lambda = take<double>(body, pos);
  ens.provenance.seed = take<uint64_t>(body, pos);
  ens.provenance.thermalization_sweeps = take<int32_t>(body, pos);
  ens.provenance.stride = take<int32_t>(body, pos);
  ens.provenance.tau_int = take<double>(body, pos);
  ens.provenance.acceptance = take<double>(body, pos);
  const auto nconf = take<uint32_t>(body, pos);
  const auto n = take<uint32_t>(body, pos);

  ens.configs.resize(nconf);
  const long links = ens.lattice.sites() * ens.lattice.ndim();
  for (auto& cfg : ens.configs) {
    cfg.links.assign(std::size_t(links), Mat(n, n));
    for (auto& mat : cfg.links)
      for (uint32_t r = 0; r < n; ++r)
        for (uint32_t c = 0; c < n; ++c) {
          const double re = take<double>(body, pos);
          const double im = take<double>(body, pos);
          mat(r, c) = cplx(re, im);
        }
    if (ens.action.has_matter) {
      cfg.matter.resize(std::size_t(ens.lattice.sites()));
      for (auto& v : cfg.matter) {
        const double re = take<double>(body, pos);
        const double im = take<double>(body, pos);
        v = cplx(re, im);
      }
    }
  }
  if (pos != body.size()) throw std::runtime_error("trailing bytes in ensemble file");
  return ens;
}

}  // namespace qgv
