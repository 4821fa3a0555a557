#pragma once

// Euclidean lattice Monte Carlo: pure-gauge Wilson action for U(1)/SU(2)/SU(3)
// in 2-4 dimensions, plus the 2D abelian model with complex scalar matter.
// Everything is deterministic given the master seed: updates run on a fixed
// set of checkerboard lanes whose draw sequences do not depend on how many
// threads execute them (QGV_THREADS picks the worker count).

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgv/correlator.hpp"
#include "qgv/group.hpp"
#include "qgv/rng.hpp"

namespace qgv {

struct Lattice {
  std::vector<int> dims;  // axis 0 is Euclidean time; 2 to 4 axes, even, 4..64
  double spacing = 1.0;

  Lattice(std::vector<int> d, double a = 1.0);

  int ndim() const { return int(dims.size()); }
  long sites() const;
  long flat(const std::vector<int>& x) const;
  std::vector<int> coords(long site) const;
  long neighbor(long site, int mu, int step) const;  // periodic shift by step
  Vec4 position(long site) const;                    // embedded, unused axes 0
};

struct Action {
  GroupId group = GroupId::U1;
  double beta = 1.0;
  bool has_matter = false;  // 2D U(1) only
  double kappa = 0.0;       // hopping
  double lambda = 0.0;      // quartic self-coupling
};

struct LatticeConfig {
  std::vector<Mat> links;    // site-major, direction-minor
  std::vector<cplx> matter;  // empty when disabled

  Mat& link(const Lattice& lat, long site, int mu) { return links[std::size_t(site) * std::size_t(lat.ndim()) + std::size_t(mu)]; }
  const Mat& link(const Lattice& lat, long site, int mu) const { return links[std::size_t(site) * std::size_t(lat.ndim()) + std::size_t(mu)]; }
};

struct SweepStats {
  long proposed = 0;
  long accepted = 0;  // heatbath updates count as accepted proposals
  double acceptance() const { return proposed ? double(accepted) / double(proposed) : 1.0; }
};

struct Provenance {
  uint64_t seed = 0;
  int thermalization_sweeps = 0;
  int stride = 1;
  double tau_int = 0.0;
  double acceptance = 1.0;
};

struct Ensemble {
  Lattice lattice{{4, 4}};
  Action action;
  Provenance provenance;
  std::vector<LatticeConfig> configs;
};

// cold (unit-link) start
LatticeConfig cold_config(const Lattice& lat, const Action& act);

// Wilson action value (real by construction; includes matter terms if any)
double action_value(const Lattice& lat, const Action& act, const LatticeConfig& cfg);

// one full update pass (all checkerboard parities, all directions, matter
// sites); links are re-unitarized before returning
SweepStats sweep(const Lattice& lat, const Action& act, LatticeConfig& cfg, uint64_t master_seed,
                 long sweep_number);

// thermalizes (10x the measured integrated autocorrelation time), then
// records n_configs configurations at the chosen stride. Negative
// thermalization/stride means: measure tau_int and choose automatically.
Ensemble generate_ensemble(const Lattice& lat, const Action& act, uint64_t seed, int n_configs,
                           int thermalization = -1, int stride = -1);

// mean and jackknife error of Re tr U_p / N over sites, planes, configs
std::pair<double, double> plaquette_average(const Ensemble& ens, int bins = 20);

// single-plaquette reference value <Re tr U_p/N> for 2D pure gauge at
// coupling beta, by numerical character integration (exact in 2D up to
// boundary topology)
double two_dim_plaquette_reference(GroupId group, double beta);

// U_mu(x) -> g(x) U_mu(x) g(x+mu)^dagger, matter -> g(x) matter
LatticeConfig gauge_transform(const Lattice& lat, const LatticeConfig& cfg,
                              const std::vector<Mat>& g);

// integrated autocorrelation time of a scalar series (Madras-Sokal window)
double integrated_autocorrelation(const std::vector<double>& series);

// jackknife over configurations of an arbitrary reduction of per-config
// vector data: reduce(bin-averaged vector) -> scalar
std::pair<double, double> jackknife_reduce(
    const std::vector<Eigen::VectorXd>& per_config,
    const std::function<double(const Eigen::VectorXd&)>& reduce, int bins = 20);

// --- gauge-invariant site observables ---------------------------------------

struct ObservableSpec {
  enum class Kind { F2, Phi2, WilsonLoop };
  Kind kind = Kind::F2;
  int loop_r = 1, loop_t = 1;  // Wilson loop extents (time x first spatial axis)
};

// per-site field of the observable on one configuration
std::vector<double> observable_field(const Lattice& lat, const Action& act,
                                     const LatticeConfig& cfg, const ObservableSpec& spec);

// lattice-estimate correlator family over the observable field. Exposes the
// CorrelatorFamily surfaces (smears with grid or closed-form test functions
// evaluated at sites, pointwise full correlators at site separations,
// connected temporal slices) plus direct separation queries.
class LatticeFamily final : public CorrelatorFamily {
 public:
  LatticeFamily(Ensemble ens, ObservableSpec spec, std::string label);

  std::string name() const override;
  Metric metric() const override { return Metric::Euclidean; }
  Source source() const override { return Source::LatticeEstimate; }
  int degree_cap() const override { return 2; }
  double mass_gap() const override { return 0.0; }
  const std::vector<FieldCatalogEntry>& catalog() const override { return catalog_; }
  int algebra_dim() const override { return 0; }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override;
  bool has_point_eval() const override { return true; }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& points) const override;
  bool has_temporal_slice() const override { return true; }
  EvalResult temporal_slice(double tau, double pmag) const override;

  // full and connected correlators at a site separation (lattice units)
  EvalResult correlator_at(const std::vector<int>& sep) const;
  EvalResult connected_at(const std::vector<int>& sep) const;
  EvalResult site_average() const;
  const Ensemble& ensemble() const { return ens_; }

 private:
  long shift_site(long site, const std::vector<int>& sep) const;
  Ensemble ens_;
  ObservableSpec spec_;
  std::string label_;
  std::vector<FieldCatalogEntry> catalog_;
  std::vector<Eigen::VectorXd> fields_;  // per config, per site
};

// --- reflection positivity on the lattice ------------------------------------

// link reflection through the plane between time slices L-1 and 0
LatticeConfig link_reflect(const Lattice& lat, const LatticeConfig& cfg);

// a positive-time functional: complex-weighted sum of plaquette traces
// (normalized by 1/N) anchored at the given sites
struct PlaquetteFunctional {
  std::vector<std::pair<long, cplx>> weights;  // (site, weight)
};

struct OsGram {
  Eigen::MatrixXcd mean;      // Hermitian part of the raw estimate
  Eigen::MatrixXd entry_err;  // 1-sigma per entry (absolute value)
  double herm_asym = 0.0;     // norm of the discarded anti-Hermitian part
  double min_eig = 0.0;
  double min_eig_err = 0.0;
};

// M_ij = < conj(F_i(reflected cfg)) F_j(cfg) >, jackknifed; requires every
// functional anchored strictly inside the positive-time half (1 <= t < L/2)
OsGram os_gram(const Ensemble& ens, const std::vector<PlaquetteFunctional>& basis, int bins = 20);

// spatially averaged plaquette-trace functional on time slice t
PlaquetteFunctional slice_plaquette_functional(const Lattice& lat, int t);

// --- ensemble store -----------------------------------------------------------

// little-endian binary with a SHA-256 trailer, plus a JSON provenance sidecar
// at path + ".json"
void save_ensemble(const std::string& path, const Ensemble& ens);
Ensemble load_ensemble(const std::string& path);  // verifies the hash
std::string ensemble_content_hash(const Ensemble& ens);  // hex SHA-256

}  // namespace qgv
