#pragma once

// Quantitative axiom checkers. Each consumes a correlator family (or an
// ensemble, for the checks that live on gauge configurations), measures named
// violations, and renders a verdict under one of two tolerance regimes:
//
//   exact       fixed relative thresholds, sigma = 0 in the report
//   statistical 3 sigma jackknife scales, sigma > 0 in the report
//
// A report never mixes the regimes: the backing scale is always recorded.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qgv/continuation.hpp"
#include "qgv/correlator.hpp"
#include "qgv/lattice.hpp"

namespace qgv {

enum class Verdict { Pass, Fail, Inapplicable };
const char* verdict_name(Verdict v);

struct AxiomReport {
  std::string axiom;
  std::string family;
  std::map<std::string, double> quantities;  // named measured reals
  double tolerance = 0.0;                    // threshold the verdict used
  double sigma = 0.0;                        // statistical scale, 0 in the exact regime
  Verdict verdict = Verdict::Fail;
  std::string reason;      // machine-readable cause for fail / inapplicable
  std::string provenance;  // ensemble content hash for lattice sources
};

struct GramMatrix {
  Eigen::MatrixXcd entries;  // Hermitian (the asymmetry is folded out and recorded)
  std::vector<std::string> basis;
  Eigen::VectorXd eigenvalues;        // ascending
  Eigen::VectorXd eigenvalue_errors;  // zero for exact sources
  double herm_defect = 0.0;
};

// reflected pairing gram over a scalar channel: M_ij = S(idx2; theta f_i, f_j)
GramMatrix build_os_gram(const CorrelatorFamily& fam, const FieldIndex& idx2,
                         const std::vector<TestFunction>& basis);

// Rotation/translation covariance. Exact families: random full-rotation-group
// elements acting on arguments and indices. Lattice families: the hypercubic
// transformations that preserve the lattice shape, judged at 3 sigma.
AxiomReport check_euclidean_covariance(const FamilyPtr& fam, std::uint64_t seed);

// Support of the 2-point kernel on positive times, via the spectral fit of the
// temporal slice with signed weights (support location, not positivity, is the
// question here). Statistical sources are inapplicable by policy.
AxiomReport check_temporal_support(const DifferenceForm& difform);

// Permutation symmetry: every within-type transposition up to the probed
// degree; graded (sign) rule on fermionic labels.
AxiomReport check_symmetry(const FamilyPtr& fam, std::uint64_t seed);

// Clustering along the spatial vector a at the given separations. The verdict
// needs |S(f x g_lambda) - S(f)S(g)| decreasing and heading to zero (plateau
// detection via exponential and power-law extrapolation).
AxiomReport check_cluster(const FamilyPtr& fam, const Vec4& a, const std::vector<double>& lambdas);

// Factorial-growth constants: w_n = max over probes of |S_n| / prod seminorms
// with (c, c') = (2, 2); fits log w_n = log C + d log n! and reports (C, d).
AxiomReport check_linear_growth(const FamilyPtr& fam, int n_max = 8);

// Reflection positivity of the gram over positive-time functionals.
AxiomReport check_reflection_positivity(const FamilyPtr& fam, const FieldIndex& idx2,
                                        const std::vector<TestFunction>& basis);
AxiomReport check_reflection_positivity(const Ensemble& ens,
                                        const std::vector<PlaquetteFunctional>& basis,
                                        int bins = 20);

// Gauge covariance. Ensemble form: site-sampled group elements, invariant
// observables compared per configuration at 1e-12 (never statistical).
// Exact form: abelian profile g = exp(i eps), checks the inhomogeneous shift
// bookkeeping, flatness of the pure-gradient field strength, and invariance
// of the positivity forms.
AxiomReport check_gauge_covariance(const Ensemble& ens, std::uint64_t seed);
AxiomReport check_gauge_covariance(const FamilyPtr& fam, const TestFunction& eps);

// Composite-channel (renormalized) positivity: reflected composite pairings
// for exact families, full composite correlator smears for lattice families;
// the nonabelian terms of the field-strength form are assembled with the
// family's structure constants (identically zero in the abelian case).
AxiomReport check_renormalized_positivity(const FamilyPtr& fam,
                                          const std::vector<TestFunction>& fs);

// Minkowski-side checks run on continued 2-point spectral data only.
AxiomReport check_spectral_condition(const SpectralModel& model, const std::string& family);
AxiomReport check_local_commutativity(const SpectralModel& model, const std::string& family);

// uniform inapplicable report for Minkowski axioms on non-continued families
AxiomReport minkowski_inapplicable(const std::string& axiom, const CorrelatorFamily& fam);

// Drives every checker that applies to the family with default probes and
// deterministic seeding; inapplicable axioms are reported, not skipped.
std::vector<AxiomReport> run_axiom_suite(const FamilyPtr& fam, std::uint64_t seed);

}  // namespace qgv
