#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qgv/axioms.hpp"

using namespace qgv;

namespace {

const AxiomReport& find_report(const std::vector<AxiomReport>& reports, const std::string& axiom) {
  for (const auto& r : reports)
    if (r.axiom == axiom) return r;
  throw std::runtime_error("missing report: " + axiom);
}

// n-point functions proportional to (n!)^2, normalized so the seminorm
// weights drop out; every other structural surface is intact
class FactorialBomb final : public CorrelatorFamily {
 public:
  FactorialBomb() { catalog_ = {{"phi", 1, false}}; }
  std::string name() const override { return "factorial_bomb"; }
  Metric metric() const override { return Metric::Euclidean; }
  Source source() const override { return Source::ExactFree; }
  int degree_cap() const override { return 8; }
  double mass_gap() const override { return 1.0; }
  const std::vector<FieldCatalogEntry>& catalog() const override { return catalog_; }
  int algebra_dim() const override { return 0; }
  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    const int n = idx.arity();
    if (n == 0) return {cplx(1, 0), 0.0};
    double v = 1.0;
    for (int k = 1; k <= n; ++k) v *= double(k);
    v = v * v;
    for (const auto& f : args) v *= f.schwartz_seminorm(2);
    return {cplx(v, 0), 0.0};
  }

 private:
  std::vector<FieldCatalogEntry> catalog_;
};

const Ensemble& test_ensemble() {
  static const Ensemble ens = [] {
    const Lattice lat({8, 8});
    Action act;
    act.group = GroupId::U1;
    act.beta = 1.0;
    return generate_ensemble(lat, act, 11, 64);
  }();
  return ens;
}

FamilyPtr test_lattice_family() {
  ObservableSpec spec;
  spec.kind = ObservableSpec::Kind::F2;
  return std::make_shared<LatticeFamily>(test_ensemble(), spec, "F2");
}

}  // namespace

TEST_CASE("reflected gram assembly") {
  const FamilyPtr fam = make_free_scalar_family(1.0);
  FieldIndex idx;
  idx.matter = {{"phi", 0}, {"phi", 0}};
  std::vector<TestFunction> basis;
  for (double t : {1.5, 2.2})
    basis.push_back(TestFunction::gaussian(Vec4(t, 0.3, -0.2, 0.1), 0.3));

  const GramMatrix g = build_os_gram(*fam, idx, basis);
  CHECK(g.entries.rows() == 2);
  CHECK(g.basis.size() == 2);
  CHECK(g.herm_defect <= 1e-12 * g.entries.cwiseAbs().maxCoeff());
  CHECK(g.eigenvalues[0] <= g.eigenvalues[1]);
  CHECK(g.eigenvalues[0] >= 0.0);  // free scalar gram is PSD outright
  CHECK(g.eigenvalue_errors.cwiseAbs().maxCoeff() == 0.0);

  FieldIndex idx3;
  idx3.matter = {{"phi", 0}, {"phi", 0}, {"phi", 0}};
  CHECK_THROWS_AS(build_os_gram(*fam, idx3, basis), std::invalid_argument);
  CHECK_THROWS_AS(build_os_gram(*fam, idx, {}), std::invalid_argument);
}

TEST_CASE("free scalar satisfies every applicable requirement") {
  const FamilyPtr fam = make_free_scalar_family(1.0);
  const auto reports = run_axiom_suite(fam, 42);
  CHECK(reports.size() == 10);

  for (const char* ax : {"euclidean_covariance", "temporal_support", "symmetry", "cluster",
                         "linear_growth", "reflection_positivity", "renormalized_positivity"}) {
    INFO(ax);
    CHECK(find_report(reports, ax).verdict == Verdict::Pass);
  }
  for (const char* ax : {"gauge_covariance", "spectral_condition", "local_commutativity"}) {
    INFO(ax);
    CHECK(find_report(reports, ax).verdict == Verdict::Inapplicable);
  }

  const auto& cov = find_report(reports, "euclidean_covariance");
  CHECK(cov.quantities.at("identity_defect") == 0.0);
  CHECK(cov.sigma == 0.0);

  const auto& sup = find_report(reports, "temporal_support");
  CHECK(sup.quantities.at("residual_rel") <= 1e-6);
  CHECK(sup.quantities.at("min_mass2") == doctest::Approx(1.0).epsilon(0.02));

  const auto& clu = find_report(reports, "cluster");
  CHECK(clu.quantities.at("rate") == doctest::Approx(1.0).epsilon(0.05));
  CHECK(clu.quantities.at("extrap_ratio") < 0.01);

  const auto& gro = find_report(reports, "linear_growth");
  CHECK(gro.quantities.at("d") <= 1.2);
  CHECK(gro.quantities.at("n_used") >= 3.0);

  // exact regime throughout: no statistical tolerances mixed in
  for (const auto& r : reports)
    if (r.verdict != Verdict::Inapplicable) CHECK(r.sigma == 0.0);
}

TEST_CASE("suite output is deterministic for a fixed seed") {
  const FamilyPtr fam = make_free_scalar_family(1.0);
  const auto a = run_axiom_suite(fam, 7);
  const auto b = run_axiom_suite(fam, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].axiom == b[i].axiom);
    CHECK(a[i].verdict == b[i].verdict);
    REQUIRE(a[i].quantities.size() == b[i].quantities.size());
    for (const auto& [k, v] : a[i].quantities) CHECK(v == b[i].quantities.at(k));
  }
}

TEST_CASE("maxwell field passes with inapplicable slice support") {
  const FamilyPtr fam = make_maxwell_family();
  const auto reports = run_axiom_suite(fam, 42);

  CHECK(find_report(reports, "temporal_support").verdict == Verdict::Inapplicable);
  for (const char* ax : {"euclidean_covariance", "symmetry", "cluster", "linear_growth",
                         "reflection_positivity", "gauge_covariance", "renormalized_positivity"}) {
    INFO(ax);
    CHECK(find_report(reports, ax).verdict == Verdict::Pass);
  }

  const auto& cov = find_report(reports, "euclidean_covariance");
  CHECK(cov.quantities.at("tensor_2pt") <= 1e-8);
  CHECK(cov.quantities.at("vector_2pt") <= 1e-8);
  CHECK(cov.quantities.at("mixed_2pt") <= 1e-8);

  // massless composite channel decays as a power, and the checker says so
  const auto& clu = find_report(reports, "cluster");
  CHECK(clu.quantities.at("power_model_better") == 1.0);
  CHECK(clu.quantities.at("extrap_ratio") <= 0.5);

  const auto& gau = find_report(reports, "gauge_covariance");
  CHECK(gau.quantities.at("defect_flat") <= 1e-10);
  CHECK(gau.quantities.at("identity_defect") == 0.0);
  CHECK(gau.quantities.at("shift_magnitude") > 0.0);
}

TEST_CASE("counterexamples fail exactly their targeted requirement") {
  const FamilyPtr base = make_free_scalar_family(1.0);

  SUBCASE("negated kernels break both positivity forms and nothing else") {
    const auto reports = run_axiom_suite(make_sign_flipped(base), 42);
    CHECK(find_report(reports, "reflection_positivity").verdict == Verdict::Fail);
    CHECK(find_report(reports, "renormalized_positivity").verdict == Verdict::Fail);
    for (const char* ax :
         {"euclidean_covariance", "temporal_support", "symmetry", "cluster", "linear_growth"}) {
      INFO(ax);
      CHECK(find_report(reports, ax).verdict == Verdict::Pass);
    }
  }

  SUBCASE("reflected slices break forward support and nothing else") {
    const auto reports = run_axiom_suite(make_time_reflected(base), 42);
    const auto& sup = find_report(reports, "temporal_support");
    CHECK(sup.verdict == Verdict::Fail);
    CHECK(sup.quantities.at("residual_rel") > 1e-6);
    for (const char* ax : {"euclidean_covariance", "symmetry", "cluster", "linear_growth",
                           "reflection_positivity", "renormalized_positivity"}) {
      INFO(ax);
      CHECK(find_report(reports, ax).verdict == Verdict::Pass);
    }
  }

  SUBCASE("a constant offset breaks clustering and nothing else") {
    const auto reports = run_axiom_suite(make_constant_shift(base, 0.05), 42);
    const auto& clu = find_report(reports, "cluster");
    CHECK(clu.verdict == Verdict::Fail);
    CHECK(clu.quantities.at("extrap_ratio") > 0.5);
    for (const char* ax : {"euclidean_covariance", "temporal_support", "symmetry", "linear_growth",
                           "reflection_positivity", "renormalized_positivity"}) {
      INFO(ax);
      CHECK(find_report(reports, ax).verdict == Verdict::Pass);
    }
    // the offset is absorbed by a slice-space zero mode, not by a fake pole
    const auto& sup = find_report(reports, "temporal_support");
    CHECK(sup.quantities.at("zero_mode") == doctest::Approx(0.05).epsilon(0.01));
    CHECK(sup.quantities.at("min_mass2") == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("graded symmetry on the fermionic fixture") {
  const FamilyPtr fam = make_fermion_toy_family(1.0);
  const AxiomReport rep = check_symmetry(fam, 3);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.quantities.at("fermionic_sign_defect") <= 1e-12);

  // the raw transposition flips the sign of the pairing
  const TestFunction f = TestFunction::gaussian(Vec4(0.2, 0.4, -0.3, 0.6), 0.7);
  const TestFunction g = TestFunction::gaussian(Vec4(-0.4, -0.2, 0.5, -0.3), 0.9);
  FieldIndex ab, ba;
  ab.matter = {{"psi", 0}, {"psi", 1}};
  ba.matter = {{"psi", 1}, {"psi", 0}};
  const cplx v = fam->evaluate(ab, {f, g}).value;
  const cplx w = fam->evaluate(ba, {g, f}).value;
  CHECK(std::abs(v) > 0.0);
  CHECK(std::abs(w + v) <= 1e-14 * std::abs(v));
}

TEST_CASE("factorial growth beyond the admissible power is refused") {
  const FamilyPtr fam = std::make_shared<FactorialBomb>();
  const AxiomReport rep = check_linear_growth(fam);
  CHECK(rep.verdict == Verdict::Fail);
  CHECK(rep.quantities.at("d") > 1.2);
  CHECK_THROWS_AS(check_linear_growth(fam, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_linear_growth(fam, 12), std::invalid_argument);
}

TEST_CASE("spectral-side checks on continued data") {
  SpectralModel good;
  good.poles = {{1.0, 1.0}};
  CHECK(check_spectral_condition(good, "probe").verdict == Verdict::Pass);
  CHECK(check_local_commutativity(good, "probe").verdict == Verdict::Pass);

  SpectralModel bad;
  bad.poles = {{-0.5, 1.0}};
  CHECK(check_spectral_condition(bad, "probe").verdict == Verdict::Fail);

  SpectralModel empty;
  CHECK(check_spectral_condition(empty, "probe").verdict == Verdict::Fail);

  SpectralModel two;
  two.poles = {{1.0, 1.0}, {4.0, 0.3}};
  const AxiomReport rep = check_local_commutativity(two, "probe");
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.quantities.at("max_commutator") <= 1e-8);
}

TEST_CASE("misuse is refused loudly") {
  const FamilyPtr scalar = make_free_scalar_family(1.0);
  const FamilyPtr fermion = make_fermion_toy_family(1.0);

  FieldIndex idx;
  idx.matter = {{"phi", 0}, {"phi", 0}};
  const std::vector<TestFunction> bad_basis = {TestFunction::gaussian(Vec4(0.5, 0, 0, 0), 0.3)};
  CHECK_THROWS_AS(check_reflection_positivity(scalar, idx, bad_basis), std::invalid_argument);

  CHECK_THROWS_AS(check_renormalized_positivity(
                      fermion, {TestFunction::gaussian(Vec4(2.0, 0, 0, 0), 0.3)}),
                  std::invalid_argument);

  // no index transformation law is published for the fermionic doublet
  CHECK_THROWS_AS(check_euclidean_covariance(fermion, 1), std::invalid_argument);

  CHECK_THROWS_AS(check_cluster(scalar, Vec4::Zero(), {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(check_cluster(scalar, Vec4(0, 1, 0, 0), {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(check_cluster(scalar, Vec4(0, 1, 0, 0), {1.0, 3.0, 2.0}), std::invalid_argument);

  const FamilyPtr lat = test_lattice_family();
  CHECK_THROWS_AS(check_cluster(lat, Vec4(0, 1, 0, 0), {2.0, 4.0, 6.0}), std::invalid_argument);
}

TEST_CASE("lattice estimates run under statistical tolerances") {
  const FamilyPtr fam = test_lattice_family();

  SUBCASE("hypercubic covariance within noise") {
    const AxiomReport rep = check_euclidean_covariance(fam, 42);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.quantities.at("max_sigma_units") <= 3.0);
    CHECK(rep.quantities.count("reflect_axis0") == 1);
    CHECK(rep.quantities.count("swap_axes01") == 1);
    CHECK(rep.provenance.size() == 64);  // content hash pins the ensemble
    CHECK(rep.sigma > 0.0);
  }

  SUBCASE("configuration-level transformation invariance") {
    const AxiomReport rep = check_gauge_covariance(test_ensemble(), 5);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.quantities.at("max_defect") <= 1e-12);
    CHECK(rep.quantities.at("identity_defect") == 0.0);
    CHECK(rep.sigma == 0.0);  // per-configuration identity, not an average
  }

  SUBCASE("link-reflection gram stays positive within noise") {
    std::vector<PlaquetteFunctional> basis;
    for (int t : {1, 2})
      basis.push_back(slice_plaquette_functional(test_ensemble().lattice, t));
    const AxiomReport rep = check_reflection_positivity(test_ensemble(), basis);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.quantities.at("min_eig") >= -3.0 * rep.quantities.at("min_eig_err"));
  }

  SUBCASE("full suite on the estimate") {
    const auto reports = run_axiom_suite(fam, 42);
    CHECK(find_report(reports, "euclidean_covariance").verdict == Verdict::Pass);
    CHECK(find_report(reports, "symmetry").verdict == Verdict::Pass);
    CHECK(find_report(reports, "cluster").verdict == Verdict::Pass);
    CHECK(find_report(reports, "renormalized_positivity").verdict == Verdict::Pass);
    for (const char* ax : {"temporal_support", "linear_growth", "reflection_positivity",
                           "gauge_covariance", "spectral_condition", "local_commutativity"}) {
      INFO(ax);
      CHECK(find_report(reports, ax).verdict == Verdict::Inapplicable);
    }
    // statistical verdicts carry their noise scale
    const auto& cov = find_report(reports, "euclidean_covariance");
    CHECK(cov.tolerance == 3.0);
  }
}
