#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "qgv/correlator.hpp"
#include "qgv/free_field.hpp"
#include "qgv/reconstruction.hpp"

using namespace qgv;

namespace {

const TestFunction f1 = TestFunction::gaussian({0.3, -0.2, 0.4, 0.1}, 0.8);
const TestFunction f2 = TestFunction::gaussian({-0.5, 0.3, -0.1, 0.6}, 1.1);
const TestFunction f3 = TestFunction::gaussian({0.2, 0.5, -0.3, -0.4}, 0.9);
const TestFunction f4 = TestFunction::gaussian({-0.1, -0.4, 0.2, 0.3}, 1.0);

FamilyPtr scalar() {
  static FamilyPtr fam = make_free_scalar_family(1.0);
  return fam;
}

SequenceVector phi_vec(const TestFunction& f) {
  return apply_field(FieldOperatorMap::matter("phi"), SequenceVector::vacuum(), f);
}

SequenceVector phi2_vec(const TestFunction& f) {
  return apply_field(FieldOperatorMap::matter("phi2"), SequenceVector::vacuum(), f);
}

double rel(cplx a, cplx b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

}  // namespace

TEST_CASE("sequence vectors: vacuum, combination, degree bookkeeping") {
  const SequenceVector om = SequenceVector::vacuum();
  CHECK(om.is_vacuum());
  CHECK(om.degree() == 0);

  const SequenceVector v = phi_vec(f1);
  CHECK(v.degree() == 1);
  CHECK_FALSE(v.is_vacuum());

  const SequenceVector combo = v.scaled(cplx(2.0, 1.0)).plus(om);
  CHECK(combo.terms.size() == 2);
  CHECK(combo.degree() == 1);
  CHECK(combo.terms[0].coeff == cplx(2.0, 1.0));
}

TEST_CASE("sequence pairing matches the free-field Wick oracle") {
  const auto fam = scalar();

  // vacuum normalization
  CHECK(sequence_pairing(*fam, SequenceVector::vacuum(), SequenceVector::vacuum()) ==
        cplx(1.0, 0.0));

  // 2-point block against the direct kernel smear
  const cplx p12 = sequence_pairing(*fam, phi_vec(f1), phi_vec(f2));
  CHECK(rel(p12, scalar_pairing(f1, f2, 1.0)) < 1e-12);

  // adjoint move: <phi(f1) Omega, phi(f2) Omega> = <Omega, phi(f1) phi(f2) Omega>
  const SequenceVector w2 = apply_field(FieldOperatorMap::matter("phi"), phi_vec(f2), f1);
  const cplx through_vacuum = sequence_pairing(*fam, SequenceVector::vacuum(), w2);
  CHECK(rel(p12, through_vacuum) < 1e-12);

  // degree-4 pairing against a hand-built Wick sum (real Gaussians, so the
  // conjugations are trivial and the slot reversal is the only bookkeeping)
  const SequenceVector va = apply_field(FieldOperatorMap::matter("phi"), phi_vec(f2), f1);
  const SequenceVector vb = apply_field(FieldOperatorMap::matter("phi"), phi_vec(f4), f3);
  const cplx got = sequence_pairing(*fam, va, vb);
  auto pp = [](const TestFunction& a, const TestFunction& b) { return scalar_pairing(a, b, 1.0); };
  // adjoint tuple of phi(f1)phi(f2)Omega is (f2, f1); glued order f2 f1 f3 f4
  const cplx wick = pp(f2, f1) * pp(f3, f4) + pp(f2, f3) * pp(f1, f4) + pp(f2, f4) * pp(f1, f3);
  CHECK(rel(got, wick) < 1e-10);

  // linearity in both arguments
  const SequenceVector sum = phi_vec(f1).scaled(cplx(0.0, 2.0)).plus(phi_vec(f3));
  const cplx lhs = sequence_pairing(*fam, sum, phi_vec(f2));
  const cplx parts = std::conj(cplx(0.0, 2.0)) * p12 + sequence_pairing(*fam, phi_vec(f3), phi_vec(f2));
  CHECK(rel(lhs, parts) < 1e-12);
}

TEST_CASE("build_borchers: gram shape, hermiticity, validation") {
  const auto fam = scalar();

  const BorchersSpace vac = build_borchers(fam, {SequenceVector::vacuum()});
  CHECK(vac.gram.rows() == 1);
  CHECK(vac.gram(0, 0) == cplx(1.0, 0.0));
  CHECK(vac.herm_defect == 0.0);

  const BorchersSpace two = build_borchers(fam, {SequenceVector::vacuum(), phi_vec(f1)});
  CHECK(two.gram(0, 0).real() == doctest::Approx(1.0));
  // odd moments vanish for the free field: off-diagonal exactly zero
  CHECK(std::abs(two.gram(0, 1)) < 1e-15);
  CHECK(rel(two.gram(1, 1), scalar_pairing(f1, f1, 1.0)) < 1e-12);
  CHECK(two.herm_defect < 1e-12 * std::abs(two.gram(1, 1)));

  CHECK_THROWS_AS(build_borchers(fam, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_borchers(nullptr, {SequenceVector::vacuum()}), std::invalid_argument);
  CHECK_THROWS_AS(build_borchers(fam, {phi_vec(f1)}, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_borchers(fam, std::vector<SequenceVector>(17, SequenceVector::vacuum())),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_borchers(make_fermion_toy_family(1.0), {SequenceVector::vacuum()}),
                  std::invalid_argument);

  // a degree-3 vector needs a family cap of 6; cap 4 must refuse
  const auto small = make_free_scalar_family(1.0, 4);
  const SequenceVector deep =
      apply_field(FieldOperatorMap::matter("phi"),
                  apply_field(FieldOperatorMap::matter("phi"), phi_vec(f1), f2), f3);
  CHECK_THROWS_AS(build_borchers(small, {deep}), std::invalid_argument);
}

TEST_CASE("covariant photon family: indefinite pairing witness") {
  const auto photon = make_covariant_photon_family();
  CHECK(photon->metric() == CorrelatorFamily::Metric::Minkowski);
  CHECK(photon->algebra_dim() == 1);
  CHECK(photon->catalog().empty());

  const TestFunction x = TestFunction::gaussian({0.0, 0.2, -0.1, 0.3}, 0.9);
  const SequenceVector a0 = apply_field(FieldOperatorMap::gauge(0, 0), SequenceVector::vacuum(), x);
  const SequenceVector a3 = apply_field(FieldOperatorMap::gauge(0, 3), SequenceVector::vacuum(), x);

  const cplx n0 = sequence_pairing(*photon, a0, a0);
  const cplx n3 = sequence_pairing(*photon, a3, a3);
  CHECK(n0.real() < 0.0);      // time channel carries negative norm
  CHECK(n3.real() > 0.0);      // spatial channel is positive
  CHECK(std::abs(n0 + n3) < 1e-12 * std::abs(n3));  // same smear, opposite metric sign

  const BorchersSpace bs = build_borchers(photon, {a0, a3});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bs.gram);
  CHECK(es.eigenvalues()(0) < 0.0);

  // 4-point Wick sum: equal slots give 3 * (2-point)^2
  FieldIndex idx;
  idx.gauge = {{0, 3}, {0, 3}, {0, 3}, {0, 3}};
  const cplx four = photon->evaluate(idx, {x, x, x, x}).value;
  const cplx two = covariant_photon_pairing(3, 3, x, x);
  CHECK(rel(four, 3.0 * two * two) < 1e-10);

  // odd arity vanishes, matter slots are refused
  FieldIndex odd;
  odd.gauge = {{0, 1}};
  CHECK(photon->evaluate(odd, {x}).value == cplx(0.0, 0.0));
  FieldIndex bad;
  bad.matter = {{"phi", 0}};
  CHECK_THROWS_AS(photon->evaluate(bad, {x}), std::invalid_argument);

  // the physical quotient refuses the indefinite basis outright
  CHECK_THROWS_AS(build_physical(photon, {SequenceVector::vacuum(), a0}), std::runtime_error);
}

TEST_CASE("apply_field: slot placement, caps, linearity") {
  const auto fam = scalar();

  const SequenceVector v1 = phi_vec(f1);
  CHECK(v1.terms.size() == 1);
  CHECK(v1.terms[0].idx.matter.size() == 1);
  CHECK(v1.terms[0].idx.matter[0].label == "phi");

  // gauge slot goes in front of the gauge sector, args stay aligned
  const auto maxwell = make_maxwell_family();
  SequenceVector mixed = apply_field(FieldOperatorMap::matter("F", 2), SequenceVector::vacuum(), f2);
  mixed = apply_field(FieldOperatorMap::gauge(0, 1), mixed, f1);
  CHECK(mixed.terms[0].idx.gauge.size() == 1);
  CHECK(mixed.terms[0].idx.matter.size() == 1);
  CHECK(mixed.terms[0].args.size() == 2);
  CHECK(mixed.terms[0].args[0].center()(0) == f1.center()(0));
  CHECK(mixed.terms[0].args[1].center()(0) == f2.center()(0));
  CHECK_NOTHROW(sequence_pairing(*maxwell, mixed, mixed));

  // degree cap enforcement
  SequenceVector deep = SequenceVector::vacuum();
  for (int k = 0; k < 4; ++k) deep = apply_field(FieldOperatorMap::matter("phi"), deep, f1);
  CHECK(deep.degree() == 4);
  CHECK_THROWS_AS(apply_field(FieldOperatorMap::matter("phi"), deep, f1), std::invalid_argument);

  FieldOperatorMap empty_op;
  CHECK_THROWS_AS(apply_field(empty_op, SequenceVector::vacuum(), f1), std::invalid_argument);

  // operator linearity through pairings
  const SequenceVector sum = phi_vec(f1).plus(phi_vec(f2).scaled(cplx(0.5, -1.0)));
  const SequenceVector applied = apply_field(FieldOperatorMap::matter("phi"), sum, f3);
  const SequenceVector direct =
      apply_field(FieldOperatorMap::matter("phi"), phi_vec(f1), f3)
          .plus(apply_field(FieldOperatorMap::matter("phi"), phi_vec(f2), f3).scaled(cplx(0.5, -1.0)));
  const cplx pa = sequence_pairing(*fam, applied, applied);
  const cplx pd = sequence_pairing(*fam, direct, direct);
  CHECK(rel(pa, pd) < 1e-12);
}

TEST_CASE("vacuum expectation round-trip through the gram up to degree 4") {
  const auto fam = scalar();
  const std::vector<TestFunction> fs{f1, f2, f3, f4};

  SequenceVector w = SequenceVector::vacuum();
  std::vector<TestFunction> args;
  for (int n = 1; n <= 4; ++n) {
    w = apply_field(FieldOperatorMap::matter("phi"), w, fs[std::size_t(n - 1)]);
    args.insert(args.begin(), fs[std::size_t(n - 1)]);

    const BorchersSpace bs = build_borchers(fam, {SequenceVector::vacuum(), w});
    FieldIndex idx;
    idx.matter.assign(std::size_t(n), MatterSlot{"phi", 0});
    const cplx direct = fam->evaluate(idx, args).value;
    const cplx through = bs.gram(0, 1);
    if (std::abs(direct) < 1e-14) {
      CHECK(std::abs(through) < 1e-14);  // odd moments vanish on both routes
    } else {
      CHECK(rel(through, direct) < 1e-12);
    }
  }
}

TEST_CASE("build_physical: quotient, positivity, vacuum normalization") {
  const auto fam = scalar();

  SUBCASE("independent basis gives a strictly positive space") {
    const PhysicalSpace ps = build_physical(
        fam, {SequenceVector::vacuum(), phi_vec(f1),
              apply_field(FieldOperatorMap::matter("phi"), phi_vec(f2), f1)});
    CHECK(ps.null_dim == 0);
    CHECK(ps.dim() == 3);
    for (int k = 0; k < ps.dim(); ++k) CHECK(ps.inner(k) > 0.0);
    CHECK(ps.omega_norm_defect < 1e-12);
    CHECK(std::abs(ps.pair(ps.omega, ps.omega) - cplx(1.0, 0.0)) < 1e-12);
    // induced pairing reproduces the gram on surviving directions
    const cplx g01 = ps.pair(ps.coords_of(0), ps.coords_of(1));
    CHECK(rel(g01, ps.borchers_gram(0, 1)) < 1e-10);
  }

  SUBCASE("linearly dependent basis is quotiented, not rejected") {
    const SequenceVector dep = phi_vec(f1).plus(phi_vec(f2));
    const PhysicalSpace ps =
        build_physical(fam, {SequenceVector::vacuum(), phi_vec(f1), phi_vec(f2), dep});
    CHECK(ps.null_dim == 1);
    CHECK(ps.dim() == 3);
    for (int k = 0; k < ps.dim(); ++k) CHECK(ps.inner(k) > 0.0);

    // Cauchy-Schwarz closure: the null direction pairs to zero with every
    // basis class through the full gram
    Eigen::VectorXcd nullv = Eigen::VectorXcd::Zero(4);
    nullv(1) = 1.0;
    nullv(2) = 1.0;
    nullv(3) = -1.0;
    const Eigen::VectorXcd pairings = ps.borchers_gram * nullv;
    const double scale = ps.borchers_gram.cwiseAbs().maxCoeff();
    CHECK(pairings.cwiseAbs().maxCoeff() < 1e-10 * scale);

    // quotient coordinates of the dependent vector agree with the sum
    const Eigen::VectorXcd lhs = ps.coords_of(3);
    const Eigen::VectorXcd rhs = ps.coords_of(1) + ps.coords_of(2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("null directions stay null under further field applications") {
    const SequenceVector nullvec =
        phi_vec(f1).plus(phi_vec(f2)).plus(phi_vec(f1).scaled(-1.0)).plus(phi_vec(f2).scaled(-1.0));
    const double nn = std::abs(sequence_pairing(*fam, nullvec, nullvec));
    CHECK(nn < 1e-12);
    const SequenceVector image = apply_field(FieldOperatorMap::matter("phi"), nullvec, f3);
    const double in = std::abs(sequence_pairing(*fam, image, image));
    CHECK(in < 1e-8);
  }

  SUBCASE("missing vacuum and indefinite grams are refused") {
    CHECK_THROWS_AS(build_physical(fam, {phi_vec(f1)}), std::invalid_argument);
    const auto flipped = make_sign_flipped(scalar());
    CHECK_THROWS_AS(build_physical(flipped, {SequenceVector::vacuum(), phi_vec(f1)}),
                    std::runtime_error);
  }
}

TEST_CASE("act_poincare: isometry, identity, vacuum fixed") {
  const auto fam = scalar();

  // a rotation in the (0,1) and (2,3) planes plus a translation
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  const double c2 = std::cos(-0.4), s2 = std::sin(-0.4);
  r(2, 2) = c2;
  r(2, 3) = -s2;
  r(3, 2) = s2;
  r(3, 3) = c2;
  const Vec4 a{0.5, -0.3, 0.2, 0.8};

  SUBCASE("vacuum is fixed exactly") {
    const SequenceVector uo = act_poincare(r, a, SequenceVector::vacuum());
    CHECK(uo.is_vacuum());
  }

  SUBCASE("identity transform changes nothing") {
    const SequenceVector v = apply_field(FieldOperatorMap::matter("phi"), phi_vec(f1), f2);
    const SequenceVector uv = act_poincare(Eigen::Matrix4d::Identity(), Vec4::Zero(), v);
    const cplx before = sequence_pairing(*fam, v, v);
    const cplx after = sequence_pairing(*fam, uv, uv);
    CHECK(before == after);
  }

  SUBCASE("scalar sector pairings are invariant") {
    const std::vector<SequenceVector> basis{SequenceVector::vacuum(), phi_vec(f1),
                                            apply_field(FieldOperatorMap::matter("phi"), phi_vec(f2), f3)};
    for (const auto& v : basis) {
      for (const auto& w : basis) {
        const cplx before = sequence_pairing(*fam, v, w);
        const cplx after =
            sequence_pairing(*fam, act_poincare(r, a, v), act_poincare(r, a, w));
        CHECK(std::abs(before - after) < 1e-8 * std::max(1.0, std::abs(before)));
      }
    }
  }

  SUBCASE("connection and field-strength components mix isometrically") {
    const auto maxwell = make_maxwell_family();
    const SequenceVector av =
        apply_field(FieldOperatorMap::gauge(0, 0), SequenceVector::vacuum(), f1);
    const SequenceVector fv =
        apply_field(FieldOperatorMap::matter("F", 0), SequenceVector::vacuum(), f2);
    const std::vector<SequenceVector> basis{av, fv};
    for (const auto& v : basis) {
      for (const auto& w : basis) {
        const cplx before = sequence_pairing(*maxwell, v, w);
        const cplx after =
            sequence_pairing(*maxwell, act_poincare(r, a, v), act_poincare(r, a, w));
        CHECK(std::abs(before - after) < 1e-8 * std::max(1.0, std::abs(before)));
      }
    }
    // component mixing really happened
    const SequenceVector ua = act_poincare(r, a, av);
    CHECK(ua.terms.size() > 1);
  }
}

TEST_CASE("act_gauge: phase series, inhomogeneous shift, invariants") {
  const auto fam = scalar();
  const TestFunction eps = TestFunction::gaussian({0.2, -0.1, 0.3, 0.0}, 1.3).scaled(0.05);

  SUBCASE("profile validation") {
    CHECK_THROWS_AS(act_gauge(phi_vec(f1), TestFunction::gaussian({0, 0, 0, 0}, 1.0).scaled(cplx(0, 1)),
                              {{"phi", 1.0}}),
                    std::invalid_argument);
    // strong phases overflow the truncated series and must be refused
    const TestFunction strong = TestFunction::gaussian({0.3, 0.0, 0.0, 0.0}, 1.3).scaled(40.0);
    CHECK_THROWS_AS(act_gauge(phi_vec(f1), strong, {{"phi", 1.0}}), std::runtime_error);
  }

  SUBCASE("neutral content is untouched") {
    const GaugeActionResult r = act_gauge(phi2_vec(f1), eps, {{"phi", 1.0}});
    CHECK(r.projection_error == 0.0);
    CHECK(r.vector.terms.size() == 1);
    CHECK(r.vector.terms[0].coeff == cplx(1.0, 0.0));
    CHECK(r.vector.terms[0].idx.matter[0].label == "phi2");
    CHECK(r.vector.terms[0].args[0].center() == f1.center());
    CHECK(r.vector.terms[0].args[0].width() == f1.width());
  }

  SUBCASE("charged slots pick up the pointwise phase") {
    const double q = 0.8;
    const GaugeActionResult r = act_gauge(phi_vec(f1), eps, {{"phi", q}});
    CHECK(r.projection_error > 0.0);
    CHECK(r.projection_error <= 1e-6);
    CHECK(r.vector.terms.size() == 5);  // series orders 0..4

    // the expanded slot functions reproduce f * exp(i q eps) pointwise
    for (const Vec4& x : {Vec4{0.1, 0.0, 0.2, -0.1}, Vec4{0.4, -0.3, 0.1, 0.2}}) {
      cplx series{0.0, 0.0};
      for (const auto& t : r.vector.terms) series += t.coeff * t.args[0].eval(x);
      const cplx exact = f1.eval(x) * std::exp(cplx(0.0, q * eps.eval(x).real()));
      CHECK(std::abs(series - exact) < 1e-8);
    }
  }

  SUBCASE("connection slots shift by the profile gradient") {
    const auto maxwell = make_maxwell_family();
    const int mu = 1;
    const SequenceVector av =
        apply_field(FieldOperatorMap::gauge(0, mu), SequenceVector::vacuum(), f1);
    const GaugeActionResult r = act_gauge(av, eps);
    CHECK(r.vector.terms.size() == 2);

    // shift coefficient two ways: moving the derivative across by parts
    const cplx route1 = TestFunction::product(f1, eps.derivative(mu)).integral();
    const cplx route2 = -TestFunction::product(f1.derivative(mu), eps).integral();
    CHECK(std::abs(route1 - route2) < 1e-10 * std::max(1.0, std::abs(route1)));

    // the slot-dropped term is visible against the vacuum
    const cplx overlap = sequence_pairing(*maxwell, r.vector, SequenceVector::vacuum());
    CHECK(std::abs(overlap - std::conj(route1)) < 1e-10 * std::max(1.0, std::abs(route1)));
  }

  SUBCASE("field-strength content is invariant") {
    const auto maxwell = make_maxwell_family();
    // composite smears need separated supports, so park the two far apart
    const TestFunction ca = TestFunction::gaussian({-3.2, 0.0, 0.0, 0.0}, 0.45);
    const TestFunction cb = TestFunction::gaussian({3.4, 0.3, -0.2, 0.1}, 0.5);
    const SequenceVector f2a =
        apply_field(FieldOperatorMap::matter("F2"), SequenceVector::vacuum(), ca);
    const SequenceVector f2b =
        apply_field(FieldOperatorMap::matter("F2"), SequenceVector::vacuum(), cb);
    const SequenceVector fva =
        apply_field(FieldOperatorMap::matter("F", 3), SequenceVector::vacuum(), f3);
    const SequenceVector fvb =
        apply_field(FieldOperatorMap::matter("F", 3), SequenceVector::vacuum(), f4);

    const cplx comp_before = sequence_pairing(*maxwell, f2a, f2b);
    const cplx comp_after =
        sequence_pairing(*maxwell, act_gauge(f2a, eps).vector, act_gauge(f2b, eps).vector);
    CHECK(comp_before == comp_after);
    CHECK(std::abs(comp_before) > 0.0);

    const cplx elem_before = sequence_pairing(*maxwell, fva, fvb);
    const cplx elem_after =
        sequence_pairing(*maxwell, act_gauge(fva, eps).vector, act_gauge(fvb, eps).vector);
    CHECK(elem_before == elem_after);
  }

  SUBCASE("constant group elements act by exact phases") {
    const double theta = 0.9, q = 1.5;
    SequenceVector two = apply_field(FieldOperatorMap::matter("phi"), phi_vec(f1), f2);
    const SequenceVector ut = act_gauge_constant(two, theta, {{"phi", q}});
    CHECK(ut.terms.size() == 1);
    CHECK(std::abs(ut.terms[0].coeff - std::exp(cplx(0.0, 2.0 * q * theta))) < 1e-15);
    const cplx before = sequence_pairing(*fam, two, two);
    const cplx after = sequence_pairing(*fam, ut, ut);
    CHECK(rel(before, after) < 1e-12);
  }
}

TEST_CASE("verify_uniqueness: double builds agree up to the intertwiner") {
  const auto fam = scalar();
  const std::vector<SequenceVector> basis{
      SequenceVector::vacuum(), phi_vec(f1), phi_vec(f2),
      apply_field(FieldOperatorMap::matter("phi"), phi_vec(f4), f3)};

  const PhysicalSpace pa = build_physical(fam, basis);

  SUBCASE("identical builds match exactly") {
    const UniquenessReport rep = verify_uniqueness(pa, build_physical(fam, basis));
    CHECK(rep.matched);
    CHECK(rep.pairing_defect < 1e-14);
    CHECK(rep.omega_defect < 1e-14);
  }

  SUBCASE("reversed assembly order matches through the permutation") {
    const PhysicalSpace pb = build_physical(fam, basis, 1e-10, true);
    const int n = int(basis.size());
    std::vector<int> perm;
    for (int i = n - 1; i >= 0; --i) perm.push_back(i);
    const UniquenessReport rep = verify_uniqueness(pa, pb, perm);
    CHECK(rep.matched);
    CHECK(rep.pairing_defect < 1e-10);
    CHECK(rep.omega_defect < 1e-10);
  }

  SUBCASE("externally permuted basis lists match through the permutation") {
    const std::vector<SequenceVector> shuffled{
        phi_vec(f2), SequenceVector::vacuum(),
        apply_field(FieldOperatorMap::matter("phi"), phi_vec(f4), f3), phi_vec(f1)};
    // basis[i] sits at shuffled[perm[i]]
    const std::vector<int> perm{1, 3, 0, 2};
    const UniquenessReport rep = verify_uniqueness(pa, build_physical(fam, shuffled), perm);
    CHECK(rep.matched);
  }

  SUBCASE("dimension mismatches are reported, not thrown") {
    // a huge null threshold deletes genuine directions in the second build
    const PhysicalSpace pb = build_physical(fam, basis, 0.9);
    CHECK(pb.dim() < pa.dim());
    const UniquenessReport rep = verify_uniqueness(pa, pb);
    CHECK_FALSE(rep.matched);
    CHECK(rep.dim_a != rep.dim_b);
    CHECK(rep.spectrum_a.size() == rep.spectrum_b.size());
  }

  SUBCASE("malformed permutations are rejected") {
    CHECK_THROWS_AS(verify_uniqueness(pa, pa, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(verify_uniqueness(pa, pa, {0, 0, 1, 2}), std::invalid_argument);
  }
}
