#pragma once

// Finite-truncation reconstruction: finite sequences of smeared field slots
// over a correlator family, the (generally indefinite) sequence pairing, the
// null quotient onto a genuine pre-Hilbert space, field operators as
// slot-prepend maps, spacetime and abelian gauge actions, and a double-build
// uniqueness intertwiner. Everything is finite-dimensional linear algebra
// over a working basis of at most 16 sequence vectors of degree at most 4.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgv/correlator.hpp"

namespace qgv {

// one monomial c * (slots applied to the vacuum); slot metadata sits in idx
// (gauge slots first, then matter slots) with one smearing function per slot
// in the same order
struct SequenceTerm {
  cplx coeff{1.0, 0.0};
  FieldIndex idx;
  std::vector<TestFunction> args;
  int degree() const { return idx.arity(); }
};

// finite linear combination of monomials; the empty-slot term is the vacuum
struct SequenceVector {
  std::vector<SequenceTerm> terms;

  static SequenceVector vacuum();
  bool is_vacuum() const;  // exactly one empty-slot term with coefficient 1
  SequenceVector scaled(cplx c) const;
  SequenceVector plus(const SequenceVector& other) const;
  int degree() const;  // largest term degree, 0 for the vacuum
};

// <v, w> = sum over term pairs of conj(c_v) c_w W(conj(v slots) reversed x
// w slots). Bosonic labels only: the reversed slots are reordered into the
// family's canonical gauge-first order, exact by the symmetry axiom; the
// evaluator refuses fermionic catalogs.
cplx sequence_pairing(const CorrelatorFamily& fam, const SequenceVector& v,
                      const SequenceVector& w);

struct BorchersSpace {
  FamilyPtr family;
  std::vector<SequenceVector> basis;
  Eigen::MatrixXcd gram;     // Hermitized pairing matrix
  double herm_defect = 0.0;  // max entry of the discarded anti-Hermitian part
};

// pairing matrix over a basis; throws if the basis is empty or larger than
// max_basis, a term exceeds degree_cap, or the family cannot evaluate twice
// the maximal degree
BorchersSpace build_borchers(const FamilyPtr& fam, const std::vector<SequenceVector>& basis,
                             int degree_cap = 4, int max_basis = 16);

// covariant-gauge photon on the relativistic side: gauge slots paired with
// -eta_{mu nu} W_0, the standard indefinite-metric sector. Matter slots are
// refused. Used to witness that the sequence pairing is not positive
// semidefinite in general.
FamilyPtr make_covariant_photon_family();

// field operators prepend one smeared slot
struct FieldOperatorMap {
  std::optional<GaugeSlot> gauge_slot;
  std::optional<MatterSlot> matter_slot;

  static FieldOperatorMap matter(const std::string& label, int component = 0);
  static FieldOperatorMap gauge(int alpha, int mu);
};

// throws once the new degree would exceed degree_cap
SequenceVector apply_field(const FieldOperatorMap& op, const SequenceVector& v,
                           const TestFunction& x, int degree_cap = 4);

struct PhysicalSpace {
  FamilyPtr family;
  std::vector<SequenceVector> borchers_basis;
  Eigen::MatrixXcd borchers_gram;
  Eigen::VectorXd spectrum;  // gram eigenvalues, ascending

  // physical basis vector k is sum_i quotient(k, i) * borchers_basis[i];
  // the induced inner product is diag(inner), strictly positive
  Eigen::MatrixXcd quotient;
  Eigen::VectorXd inner;
  int null_dim = 0;

  Eigen::VectorXcd omega;     // vacuum coordinates in the physical basis
  double omega_norm_defect = 0.0;

  int dim() const { return int(inner.size()); }

  // coordinates of borchers basis vector i in the physical basis
  Eigen::VectorXcd coords_of(int i) const;
  // induced pairing of two coordinate vectors
  cplx pair(const Eigen::VectorXcd& y, const Eigen::VectorXcd& z) const;
};

// eigendecomposition quotient: directions below eps_null * max eigenvalue are
// null and removed; an eigenvalue below -eps_null * max is a positivity
// violation and throws. The basis must contain the vacuum. reversed_pivot
// assembles in reversed basis order (an independent numerical path for the
// uniqueness double-build).
PhysicalSpace build_physical(const FamilyPtr& fam, const std::vector<SequenceVector>& basis,
                             double eps_null = 1e-10, bool reversed_pivot = false);

// Euclidean/Poincare action: every smearing function is pulled back through
// the isometry, vector and antisymmetric-pair slots mix components. The
// vacuum is fixed exactly.
SequenceVector act_poincare(const Eigen::Matrix4d& rotation, const Vec4& translation,
                            const SequenceVector& v);

struct GaugeActionResult {
  SequenceVector vector;
  double projection_error = 0.0;  // relative series remainder, 0 when exact
};

// abelian gauge action by g(x) = exp(i q eps(x)) per matter label charge:
// charged matter slots multiply by the phase, expanded to series_order inside
// the closed Gaussian-polynomial class (the working-set projection); gauge
// slots pick up the inhomogeneous shift as an extra slot-dropped term; "F"
// and composite labels are invariant. Throws if the series remainder exceeds
// 1e-6 (profile too rough for the working set).
GaugeActionResult act_gauge(const SequenceVector& v, const TestFunction& eps,
                            const std::map<std::string, double>& charges = {},
                            int series_order = 4);

// constant group element: charged matter slots scale by exp(i q theta), the
// inhomogeneous term vanishes identically
SequenceVector act_gauge_constant(const SequenceVector& v, double theta,
                                  const std::map<std::string, double>& charges = {});

struct UniquenessReport {
  bool matched = false;
  int dim_a = 0, dim_b = 0;
  double pairing_defect = 0.0;  // max mismatch of induced pairings, relative
  double omega_defect = 0.0;    // |L omega_a - omega_b| through the intertwiner
  Eigen::VectorXd spectrum_a, spectrum_b;
};

// constructs the intertwiner L [b_i]_a -> [b_{perm(i)}]_b on the common basis
// and verifies it is isometric and vacuum-preserving; perm empty means the
// identity correspondence. A dimension mismatch is reported (with both
// spectra), not thrown: it signals quotient-threshold instability.
UniquenessReport verify_uniqueness(const PhysicalSpace& a, const PhysicalSpace& b,
                                   const std::vector<int>& perm = {});

}  // namespace qgv
