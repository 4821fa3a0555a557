#pragma once

// Indexed families of correlation functions and the operations the checker
// suite drives them through. A family is operational: it is whatever can be
// paired with test functions (plus optional pointwise and momentum-slice
// surfaces). Exact Gaussian families report stderr = 0; sampled families
// report a jackknife error alongside every value.

#include <memory>
#include <string>
#include <vector>

#include "qgv/rng.hpp"
#include "qgv/testfunc.hpp"

namespace qgv {

// one matter insertion: a catalog label plus a component into its index set
struct MatterSlot {
  std::string label;
  int component = 0;
};

// one connection insertion A^alpha_mu
struct GaugeSlot {
  int alpha = 0;
  int mu = 0;
};

// gauge slots come first in the argument tuple, then matter slots
struct FieldIndex {
  std::vector<GaugeSlot> gauge;
  std::vector<MatterSlot> matter;

  std::size_t arity() const { return gauge.size() + matter.size(); }
  static FieldIndex empty() { return {}; }
};

struct FieldCatalogEntry {
  std::string label;
  int components = 1;
  bool fermionic = false;
};

struct EvalResult {
  cplx value{0, 0};
  double error = 0.0;  // 1-sigma statistical error, 0 for exact sources
};

class CorrelatorFamily {
 public:
  enum class Metric { Euclidean, Minkowski };
  enum class Source { ExactFree, LatticeEstimate, Reconstructed };

  virtual ~CorrelatorFamily() = default;

  virtual std::string name() const = 0;
  virtual Metric metric() const = 0;
  virtual Source source() const = 0;
  virtual int degree_cap() const = 0;
  virtual double mass_gap() const = 0;  // 0 when massless or unknown
  virtual const std::vector<FieldCatalogEntry>& catalog() const = 0;
  virtual int algebra_dim() const = 0;  // 0: no gauge slots accepted

  // distributional pairing; multilinear in each argument, no conjugation.
  // The empty index with no arguments is exactly 1.
  virtual EvalResult evaluate(const FieldIndex& idx,
                              const std::vector<TestFunction>& args) const = 0;

  // pointwise kernels at non-coinciding points, where the family has them
  virtual bool has_point_eval() const { return false; }
  virtual cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& points) const;

  // scalar-channel 2-point function, spatial momentum |p| = pmag, time gap tau
  virtual bool has_temporal_slice() const { return false; }
  virtual EvalResult temporal_slice(double tau, double pmag) const;

  const FieldCatalogEntry& catalog_entry(const std::string& label) const;
  bool is_fermionic(const std::string& label) const;
};

using FamilyPtr = std::shared_ptr<const CorrelatorFamily>;

// --- exact Gaussian families -------------------------------------------------

// free scalar of mass m: labels "phi" and the normal-ordered square "phi2"
FamilyPtr make_free_scalar_family(double mass, int degree_cap = 8);

// free abelian field-strength sector: gauge slots A_mu (Feynman-gauge
// bookkeeping kernel), matter labels "F" (6 components, pairs mu<nu) and the
// normal-ordered invariant "F2"
FamilyPtr make_maxwell_family(int degree_cap = 8);

// component c <-> antisymmetric pair (mu, nu), mu < nu, lexicographic
std::pair<int, int> field_strength_pair(int component);
int field_strength_component(int mu, int nu);  // sign convention: mu < nu

// two-component fermionic toy, 2-point only: <psi_a(f) psi_b(g)> is the
// epsilon tensor times the scalar pairing, exercising the graded symmetry rule
FamilyPtr make_fermion_toy_family(double mass);

// --- counterexample constructions ---------------------------------------
// Deliberately broken variants used to demonstrate that the checker suite
// discriminates: each fails exactly one axiom family.

// negates every nonempty correlator (reflection-positivity violator)
FamilyPtr make_sign_flipped(FamilyPtr base);

// adds c * prod(integrals) to every 2-point smear, a zero-frequency mode
// that never decays (clustering violator); slice_volume regularizes the
// momentum-zero slice of the constant
FamilyPtr make_constant_shift(FamilyPtr base, double c, double slice_volume = 1.0);

// reverses the temporal-slice surface around a fixed horizon so the slice
// grows with tau (temporal-support violator); all other surfaces delegate
FamilyPtr make_time_reflected(FamilyPtr base, double horizon = 6.0);

// --- operations ---------------------------------------------------------

// slot permutation: entry i says which original slot lands in position i
struct Permutation {
  std::vector<int> gauge;
  std::vector<int> matter;
};

// -1 exactly when the permutation restricted to fermionic matter slots is odd
int fermionic_sign(const CorrelatorFamily& fam, const FieldIndex& idx, const Permutation& perm);

// evaluate at permuted slots and arguments, times the fermionic sign
EvalResult apply_permutation(const CorrelatorFamily& fam, const FieldIndex& idx,
                             const Permutation& perm, const std::vector<TestFunction>& args);

// translation-reduced evaluator over difference vectors xi_i = x_{i+1} - x_i
class DifferenceForm {
 public:
  DifferenceForm(FamilyPtr fam, FieldIndex idx);
  std::size_t arity() const { return idx_.arity() == 0 ? 0 : idx_.arity() - 1; }
  cplx eval(const std::vector<Vec4>& xi) const;
  const CorrelatorFamily& family() const { return *fam_; }
  const FieldIndex& index() const { return idx_; }

 private:
  FamilyPtr fam_;
  FieldIndex idx_;
};

// checks translation invariance on randomized smears (threshold: 5 sigma
// joint error, or 1e-13 relative for exact sources), then builds the form.
// Throws if the family moves under translations or lacks a pointwise surface.
DifferenceForm reduce_to_differences(FamilyPtr fam, const FieldIndex& idx, RngStream& rng);

}  // namespace qgv
