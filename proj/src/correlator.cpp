#include "qgv/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qgv/free_field.hpp"
#include "qgv/quad.hpp"

namespace qgv {

cplx CorrelatorFamily::point_eval(const FieldIndex&, const std::vector<Vec4>&) const {
  throw std::logic_error(name() + " has no pointwise surface");
}

EvalResult CorrelatorFamily::temporal_slice(double, double) const {
  throw std::logic_error(name() + " has no temporal-slice surface");
}

const FieldCatalogEntry& CorrelatorFamily::catalog_entry(const std::string& label) const {
  for (const auto& e : catalog())
    if (e.label == label) return e;
  throw std::invalid_argument("unknown field label '" + label + "' in family " + name());
}

bool CorrelatorFamily::is_fermionic(const std::string& label) const {
  return catalog_entry(label).fermionic;
}

std::pair<int, int> field_strength_pair(int component) {
  static const std::pair<int, int> table[6] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  if (component < 0 || component >= 6) throw std::out_of_range("field-strength component");
  return table[component];
}

int field_strength_component(int mu, int nu) {
  for (int c = 0; c < 6; ++c)
    if (field_strength_pair(c) == std::make_pair(mu, nu)) return c;
  throw std::out_of_range("field-strength pair needs mu < nu");
}

namespace {

// Wick sum over an arbitrary slot-pair kernel. n = 0 gives 1, odd n gives 0.
template <class PairFn>
cplx wick_over_slots(int n, PairFn&& pair) {
  if (n == 0) return cplx(1, 0);
  if (n % 2 != 0) return cplx(0, 0);
  Eigen::MatrixXcd table(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) table(i, j) = pair(i, j);
  cplx total(0, 0);
  for (const auto& m : perfect_matchings(n)) {
    cplx prod(1, 0);
    for (auto [a, b] : m) prod *= table(a, b);
    total += prod;
  }
  return total;
}

// gradient of the massless kernel: d/dxi_rho [1/(4 pi^2 r^2)]
double massless_grad(int rho, const Vec4& xi) {
  const double r2 = xi.squaredNorm();
  return -xi[rho] / (2 * M_PI * M_PI * r2 * r2);
}

void check_args(const CorrelatorFamily& fam, const FieldIndex& idx,
                const std::vector<TestFunction>& args) {
  if (idx.arity() != args.size())
    throw std::invalid_argument(fam.name() + ": index arity " + std::to_string(idx.arity()) +
                                " does not match " + std::to_string(args.size()) + " arguments");
  if (!idx.gauge.empty() && fam.algebra_dim() == 0)
    throw std::invalid_argument(fam.name() + " has no gauge sector");
  for (const auto& g : idx.gauge) {
    if (g.alpha < 0 || g.alpha >= fam.algebra_dim()) throw std::out_of_range("algebra index");
    if (g.mu < 0 || g.mu > 3) throw std::out_of_range("vector index");
  }
  for (const auto& m : idx.matter) {
    const auto& entry = fam.catalog_entry(m.label);
    if (m.component < 0 || m.component >= entry.components)
      throw std::out_of_range("component index for label '" + m.label + "'");
  }
}

// --- free scalar --------------------------------------------------------

class FreeScalarFamily final : public CorrelatorFamily {
 public:
  FreeScalarFamily(double mass, int cap) : mass_(mass), cap_(cap) {
    catalog_ = {{"phi", 1, false}, {"phi2", 1, false}};
  }

  std::string name() const override { return "free_scalar(m=" + std::to_string(mass_) + ")"; }
  Metric metric() const override { return Metric::Euclidean; }
  Source source() const override { return Source::ExactFree; }
  int degree_cap() const override { return cap_; }
  double mass_gap() const override { return mass_; }
  const std::vector<FieldCatalogEntry>& catalog() const override { return catalog_; }
  int algebra_dim() const override { return 0; }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    check_args(*this, idx, args);
    int n_phi = 0, n_phi2 = 0;
    for (const auto& m : idx.matter) (m.label == "phi" ? n_phi : n_phi2) += 1;
    const int degree = n_phi + 2 * n_phi2;
    if (degree > cap_) throw std::invalid_argument(name() + ": degree above truncation cap");
    if (idx.matter.empty()) return {cplx(1, 0), 0.0};
    if (n_phi % 2 != 0) return {cplx(0, 0), 0.0};  // odd elementary-field parity
    if (n_phi2 == 0)
      return {wick_over_slots(n_phi, [&](int i, int j) { return scalar_pairing(args[i], args[j], mass_); }),
              0.0};
    if (n_phi != 0)
      throw std::invalid_argument(name() + ": mixed composite-elementary smears are not supported");
    if (n_phi2 == 1) return {cplx(0, 0), 0.0};  // normal ordered
    if (n_phi2 == 2) return {composite_phi2_pairing(args[0], args[1], mass_), 0.0};
    throw std::invalid_argument(name() + ": composite insertions supported up to 2-point");
  }

  bool has_point_eval() const override { return true; }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    if (idx.arity() != xs.size()) throw std::invalid_argument("point count mismatch");
    if (!idx.gauge.empty()) throw std::invalid_argument(name() + " has no gauge sector");
    int n_phi = 0, n_phi2 = 0;
    for (const auto& m : idx.matter) (m.label == "phi" ? n_phi : n_phi2) += 1;
    if (idx.matter.empty()) return cplx(1, 0);
    if (n_phi % 2 != 0) return cplx(0, 0);
    if (n_phi2 == 0)
      return wick_over_slots(n_phi, [&](int i, int j) {
        return cplx(scalar_schwinger_kernel(mass_, (xs[i] - xs[j]).norm()), 0);
      });
    if (n_phi != 0) throw std::invalid_argument(name() + ": mixed composite kernels unsupported");
    if (n_phi2 == 1) return cplx(0, 0);
    if (n_phi2 == 2) return cplx(composite_phi2_kernel(mass_, (xs[0] - xs[1]).norm()), 0);
    throw std::invalid_argument(name() + ": composite insertions supported up to 2-point");
  }

  bool has_temporal_slice() const override { return true; }
  EvalResult temporal_slice(double tau, double pmag) const override {
    return {cplx(scalar_temporal_slice(mass_, tau, pmag), 0), 0.0};
  }

 private:
  double mass_;
  int cap_;
  std::vector<FieldCatalogEntry> catalog_;
};

// --- abelian field-strength sector ----------------------------------------

class MaxwellFamily final : public CorrelatorFamily {
 public:
  explicit MaxwellFamily(int cap) : cap_(cap) {
    catalog_ = {{"F", 6, false}, {"F2", 1, false}};
  }

  std::string name() const override { return "maxwell"; }
  Metric metric() const override { return Metric::Euclidean; }
  Source source() const override { return Source::ExactFree; }
  int degree_cap() const override { return cap_; }
  double mass_gap() const override { return 0.0; }
  const std::vector<FieldCatalogEntry>& catalog() const override { return catalog_; }
  int algebra_dim() const override { return 1; }

  // flattened slots: kind 0 = connection A_mu, 1 = F component, 2 = F2
  struct Slot {
    int kind;
    int a = 0, b = 0;  // A: a = mu; F: (a,b) = (mu,nu) with a < b
  };

  static std::vector<Slot> flatten(const FieldIndex& idx) {
    std::vector<Slot> slots;
    for (const auto& g : idx.gauge) slots.push_back({0, g.mu, 0});
    for (const auto& m : idx.matter) {
      if (m.label == "F") {
        auto [mu, nu] = field_strength_pair(m.component);
        slots.push_back({1, mu, nu});
      } else {
        slots.push_back({2, 0, 0});
      }
    }
    return slots;
  }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    check_args(*this, idx, args);
    const auto slots = flatten(idx);
    const int n = int(slots.size());
    if (n == 0) return {cplx(1, 0), 0.0};
    int n_f2 = 0;
    for (const auto& s : slots) n_f2 += s.kind == 2;
    const int degree = n + n_f2;  // F2 counts twice
    if (degree > cap_) throw std::invalid_argument(name() + ": degree above truncation cap");
    if (n_f2 == n) {
      if (n == 1) return {cplx(0, 0), 0.0};  // normal ordered
      if (n == 2) return {composite_F2_pairing(args[0], args[1]), 0.0};
      throw std::invalid_argument(name() + ": composite insertions supported up to 2-point");
    }
    if (n_f2 > 0)
      throw std::invalid_argument(name() + ": mixed composite-elementary smears are not supported");
    return {wick_over_slots(n, [&](int i, int j) { return pair_smear(slots[i], args[i], slots[j], args[j]); }),
            0.0};
  }

  bool has_point_eval() const override { return true; }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    if (idx.arity() != xs.size()) throw std::invalid_argument("point count mismatch");
    const auto slots = flatten(idx);
    const int n = int(slots.size());
    if (n == 0) return cplx(1, 0);
    int n_f2 = 0;
    for (const auto& s : slots) n_f2 += s.kind == 2;
    if (n_f2 == n) {
      if (n == 1) return cplx(0, 0);
      if (n == 2) return cplx(composite_F2_kernel((xs[0] - xs[1]).norm()), 0);
      throw std::invalid_argument(name() + ": composite insertions supported up to 2-point");
    }
    if (n_f2 > 0) throw std::invalid_argument(name() + ": mixed composite kernels unsupported");
    return wick_over_slots(
        n, [&](int i, int j) { return cplx(pair_point(slots[i], slots[j], xs[i] - xs[j]), 0); });
  }

  bool has_temporal_slice() const override { return true; }
  EvalResult temporal_slice(double tau, double pmag) const override {
    // scalar channel: the F2 composite kernel c8 / r^8
    const double at = std::abs(tau);
    if (at <= 0) throw std::invalid_argument("slice needs tau != 0 in the massless sector");
    auto kern = [&](double r) { return composite_F2_kernel(std::hypot(at, r)); };
    double val;
    if (pmag == 0.0) {
      val = integrate_to_infinity([&](double r) { return 4 * M_PI * r * r * kern(r); }, 0.0, 1e-11);
    } else {
      val = integrate_to_infinity(
          [&](double r) { return (4 * M_PI / pmag) * r * std::sin(pmag * r) * kern(r); }, 0.0,
          1e-11);
    }
    return {cplx(val, 0), 0.0};
  }

 private:
  static cplx pair_smear(const Slot& si, const TestFunction& f, const Slot& sj,
                         const TestFunction& g) {
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    if (si.kind == 0 && sj.kind == 0) return d(si.a, sj.a) * scalar_pairing(f, g, 0.0);
    if (si.kind == 0 && sj.kind == 1) {
      // <A_mu(f) F_{rho sigma}(g)>
      const int mu = si.a, rho = sj.a, sigma = sj.b;
      cplx v(0, 0);
      if (mu == sigma) v -= scalar_pairing(f, g.derivative(rho), 0.0);
      if (mu == rho) v += scalar_pairing(f, g.derivative(sigma), 0.0);
      return v;
    }
    if (si.kind == 1 && sj.kind == 0) {
      const int rho = si.a, sigma = si.b, mu = sj.a;
      cplx v(0, 0);
      if (sigma == mu) v -= scalar_pairing(f.derivative(rho), g, 0.0);
      if (rho == mu) v += scalar_pairing(f.derivative(sigma), g, 0.0);
      return v;
    }
    return maxwell_F_pairing(si.a, si.b, sj.a, sj.b, f, g);
  }

  static double pair_point(const Slot& si, const Slot& sj, const Vec4& xi) {
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    if (si.kind == 0 && sj.kind == 0)
      return d(si.a, sj.a) * scalar_schwinger_kernel(0.0, xi.norm());
    if (si.kind == 0 && sj.kind == 1) {
      // d/dy of the A-A kernel flips the gradient sign: <A_mu(x) F_{rho sig}(y)>
      const int mu = si.a, rho = sj.a, sigma = sj.b;
      return -d(mu, sigma) * massless_grad(rho, xi) + d(mu, rho) * massless_grad(sigma, xi);
    }
    if (si.kind == 1 && sj.kind == 0) {
      const int rho = si.a, sigma = si.b, mu = sj.a;
      return d(sigma, mu) * massless_grad(rho, xi) - d(rho, mu) * massless_grad(sigma, xi);
    }
    return maxwell_F_kernel(si.a, si.b, sj.a, sj.b, xi);
  }

  int cap_;
  std::vector<FieldCatalogEntry> catalog_;
};

// --- fermionic toy ----------------------------------------------------------

class FermionToyFamily final : public CorrelatorFamily {
 public:
  explicit FermionToyFamily(double mass) : mass_(mass) { catalog_ = {{"psi", 2, true}}; }

  std::string name() const override { return "fermion_toy(m=" + std::to_string(mass_) + ")"; }
  Metric metric() const override { return Metric::Euclidean; }
  Source source() const override { return Source::ExactFree; }
  int degree_cap() const override { return 2; }
  double mass_gap() const override { return mass_; }
  const std::vector<FieldCatalogEntry>& catalog() const override { return catalog_; }
  int algebra_dim() const override { return 0; }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    check_args(*this, idx, args);
    const std::size_t n = idx.matter.size();
    if (n == 0) return {cplx(1, 0), 0.0};
    if (n == 1) return {cplx(0, 0), 0.0};
    if (n > 2) throw std::invalid_argument(name() + ": degree above truncation cap");
    return {eps(idx) * scalar_pairing(args[0], args[1], mass_), 0.0};
  }

  bool has_point_eval() const override { return true; }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    if (idx.arity() != xs.size()) throw std::invalid_argument("point count mismatch");
    if (!idx.gauge.empty()) throw std::invalid_argument(name() + " has no gauge sector");
    const std::size_t n = idx.matter.size();
    if (n == 0) return cplx(1, 0);
    if (n == 1) return cplx(0, 0);
    if (n > 2) throw std::invalid_argument(name() + ": degree above truncation cap");
    return eps(idx) * scalar_schwinger_kernel(mass_, (xs[0] - xs[1]).norm());
  }

 private:
  static double eps(const FieldIndex& idx) {
    const int a = idx.matter[0].component, b = idx.matter[1].component;
    return a == b ? 0.0 : (a < b ? 1.0 : -1.0);
  }

  double mass_;
  std::vector<FieldCatalogEntry> catalog_;
};

// --- counterexample wrappers ---------------------------------------------

class SignFlipped final : public CorrelatorFamily {
 public:
  explicit SignFlipped(FamilyPtr base) : base_(std::move(base)) {}
  std::string name() const override { return "sign_flipped(" + base_->name() + ")"; }
  Metric metric() const override { return base_->metric(); }
  Source source() const override { return base_->source(); }
  int degree_cap() const override { return base_->degree_cap(); }
  double mass_gap() const override { return base_->mass_gap(); }
  const std::vector<FieldCatalogEntry>& catalog() const override { return base_->catalog(); }
  int algebra_dim() const override { return base_->algebra_dim(); }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    EvalResult r = base_->evaluate(idx, args);
    if (idx.arity() > 0) r.value = -r.value;  // the empty index stays exactly 1
    return r;
  }
  bool has_point_eval() const override { return base_->has_point_eval(); }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    const cplx v = base_->point_eval(idx, xs);
    return idx.arity() > 0 ? -v : v;
  }
  bool has_temporal_slice() const override { return base_->has_temporal_slice(); }
  EvalResult temporal_slice(double tau, double pmag) const override {
    EvalResult r = base_->temporal_slice(tau, pmag);
    r.value = -r.value;
    return r;
  }

 private:
  FamilyPtr base_;
};

class ConstantShift final : public CorrelatorFamily {
 public:
  ConstantShift(FamilyPtr base, double c, double vol)
      : base_(std::move(base)), c_(c), vol_(vol) {}
  std::string name() const override { return "constant_shift(" + base_->name() + ")"; }
  Metric metric() const override { return base_->metric(); }
  Source source() const override { return base_->source(); }
  int degree_cap() const override { return base_->degree_cap(); }
  double mass_gap() const override { return 0.0; }  // the shift closes the gap
  const std::vector<FieldCatalogEntry>& catalog() const override { return base_->catalog(); }
  int algebra_dim() const override { return base_->algebra_dim(); }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    EvalResult r = base_->evaluate(idx, args);
    if (idx.arity() == 2) r.value += c_ * args[0].integral() * args[1].integral();
    return r;
  }
  bool has_point_eval() const override { return base_->has_point_eval(); }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    const cplx v = base_->point_eval(idx, xs);
    return idx.arity() == 2 ? v + c_ : v;
  }
  bool has_temporal_slice() const override { return base_->has_temporal_slice(); }
  EvalResult temporal_slice(double tau, double pmag) const override {
    EvalResult r = base_->temporal_slice(tau, pmag);
    // a constant kernel has a pure zero-momentum, zero-frequency slice; the
    // infinite spatial volume is regularized to vol_
    if (pmag == 0.0) r.value += c_ * vol_;
    return r;
  }

 private:
  FamilyPtr base_;
  double c_, vol_;
};

class TimeReflected final : public CorrelatorFamily {
 public:
  TimeReflected(FamilyPtr base, double horizon) : base_(std::move(base)), horizon_(horizon) {}
  std::string name() const override { return "time_reflected(" + base_->name() + ")"; }
  Metric metric() const override { return base_->metric(); }
  Source source() const override { return base_->source(); }
  int degree_cap() const override { return base_->degree_cap(); }
  double mass_gap() const override { return base_->mass_gap(); }
  const std::vector<FieldCatalogEntry>& catalog() const override { return base_->catalog(); }
  int algebra_dim() const override { return base_->algebra_dim(); }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    return base_->evaluate(idx, args);
  }
  bool has_point_eval() const override { return base_->has_point_eval(); }
  cplx point_eval(const FieldIndex& idx, const std::vector<Vec4>& xs) const override {
    return base_->point_eval(idx, xs);
  }
  bool has_temporal_slice() const override { return base_->has_temporal_slice(); }
  EvalResult temporal_slice(double tau, double pmag) const override {
    // reversed around the horizon: decays backwards, grows forwards
    return base_->temporal_slice(std::abs(horizon_ - tau), pmag);
  }

 private:
  FamilyPtr base_;
  double horizon_;
};

}  // namespace

FamilyPtr make_free_scalar_family(double mass, int degree_cap) {
  return std::make_shared<FreeScalarFamily>(mass, degree_cap);
}

FamilyPtr make_maxwell_family(int degree_cap) {
  return std::make_shared<MaxwellFamily>(degree_cap);
}

FamilyPtr make_fermion_toy_family(double mass) {
  return std::make_shared<FermionToyFamily>(mass);
}

FamilyPtr make_sign_flipped(FamilyPtr base) {
  return std::make_shared<SignFlipped>(std::move(base));
}

FamilyPtr make_constant_shift(FamilyPtr base, double c, double slice_volume) {
  return std::make_shared<ConstantShift>(std::move(base), c, slice_volume);
}

FamilyPtr make_time_reflected(FamilyPtr base, double horizon) {
  return std::make_shared<TimeReflected>(std::move(base), horizon);
}

// --- operations ------------------------------------------------------------

namespace {

void check_perm_part(const std::vector<int>& p, std::size_t n, const char* which) {
  if (p.size() != n)
    throw std::invalid_argument(std::string("permutation length mismatch on ") + which);
  std::vector<bool> seen(n, false);
  for (int v : p) {
    if (v < 0 || std::size_t(v) >= n || seen[std::size_t(v)])
      throw std::invalid_argument(std::string("not a permutation on ") + which);
    seen[std::size_t(v)] = true;
  }
}

}  // namespace

int fermionic_sign(const CorrelatorFamily& fam, const FieldIndex& idx, const Permutation& perm) {
  check_perm_part(perm.matter, idx.matter.size(), "matter slots");
  // order of the fermionic originals as they appear in the permuted index
  std::vector<int> fermions;
  for (int src : perm.matter)
    if (fam.is_fermionic(idx.matter[std::size_t(src)].label)) fermions.push_back(src);
  int inversions = 0;
  for (std::size_t i = 0; i < fermions.size(); ++i)
    for (std::size_t j = i + 1; j < fermions.size(); ++j)
      if (fermions[i] > fermions[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

EvalResult apply_permutation(const CorrelatorFamily& fam, const FieldIndex& idx,
                             const Permutation& perm, const std::vector<TestFunction>& args) {
  check_perm_part(perm.gauge, idx.gauge.size(), "gauge slots");
  check_perm_part(perm.matter, idx.matter.size(), "matter slots");
  if (args.size() != idx.arity()) throw std::invalid_argument("argument count mismatch");
  const std::size_t ng = idx.gauge.size();
  FieldIndex out;
  std::vector<TestFunction> out_args;
  out_args.reserve(args.size());
  for (std::size_t i = 0; i < ng; ++i) {
    out.gauge.push_back(idx.gauge[std::size_t(perm.gauge[i])]);
    out_args.push_back(args[std::size_t(perm.gauge[i])]);
  }
  for (std::size_t i = 0; i < idx.matter.size(); ++i) {
    out.matter.push_back(idx.matter[std::size_t(perm.matter[i])]);
    out_args.push_back(args[ng + std::size_t(perm.matter[i])]);
  }
  EvalResult r = fam.evaluate(out, out_args);
  r.value *= double(fermionic_sign(fam, idx, perm));
  return r;
}

DifferenceForm::DifferenceForm(FamilyPtr fam, FieldIndex idx)
    : fam_(std::move(fam)), idx_(std::move(idx)) {}

cplx DifferenceForm::eval(const std::vector<Vec4>& xi) const {
  if (xi.size() != arity()) throw std::invalid_argument("difference count mismatch");
  std::vector<Vec4> points;
  if (idx_.arity() > 0) {
    points.push_back(Vec4::Zero());
    for (const auto& d : xi) points.push_back(points.back() + d);
  }
  return fam_->point_eval(idx_, points);
}

DifferenceForm reduce_to_differences(FamilyPtr fam, const FieldIndex& idx, RngStream& rng) {
  if (!fam->has_point_eval())
    throw std::invalid_argument(fam->name() + " has no pointwise surface to reduce");
  // randomized translation test on smears
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<TestFunction> fs, moved;
    Vec4 shift;
    for (int mu = 0; mu < 4; ++mu) shift[mu] = rng.uniform(-2.0, 2.0);
    for (std::size_t k = 0; k < idx.arity(); ++k) {
      Vec4 c;
      for (int mu = 0; mu < 4; ++mu) c[mu] = rng.uniform(-1.0, 1.0);
      c[0] += 2.5 * double(k);  // spread along time so composite slots stay separated
      fs.push_back(TestFunction::gaussian(c, 0.5));
      moved.push_back(fs.back().translated(shift));
    }
    const EvalResult a = fam->evaluate(idx, fs);
    const EvalResult b = fam->evaluate(idx, moved);
    const double sigma = std::hypot(a.error, b.error);
    const double scale = std::abs(a.value) + std::abs(b.value) + 1e-30;
    const double tol = std::max(1e-12 * scale, 5 * sigma);
    if (std::abs(a.value - b.value) > tol)
      throw std::runtime_error(fam->name() + " is not translation-invariant");
  }
  return DifferenceForm(fam, idx);
}

}  // namespace qgv
