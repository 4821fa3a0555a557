#include "qgv/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <utility>

#include "qgv/free_field.hpp"

namespace qgv {

namespace {

void require_bosonic(const CorrelatorFamily& fam) {
  for (const auto& e : fam.catalog())
    if (e.fermionic)
      throw std::invalid_argument("sequence pairing handles bosonic catalogs only, got fermionic label '" +
                                  e.label + "'");
}

double l2_norm(const TestFunction& f) {
  const cplx n2 = TestFunction::product(f.conjugated(), f).integral();
  return std::sqrt(std::max(0.0, n2.real()));
}

// partially expanded term while slot-by-slot transforms rewrite a monomial
struct Partial {
  cplx coeff;
  std::vector<GaugeSlot> gauge;
  std::vector<MatterSlot> matter;
  std::vector<TestFunction> gauge_args, matter_args;
};

SequenceTerm assemble(Partial&& p) {
  SequenceTerm t;
  t.coeff = p.coeff;
  t.idx.gauge = std::move(p.gauge);
  t.idx.matter = std::move(p.matter);
  t.args = std::move(p.gauge_args);
  t.args.insert(t.args.end(), std::make_move_iterator(p.matter_args.begin()),
                std::make_move_iterator(p.matter_args.end()));
  return t;
}

}  // namespace

// --- sequence vectors --------------------------------------------------------

SequenceVector SequenceVector::vacuum() {
  SequenceVector v;
  v.terms.emplace_back();
  return v;
}

bool SequenceVector::is_vacuum() const {
  return terms.size() == 1 && terms.front().idx.arity() == 0 &&
         terms.front().coeff == cplx(1.0, 0.0);
}

SequenceVector SequenceVector::scaled(cplx c) const {
  SequenceVector out = *this;
  for (auto& t : out.terms) t.coeff *= c;
  return out;
}

SequenceVector SequenceVector::plus(const SequenceVector& other) const {
  SequenceVector out = *this;
  out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
  return out;
}

int SequenceVector::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.degree());
  return d;
}

// --- pairing and gram --------------------------------------------------------

cplx sequence_pairing(const CorrelatorFamily& fam, const SequenceVector& v,
                      const SequenceVector& w) {
  require_bosonic(fam);
  cplx total{0.0, 0.0};
  for (const auto& tv : v.terms) {
    for (const auto& tw : w.terms) {
      // adjoint of the left monomial: slots reversed, functions conjugated;
      // reordering the reversal back into gauge-first sector order is exact
      // for bosonic labels
      FieldIndex idx;
      std::vector<TestFunction> gauge_args, matter_args;
      const std::size_t vg = tv.idx.gauge.size();
      for (std::size_t i = vg; i-- > 0;) {
        idx.gauge.push_back(tv.idx.gauge[i]);
        gauge_args.push_back(tv.args[i].conjugated());
      }
      for (std::size_t j = tv.idx.matter.size(); j-- > 0;) {
        idx.matter.push_back(tv.idx.matter[j]);
        matter_args.push_back(tv.args[vg + j].conjugated());
      }
      const std::size_t wg = tw.idx.gauge.size();
      for (std::size_t i = 0; i < wg; ++i) {
        idx.gauge.push_back(tw.idx.gauge[i]);
        gauge_args.push_back(tw.args[i]);
      }
      for (std::size_t j = 0; j < tw.idx.matter.size(); ++j) {
        idx.matter.push_back(tw.idx.matter[j]);
        matter_args.push_back(tw.args[wg + j]);
      }
      std::vector<TestFunction> args = std::move(gauge_args);
      args.insert(args.end(), std::make_move_iterator(matter_args.begin()),
                  std::make_move_iterator(matter_args.end()));
      total += std::conj(tv.coeff) * tw.coeff * fam.evaluate(idx, args).value;
    }
  }
  return total;
}

BorchersSpace build_borchers(const FamilyPtr& fam, const std::vector<SequenceVector>& basis,
                             int degree_cap, int max_basis) {
  if (!fam) throw std::invalid_argument("build_borchers: null family");
  if (basis.empty()) throw std::invalid_argument("build_borchers: empty basis");
  if (int(basis.size()) > max_basis)
    throw std::invalid_argument("build_borchers: basis exceeds the working-set cap");
  require_bosonic(*fam);

  int maxdeg = 0;
  for (const auto& v : basis) maxdeg = std::max(maxdeg, v.degree());
  if (maxdeg > degree_cap)
    throw std::invalid_argument("build_borchers: basis degree exceeds the truncation cap");
  if (2 * maxdeg > fam->degree_cap())
    throw std::invalid_argument("build_borchers: family cannot evaluate twice the basis degree");

  const int n = int(basis.size());
  Eigen::MatrixXcd raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = sequence_pairing(*fam, basis[i], basis[j]);

  BorchersSpace out;
  out.family = fam;
  out.basis = basis;
  out.gram = 0.5 * (raw + raw.adjoint());
  out.herm_defect = (raw - Eigen::MatrixXcd(raw.adjoint())).cwiseAbs().maxCoeff();
  return out;
}

// --- covariant photon witness ------------------------------------------------

namespace {

class CovariantPhotonFamily final : public CorrelatorFamily {
 public:
  std::string name() const override { return "covariant_photon"; }
  Metric metric() const override { return Metric::Minkowski; }
  Source source() const override { return Source::ExactFree; }
  int degree_cap() const override { return 8; }
  double mass_gap() const override { return 0.0; }
  const std::vector<FieldCatalogEntry>& catalog() const override {
    static const std::vector<FieldCatalogEntry> empty;
    return empty;
  }
  int algebra_dim() const override { return 1; }

  EvalResult evaluate(const FieldIndex& idx, const std::vector<TestFunction>& args) const override {
    if (!idx.matter.empty())
      throw std::invalid_argument("covariant photon family carries connection slots only");
    if (idx.gauge.size() != args.size())
      throw std::invalid_argument("argument count does not match the index arity");
    for (const auto& s : idx.gauge)
      if (s.alpha != 0) throw std::out_of_range("abelian generator index must be 0");
    const std::size_t n = idx.gauge.size();
    if (n == 0) return {cplx(1.0, 0.0), 0.0};
    if (int(n) > degree_cap()) throw std::invalid_argument("degree cap exceeded");
    if (n % 2) return {cplx(0.0, 0.0), 0.0};

    // Wick sum over perfect matchings; each pair keeps the original operator
    // order, so the non-symmetric Wightman pairing is applied left-to-right
    std::function<cplx(std::vector<std::size_t>)> wick =
        [&](std::vector<std::size_t> rest) -> cplx {
      if (rest.empty()) return cplx(1.0, 0.0);
      const std::size_t a = rest.front();
      rest.erase(rest.begin());
      cplx sum{0.0, 0.0};
      for (std::size_t k = 0; k < rest.size(); ++k) {
        const std::size_t b = rest[k];
        std::vector<std::size_t> next = rest;
        next.erase(next.begin() + long(k));
        sum += covariant_photon_pairing(idx.gauge[a].mu, idx.gauge[b].mu, args[a], args[b]) *
               wick(std::move(next));
      }
      return sum;
    };
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return {wick(std::move(all)), 0.0};
  }
};

}  // namespace

FamilyPtr make_covariant_photon_family() { return std::make_shared<CovariantPhotonFamily>(); }

// --- field operators ----------------------------------------------------------

FieldOperatorMap FieldOperatorMap::matter(const std::string& label, int component) {
  FieldOperatorMap op;
  op.matter_slot = MatterSlot{label, component};
  return op;
}

FieldOperatorMap FieldOperatorMap::gauge(int alpha, int mu) {
  FieldOperatorMap op;
  op.gauge_slot = GaugeSlot{alpha, mu};
  return op;
}

SequenceVector apply_field(const FieldOperatorMap& op, const SequenceVector& v,
                           const TestFunction& x, int degree_cap) {
  if (op.gauge_slot.has_value() == op.matter_slot.has_value())
    throw std::invalid_argument("field operator must carry exactly one slot");
  SequenceVector out;
  out.terms.reserve(v.terms.size());
  for (const auto& t : v.terms) {
    if (t.degree() + 1 > degree_cap)
      throw std::invalid_argument("apply_field would exceed the sequence degree cap");
    SequenceTerm nt = t;
    if (op.gauge_slot) {
      nt.idx.gauge.insert(nt.idx.gauge.begin(), *op.gauge_slot);
      nt.args.insert(nt.args.begin(), x);
    } else {
      nt.idx.matter.insert(nt.idx.matter.begin(), *op.matter_slot);
      nt.args.insert(nt.args.begin() + long(nt.idx.gauge.size()), x);
    }
    out.terms.push_back(std::move(nt));
  }
  return out;
}

// --- physical space -----------------------------------------------------------

Eigen::VectorXcd PhysicalSpace::coords_of(int i) const {
  if (i < 0 || i >= int(borchers_basis.size())) throw std::out_of_range("basis index");
  Eigen::VectorXcd y(dim());
  for (int k = 0; k < dim(); ++k) y(k) = std::conj(quotient(k, i));
  return y;
}

cplx PhysicalSpace::pair(const Eigen::VectorXcd& y, const Eigen::VectorXcd& z) const {
  if (y.size() != dim() || z.size() != dim())
    throw std::invalid_argument("coordinate dimension mismatch");
  cplx s{0.0, 0.0};
  for (int k = 0; k < dim(); ++k) s += std::conj(y(k)) * inner(k) * z(k);
  return s;
}

PhysicalSpace build_physical(const FamilyPtr& fam, const std::vector<SequenceVector>& basis,
                             double eps_null, bool reversed_pivot) {
  std::vector<SequenceVector> work = basis;
  if (reversed_pivot) std::reverse(work.begin(), work.end());

  const BorchersSpace bs = build_borchers(fam, work);
  int omega_idx = -1;
  for (int i = 0; i < int(work.size()); ++i)
    if (work[i].is_vacuum()) {
      omega_idx = i;
      break;
    }
  if (omega_idx < 0) throw std::invalid_argument("build_physical: basis must contain the vacuum");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bs.gram);
  if (es.info() != Eigen::Success) throw std::runtime_error("gram eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  const double thresh = eps_null * scale;
  if (lam(0) < -thresh) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "build_physical: pairing is not positive semidefinite (min eigenvalue %.3e, "
                  "scale %.3e); positivity fails on this basis",
                  lam(0), scale);
    throw std::runtime_error(buf);
  }

  PhysicalSpace ps;
  ps.family = fam;
  ps.borchers_basis = work;
  ps.borchers_gram = bs.gram;
  ps.spectrum = lam;

  std::vector<int> keep;
  for (int k = 0; k < int(lam.size()); ++k)
    if (lam(k) > thresh) keep.push_back(k);
  ps.null_dim = int(lam.size()) - int(keep.size());
  if (keep.empty()) throw std::runtime_error("build_physical: quotient removed every direction");

  ps.quotient.resize(int(keep.size()), lam.size());
  ps.inner.resize(int(keep.size()));
  for (int r = 0; r < int(keep.size()); ++r) {
    ps.quotient.row(r) = es.eigenvectors().col(keep[r]).transpose();
    ps.inner(r) = lam(keep[r]);
  }

  Eigen::VectorXcd y = ps.coords_of(omega_idx);
  const double norm = std::sqrt(std::max(0.0, ps.pair(y, y).real()));
  if (norm <= 0.0) throw std::runtime_error("build_physical: vacuum collapsed into the null space");
  ps.omega_norm_defect = std::abs(norm - 1.0);
  ps.omega = y / norm;
  return ps;
}

// --- spacetime action ----------------------------------------------------------

SequenceVector act_poincare(const Eigen::Matrix4d& rotation, const Vec4& translation,
                            const SequenceVector& v) {
  SequenceVector out;
  for (const auto& t : v.terms) {
    std::vector<Partial> acc{{t.coeff, {}, {}, {}, {}}};

    // connection slots mix with the transpose so that pairings against the
    // covariantly transformed correlators are invariant
    for (std::size_t s = 0; s < t.idx.gauge.size(); ++s) {
      const TestFunction pulled = t.args[s].affine_pullback(rotation, translation);
      const GaugeSlot& slot = t.idx.gauge[s];
      std::vector<Partial> next;
      for (const auto& p : acc) {
        for (int nu = 0; nu < 4; ++nu) {
          const double w = rotation(nu, slot.mu);
          if (w == 0.0) continue;
          Partial q = p;
          q.coeff *= w;
          q.gauge.push_back({slot.alpha, nu});
          q.gauge_args.push_back(pulled);
          next.push_back(std::move(q));
        }
      }
      acc = std::move(next);
    }

    const std::size_t vg = t.idx.gauge.size();
    for (std::size_t s = 0; s < t.idx.matter.size(); ++s) {
      const TestFunction pulled = t.args[vg + s].affine_pullback(rotation, translation);
      const MatterSlot& slot = t.idx.matter[s];
      if (slot.label == "F") {
        const auto [mu, nu] = field_strength_pair(slot.component);
        std::vector<Partial> next;
        for (const auto& p : acc) {
          for (int c = 0; c < 6; ++c) {
            const auto [rho, sig] = field_strength_pair(c);
            const double w = rotation(rho, mu) * rotation(sig, nu) -
                             rotation(rho, nu) * rotation(sig, mu);
            if (w == 0.0) continue;
            Partial q = p;
            q.coeff *= w;
            q.matter.push_back({slot.label, c});
            q.matter_args.push_back(pulled);
            next.push_back(std::move(q));
          }
        }
        acc = std::move(next);
      } else {
        for (auto& p : acc) {
          p.matter.push_back(slot);
          p.matter_args.push_back(pulled);
        }
      }
    }

    for (auto& p : acc) out.terms.push_back(assemble(std::move(p)));
  }
  return out;
}

// --- gauge action ----------------------------------------------------------------

GaugeActionResult act_gauge(const SequenceVector& v, const TestFunction& eps,
                            const std::map<std::string, double>& charges, int series_order) {
  if (eps.kind() != TestFunction::Kind::GaussianPoly || !eps.is_real())
    throw std::invalid_argument("act_gauge: profile must be a real closed-form function");
  if (series_order < 1 || series_order > 12)
    throw std::invalid_argument("act_gauge: series order out of range");

  GaugeActionResult res;
  double worst = 0.0;

  for (const auto& t : v.terms) {
    std::vector<Partial> acc{{t.coeff, {}, {}, {}, {}}};

    // A_mu(f) -> A_mu(f) + (\int f d_mu eps) 1: each connection slot branches
    // into the kept slot and the slot-dropped inhomogeneous shift
    for (std::size_t s = 0; s < t.idx.gauge.size(); ++s) {
      const GaugeSlot& slot = t.idx.gauge[s];
      const cplx shift = TestFunction::product(t.args[s], eps.derivative(slot.mu)).integral();
      std::vector<Partial> next;
      for (const auto& p : acc) {
        Partial kept = p;
        kept.gauge.push_back(slot);
        kept.gauge_args.push_back(t.args[s]);
        next.push_back(std::move(kept));
        if (shift != cplx(0.0, 0.0)) {
          Partial dropped = p;
          dropped.coeff *= shift;
          next.push_back(std::move(dropped));
        }
      }
      acc = std::move(next);
    }

    // charged matter slots multiply by exp(i q eps), expanded inside the
    // closed function class; the remainder is the working-set projection error
    const std::size_t vg = t.idx.gauge.size();
    for (std::size_t s = 0; s < t.idx.matter.size(); ++s) {
      const MatterSlot& slot = t.idx.matter[s];
      const TestFunction& f = t.args[vg + s];
      const auto it = charges.find(slot.label);
      const double q = (it == charges.end()) ? 0.0 : it->second;
      if (q == 0.0) {
        for (auto& p : acc) {
          p.matter.push_back(slot);
          p.matter_args.push_back(f);
        }
        continue;
      }

      std::vector<TestFunction> powers;  // f * eps^k
      powers.push_back(f);
      for (int k = 1; k <= series_order + 1; ++k)
        powers.push_back(TestFunction::product(powers.back(), eps));

      const double fnorm = l2_norm(f);
      double qfact = 1.0;
      for (int k = 1; k <= series_order + 1; ++k) qfact *= std::abs(q) / double(k);
      const double rel = fnorm > 0.0 ? qfact * l2_norm(powers[std::size_t(series_order) + 1]) / fnorm
                                     : 0.0;
      worst = std::max(worst, rel);
      if (rel > 1e-6) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "act_gauge: series remainder %.3e exceeds 1e-6; the phase profile is too "
                      "strong for the working set at order %d",
                      rel, series_order);
        throw std::runtime_error(buf);
      }

      std::vector<Partial> next;
      cplx coef{1.0, 0.0};
      for (int k = 0; k <= series_order; ++k) {
        if (k > 0) coef *= cplx(0.0, q) / double(k);
        for (const auto& p : acc) {
          Partial b = p;
          b.coeff *= coef;
          b.matter.push_back(slot);
          b.matter_args.push_back(powers[std::size_t(k)]);
          next.push_back(std::move(b));
        }
      }
      acc = std::move(next);
    }

    for (auto& p : acc) res.vector.terms.push_back(assemble(std::move(p)));
  }

  res.projection_error = worst;
  return res;
}

SequenceVector act_gauge_constant(const SequenceVector& v, double theta,
                                  const std::map<std::string, double>& charges) {
  SequenceVector out = v;
  for (auto& t : out.terms) {
    double qsum = 0.0;
    for (const auto& m : t.idx.matter) {
      const auto it = charges.find(m.label);
      if (it != charges.end()) qsum += it->second;
    }
    if (qsum != 0.0) t.coeff *= std::exp(cplx(0.0, theta * qsum));
  }
  return out;
}

// --- uniqueness -------------------------------------------------------------------

UniquenessReport verify_uniqueness(const PhysicalSpace& a, const PhysicalSpace& b,
                                   const std::vector<int>& perm) {
  UniquenessReport rep;
  rep.dim_a = a.dim();
  rep.dim_b = b.dim();
  rep.spectrum_a = a.spectrum;
  rep.spectrum_b = b.spectrum;

  const int n = int(a.borchers_basis.size());
  if (int(b.borchers_basis.size()) != n) return rep;

  auto p = std::vector<int>(std::size_t(n));
  if (perm.empty()) {
    for (int i = 0; i < n; ++i) p[std::size_t(i)] = i;
  } else {
    if (int(perm.size()) != n)
      throw std::invalid_argument("verify_uniqueness: permutation length mismatch");
    std::vector<bool> seen(std::size_t(n), false);
    for (int x : perm) {
      if (x < 0 || x >= n || seen[std::size_t(x)])
        throw std::invalid_argument("verify_uniqueness: not a permutation");
      seen[std::size_t(x)] = true;
    }
    p = perm;
  }

  if (rep.dim_a != rep.dim_b) return rep;
  const int d = rep.dim_a;

  Eigen::MatrixXcd ya(d, n), yb(d, n);
  for (int i = 0; i < n; ++i) {
    ya.col(i) = a.coords_of(i);
    yb.col(i) = b.coords_of(p[std::size_t(i)]);
  }

  // induced pairings of the class vectors must agree between the two builds
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx ma = a.pair(ya.col(i), ya.col(j));
      const cplx mb = b.pair(yb.col(i), yb.col(j));
      worst = std::max(worst, std::abs(ma - mb));
      scale = std::max(scale, std::abs(ma));
    }
  }
  rep.pairing_defect = scale > 0.0 ? worst / scale : worst;

  // explicit intertwiner: the quotient rows are orthonormal, so ya ya^* = 1
  const Eigen::MatrixXcd l = yb * ya.adjoint();
  const Eigen::VectorXcd lo = l * a.omega;
  rep.omega_defect = std::sqrt(std::abs(b.pair(lo - b.omega, lo - b.omega)));

  rep.matched = rep.pairing_defect <= 1e-10 && rep.omega_defect <= 1e-10;
  return rep;
}

}  // namespace qgv
