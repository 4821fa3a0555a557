#include "qgv/serialize.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <openssl/evp.h>

namespace qgv {

namespace {

nlohmann::json cplx_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex values are [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Verdict verdict_from(const std::string& s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "fail") return Verdict::Fail;
  if (s == "inapplicable") return Verdict::Inapplicable;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (long i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const long rows = long(j.size());
  const long cols = rows ? long(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (long(j.at(std::size_t(i)).size()) != cols) throw std::invalid_argument("ragged matrix rows");
    for (long c = 0; c < cols; ++c) m(i, c) = j.at(std::size_t(i)).at(std::size_t(c)).get<double>();
  }
  return m;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve(std::size_t(len) * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexd[md[i] >> 4]);
    out.push_back(hexd[md[i] & 0xf]);
  }
  return out;
}

void append_complex_matrix(std::vector<double>& buf, const Eigen::MatrixXcd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      buf.push_back(m(i, j).real());
      buf.push_back(m(i, j).imag());
    }
}

}  // namespace

// --- reports -----------------------------------------------------------------

nlohmann::json report_to_json(const AxiomReport& rep) {
  nlohmann::json j;
  j["axiom"] = rep.axiom;
  j["family"] = rep.family;
  j["quantities"] = rep.quantities;
  j["tolerance"] = rep.tolerance;
  j["sigma"] = rep.sigma;
  j["verdict"] = verdict_name(rep.verdict);
  j["reason"] = rep.reason;
  j["provenance_hash"] = rep.provenance;
  return j;
}

AxiomReport report_from_json(const nlohmann::json& j) {
  AxiomReport rep;
  rep.axiom = j.at("axiom").get<std::string>();
  rep.family = j.at("family").get<std::string>();
  rep.quantities = j.at("quantities").get<std::map<std::string, double>>();
  rep.tolerance = j.at("tolerance").get<double>();
  rep.sigma = j.at("sigma").get<double>();
  rep.verdict = verdict_from(j.at("verdict").get<std::string>());
  rep.reason = j.at("reason").get<std::string>();
  rep.provenance = j.at("provenance_hash").get<std::string>();
  return rep;
}

// --- spectral models ------------------------------------------------------------

nlohmann::json model_to_json(const SpectralModel& model) {
  nlohmann::json j;
  j["poles"] = nlohmann::json::array();
  for (const auto& p : model.poles) j["poles"].push_back({{"mass2", p.mass2}, {"weight", p.weight}});
  j["continuum"] = nlohmann::json::array();
  for (const auto& [s, rho] : model.continuum) j["continuum"].push_back({s, rho});
  j["zero_mode"] = model.zero_mode;
  j["residual"] = model.residual;
  j["residual_rel"] = model.residual_rel;
  j["scale"] = model.scale;
  j["residual_unconstrained"] = model.residual_unconstrained;
  j["unconstrained_weights"] = model.unconstrained_weights;
  j["condition"] = model.condition;
  j["covariance"] = matrix_to_json(model.covariance);
  j["well_conditioned"] = model.well_conditioned;
  return j;
}

SpectralModel model_from_json(const nlohmann::json& j) {
  SpectralModel m;
  for (const auto& p : j.at("poles"))
    m.poles.push_back({p.at("mass2").get<double>(), p.at("weight").get<double>()});
  for (const auto& c : j.at("continuum"))
    m.continuum.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  m.zero_mode = j.at("zero_mode").get<double>();
  m.residual = j.at("residual").get<double>();
  m.residual_rel = j.at("residual_rel").get<double>();
  m.scale = j.at("scale").get<double>();
  m.residual_unconstrained = j.at("residual_unconstrained").get<double>();
  m.unconstrained_weights = j.at("unconstrained_weights").get<std::vector<double>>();
  m.condition = j.at("condition").get<double>();
  m.covariance = matrix_from_json(j.at("covariance"));
  m.well_conditioned = j.at("well_conditioned").get<bool>();
  return m;
}

// --- test functions and sequence vectors ---------------------------------------

nlohmann::json test_function_to_json(const TestFunction& f) {
  if (f.kind() != TestFunction::Kind::GaussianPoly)
    throw std::invalid_argument("grid test functions travel with their ensembles, not as JSON");
  nlohmann::json j;
  j["kind"] = "gaussian_poly";
  j["center"] = {f.center()(0), f.center()(1), f.center()(2), f.center()(3)};
  j["width"] = f.width();
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : f.poly().terms())
    terms.push_back({{"exp", {e[0], e[1], e[2], e[3]}}, {"coeff", cplx_to_json(c)}});
  j["poly"] = std::move(terms);
  return j;
}

TestFunction test_function_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "gaussian" && kind != "gaussian_poly")
    throw std::invalid_argument("unknown test-function kind '" + kind + "'");
  const auto& c = j.at("center");
  if (c.size() != 4) throw std::invalid_argument("center must have 4 entries");
  const Vec4 center{c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>(),
                    c.at(3).get<double>()};
  const double width = j.at("width").get<double>();
  if (kind == "gaussian" || !j.contains("poly")) return TestFunction::gaussian(center, width);
  Poly4 p;
  for (const auto& t : j.at("poly")) {
    const auto& e = t.at("exp");
    if (e.size() != 4) throw std::invalid_argument("monomial exponent must have 4 entries");
    p.add_term({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<int>()},
               cplx_from_json(t.at("coeff")));
  }
  return TestFunction::gaussian_poly(center, width, std::move(p));
}

nlohmann::json sequence_vector_to_json(const SequenceVector& v) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : v.terms) {
    nlohmann::json jt;
    jt["coeff"] = cplx_to_json(t.coeff);
    jt["gauge"] = nlohmann::json::array();
    for (const auto& g : t.idx.gauge) jt["gauge"].push_back({g.alpha, g.mu});
    jt["matter"] = nlohmann::json::array();
    for (const auto& m : t.idx.matter)
      jt["matter"].push_back({{"label", m.label}, {"component", m.component}});
    jt["args"] = nlohmann::json::array();
    for (const auto& a : t.args) jt["args"].push_back(test_function_to_json(a));
    terms.push_back(std::move(jt));
  }
  return nlohmann::json{{"terms", std::move(terms)}};
}

SequenceVector sequence_vector_from_json(const nlohmann::json& j) {
  SequenceVector v;
  v.terms.clear();
  for (const auto& jt : j.at("terms")) {
    SequenceTerm t;
    t.coeff = cplx_from_json(jt.at("coeff"));
    for (const auto& g : jt.at("gauge")) t.idx.gauge.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
    for (const auto& m : jt.at("matter"))
      t.idx.matter.push_back({m.at("label").get<std::string>(), m.at("component").get<int>()});
    for (const auto& a : jt.at("args")) t.args.push_back(test_function_from_json(a));
    if (t.args.size() != t.idx.arity())
      throw std::invalid_argument("sequence term arity does not match its argument count");
    v.terms.push_back(std::move(t));
  }
  return v;
}

// --- family descriptors ----------------------------------------------------------

FamilyPtr family_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "free_scalar")
    return make_free_scalar_family(j.at("mass").get<double>(), j.value("degree_cap", 8));
  if (kind == "maxwell") return make_maxwell_family(j.value("degree_cap", 8));
  if (kind == "covariant_photon") return make_covariant_photon_family();
  if (kind == "fermion_toy") return make_fermion_toy_family(j.at("mass").get<double>());
  if (kind == "sign_flipped") return make_sign_flipped(family_from_json(j.at("base")));
  if (kind == "time_reflected")
    return make_time_reflected(family_from_json(j.at("base")), j.value("horizon", 6.0));
  if (kind == "constant_shift")
    return make_constant_shift(family_from_json(j.at("base")), j.at("c").get<double>(),
                               j.value("slice_volume", 1.0));
  if (kind == "lattice") {
    Ensemble ens = load_ensemble(j.at("ensemble").get<std::string>());
    if (j.contains("ensemble_hash")) {
      const std::string want = j.at("ensemble_hash").get<std::string>();
      const std::string got = ensemble_content_hash(ens);
      if (want != got)
        throw std::runtime_error("ensemble content hash mismatch: descriptor " + want +
                                 ", file " + got);
    }
    ObservableSpec spec;
    const std::string obs = j.value("observable", std::string("F2"));
    if (obs == "F2") {
      spec.kind = ObservableSpec::Kind::F2;
    } else if (obs == "phi2") {
      spec.kind = ObservableSpec::Kind::Phi2;
    } else if (obs == "wilson_loop") {
      spec.kind = ObservableSpec::Kind::WilsonLoop;
      spec.loop_r = j.value("loop_r", 1);
      spec.loop_t = j.value("loop_t", 1);
    } else {
      throw std::invalid_argument("unknown lattice observable '" + obs + "'");
    }
    return std::make_shared<LatticeFamily>(std::move(ens), spec, j.value("label", obs));
  }
  throw std::invalid_argument("unknown family kind '" + kind + "'");
}

// --- physical spaces ---------------------------------------------------------------

void save_physical(const PhysicalSpace& ps, const std::string& path,
                   const nlohmann::json& family_desc) {
  const long n = long(ps.borchers_basis.size());
  const long d = ps.dim();

  std::vector<double> blob;
  blob.reserve(std::size_t(2 * n * n + 2 * d * n));
  append_complex_matrix(blob, ps.borchers_gram);
  append_complex_matrix(blob, ps.quotient);
  const std::string bytes(reinterpret_cast<const char*>(blob.data()),
                          blob.size() * sizeof(double));

  nlohmann::json j;
  j["format"] = "QGVPHYS1";
  j["family"] = family_desc;
  j["dim"] = d;
  j["null_dim"] = ps.null_dim;
  j["basis"] = nlohmann::json::array();
  for (const auto& v : ps.borchers_basis) j["basis"].push_back(sequence_vector_to_json(v));
  j["spectrum"] = std::vector<double>(ps.spectrum.data(), ps.spectrum.data() + ps.spectrum.size());
  j["inner"] = std::vector<double>(ps.inner.data(), ps.inner.data() + ps.inner.size());
  j["omega"] = nlohmann::json::array();
  for (long k = 0; k < ps.omega.size(); ++k) j["omega"].push_back(cplx_to_json(ps.omega(k)));
  j["omega_norm_defect"] = ps.omega_norm_defect;
  j["blob"] = {{"file", path + ".bin"}, {"sha256", sha256_hex(bytes)}, {"doubles", blob.size()}};

  std::ofstream bin(path + ".bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("cannot open " + path + ".bin for writing");
  bin.write(bytes.data(), long(bytes.size()));
  if (!bin) throw std::runtime_error("short write to " + path + ".bin");
  bin.close();

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

PhysicalSpace load_physical(const std::string& path, const FamilyPtr& fam) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", std::string()) != "QGVPHYS1")
    throw std::runtime_error(path + " is not a physical-space descriptor");

  std::ifstream bin(path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path + ".bin");
  std::string bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (sha256_hex(bytes) != j.at("blob").at("sha256").get<std::string>())
    throw std::runtime_error("matrix blob hash mismatch for " + path);

  PhysicalSpace ps;
  ps.family = fam;
  for (const auto& bv : j.at("basis")) ps.borchers_basis.push_back(sequence_vector_from_json(bv));
  const long n = long(ps.borchers_basis.size());
  const long d = j.at("dim").get<long>();
  ps.null_dim = j.at("null_dim").get<int>();

  const std::size_t need = std::size_t(2 * n * n + 2 * d * n) * sizeof(double);
  if (bytes.size() != need) throw std::runtime_error("matrix blob has the wrong size");
  const double* p = reinterpret_cast<const double*>(bytes.data());
  ps.borchers_gram.resize(n, n);
  for (long i = 0; i < n; ++i)
    for (long c = 0; c < n; ++c) {
      ps.borchers_gram(i, c) = cplx(p[0], p[1]);
      p += 2;
    }
  ps.quotient.resize(d, n);
  for (long i = 0; i < d; ++i)
    for (long c = 0; c < n; ++c) {
      ps.quotient(i, c) = cplx(p[0], p[1]);
      p += 2;
    }

  const auto spec = j.at("spectrum").get<std::vector<double>>();
  ps.spectrum = Eigen::Map<const Eigen::VectorXd>(spec.data(), long(spec.size()));
  const auto inner = j.at("inner").get<std::vector<double>>();
  if (long(inner.size()) != d) throw std::runtime_error("inner-product size mismatch");
  ps.inner = Eigen::Map<const Eigen::VectorXd>(inner.data(), long(inner.size()));

  const auto& jo = j.at("omega");
  ps.omega.resize(long(jo.size()));
  for (long k = 0; k < long(jo.size()); ++k) ps.omega(k) = cplx_from_json(jo.at(std::size_t(k)));
  if (ps.omega.size() != d) throw std::runtime_error("vacuum coordinate size mismatch");
  ps.omega_norm_defect = j.at("omega_norm_defect").get<double>();
  return ps;
}

}  // namespace qgv
