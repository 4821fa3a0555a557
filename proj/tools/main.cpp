// qgv: batch front-end for the verification laboratory. Configures theories,
// generates gauge ensembles, runs the axiom suite, reconstructs physical
// spaces, continues 2-point data to the relativistic side, and renders
// report summaries. Machine outputs are JSON (matrices in hash-linked binary
// sidecars); plot data is CSV with x,y,yerr columns.
//
// Exit codes: 0 success / all axioms pass; `check` exits with the number of
// failed axioms; 2 on usage, config, or environment errors.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgv/axioms.hpp"
#include "qgv/continuation.hpp"
#include "qgv/correlator.hpp"
#include "qgv/lattice.hpp"
#include "qgv/reconstruction.hpp"
#include "qgv/serialize.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- flat key-value config with sections ------------------------------------
//
//   # comment
//   [section]
//   key = value            (lists are space-separated)

using Config = std::map<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"theory",
       {"family", "mass", "degree_cap", "base", "base_mass", "base_degree_cap", "horizon",
        "shift", "slice_volume", "ensemble", "ensemble_hash", "observable", "label", "loop_r",
        "loop_t"}},
      {"simulate",
       {"dims", "group", "beta", "spacing", "configs", "seed", "thermalization", "stride",
        "out"}},
      {"measure", {"ensemble", "observable", "loop_r", "loop_t"}},
      {"check", {"axioms", "seed"}},
      {"reconstruct", {"degree", "functions", "width", "time_step", "eps_null"}},
      {"continue", {"max_poles", "taus", "pmags", "mass2_hi"}},
  };
  return schema;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const auto& schema = config_schema();

  Config cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.count(section))
        throw ConfigError("unknown config section '[" + section + "]'");
      cfg[section];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!schema.at(section).count(key))
      throw ConfigError("unknown config key '" + section + "." + key + "'");
    if (cfg[section].count(key))
      throw ConfigError("duplicate config key '" + section + "." + key + "'");
    cfg[section][key] = value;
  }
  return cfg;
}

std::string require_key(const Config& cfg, const std::string& section, const std::string& key) {
  const auto s = cfg.find(section);
  if (s == cfg.end() || !s->second.count(key))
    throw ConfigError("missing config key '" + section + "." + key + "'");
  return s->second.at(key);
}

std::optional<std::string> get_key(const Config& cfg, const std::string& section,
                                   const std::string& key) {
  const auto s = cfg.find(section);
  if (s == cfg.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

double to_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + where + "' is not a number: '" + v + "'");
  }
}

long to_int(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + where + "' is not an integer: '" + v + "'");
  }
}

std::vector<std::string> split_ws(const std::string& v) {
  std::istringstream ss(v);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

// --- [theory] -> family descriptor -------------------------------------------

json base_descriptor(const Config& cfg, const std::string& kind, const std::string& mass_key,
                     const std::string& cap_key) {
  json j;
  j["kind"] = kind;
  if (kind == "free_scalar" || kind == "fermion_toy")
    j["mass"] = to_double(require_key(cfg, "theory", mass_key), "theory." + mass_key);
  if (const auto cap = get_key(cfg, "theory", cap_key))
    j["degree_cap"] = int(to_int(*cap, "theory." + cap_key));
  return j;
}

json theory_descriptor(const Config& cfg) {
  const std::string family = require_key(cfg, "theory", "family");
  if (family == "free_scalar" || family == "maxwell" || family == "covariant_photon" ||
      family == "fermion_toy")
    return base_descriptor(cfg, family, "mass", "degree_cap");

  if (family == "sign_flipped" || family == "time_reflected" || family == "constant_shift") {
    const std::string base = require_key(cfg, "theory", "base");
    if (base == "sign_flipped" || base == "time_reflected" || base == "constant_shift")
      throw ConfigError("config key 'theory.base' must name a non-wrapper family");
    json j;
    j["kind"] = family;
    j["base"] = base_descriptor(cfg, base, "base_mass", "base_degree_cap");
    if (family == "time_reflected") {
      if (const auto h = get_key(cfg, "theory", "horizon"))
        j["horizon"] = to_double(*h, "theory.horizon");
    }
    if (family == "constant_shift") {
      j["c"] = to_double(require_key(cfg, "theory", "shift"), "theory.shift");
      if (const auto sv = get_key(cfg, "theory", "slice_volume"))
        j["slice_volume"] = to_double(*sv, "theory.slice_volume");
    }
    return j;
  }

  if (family == "lattice") {
    json j;
    j["kind"] = "lattice";
    j["ensemble"] = require_key(cfg, "theory", "ensemble");
    if (const auto h = get_key(cfg, "theory", "ensemble_hash")) j["ensemble_hash"] = *h;
    if (const auto o = get_key(cfg, "theory", "observable")) j["observable"] = *o;
    if (const auto l = get_key(cfg, "theory", "label")) j["label"] = *l;
    if (const auto r = get_key(cfg, "theory", "loop_r")) j["loop_r"] = int(to_int(*r, "theory.loop_r"));
    if (const auto t = get_key(cfg, "theory", "loop_t")) j["loop_t"] = int(to_int(*t, "theory.loop_t"));
    return j;
  }

  throw ConfigError("unknown family kind '" + family + "' in theory.family");
}

// --- output helpers -----------------------------------------------------------

std::filesystem::path out_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return std::filesystem::path(out_dir) / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << text;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += "\"\"";
    else q += c;
  }
  return q + "\"";
}

void print_report_table(const std::vector<qgv::AxiomReport>& reports) {
  std::printf("%-24s %-13s %s\n", "axiom", "verdict", "detail");
  for (const auto& r : reports) {
    std::string detail;
    if (!r.reason.empty()) detail = r.reason;
    else {
      for (const auto& [k, v] : r.quantities) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s=%.3g ", k.c_str(), v);
        detail += buf;
      }
    }
    std::printf("%-24s %-13s %s\n", r.axiom.c_str(), qgv::verdict_name(r.verdict), detail.c_str());
  }
}

std::string reports_to_csv(const std::vector<qgv::AxiomReport>& reports) {
  std::string csv = "family,axiom,verdict,tolerance,sigma,reason,provenance_hash\n";
  for (const auto& r : reports) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", r.tolerance, r.sigma);
    csv += csv_quote(r.family) + "," + r.axiom + "," + qgv::verdict_name(r.verdict) + buf +
           csv_quote(r.reason) + "," + r.provenance + "\n";
  }
  return csv;
}

// --- commands -------------------------------------------------------------------

int cmd_simulate(const Config& cfg, std::optional<long> seed_override, const std::string& out_dir) {
  const auto dim_toks = split_ws(require_key(cfg, "simulate", "dims"));
  if (dim_toks.empty()) throw ConfigError("config key 'simulate.dims' must list lattice extents");
  std::vector<int> dims;
  for (const auto& t : dim_toks) dims.push_back(int(to_int(t, "simulate.dims")));

  const std::string group = require_key(cfg, "simulate", "group");
  qgv::Action act;
  if (group == "U1") act.group = qgv::GroupId::U1;
  else if (group == "SU2") act.group = qgv::GroupId::SU2;
  else if (group == "SU3") act.group = qgv::GroupId::SU3;
  else throw ConfigError("config key 'simulate.group' must be U1, SU2, or SU3");
  act.beta = to_double(require_key(cfg, "simulate", "beta"), "simulate.beta");

  double spacing = 1.0;
  if (const auto s = get_key(cfg, "simulate", "spacing")) spacing = to_double(*s, "simulate.spacing");
  const long configs = to_int(require_key(cfg, "simulate", "configs"), "simulate.configs");
  long seed = to_int(require_key(cfg, "simulate", "seed"), "simulate.seed");
  if (seed_override) seed = *seed_override;
  long therm = -1, stride = -1;
  if (const auto t = get_key(cfg, "simulate", "thermalization"))
    therm = to_int(*t, "simulate.thermalization");
  if (const auto s = get_key(cfg, "simulate", "stride")) stride = to_int(*s, "simulate.stride");

  const qgv::Lattice lat(dims, spacing);
  const qgv::Ensemble ens = qgv::generate_ensemble(lat, act, std::uint64_t(seed), int(configs),
                                                   int(therm), int(stride));
  const auto path = out_path(out_dir, require_key(cfg, "simulate", "out"));
  qgv::save_ensemble(path.string(), ens);
  std::printf("ensemble: %s\nconfigs: %zu\ncontent_hash: %s\n", path.string().c_str(),
              ens.configs.size(), qgv::ensemble_content_hash(ens).c_str());
  return 0;
}

int cmd_measure(const Config& cfg, const std::string& out_dir, const std::string& format) {
  const std::string ens_path = require_key(cfg, "measure", "ensemble");
  const qgv::Ensemble ens = qgv::load_ensemble(ens_path);

  const auto [plaq, plaq_sig] = qgv::plaquette_average(ens);

  qgv::ObservableSpec spec;
  std::string obs = "F2";
  if (const auto o = get_key(cfg, "measure", "observable")) obs = *o;
  if (obs == "F2") spec.kind = qgv::ObservableSpec::Kind::F2;
  else if (obs == "phi2") spec.kind = qgv::ObservableSpec::Kind::Phi2;
  else if (obs == "wilson_loop") {
    spec.kind = qgv::ObservableSpec::Kind::WilsonLoop;
    if (const auto r = get_key(cfg, "measure", "loop_r")) spec.loop_r = int(to_int(*r, "measure.loop_r"));
    if (const auto t = get_key(cfg, "measure", "loop_t")) spec.loop_t = int(to_int(*t, "measure.loop_t"));
  } else {
    throw ConfigError("config key 'measure.observable' must be F2, phi2, or wilson_loop");
  }

  // per-configuration volume average, jackknifed over configurations
  std::vector<double> per_cfg;
  for (const auto& c : ens.configs) {
    const auto field = qgv::observable_field(ens.lattice, ens.action, c, spec);
    double m = 0.0;
    for (double v : field) m += v;
    per_cfg.push_back(m / double(field.size()));
  }
  const std::size_t n = per_cfg.size();
  double mean = 0.0;
  for (double v : per_cfg) mean += v;
  mean /= double(n);
  double var = 0.0;
  for (double v : per_cfg) var += (v - mean) * (v - mean);
  const double sigma = n > 1 ? std::sqrt(var / double(n - 1) / double(n)) : 0.0;

  json j;
  j["ensemble"] = ens_path;
  j["content_hash"] = qgv::ensemble_content_hash(ens);
  j["plaquette"] = {{"mean", plaq}, {"sigma", plaq_sig}};
  if (ens.lattice.dims.size() == 2)
    j["plaquette"]["reference_2d"] = qgv::two_dim_plaquette_reference(ens.action.group, ens.action.beta);
  j["observable"] = {{"kind", obs}, {"mean", mean}, {"sigma", sigma}};

  if (format == "csv") {
    std::string csv = "x,y,yerr\nplaquette," + std::to_string(plaq) + "," + std::to_string(plaq_sig) +
                      "\n" + obs + "," + std::to_string(mean) + "," + std::to_string(sigma) + "\n";
    write_text(out_path(out_dir, "measure.csv"), csv);
  } else {
    write_text(out_path(out_dir, "measure.json"), j.dump(2) + "\n");
  }
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int cmd_check(const Config& cfg, std::optional<long> seed_override, const std::string& axioms_flag,
              const std::string& out_dir, const std::string& format) {
  const json desc = theory_descriptor(cfg);
  const qgv::FamilyPtr fam = qgv::family_from_json(desc);

  long seed = 20240901;
  if (const auto s = get_key(cfg, "check", "seed")) seed = to_int(*s, "check.seed");
  if (seed_override) seed = *seed_override;

  static const std::vector<std::string> known{
      "euclidean_covariance", "temporal_support",       "symmetry",
      "cluster",              "linear_growth",          "reflection_positivity",
      "gauge_covariance",     "renormalized_positivity", "spectral_condition",
      "local_commutativity"};

  std::string selection = axioms_flag;
  if (selection.empty()) {
    if (const auto a = get_key(cfg, "check", "axioms")) selection = *a;
  }
  std::set<std::string> wanted;
  if (!selection.empty() && selection != "all") {
    std::string tok;
    std::istringstream ss(selection);
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      if (std::find(known.begin(), known.end(), tok) == known.end()) {
        std::string names;
        for (const auto& k : known) names += (names.empty() ? "" : ", ") + k;
        throw ConfigError("unknown axiom '" + tok + "'; valid names: " + names);
      }
      wanted.insert(tok);
    }
    if (wanted.empty()) throw ConfigError("axiom selection is empty");
  }

  std::vector<qgv::AxiomReport> reports = qgv::run_axiom_suite(fam, std::uint64_t(seed));
  if (!wanted.empty()) {
    std::vector<qgv::AxiomReport> kept;
    for (auto& r : reports)
      if (wanted.count(r.axiom)) kept.push_back(std::move(r));
    reports = std::move(kept);
  }

  std::printf("family: %s\n", fam->name().c_str());
  print_report_table(reports);

  json out = json::array();
  for (const auto& r : reports) out.push_back(qgv::report_to_json(r));
  write_text(out_path(out_dir, "axiom_reports.json"), out.dump(2) + "\n");
  if (format == "csv") write_text(out_path(out_dir, "axiom_reports.csv"), reports_to_csv(reports));

  int failures = 0;
  for (const auto& r : reports)
    if (r.verdict == qgv::Verdict::Fail) ++failures;
  std::printf("failures: %d\n", failures);
  return failures;
}

int cmd_reconstruct(const Config& cfg, const std::string& out_dir) {
  const json desc = theory_descriptor(cfg);
  const qgv::FamilyPtr fam = qgv::family_from_json(desc);

  long degree = 2, functions = 1;
  double width = 0.8, time_step = 0.7, eps_null = 1e-10;
  if (const auto d = get_key(cfg, "reconstruct", "degree")) degree = to_int(*d, "reconstruct.degree");
  if (const auto f = get_key(cfg, "reconstruct", "functions"))
    functions = to_int(*f, "reconstruct.functions");
  if (const auto w = get_key(cfg, "reconstruct", "width")) width = to_double(*w, "reconstruct.width");
  if (const auto t = get_key(cfg, "reconstruct", "time_step"))
    time_step = to_double(*t, "reconstruct.time_step");
  if (const auto e = get_key(cfg, "reconstruct", "eps_null"))
    eps_null = to_double(*e, "reconstruct.eps_null");

  if (degree < 2 || degree % 2 != 0)
    throw ConfigError("config key 'reconstruct.degree' must be a positive even correlator degree");
  if (functions < 1)
    throw ConfigError("config key 'reconstruct.functions' must request at least one test function "
                      "(the basis would be empty)");
  const int cap = int(degree / 2);

  std::string label;
  for (const auto& e : fam->catalog()) {
    if (!e.fermionic) {
      label = e.label;
      break;
    }
  }
  if (label.empty()) throw ConfigError("family has no bosonic matter label to build a basis from");

  std::vector<qgv::TestFunction> probes;
  for (long k = 0; k < functions; ++k)
    probes.push_back(qgv::TestFunction::gaussian(
        {0.5 + time_step * double(k), 0.2, -0.1, 0.3}, width));

  // vacuum plus all multiset monomials in the probes up to the degree cap
  std::vector<qgv::SequenceVector> basis{qgv::SequenceVector::vacuum()};
  std::vector<std::pair<qgv::SequenceVector, long>> frontier{{qgv::SequenceVector::vacuum(), 0}};
  for (int d = 1; d <= cap; ++d) {
    std::vector<std::pair<qgv::SequenceVector, long>> next;
    for (const auto& [v, lo] : frontier) {
      for (long k = lo; k < functions; ++k) {
        auto nv = qgv::apply_field(qgv::FieldOperatorMap::matter(label), v,
                                   probes[std::size_t(k)], cap);
        next.emplace_back(std::move(nv), k);
      }
    }
    for (const auto& [v, lo] : next) basis.push_back(v);
    frontier = std::move(next);
  }
  if (basis.size() > 16)
    throw ConfigError("requested basis has " + std::to_string(basis.size()) +
                      " vectors; the working-set cap is 16 (reduce degree or functions)");

  const qgv::PhysicalSpace ps = qgv::build_physical(fam, basis, eps_null);
  const auto path = out_path(out_dir, "physical.json");
  qgv::save_physical(ps, path.string(), desc);

  std::string csv = "x,y,yerr\n";
  for (long k = 0; k < ps.spectrum.size(); ++k)
    csv += std::to_string(k) + "," + std::to_string(ps.spectrum(k)) + ",0\n";
  write_text(out_path(out_dir, "spectrum.csv"), csv);

  std::printf("basis: %zu vectors (degree cap %d)\ndimension: %d\nnull directions: %d\n",
              basis.size(), cap, ps.dim(), ps.null_dim);
  std::printf("physical space: %s (+.bin)\n", path.string().c_str());
  return 0;
}

int cmd_continue(const Config& cfg, const std::string& out_dir) {
  const json desc = theory_descriptor(cfg);
  const qgv::FamilyPtr fam = qgv::family_from_json(desc);
  if (!fam->has_temporal_slice())
    throw ConfigError("family '" + fam->name() + "' has no temporal-slice surface to fit");

  qgv::SpectralFitOptions opt;
  if (const auto m = get_key(cfg, "continue", "max_poles"))
    opt.max_poles = int(to_int(*m, "continue.max_poles"));
  if (const auto h = get_key(cfg, "continue", "mass2_hi"))
    opt.mass2_hi = to_double(*h, "continue.mass2_hi");
  if (const auto t = get_key(cfg, "continue", "taus")) {
    for (const auto& tok : split_ws(*t)) opt.taus.push_back(to_double(tok, "continue.taus"));
  } else {
    for (int k = 0; k < 12; ++k) opt.taus.push_back(0.8 * std::pow(4.0 / 0.8, k / 11.0));
  }
  if (const auto p = get_key(cfg, "continue", "pmags")) {
    opt.pmags.clear();
    for (const auto& tok : split_ws(*p)) opt.pmags.push_back(to_double(tok, "continue.pmags"));
  }

  std::vector<qgv::SliceSample> data;
  for (double p : opt.pmags) {
    for (double tau : opt.taus) {
      const auto r = fam->temporal_slice(tau, p);
      data.push_back({tau, p, r.value.real(), r.error});
    }
  }
  const qgv::SpectralModel model = qgv::fit_spectral_samples(data, opt);

  write_text(out_path(out_dir, "spectral.json"), qgv::model_to_json(model).dump(2) + "\n");
  std::string csv = "x,y,yerr\n";
  for (const auto& s : data)
    csv += std::to_string(s.tau) + "," + std::to_string(s.value) + "," + std::to_string(s.sigma) + "\n";
  write_text(out_path(out_dir, "fit.csv"), csv);

  std::printf("poles: %zu\n", model.poles.size());
  for (const auto& p : model.poles)
    std::printf("  mass2 %.6g  weight %.6g\n", p.mass2, p.weight);
  std::printf("residual_rel: %.3g\nwell_conditioned: %s\n", model.residual_rel,
              model.well_conditioned ? "yes" : "no");
  std::printf("spectral model: %s\n", out_path(out_dir, "spectral.json").string().c_str());
  return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out_dir,
               const std::string& format) {
  if (files.empty()) throw ConfigError("report needs at least one axiom-report JSON file");
  std::vector<qgv::AxiomReport> reports;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("cannot open report file '" + f + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("report file '" + f + "' is not valid JSON: " + e.what());
    }
    if (j.is_array())
      for (const auto& r : j) reports.push_back(qgv::report_from_json(r));
    else
      reports.push_back(qgv::report_from_json(j));
  }

  std::map<std::string, std::vector<qgv::AxiomReport>> by_family;
  for (auto& r : reports) by_family[r.family].push_back(r);
  for (const auto& [family, rs] : by_family) {
    std::printf("family: %s\n", family.c_str());
    print_report_table(rs);
    std::printf("\n");
  }
  if (format == "csv") write_text(out_path(out_dir, "report.csv"), reports_to_csv(reports));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgv: gauge-theory axiom verification laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format = "json", axioms_flag;
  std::optional<long> seed_override;
  std::vector<std::string> report_files;

  app.add_option("--out", out_dir, "output directory (created if missing)")->capture_default_str();
  app.add_option("--format", format, "json|csv for machine outputs")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "generate a gauge ensemble");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--seed", seed_override, "override the config seed");

  auto* mea = app.add_subcommand("measure", "basic observables on an ensemble");
  mea->add_option("--config", config_path, "config file")->required();

  auto* chk = app.add_subcommand("check", "run the axiom suite on a family");
  chk->add_option("--config", config_path, "config file")->required();
  chk->add_option("--seed", seed_override, "override the config seed");
  chk->add_option("--axioms", axioms_flag, "comma-separated axiom names (default all)");

  auto* rec = app.add_subcommand("reconstruct", "build the physical Hilbert space");
  rec->add_option("--config", config_path, "config file")->required();

  auto* con = app.add_subcommand("continue", "fit and continue 2-point data");
  con->add_option("--config", config_path, "config file")->required();

  auto* rep = app.add_subcommand("report", "render report JSON files as tables");
  rep->add_option("files", report_files, "axiom-report JSON files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (const char* threads = std::getenv("QGV_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(threads, &end, 10);
    if (end == threads || *end != '\0' || n < 1) {
      std::fprintf(stderr, "error: QGV_THREADS must be a positive integer\n");
      return 2;
    }
  }

  try {
    if (rep->parsed()) return cmd_report(report_files, out_dir, format);
    const Config cfg = parse_config(config_path);
    if (sim->parsed()) return cmd_simulate(cfg, seed_override, out_dir);
    if (mea->parsed()) return cmd_measure(cfg, out_dir, format);
    if (chk->parsed()) return cmd_check(cfg, seed_override, axioms_flag, out_dir, format);
    if (rec->parsed()) return cmd_reconstruct(cfg, out_dir);
    if (con->parsed()) return cmd_continue(cfg, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
