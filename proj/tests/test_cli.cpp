// End-to-end tests for the qgv batch front-end. Each case shells out to the
// real binary (path in QGV_CLI, set by the build) with a config written to a
// scratch directory, then checks exit code, stdout, and the files produced.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string cli_path() {
  const char* p = std::getenv("QGV_CLI");
  REQUIRE_MESSAGE(p != nullptr, "QGV_CLI must point at the qgv binary");
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  std::array<char, 512> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), int(buf.size()), pipe)) res.output += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("qgv_cli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), ("missing file " + path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string grab_hash(const std::string& output) {
  const auto pos = output.find("content_hash: ");
  REQUIRE(pos != std::string::npos);
  return output.substr(pos + 14, 64);
}

const char* kFreeScalarTheory =
    "[theory]\n"
    "family = free_scalar\n"
    "mass = 1.0\n";

}  // namespace

TEST_CASE("simulate: small abelian ensemble, bit-reproducible content hash") {
  Scratch s;
  const std::string cfg = s.file("sim.cfg",
                                 "[simulate]\n"
                                 "dims = 8 8\n"
                                 "group = U1\n"
                                 "beta = 1.0\n"
                                 "configs = 16\n"
                                 "seed = 42\n"
                                 "out = ens.qgv\n");

  const auto a = run("--out " + s.path("o1") + " simulate --config " + cfg);
  CHECK(a.exit_code == 0);
  CHECK(contains(a.output, "content_hash: "));
  CHECK(fs::exists(s.path("o1") + "/ens.qgv"));
  CHECK(fs::exists(s.path("o1") + "/ens.qgv.json"));

  const auto b = run("--out " + s.path("o2") + " simulate --config " + cfg);
  CHECK(b.exit_code == 0);
  CHECK(grab_hash(a.output) == grab_hash(b.output));

  const auto c = run("--out " + s.path("o3") + " simulate --config " + cfg + " --seed 7");
  CHECK(c.exit_code == 0);
  CHECK(grab_hash(c.output) != grab_hash(a.output));
}

TEST_CASE("config validation: unknown and missing keys are named, exit 2") {
  Scratch s;

  const auto unknown = run("check --config " + s.file("u.cfg",
                                                      "[theory]\n"
                                                      "family = free_scalar\n"
                                                      "mass = 1.0\n"
                                                      "frobnication_level = 9\n"));
  CHECK(unknown.exit_code == 2);
  CHECK(contains(unknown.output, "theory.frobnication_level"));

  const auto missing = run("check --config " + s.file("m.cfg", "[theory]\nfamily = free_scalar\n"));
  CHECK(missing.exit_code == 2);
  CHECK(contains(missing.output, "theory.mass"));

  const auto section = run("check --config " + s.file("s.cfg", "[conspiracy]\ntheory = yes\n"));
  CHECK(section.exit_code == 2);
  CHECK(contains(section.output, "conspiracy"));

  const auto nofile = run("check --config " + s.path("absent.cfg"));
  CHECK(nofile.exit_code == 2);

  const auto badnum = run("check --config " + s.file("n.cfg",
                                                     "[theory]\n"
                                                     "family = free_scalar\n"
                                                     "mass = heavy\n"));
  CHECK(badnum.exit_code == 2);
  CHECK(contains(badnum.output, "theory.mass"));
}

TEST_CASE("check: free scalar passes every applicable axiom, exit 0") {
  Scratch s;
  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  const auto r = run("--out " + s.dir.string() + " check --config " + cfg + " --seed 11");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "failures: 0"));
  CHECK(!contains(r.output, " fail "));

  const json reports = json::parse(slurp(s.path("axiom_reports.json")));
  REQUIRE(reports.is_array());
  CHECK(reports.size() == 10);
  int passes = 0, inapplicable = 0;
  for (const auto& rep : reports) {
    if (rep.at("verdict") == "pass") ++passes;
    if (rep.at("verdict") == "inapplicable") ++inapplicable;
  }
  CHECK(passes + inapplicable == 10);
  CHECK(passes >= 6);
}

TEST_CASE("check: sign-flipped kernel fails reflection positivity, exit counts failures") {
  Scratch s;
  const std::string cfg = s.file("flip.cfg",
                                 "[theory]\n"
                                 "family = sign_flipped\n"
                                 "base = free_scalar\n"
                                 "base_mass = 1.0\n");
  const auto r =
      run("--out " + s.dir.string() + " check --config " + cfg + " --axioms reflection_positivity");
  CHECK(r.exit_code == 1);
  CHECK(contains(r.output, "reflection_positivity"));
  CHECK(contains(r.output, "fail"));

  const json reports = json::parse(slurp(s.path("axiom_reports.json")));
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].at("axiom") == "reflection_positivity");
  CHECK(reports[0].at("verdict") == "fail");
}

TEST_CASE("check: unknown axiom name exits 2 and lists the valid names") {
  Scratch s;
  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  const auto r = run("check --config " + cfg + " --axioms frobnicate");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.output, "frobnicate"));
  CHECK(contains(r.output, "euclidean_covariance"));
  CHECK(contains(r.output, "local_commutativity"));
}

TEST_CASE("check: csv format adds a flat table next to the json reports") {
  Scratch s;
  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  const auto r = run("--out " + s.dir.string() + " --format csv check --config " + cfg +
                     " --axioms symmetry,cluster");
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(s.path("axiom_reports.csv"));
  CHECK(contains(csv, "family,axiom,verdict"));
  CHECK(contains(csv, "symmetry,pass"));
  CHECK(contains(csv, "cluster,pass"));
}

TEST_CASE("reconstruct: degree-2 scalar space has dimension 2, plot data is x,y,yerr") {
  Scratch s;
  const std::string cfg = s.file("rec.cfg", std::string(kFreeScalarTheory) +
                                                "\n[reconstruct]\n"
                                                "degree = 2\n"
                                                "functions = 1\n");
  const auto r = run("--out " + s.dir.string() + " reconstruct --config " + cfg);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "dimension: 2"));
  CHECK(fs::exists(s.path("physical.json")));
  CHECK(fs::exists(s.path("physical.json.bin")));

  const std::string csv = slurp(s.path("spectrum.csv"));
  CHECK(contains(csv, "x,y,yerr"));
  CHECK(contains(csv, "0,1.000000,0"));

  const json ps = json::parse(slurp(s.path("physical.json")));
  CHECK(ps.at("dim") == 2);
  CHECK(ps.at("family").at("kind") == "free_scalar");
}

TEST_CASE("reconstruct: an empty basis request is a config error") {
  Scratch s;
  const std::string cfg = s.file("rec0.cfg", std::string(kFreeScalarTheory) +
                                                 "\n[reconstruct]\n"
                                                 "degree = 2\n"
                                                 "functions = 0\n");
  const auto r = run("reconstruct --config " + cfg);
  CHECK(r.exit_code == 2);
  CHECK(contains(r.output, "reconstruct.functions"));

  const auto odd = run("reconstruct --config " + s.file("odd.cfg", std::string(kFreeScalarTheory) +
                                                                       "\n[reconstruct]\n"
                                                                       "degree = 3\n"));
  CHECK(odd.exit_code == 2);
  CHECK(contains(odd.output, "reconstruct.degree"));
}

TEST_CASE("continue: free scalar fits to a single pole at the squared mass") {
  Scratch s;
  const std::string cfg = s.file("cont.cfg", std::string(kFreeScalarTheory) +
                                                 "\n[continue]\n"
                                                 "max_poles = 2\n");
  const auto r = run("--out " + s.dir.string() + " continue --config " + cfg);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "poles: 1"));

  const json model = json::parse(slurp(s.path("spectral.json")));
  REQUIRE(model.at("poles").size() == 1);
  CHECK(model.at("poles")[0].at("mass2").get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(model.at("well_conditioned") == true);

  const std::string csv = slurp(s.path("fit.csv"));
  CHECK(contains(csv, "x,y,yerr"));
}

TEST_CASE("report: renders saved reports back into a table") {
  Scratch s;
  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  REQUIRE(run("--out " + s.dir.string() + " check --config " + cfg + " --axioms symmetry").exit_code ==
          0);

  const auto r = run("--format csv --out " + s.dir.string() + " report " +
                     s.path("axiom_reports.json"));
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "symmetry"));
  CHECK(contains(r.output, "pass"));
  CHECK(contains(slurp(s.path("report.csv")), "symmetry,pass"));

  const auto none = run("report");
  CHECK(none.exit_code == 2);
}

TEST_CASE("usage: bad invocations and a bad thread count exit 2") {
  Scratch s;
  CHECK(run("").exit_code == 2);
  CHECK(run("conjure --config x.cfg").exit_code == 2);
  CHECK(run("check").exit_code == 2);  // --config is required

  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  const auto bad = run("check --config " + cfg + " --seed junk");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("env: QGV_THREADS must be a positive integer when set") {
  Scratch s;
  const std::string cfg = s.file("free.cfg", kFreeScalarTheory);
  const std::string base = "QGV_THREADS=zero " + cli_path() + " check --config " + cfg +
                           " --axioms symmetry > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(base.c_str())) == 2);
  const std::string ok = "QGV_THREADS=2 " + cli_path() + " check --config " + cfg +
                         " --axioms symmetry > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(ok.c_str())) == 0);
}
