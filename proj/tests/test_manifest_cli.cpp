#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brwldp/manifest.hpp"
#include "doctest.h"

using namespace brwldp;
namespace fs = std::filesystem;

namespace {
int run(const std::string& args) {
  const std::string cmd = std::string(BRWLDP_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("brwldp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("fnv1a64 vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("manifest round trip") {
  ExperimentManifest m;
  m.command = "estimate";
  m.n_grid = {16, 36};
  m.replicas = 1000;
  m.method = "schroder";
  m.eps = 0.1;
  m.d = 3;
  const auto text = m.canonical();
  const auto back = ExperimentManifest::from_json(nlohmann::json::parse(text));
  CHECK(back == m);
  CHECK(back.canonical() == text);
  CHECK(back.hash() == m.hash());
  CHECK(m.hash().size() == 16u);
  auto other = m;
  other.seed = 2;
  CHECK(other.hash() != m.hash());
  CHECK_THROWS_AS(ExperimentManifest::from_json(nlohmann::json::parse(R"({"p":"x"})")), std::invalid_argument);
}

TEST_CASE("cli exit codes") {
  CHECK(run("rates") == 0);
  CHECK(run("rates --set '(0,]'") == 2);
  CHECK(run("rates --p 0.4") == 2);
  CHECK(run("rates --bogus") == 2);
  CHECK(run("verify --only 2") == 0);
  CHECK(run("verify --only 2 --inject 2") == 1);
}

TEST_CASE("cli simulate is reproducible") {
  const auto dir = scratch("sim");
  const std::string args = "simulate --n-grid 4,9 --replicas 50 --seed 3 --out ";
  REQUIRE(run(args + (dir / "a.csv").string()) == 0);
  const auto a = slurp(dir / "a.csv");
  REQUIRE(run(args + (dir / "a.csv").string()) == 0);
  CHECK(!a.empty());
  CHECK(a == slurp(dir / "a.csv"));
  CHECK(a.rfind("# brwldp ", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli estimate writes results and fit") {
  const auto dir = scratch("est");
  REQUIRE(run("estimate --method naive --n-grid 4,9,16 --replicas 2000 --exact-check --out " + dir.string()) == 0);
  const auto csv = slurp(dir / "results.csv");
  CHECK(csv.find("naive,16,") != std::string::npos);
  CHECK(csv.find("exact,4,") != std::string::npos);
  CHECK(csv.find("exact,9,") != std::string::npos);
  CHECK(slurp(dir / "rate_fit.json").find("slope") != std::string::npos);

  const auto gdir = scratch("gumbel");
  CHECK(run("estimate --offspring 2:0.5,3:0.5 --step gumbel:1 --n-grid 16 --replicas 200 --out " + gdir.string()) ==
        0);
  CHECK(slurp(gdir / "results.csv").find("unverifiable") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(gdir);
}
