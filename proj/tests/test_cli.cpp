#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "incscat/dataset.hpp"
#include "incscat/vsf.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / ("incscat_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

// Exit status of the CLI; stdout and stderr go to a log file under root().
int run(const std::string& args) {
  const std::string cmd =
      std::string(INCSCAT_CLI) + " " + args + " >>" + (root() / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

json report(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f);
  return json::parse(f);
}

std::string out(const std::string& name) { return " --out " + (root() / name).string(); }

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("forward --no-such-flag") == 1);
  CHECK(run("forward --grid 8 8 --chi /nonexistent/chi.vsf" + out("missing")) == 1);
  CHECK(run("forward --grid 0 8" + out("zero_grid")) == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("forward with zero contrast scatters nothing and is reproducible") {
  REQUIRE(run("forward --grid 8 8 --preset zero" + out("fz")) == 0);
  const incscat::VsfArray esca = incscat::read_vsf(root() / "fz" / "esca.vsf");
  CHECK(esca.values.isZero(0.0));
  const json j = report(root() / "fz" / "forward.json");
  CHECK(j["schema"] == "incscat.forward");
  CHECK(j["schema_version"] == 1);

  REQUIRE(run("forward --grid 12 12 --preset random-split --seed 4" + out("f1")) == 0);
  REQUIRE(run("forward --grid 12 12 --preset random-split --seed 4" + out("f2")) == 0);
  for (const char* f : {"etot.vsf", "esca.vsf"})
    CHECK(incscat::read_file_bytes(root() / "f1" / f) == incscat::read_file_bytes(root() / "f2" / f));
}

TEST_CASE("forward non-convergence exits with 2") {
  CHECK(run("forward --grid 8 8 --preset random-split --tol 1e-17" + out("nc")) == 2);
}

TEST_CASE("mie-check passes at the default resolution") {
  REQUIRE(run("mie-check" + out("mie")) == 0);
  const json j = report(root() / "mie" / "mie_check.json");
  CHECK(j["relative_error"].get<double>() <= 0.03);
  CHECK(j["pass"] == true);
}

TEST_CASE("split-check passes and detects corruption") {
  CHECK(run("split-check --trials 1" + out("sc")) == 0);
  CHECK(report(root() / "sc" / "split_check.json")["pass"] == true);
  CHECK(run("split-check --trials 1 --corrupt" + out("scc")) == 2);
}

TEST_CASE("estimate and invert recover the unknown contrast") {
  REQUIRE(run("estimate-chi2 --preset m1 --ring-count 8" + out("est")) == 0);
  CHECK(report(root() / "est" / "estimate.json")["relative_error"].get<double>() <= 1e-6);
  REQUIRE(run("invert --preset single-cell" + out("inv")) == 0);
  CHECK(report(root() / "inv" / "invert.json")["relative_error"].get<double>() <= 1e-3);
  CHECK(fs::exists(root() / "inv" / "chi_p2.vsf"));
}

TEST_CASE("dataset generation, metrics and operator export") {
  const std::string gen = "gen-dataset --grid 16 16 --count 2 --seed 9";
  REQUIRE(run(gen + out("ds1")) == 0);
  REQUIRE(run(gen + " --jobs 2" + out("ds2")) == 0);
  const auto d1 = incscat::read_dataset(root() / "ds1");
  const auto d2 = incscat::read_dataset(root() / "ds2");
  REQUIRE(d1.samples.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(incscat::bitwise_equal(d1.samples[i], d2.samples[i]));
  CHECK(incscat::read_file_bytes(root() / "ds1" / "manifest.json") ==
        incscat::read_file_bytes(root() / "ds2" / "manifest.json"));

  const std::string ds = (root() / "ds1").string();
  REQUIRE(run("eval-metrics --pred " + ds + " --labels " + ds + out("met")) == 0);
  const json m = report(root() / "met" / "metrics.json");
  for (const char* k : {"chi", "etot", "esca"}) CHECK(m["mre"][k]["mean"].get<double>() == 0.0);

  REQUIRE(run("export-operators --dataset " + ds + out("ops")) == 0);
  const incscat::VsfArray gs = incscat::read_vsf(root() / "ops" / "operators" / "gs.vsf");
  CHECK(gs.dims[0] == 32);
  CHECK(gs.dims[1] == 256);
}

TEST_CASE("cleanup") { fs::remove_all(root()); }
