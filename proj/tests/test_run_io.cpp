#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cusplab/analysis.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/run_io.hpp"

using namespace cusplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cusplab_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spec and options survive json") {
  InitialDataSpec ch;
  ch.equation = Equation::CH;
  ch.epsilon = 0.2;
  ch.gamma = 0.5;
  auto back = spec_from_json(to_json(ch));
  CHECK(back.k3 == 0.0);
  CHECK(back.cutoff_radius == 0.0);
  CHECK(to_json(back) == to_json(ch));

  ch.k3 = 1e4;
  ch.cutoff_radius = 0.01;
  back = spec_from_json(nlohmann::json::parse(to_json(ch).dump()));
  CHECK(back.k3 == 1e4);
  CHECK(back.cutoff_radius == 0.01);

  InitialDataSpec hs;
  hs.beta_v = 2;
  hs.taper = false;
  CHECK(to_json(spec_from_json(to_json(hs))) == to_json(hs));

  RunOptions o;
  o.g_max = 5e3;
  o.snapshots_per_decade = 7;
  auto ob = options_from_json(to_json(o));
  CHECK(to_json(ob) == to_json(o));
}

TEST_CASE("written run reads back and gives the same report") {
  const auto table = build_profile(ProfileParams{});
  InitialDataSpec spec;
  spec.equation = Equation::CH;
  spec.epsilon = 0.2;
  auto run = run_to_blowup(spec, RunOptions{}, table);
  const auto dir = scratch_dir("roundtrip");
  auto files = write_run(run, dir);
  REQUIRE(files.size() == 5);
  for (const auto& f : files) CHECK(f.digest == git_blob_hash(slurp(dir / f.name)));

  auto back = read_run(dir);
  REQUIRE(back.snapshots.size() == run.snapshots.size());
  REQUIRE(back.history.size() == run.history.size());
  CHECK(back.stop_reason == run.stop_reason);
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    CHECK(back.snapshots[k].state.x == run.snapshots[k].state.x);
    CHECK(back.snapshots[k].state.ref == run.snapshots[k].state.ref);
    CHECK(back.snapshots[k].mod.xi_abs == run.snapshots[k].mod.xi_abs);
  }

  const auto a = to_json(analyze_run(run, table));
  const auto b = to_json(analyze_run(back, table));
  CHECK(a.dump() == b.dump());
  fs::remove_all(dir);
}

TEST_CASE("missing or malformed run directories are refused") {
  const auto dir = scratch_dir("broken");
  CHECK_THROWS_AS(read_run(dir), ConfigError);
  fs::create_directories(dir);
  InitialDataSpec spec;
  RunResult r;
  r.spec = spec;
  write_run(r, dir);
  std::ofstream(dir / "modulation.csv", std::ios::app) << "1,2\n";
  CHECK_THROWS_AS(read_run(dir), ConfigError);
  fs::remove_all(dir);
}
