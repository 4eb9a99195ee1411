#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tcal/cli.hpp"
#include "tcal/fixtures.hpp"

using namespace tcal;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tcal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("net validate on the grid") {
  testing::TempDir dir("cli_net");
  spit(dir / "network.json", net::network_to_json(fixtures::grid_network()));
  const auto r = invoke({"net", "validate", "--network", (dir / "network.json").string(), "--output-dir", dir.path().string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("0 violations") != std::string::npos);
  CHECK(r.out.find("[seed=0]") != std::string::npos);
  CHECK(fs::exists(dir / "violations.json"));
}

TEST_CASE("net validate reports violations with exit code 1") {
  testing::TempDir dir("cli_bad");
  auto parts = fixtures::grid_network().parts();
  parts.edges[0].length = 0.0;
  spit(dir / "network.json", net::network_to_json(net::RoadNetwork::build(parts)));
  const auto r = invoke({"net", "validate", "--network", (dir / "network.json").string(), "--output-dir", dir.path().string()});
  CHECK(r.code == cli::kViolations);
  CHECK(slurp(dir / "violations.json").find("NONPOSITIVE_LENGTH") != std::string::npos);
}

TEST_CASE("usage errors") {
  testing::TempDir dir("cli_usage");
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"net"}).code == cli::kUsage);
  CHECK(invoke({"net", "validate", "--bogus"}).code == cli::kUsage);
  CHECK(invoke({"sim", "run", "--p", "1.5"}).code == cli::kUsage);
  // Missing input file and missing required input.
  CHECK(invoke({"net", "validate", "--network", (dir / "nope.json").string()}).code == cli::kUsage);
  CHECK(invoke({"net", "validate", "--output-dir", dir.path().string()}).code == cli::kUsage);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("malformed input is a runtime error") {
  testing::TempDir dir("cli_parse");
  spit(dir / "network.json", "{");
  const auto r = invoke({"net", "validate", "--network", (dir / "network.json").string()});
  CHECK(r.code == cli::kRuntime);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("project config round trip") {
  testing::TempDir dir("cli_cfg");
  cli::ProjectConfig c;
  c.seed = 17;
  c.paths.network = dir / "net" / "network.json";
  c.paths.output_dir = dir / "out";
  c.sim.rerouting_probability = 0.25;
  c.demand_overrides["car_rate"] = 0.5;
  c.equilibrium.max_iter = 7;
  c.sweep.grid = {0.1, 0.9, 0.2};
  c.sweep.workers = 3;
  c.ingest.filter.exclude_dates = {dataio::parse_date("2019-10-02")};
  cli::save_project_config(c, dir / "project.json");
  CHECK(cli::load_project_config(dir / "project.json") == c);
  CHECK(slurp(dir / "project.json").find(dir.path().string()) == std::string::npos);
  CHECK_THROWS_AS(cli::parse_project_config(R"({"seed": 1, "typo": 2})", dir.path(), "x"), ParseError);
  CHECK_THROWS_AS(cli::parse_project_config(R"({"sweep": {"workers": 0}})", dir.path(), "x"), ParseError);
}

TEST_CASE("demand generation is idempotent and leaves inputs alone") {
  testing::TempDir dir("cli_idem");
  const auto grid = fixtures::grid_network();
  spit(dir / "network.json", net::network_to_json(grid));
  spit(dir / "statistics.json", demand::statistics_to_json(fixtures::grid_statistics(grid, 2)));
  const std::string net_before = slurp(dir / "network.json"), stats_before = slurp(dir / "statistics.json");
  const std::vector<std::string> args{"demand", "generate", "--network", (dir / "network.json").string(),
                                      "--statistics", (dir / "statistics.json").string(), "--seed", "4",
                                      "--output-dir", (dir / "out").string()};
  REQUIRE(invoke(args).code == cli::kOk);
  const std::string first = slurp(dir / "out" / "trips.json");
  REQUIRE(invoke(args).code == cli::kOk);
  CHECK(slurp(dir / "out" / "trips.json") == first);
  CHECK(slurp(dir / "network.json") == net_before);
  CHECK(slurp(dir / "statistics.json") == stats_before);

  auto other = args;
  other[7] = "5";
  other.back() = (dir / "out5").string();
  REQUIRE(invoke(other).code == cli::kOk);
  CHECK(slurp(dir / "out5" / "trips.json") != first);
}
