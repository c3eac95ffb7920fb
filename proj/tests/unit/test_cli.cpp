#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "nrmi-lab");
  std::ostringstream out, err;
  const int code = nrmi::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nrmi_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("unknown subcommand prints usage and exits 1") {
    const auto r = run({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.out.empty());
    CHECK(r.err.find("Usage") != std::string::npos);
  }

  TEST_CASE("missing subcommand is a usage error") { CHECK(run({}).code == 1); }

  TEST_CASE("help exits 0") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("coverage") != std::string::npos);
  }

  TEST_CASE("check-assumption reports a passing NGGP") {
    const auto r = run({"check-assumption", "--family", "nggp", "--sigma", "0.3"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["bound_ok"] == true);
    CHECK(j["monotone_ok"] == true);
    for (const auto& e : j["c_estimates"]) CHECK(e["c"].get<double>() == doctest::Approx(0.3).epsilon(0.02));
  }

  TEST_CASE("invalid parameters exit 1") {
    const auto r = run({"check-assumption", "--family", "nggp", "--sigma", "1.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error") != std::string::npos);
  }

  TEST_CASE("mle-sigma on distinct data warns at the boundary") {
    const auto dir = scratch("mle");
    {
      std::ofstream data(dir / "distinct.txt");
      for (int i = 0; i < 300; ++i) data << i * 0.5 << "\n";
    }
    const auto r = run({"mle-sigma", "--data", (dir / "distinct.txt").string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["sigma"].get<double>() >= 0.9);
    CHECK(j["at_boundary"] == true);
    CHECK(r.err.find("warning") != std::string::npos);
  }

  TEST_CASE("coverage twice with the same seed gives identical bytes") {
    const auto dir = scratch("coverage");
    {
      std::ofstream cfg(dir / "cfg.toml");
      cfg << "true_dist = P1, P3\nsample_sizes = 10, 30\nreplications = 6\nposterior_draws_per_rep = 150\n";
    }
    const auto cfg = (dir / "cfg.toml").string();
    const auto a = run({"coverage", "--config", cfg, "--seed", "42", "--output-dir", (dir / "a").string()});
    const auto b = run({"coverage", "--config", cfg, "--seed", "42", "--output-dir", (dir / "b").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto first = slurp(dir / "a" / "coverage.csv");
    CHECK(!first.empty());
    CHECK(first == slurp(dir / "b" / "coverage.csv"));
    CHECK(first.find("seed=42") != std::string::npos);
  }

  TEST_CASE("density writes one file per cell") {
    const auto dir = scratch("density");
    {
      std::ofstream cfg(dir / "cfg.toml");
      cfg << "true_dist = P1\nsample_sizes = 10, 100\nreplications = 3\nposterior_draws_per_rep = 200\n";
    }
    const auto r = run({"density", "--config", (dir / "cfg.toml").string(), "--output-dir", (dir / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "out" / "density_10.csv"));
    CHECK(fs::exists(dir / "out" / "density_100.csv"));
  }

  TEST_CASE("moments and nclusters produce CSV") {
    const auto dir = scratch("moments");
    { std::ofstream(dir / "x.txt") << "1 1 2\n"; }
    const auto m = run({"moments", "--data", (dir / "x.txt").string(), "--set", "atoms:1", "--set", "-inf,inf",
                        "--max-order", "2"});
    REQUIRE(m.code == 0);
    CHECK(m.out.rfind("set,m,moment\n", 0) == 0);
    CHECK(m.out.find(",1,1\n") != std::string::npos);

    const auto n = run({"nclusters", "--n", "4"});
    REQUIRE(n.code == 0);
    CHECK(n.out.find("k,probability") != std::string::npos);
    CHECK(run({"nclusters", "--n", "9"}).code == 1);
  }

  TEST_CASE("sample-posterior and credible agree on format") {
    const auto dir = scratch("credible");
    { std::ofstream(dir / "x.txt") << "1 1 2 3 3 3 4 5 2 2\n"; }
    const auto s = run({"sample-posterior", "--data", (dir / "x.txt").string(), "--draws", "150", "--seed", "3"});
    REQUIRE(s.code == 0);
    CHECK(s.out.rfind("draw,u_latent,kappa,pf\n", 0) == 0);

    const auto c = run({"credible", "--data", (dir / "x.txt").string(), "--correct"});
    REQUIRE(c.code == 0);
    const auto j = json::parse(c.out);
    CHECK(j["lo"].get<double>() <= j["hi"].get<double>());
    CHECK(j["corrected"] == true);
    CHECK(run({"credible", "--correct"}).code == 1);
  }

  TEST_CASE("missing data file exits 1") {
    CHECK(run({"mle-sigma", "--data", "/nonexistent/file.txt"}).code == 1);
  }
}
