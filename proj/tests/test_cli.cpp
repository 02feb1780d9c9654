#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Drives the installed binary end to end: flag parsing, exit codes, file
// output and byte determinism.

#include "sparsim/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kTmp = fs::temp_directory_path();

int run_cli(const std::string& args, const fs::path& stdout_path = {}) {
  std::string cmd = std::string(SPARSIM_CLI_PATH) + " " + args;
  if (!stdout_path.empty())
    cmd += " > " + stdout_path.string() + " 2>&1";
  else
    cmd += " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("no arguments runs the documented defaults") { CHECK(run_cli("") == 0); }

TEST_CASE("flags land in the emitted config") {
  const auto out = kTmp / "sparsim_cli_flags.json";
  const int rc = run_cli("--sparsifier micro --workers 16 --density 0.01 --iters 3 "
                         "--dim 512 --samples 64 --batch 2 --format json --out " +
                         out.string());
  REQUIRE(rc == 0);
  const auto file = sparsim::read_records_json(out);
  CHECK(file.config.at("sparsifier") == "micro");
  CHECK(file.config.at("workers").get<int>() == 16);
  CHECK(file.config.at("density").get<double>() == 0.01);
  CHECK(file.records.size() == 3);
  fs::remove(out);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("--density 1.5 --iters 2") == 1);
  CHECK(run_cli("--density 0 --iters 2") == 1);
  CHECK(run_cli("--workers 0 --iters 2") == 1);
  CHECK(run_cli("--bogus-flag") == 1);
  CHECK(run_cli("--sparsifier warp --iters 2") == 1);
  // compare with fewer than two strategies is a usage error
  CHECK(run_cli("--sparsifiers micro --iters 2") == 1);
}

TEST_CASE("runtime failures exit with code 2") {
  // batch larger than any worker shard is rejected at cluster init
  CHECK(run_cli("--iters 2 --samples 16 --workers 4 --batch 100") == 2);
}

TEST_CASE("help exits 0") { CHECK(run_cli("--help") == 0); }

TEST_CASE("same seed gives byte-identical CSV files") {
  const auto a = kTmp / "sparsim_cli_det_a.csv";
  const auto b = kTmp / "sparsim_cli_det_b.csv";
  const std::string common =
      "--sparsifier micro --workers 4 --density 0.02 --iters 40 --dim 256 --samples 64 "
      "--batch 4 --seed 123 --out ";
  REQUIRE(run_cli(common + a.string()) == 0);
  REQUIRE(run_cli(common + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("SPARSIM_SEED is the seed fallback, flags win over it") {
  const auto from_env = kTmp / "sparsim_cli_env.csv";
  const auto from_flag = kTmp / "sparsim_cli_flag.csv";
  const std::string common =
      "--workers 2 --iters 10 --dim 128 --samples 32 --batch 4 --out ";
  // env var as fallback
  {
    const std::string cmd = "env SPARSIM_SEED=777 " + std::string(SPARSIM_CLI_PATH) + " " +
                            common + from_env.string() + " > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  }
  REQUIRE(run_cli(common + from_flag.string() + " --seed 777") == 0);
  CHECK(slurp(from_env) == slurp(from_flag));

  // explicit flag overrides the environment
  {
    const std::string cmd = "env SPARSIM_SEED=1 " + std::string(SPARSIM_CLI_PATH) + " " + common +
                            from_env.string() + " --seed 777 > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  }
  CHECK(slurp(from_env) == slurp(from_flag));
  fs::remove(from_env);
  fs::remove(from_flag);
}

TEST_CASE("config file values are overridden by flags") {
  const auto cfg = kTmp / "sparsim_cli_cfg.ini";
  const auto out_cfg = kTmp / "sparsim_cli_cfg.json";
  {
    std::ofstream f(cfg);
    f << "workers=8\ndensity=0.05\niters=4\n";
  }
  REQUIRE(run_cli("--config " + cfg.string() + " --density 0.25 --dim 256 --samples 64 "
                  "--batch 2 --format json --out " +
                  out_cfg.string()) == 0);
  const auto file = sparsim::read_records_json(out_cfg);
  CHECK(file.config.at("workers").get<int>() == 8);          // from the file
  CHECK(file.config.at("density").get<double>() == 0.25);    // flag wins
  CHECK(file.records.size() == 4);
  fs::remove(cfg);
  fs::remove(out_cfg);
}

TEST_CASE("compare writes distinct per-strategy files with the expected factors") {
  const auto table = kTmp / "sparsim_cli_table.txt";
  const auto out = kTmp / "sparsim_cli_cmp.json";
  const int rc = run_cli("--sparsifiers micro,topk,cltk --workers 4 --density 0.02 --iters 40 "
                         "--dim 1024 --samples 64 --batch 4 --format json --out " +
                         out.string(),
                         table);
  REQUIRE(rc == 0);
  const std::string text = slurp(table);
  CHECK(text.find("micro") != std::string::npos);
  CHECK(text.find("topk") != std::string::npos);

  const auto micro_path = kTmp / "sparsim_cli_cmp_micro.json";
  const auto topk_path = kTmp / "sparsim_cli_cmp_topk.json";
  const auto cltk_path = kTmp / "sparsim_cli_cmp_cltk.json";
  REQUIRE(fs::exists(micro_path));
  REQUIRE(fs::exists(topk_path));
  REQUIRE(fs::exists(cltk_path));

  auto mean_redundant = [](const fs::path& p) {
    const auto file = sparsim::read_records_json(p);
    double sum = 0.0;
    for (const auto& r : file.records) sum += r.redundant_traffic_factor;
    return sum / static_cast<double>(file.records.size());
  };
  // overlapping top-k selections carry redundant traffic; exclusive ones never do
  CHECK(mean_redundant(topk_path) >= mean_redundant(micro_path));
  for (const auto& r : sparsim::read_records_json(micro_path).records)
    CHECK((r.redundant_traffic_factor == 1.0 || r.redundant_traffic_factor == 0.0));

  // the leader's selection is everyone's selection: aggregates hit k exactly
  for (const auto& r : sparsim::read_records_json(cltk_path).records)
    CHECK(r.buildup_factor == 1.0);

  fs::remove(table);
  fs::remove(micro_path);
  fs::remove(topk_path);
  fs::remove(cltk_path);
}

TEST_CASE("a failing compare run names the run and exits 2") {
  const auto log = kTmp / "sparsim_cli_fail.txt";
  const int rc = run_cli("--sparsifiers micro,topk --workers 4 --samples 16 --batch 100 "
                         "--iters 2",
                         log);
  CHECK(rc == 2);
  const std::string text = slurp(log);
  CHECK(text.find("micro") != std::string::npos);  // the failing run is named
  fs::remove(log);
}
