#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PNTK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json parse_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  return nlohmann::json::parse(in);
}

int count_lines(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

struct TempDir {
  fs::path dir;
  TempDir() : dir(fs::temp_directory_path() / "pntk_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("the data/train/certify/krr chain produces its artifacts") {
  TempDir tmp;
  const std::string data = tmp / "data.csv";
  CHECK(run_cli("gen-data --n 48 --d 8 --margin 0.5 --seed 3 --out " + data) == 0);
  REQUIRE(fs::exists(data));
  CHECK(count_lines(data) == 49);  // header plus one row per point

  const std::string run_dir = tmp / "run";
  CHECK(run_cli("train --data " + data + " --m 32 --steps 20 --seed 2 --out-dir " +
                run_dir) == 0);
  CHECK(fs::exists(fs::path(run_dir) / "trace.csv"));
  CHECK(fs::exists(fs::path(run_dir) / "state.bin"));
  const nlohmann::json summary = parse_file(fs::path(run_dir) / "summary.json");
  CHECK(summary.contains("final_risk"));
  CHECK(summary["config"]["m"].get<int>() == 32);
  CHECK(count_lines(fs::path(run_dir) / "trace.csv") == 21);

  const std::string cert = tmp / "cert.json";
  CHECK(run_cli("certify --data " + data + " --state " + run_dir +
                "/state.bin --mc-cert 200 --seed 2 --out " + cert) == 0);
  const nlohmann::json report = parse_file(cert);
  CHECK(report["kl_bound"].is_number());
  CHECK(report["test_error"].is_null());
  CHECK(report["risk_mc_upper"].get<double>() >= report["risk_mc"].get<double>());

  const std::string preds = tmp / "preds.csv";
  CHECK(run_cli("krr --data " + data + " --lambda 0.01 --rho0 0.05 --out " + preds) ==
        0);
  CHECK(count_lines(preds) == 49);
}

TEST_CASE("ntk-verify runs a single width without slope checks") {
  TempDir tmp;
  const std::string out = tmp / "conc.json";
  CHECK(run_cli("ntk-verify --n 8 --d 6 --widths 64 --seeds 3 --seed 1 --out " + out) ==
        0);
  const nlohmann::json report = parse_file(out);
  CHECK_FALSE(report["slope_available"].get<bool>());
  CHECK(report["slope_mu"].is_null());
}

TEST_CASE("the worker pool option is accepted everywhere") {
  TempDir tmp;
  const std::string out = tmp / "conc2.json";
  CHECK(run_cli("--threads 2 ntk-verify --n 8 --d 6 --widths 64 --seeds 4 --out " +
                out) == 0);
  CHECK(fs::exists(out));
}

TEST_CASE("argument and file errors use distinct exit codes") {
  TempDir tmp;
  CHECK(run_cli("no-such-command") != 0);
  CHECK(run_cli("gen-data --n 16 --d 4") != 0);  // --out is required

  // a readable failure inside a callback exits 1
  CHECK(run_cli("train --data " + (tmp / "missing.csv") + " --out-dir " +
                (tmp / "r")) == 1);
  CHECK(run_cli("gen-data --n 17 --d 4 --out " + (tmp / "odd.csv")) == 1);
}
