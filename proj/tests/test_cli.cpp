#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COOPHT_CLI_PATH) + " " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

const char* kExponentConfig = R"({
  "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
  "rates": {"r1": 1.0, "r2": 0.82},
  "solver": {"restarts": 6, "max_iters": 150, "seed": 3},
  "output": {"path": "cli_exponent.json"}
})";

}  // namespace

TEST_CASE("cmd exponent: saturation anchor and determinism") {
  write_file("cli_cfg.json", kExponentConfig);
  CHECK(run_cli("exponent cli_cfg.json") == 0);
  const std::string first = read_file("cli_exponent.json");
  CHECK(first.find("\"theta\"") != std::string::npos);

  // theta ~ 0.7136 at generous rates
  const size_t pos = first.find("\"theta\":");
  REQUIRE(pos != std::string::npos);
  const double theta = std::strtod(first.c_str() + pos + 8, nullptr);
  CHECK(theta == doctest::Approx(0.7136).epsilon(2e-3 / 0.7136));

  // byte-identical rerun
  CHECK(run_cli("exponent cli_cfg.json") == 0);
  CHECK(read_file("cli_exponent.json") == first);
}

TEST_CASE("cmd exponent: zero rates") {
  write_file("cli_cfg0.json", R"({
    "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
    "rates": {"r1": 0.0, "r2": 0.0},
    "solver": {"restarts": 2, "max_iters": 50, "seed": 3},
    "output": {"path": "cli_exponent0.json"}
  })");
  CHECK(run_cli("exponent cli_cfg0.json") == 0);
  const std::string out = read_file("cli_exponent0.json");
  const size_t pos = out.find("\"theta\":");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::strtod(out.c_str() + pos + 8, nullptr)) < 1e-6);
}

TEST_CASE("cli override and error statuses") {
  write_file("cli_cfg.json", kExponentConfig);
  // dotted override changes the output path
  CHECK(run_cli("exponent cli_cfg.json --output.path cli_alt.json") == 0);
  CHECK(read_file("cli_alt.json").find("theta") != std::string::npos);

  // config errors exit 2
  CHECK(run_cli("exponent missing.json") == 2);
  write_file("cli_bad.json", "{ not json");
  CHECK(run_cli("exponent cli_bad.json") == 2);
  write_file("cli_norates.json",
             R"({"source": {"binary_example": {"a":0.5,"p":0.5,"q":0.5}}})");
  CHECK(run_cli("exponent cli_norates.json") == 2);
  CHECK(run_cli("unknown cli_cfg.json") == 2);

  // resource guard exits 3 (brute-force enumeration too large)
  write_file("cli_guard.json", R"({
    "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
    "rates": {"r1": 1.0, "r2": 1.0},
    "solver": {"restarts": 2, "max_iters": 10, "grid_resolution": 0.05},
    "oracle": {"u1_size": 4, "u2_size": 9}
  })");
  CHECK(run_cli("oracle cli_guard.json") == 3);
}

TEST_CASE("cmd sweep CSV schema") {
  write_file("cli_sweep.json", R"({
    "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
    "epsilon": 0.07,
    "sum_rate": {"grid": [0.0, 0.5], "split_grid": 3},
    "solver": {"restarts": 3, "max_iters": 80, "seed": 5},
    "output": {"path": "cli_sweep.csv", "format": "csv"}
  })");
  CHECK(run_cli("sweep cli_sweep.json") == 0);
  const std::string csv = read_file("cli_sweep.csv");
  CHECK(csv.rfind("R,theta_vl,theta_fix,best_r1_vl,best_r1_fix\n", 0) == 0);
  // R = 0 row is all zeros, vl >= fl on each row
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  REQUIRE(std::getline(ss, line));
  CHECK(line.rfind("0.000000,0.000000,0.000000", 0) == 0);
  while (std::getline(ss, line)) {
    double R, vl, fl;
    CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf", &R, &vl, &fl) == 3);
    CHECK(vl >= fl - 1e-6);
  }
}

TEST_CASE("cmd simulate smoke run") {
  write_file("cli_sim.json", R"({
    "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
    "epsilon": 0.3,
    "sim": {
      "n": 8, "mu": 0.05, "trials": 1, "seed": 9, "s_n_mode": "coin",
      "aux": {
        "pu1_given_x1": [[0.65, 0.35], [0.35, 0.65]],
        "pu2_given_u1x2": [[0.65, 0.35], [0.35, 0.65], [0.65, 0.35], [0.35, 0.65]]
      }
    },
    "output": {"path": "cli_sim.json.out"}
  })");
  CHECK(run_cli("simulate cli_sim.json") == 0);
  const std::string out = read_file("cli_sim.json.out");
  CHECK(out.find("alpha_hat") != std::string::npos);
  CHECK(out.find("paths_h0") != std::string::npos);

  // determinism: identical files across reruns
  CHECK(run_cli("simulate cli_sim.json") == 0);
  CHECK(read_file("cli_sim.json.out") == out);
}

TEST_CASE("cmd oracle record") {
  write_file("cli_oracle.json", R"({
    "source": {"binary_example": {"a": 0.5, "p": 0.75, "q": 0.95}},
    "rates": {"r1": 0.55, "r2": 0.55},
    "solver": {"restarts": 6, "max_iters": 150, "seed": 3, "grid_resolution": 0.1},
    "oracle": {"u1_size": 2, "u2_size": 2},
    "output": {"path": "cli_oracle.json.out"}
  })");
  CHECK(run_cli("oracle cli_oracle.json") == 0);
  const std::string out = read_file("cli_oracle.json.out");
  const size_t pos = out.find("\"gap\":");
  REQUIRE(pos != std::string::npos);
  const double gap = std::strtod(out.c_str() + pos + 6, nullptr);
  CHECK(gap >= -1e-3);  // solver dominates the grid
}
