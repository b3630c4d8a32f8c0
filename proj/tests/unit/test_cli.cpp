#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  CliResult res;
  const std::string cmd = env + " " + std::string(CONECOVER_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) res.out.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string data_file(const char* name) { return std::string(CONECOVER_DATA_DIR) + "/" + name; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate: success, domain error and usage error exit codes") {
  CliResult ok = run_cli("validate --spec " + data_file("entropy_example.json"));
  CHECK(ok.exit_code == 0);
  json doc = json::parse(ok.out);
  CHECK(doc["tool"] == "conecover");
  CHECK(doc["result"]["valid"] == true);
  CHECK(doc["result"]["vertices"] == 3);
  CHECK(doc["spec_hash"].get<std::string>().size() == 16);

  CliResult multi = run_cli("validate --spec " + data_file("binary_tree_multi.json"));
  CHECK(multi.exit_code == 1);
  json err = json::parse(multi.out);
  CHECK(err["error"]["code"] == "MultiEdgeDetected");

  CliResult usage = run_cli("validate --no-such-flag");
  CHECK(usage.exit_code == 2);

  CliResult missing = run_cli("validate");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("validate --expand emits the simple spec") {
  CliResult res = run_cli("validate --expand --spec " + data_file("binary_tree_multi.json"));
  CHECK(res.exit_code == 0);
  json spec = json::parse(res.out);
  CHECK(spec["vertices"].size() == 2);
  CHECK(spec["edges"].size() == 4);
}

TEST_CASE("analyze: entropy example and the paper value") {
  CliResult res = run_cli("analyze --spec " + data_file("entropy_example.json"));
  REQUIRE(res.exit_code == 0);
  json doc = json::parse(res.out);
  const double h = doc["result"]["h"].get<double>();
  CHECK(std::fabs(h - 0.060499) < 1e-4);
  CHECK(doc["result"]["verdict"] == "transient");
  // 17-significant-digit formatting: the raw text round-trips the double
  CHECK(res.out.find("0.0604986392") != std::string::npos);

  // golden byte-for-byte pin
  const std::string golden = std::string(CONECOVER_GOLDEN_DIR) + "/analyze_entropy.json";
  CHECK(res.out == read_file(golden));
}

TEST_CASE("analyze --format tsv emits one compact row") {
  CliResult res = run_cli("analyze --format tsv --spec " + data_file("entropy_example.json"));
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("spec_id\tverdict\tell0\th\t") == 0);
  CHECK(res.out.find("transient") != std::string::npos);
}

TEST_CASE("growth TSV matches the golden oscillating table") {
  CliResult res = run_cli("growth --generator oscillating_growth --levels 32");
  REQUIRE(res.exit_code == 0);
  const std::string golden = std::string(CONECOVER_GOLDEN_DIR) + "/growth_oscillating.tsv";
  CHECK(res.out == read_file(golden));
}

TEST_CASE("simulate reports a deterministic run summary") {
  const std::string args = "simulate --generator homogeneous_tree --params beta=0.25 "
                           "--horizon 50000 --seed 7";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  json doc = json::parse(a.out);
  CHECK(doc["seed"] == 7);
  const double height = doc["result"]["final_height"].get<double>();
  CHECK(height / 50000.0 > 0.4);
  CHECK(doc["result"]["exits"].size() > 100);
}

TEST_CASE("couple and classify are byte-identical across worker counts") {
  const std::string couple_args = "couple --spec " + data_file("entropy_example.json") +
                                  " --trials 400 --cap 2000 --horizon 1500 --seed 3";
  CliResult c1 = run_cli(couple_args, "CONECOVER_THREADS=1");
  CliResult c2 = run_cli(couple_args, "CONECOVER_THREADS=2");
  CliResult c8 = run_cli(couple_args, "CONECOVER_THREADS=8");
  REQUIRE(c1.exit_code == 0);
  CHECK(c1.out == c2.out);
  CHECK(c1.out == c8.out);
  json doc = json::parse(c1.out);
  CHECK(doc["result"]["compatible"] == true);

  const std::string classify_args = "classify --generator halfline_critical --runs 50 "
                                    "--horizon 20000 --seed 7 --radius 40";
  CliResult k1 = run_cli(classify_args, "CONECOVER_THREADS=1");
  CliResult k8 = run_cli(classify_args, "CONECOVER_THREADS=8");
  REQUIRE(k1.exit_code == 0);
  CHECK(k1.out == k8.out);
  json kdoc = json::parse(k1.out);
  CHECK(kdoc["result"]["cw_certificate"]["certified"] == true);
  CHECK(kdoc["result"]["cw_certificate"]["lambda"] == 1.0);
  CHECK(kdoc["result"]["spectral"]["rho_lower"].get<double>() < 1.0);
  CHECK(kdoc["result"]["empirical"]["no_return_fraction"].get<double>() > 0.15);
}

TEST_CASE("classify on a finite spec attaches the three-way classification") {
  CliResult res = run_cli("classify --spec " + data_file("recurrent_example.json"));
  REQUIRE(res.exit_code == 0);
  json doc = json::parse(res.out);
  CHECK(doc["result"]["finite_classification"] == "positive_recurrent");
  CHECK(doc["result"]["ergodicity"]["verdict"] == "ergodic");

  CliResult e = run_cli("classify --spec " + data_file("entropy_example.json"));
  json edoc = json::parse(e.out);
  CHECK(edoc["result"]["finite_classification"] == "transient");
  CHECK(edoc["result"]["ergodicity"]["verdict"] == "non_ergodic");
}

TEST_CASE("sweep marks the homesick transition at lambda = 2") {
  CliResult res = run_cli("sweep --generator homesick --grid lambda=1.0:3.0:0.25");
  REQUIRE(res.exit_code == 0);
  const std::string golden = std::string(CONECOVER_GOLDEN_DIR) + "/sweep_homesick.tsv";
  CHECK(res.out == read_file(golden));
  // the verdict flips leaving 1.75: the starred row is lambda = 2
  std::istringstream in(res.out);
  std::string line;
  std::getline(in, line);  // header
  bool starred_at_2 = false;
  while (std::getline(in, line)) {
    if (line.find('*') != std::string::npos) starred_at_2 = line.rfind("2\t", 0) == 0;
  }
  CHECK(starred_at_2);
}

TEST_CASE("sweep over beta reproduces ell0 = max(0, 1-2beta)") {
  CliResult res = run_cli("sweep --generator homogeneous_tree --grid beta=0.1:0.6:0.1");
  REQUIRE(res.exit_code == 0);
  std::istringstream in(res.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string beta_s, verdict, lambda_s, ell0_s;
    std::getline(ls, beta_s, '\t');
    std::getline(ls, verdict, '\t');
    std::getline(ls, lambda_s, '\t');
    std::getline(ls, ell0_s, '\t');
    const double beta = std::stod(beta_s);
    const double ell0 = std::stod(ell0_s);
    CHECK(std::fabs(ell0 - std::max(0.0, 1.0 - 2.0 * beta)) < 1e-8);
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("empty sweep grid emits only the header") {
  CliResult res = run_cli("sweep --generator homesick --grid lambda=2.0:1.0:0.5");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out == "lambda\tverdict\tlambda_M\tell0\th\ttransition\n");
}

TEST_CASE("rwdcre subcommand classifies the printed-theorem cases") {
  CliResult res = run_cli(
      "rwdcre --params omega_values=0.8 --params omega_probs=1.0 "
      "--params nu_values=0.3 --params nu_probs=1.0 --n 100 --trials 10 --seed 5");
  REQUIRE(res.exit_code == 0);
  json doc = json::parse(res.out);
  CHECK(doc["result"]["verdict"] == "transient");
  CHECK(doc["result"]["lambda_case"] == 1);
}

TEST_CASE("analyze on an infinite generator requires and uses --radius") {
  CliResult no_radius = run_cli("analyze --generator halfline_critical");
  CHECK(no_radius.exit_code == 1);
  json err = json::parse(no_radius.out);
  CHECK(err["error"]["code"] == "TruncationRequired");

  CliResult res = run_cli("analyze --generator halfline_critical --radius 100");
  REQUIRE(res.exit_code == 0);
  json doc = json::parse(res.out);
  CHECK(doc["result"]["agree"] == false);
  CHECK(doc["result"]["lower"]["verdict"] == "transient");
}
