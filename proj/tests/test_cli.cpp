#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef ERGODIC_CLI_PATH
#error "ERGODIC_CLI_PATH must point at the built CLI binary"
#endif

const std::string kCli = ERGODIC_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = fs::temp_directory_path() / "ergodic_cli_stdout.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " > " +
                          out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  return RunResult{WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!cells.empty()) rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("average subcommand writes the constant rotation trace") {
  const fs::path csv = temp_file("avg.csv");
  const fs::path js = temp_file("avg.json");
  const RunResult r = run_cli("average --system rotation:phi --x 0.0 --y 0.25 --n 100000 "
                              "--scheme both --csv " +
                              csv.string() + " --json " + js.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(slurp(csv));
  REQUIRE(rows.size() >= 2);
  REQUIRE(rows[0] == std::vector<std::string>{"n", "cesaro", "log", "gap"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(std::stod(rows[i][1]) - 0.5) <= 1e-12);
    CHECK(std::abs(std::stod(rows[i][2]) - 0.5) <= 1e-12);
  }
  const json doc = json::parse(slurp(js));
  CHECK(doc.contains("config"));
  CHECK(doc["config"]["system"]["kind"] == "rotation");
}

TEST_CASE("outputs are byte-identical across runs with the same seed") {
  const fs::path j1 = temp_file("det1.json");
  const fs::path j2 = temp_file("det2.json");
  const std::string args = "sensitivity --system doubling --n 4096 --pairs 32 --mu --seed 7 ";
  REQUIRE(run_cli(args + "--json " + j1.string()).exit_code == 0);
  REQUIRE(run_cli(args + "--json " + j2.string()).exit_code == 0);
  const std::string a = slurp(j1), b = slurp(j2);
  REQUIRE(!a.empty());
  CHECK(a == b);
}

TEST_CASE("oxtoby reports the wide gap") {
  const fs::path js = temp_file("oxtoby.json");
  const RunResult r =
      run_cli("oxtoby --alpha phi --n 10000 --mc 100000 --seed 3 --json " + js.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(js));
  CHECK(doc["report"]["gap"].get<double>() >= 0.4);
  CHECK(doc["report"]["avg_at_zero"].get<double>() >= 0.999);
  CHECK(doc.contains("config"));
}

TEST_CASE("dichotomy flags the doubling map as mean sensitive") {
  const fs::path js = temp_file("dich.json");
  const RunResult r =
      run_cli("dichotomy --system doubling --n 20000 --seed 5 --json " + js.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(js));
  CHECK(doc["result"]["verdict"] == "MeanSensitive");
  CHECK(r.stdout_text.find("MeanSensitive") != std::string::npos);
}

TEST_CASE("unique-ergodicity subcommand distinguishes the fixtures") {
  const fs::path js = temp_file("ue.json");
  const RunResult ok = run_cli(
      "unique-ergodicity --system rotation:phi --random-starts 5 --n 20000 --scheme cesaro "
      "--seed 1 --json " +
      js.string());
  REQUIRE(ok.exit_code == 0);
  CHECK(json::parse(slurp(js))["report"]["verdict"] == "UniquelyErgodicConsistent");

  const RunResult bad = run_cli(
      "unique-ergodicity --system shift:const0 --starts 0,5 --n 100 --scheme cesaro --seed 1 "
      "--json " +
      js.string());
  REQUIRE(bad.exit_code == 0);  // the experiment ran; the verdict is the payload
  CHECK(json::parse(slurp(js))["report"]["verdict"] == "UniquelyErgodicConsistent");
}

TEST_CASE("sarnak subcommand reports small logarithmic sums") {
  const fs::path js = temp_file("sarnak.json");
  const RunResult r =
      run_cli("sarnak --system rotation:phi --n 100000 --json " + js.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(js));
  CHECK(std::abs(doc["logarithmic_sum"].get<double>()) <= 0.2);
}

TEST_CASE("defect subcommand stays within the scheme bound") {
  const fs::path csv = temp_file("defect.csv");
  const RunResult r = run_cli(
      "defect --system rotation:phi --x 0.3 --scheme log --n-grid 10,100,1000 --csv " +
      csv.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(slurp(csv));
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stod(rows[i][1]) <= std::stod(rows[i][2]));
}

TEST_CASE("vset subcommand clusters the block fixture") {
  const fs::path js = temp_file("vset.json");
  const fs::path csv = temp_file("vset.csv");
  const RunResult r = run_cli(
      "vset --system shift:blocks --x 0 --n 65536 --scheme cesaro --cluster-tol 0.05 --json " +
      js.string() + " --csv " + csv.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(js));
  CHECK(doc["cluster_count"].get<int>() >= 2);
  const auto rows = parse_csv(slurp(csv));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == std::vector<std::string>{"rep", "k", "point", "weight"});
}

TEST_CASE("config file values are used unless flags override them") {
  const fs::path cfg = temp_file("cfg.json");
  {
    std::ofstream os(cfg);
    os << R"({"system": "rotation:phi", "n": 5000, "seed": 9})";
  }
  const fs::path j1 = temp_file("cfg_out1.json");
  const RunResult r1 = run_cli("average --config " + cfg.string() + " --x 0.0 --y 0.25 --json " +
                               j1.string());
  REQUIRE(r1.exit_code == 0);
  const json d1 = json::parse(slurp(j1));
  CHECK(d1["n"].get<int>() == 5000);
  CHECK(d1["config"]["seed"].get<int>() == 9);

  const fs::path j2 = temp_file("cfg_out2.json");
  const RunResult r2 = run_cli("average --config " + cfg.string() +
                               " --x 0.0 --y 0.25 --n 600 --seed 11 --json " + j2.string());
  REQUIRE(r2.exit_code == 0);
  const json d2 = json::parse(slurp(j2));
  CHECK(d2["n"].get<int>() == 600);
  CHECK(d2["config"]["seed"].get<int>() == 11);
}

TEST_CASE("ERGODIC_SEED applies only without an explicit seed") {
  const fs::path j1 = temp_file("env1.json");
  const fs::path j2 = temp_file("env2.json");
  const fs::path j3 = temp_file("env3.json");
  const std::string args = "oxtoby --alpha phi --n 100 --mc 5000 ";
  REQUIRE(run_cli(args + "--json " + j1.string(), "ERGODIC_SEED=123").exit_code == 0);
  REQUIRE(run_cli(args + "--seed 123 --json " + j2.string()).exit_code == 0);
  REQUIRE(run_cli(args + "--seed 999 --json " + j3.string(), "ERGODIC_SEED=123").exit_code == 0);
  const json a = json::parse(slurp(j1));
  const json b = json::parse(slurp(j2));
  const json c = json::parse(slurp(j3));
  CHECK(a["report"]["m_of_U_estimate"] == b["report"]["m_of_U_estimate"]);
  CHECK(c["config"]["seed"].get<int>() == 999);
}

TEST_CASE("invalid configurations exit with code 2 and a distinct message") {
  SECTION("unknown system kind") {
    const RunResult r = run_cli("average --system nonsense:1 --x 0 --y 0.1 --n 100");
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("unknown system kind") != std::string::npos);
  }
  SECTION("malformed inline system JSON") {
    const RunResult r = run_cli("average --system '{\"kind\":' --x 0 --y 0.1 --n 100");
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("malformed") != std::string::npos);
  }
  SECTION("unwritable output path") {
    const RunResult r = run_cli(
        "average --system rotation:phi --x 0 --y 0.1 --n 100 --csv /nonexistent/dir/out.csv");
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("cannot write output path") != std::string::npos);
  }
  SECTION("missing config file") {
    const RunResult r = run_cli("average --system rotation:phi --config /nonexistent/cfg.json");
    CHECK(r.exit_code == 2);
    CHECK(r.stdout_text.find("cannot read config file") != std::string::npos);
  }
  SECTION("unknown subcommand") {
    const RunResult r = run_cli("frobnicate");
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("modulus CSV carries the documented header") {
  const fs::path csv = temp_file("modulus.csv");
  const RunResult r = run_cli(
      "modulus --system rotation:phi --n 1024 --eps-levels 4 --samples 6 --seed 2 --csv " +
      csv.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = parse_csv(slurp(csv));
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"eps", "delta", "scheme", "n", "samples"});
  REQUIRE(rows.size() == 5);
  CHECK(rows[1][0] == rows[1][1]);  // rotation: delta == eps
}

TEST_CASE("report subcommand bundles the battery") {
  const fs::path js = temp_file("report.json");
  const RunResult r =
      run_cli("report --system rotation:phi --n 20000 --seed 4 --json " + js.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(js));
  CHECK(doc.contains("unique_ergodicity_arithmetic"));
  CHECK(doc.contains("dichotomy"));
  CHECK(doc["log_empirical_defect"].get<double>() <=
        doc["log_empirical_defect_bound"].get<double>());
}
