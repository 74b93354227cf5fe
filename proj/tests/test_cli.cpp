#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "advot/commands.hpp"
#include "support.hpp"

using namespace advot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("advot_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("ADVOT_LOG=off ") + ADVOT_CLI_PATH + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

const Command kAll[] = {Command::SolveOt, Command::StaticEq, Command::DynamicSim,
                        Command::DistributedSim};

}  // namespace

TEST_CASE("binary: every subcommand succeeds on the reference scenario") {
  const std::string config = test::scenario_path("paper_2x3.json");
  for (Command c : kAll) {
    const auto dir = scratch(std::string(to_string(c)));
    CAPTURE(to_string(c));
    CHECK(run_cli(std::string(to_string(c)) + " --config " + config + " --out " + dir.string()) ==
          kExitConverged);
    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "messages.jsonl") == (c == Command::DistributedSim));
  }
}

TEST_CASE("binary: input errors exit with 1") {
  const auto dir = scratch("errors");
  CHECK(run_cli("solve-ot --config /nonexistent.json --out " + dir.string()) == kExitInputError);
  CHECK(run_cli("solve-ot --out " + dir.string()) == kExitInputError);
  CHECK(run_cli("teleport --config x --out y") == kExitInputError);

  const fs::path bad = dir / "bad.json";
  fs::create_directories(dir);
  std::ofstream(bad) << "{\"network\": {}}";
  CHECK(run_cli("solve-ot --config " + bad.string() + " --out " + (dir / "o").string()) ==
        kExitInputError);
  CHECK(run_cli("solve-ot --config " + test::scenario_path("paper_2x3.json") + " --out " +
                (dir / "o").string() + " --gamma -1") == kExitInputError);
}

TEST_CASE("binary: iteration budget exhaustion exits with 2") {
  const auto dir = scratch("budget");
  fs::create_directories(dir);
  auto config = load_scenario(test::scenario_path("paper_2x3.json"));
  config.solver.max_iter = 5;
  const fs::path path = dir / "short.json";
  std::ofstream(path) << echo_scenario(config);
  CHECK(run_cli("solve-ot --config " + path.string() + " --out " + (dir / "o").string()) ==
        kExitNotConverged);
}

TEST_CASE("solve-ot with lambda 0 puts each row on its heaviest edge") {
  const auto dir = scratch("lambda0");
  CommandRequest req{Command::SolveOt, test::scenario_path("paper_2x3.json"), dir.string(), {}};
  req.overrides.lambda = 0.0;
  const auto result = run_command(req);
  REQUIRE(result.exit_code == kExitConverged);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  std::vector<double> rates;
  for (const auto& e : report["plan"]) rates.push_back(e["rate"].get<double>());
  CHECK(rates == test::frozen::lp_plan);
  CHECK(slurp(dir / "trace.csv") == "iteration,p_s1,p_s2,residual,objective\n");
}

TEST_CASE("dynamic-sim with one stage and no threshold matches static-eq") {
  const auto sdir = scratch("static");
  const auto ddir = scratch("dynamic");
  const std::string path = test::scenario_path("paper_2x3.json");
  REQUIRE(run_command({Command::StaticEq, path, sdir.string(), {}}).exit_code == kExitConverged);
  CommandRequest dyn{Command::DynamicSim, path, ddir.string(), {}};
  dyn.overrides.stages = 1;
  dyn.overrides.tau = 0.0;
  REQUIRE(run_command(dyn).exit_code == kExitConverged);

  const auto s = nlohmann::json::parse(slurp(sdir / "report.json"));
  const auto d = nlohmann::json::parse(slurp(ddir / "report.json"));
  REQUIRE(d["stages"].size() == 1);
  const auto& stage = d["stages"][0];
  for (std::size_t e = 0; e < 6; ++e) {
    CHECK(std::abs(stage["plan"][e]["rate"].get<double>() - s["plan"][e]["rate"].get<double>()) <=
          1e-6);
  }
  for (const char* q : {"q1", "q2", "q3"}) {
    for (const char* k : {"xi1", "xi2"}) {
      CHECK(std::abs(stage["action"][q][k].get<double>() -
                     s["strategy"][q][k].get<double>()) <= 1e-6);
    }
  }
}

TEST_CASE("trace headers") {
  const std::string path = test::scenario_path("paper_2x3.json");
  const std::pair<Command, std::string> expected[] = {
      {Command::SolveOt, "iteration,p_s1,p_s2,residual,objective"},
      {Command::StaticEq,
       "round,x_s1->q1,x_s1->q2,x_s1->q3,x_s2->q1,x_s2->q2,x_s2->q3,xi1_q1,xi1_q2,xi1_q3,"
       "xi2_q1,xi2_q2,xi2_q3,dispatcher_utility,adversary_cost_type1,adversary_cost_type2"},
      {Command::DynamicSim,
       "stage,x_s1->q1,x_s1->q2,x_s1->q3,x_s2->q1,x_s2->q2,x_s2->q3,xi1_q1,xi1_q2,xi1_q3,"
       "xi2_q1,xi2_q2,xi2_q3,mu2_q1,mu2_q2,mu2_q3,dispatcher_utility,adversary_cost_type1,"
       "adversary_cost_type2"},
      {Command::DistributedSim,
       "tick,x_s1->q1,x_s1->q2,x_s1->q3,x_s2->q1,x_s2->q2,x_s2->q3,p_s1,p_s2,xi1_q1,xi1_q2,"
       "xi1_q3,xi2_q1,xi2_q2,xi2_q3,residual"},
  };
  for (const auto& [c, header] : expected) {
    const auto dir = scratch("header");
    REQUIRE(run_command({c, path, dir.string(), {}}).exit_code == kExitConverged);
    CHECK(first_line(slurp(dir / "trace.csv")) == header);
  }
}

TEST_CASE("dynamic trace has one row per stage") {
  const auto dir = scratch("stages");
  CommandRequest req{Command::DynamicSim, test::scenario_path("paper_2x3.json"), dir.string(), {}};
  req.overrides.stages = 1;
  REQUIRE(run_command(req).exit_code == kExitConverged);
  const std::string csv = slurp(dir / "trace.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("json traces mirror csv") {
  const auto csv_dir = scratch("csv");
  const auto json_dir = scratch("json");
  const std::string path = test::scenario_path("paper_2x3.json");
  REQUIRE(run_command({Command::SolveOt, path, csv_dir.string(), {}}).exit_code == 0);
  REQUIRE(run_command({Command::SolveOt, path, json_dir.string(), {}, TraceFormat::JsonLines})
              .exit_code == 0);
  const std::string csv = slurp(csv_dir / "trace.csv");
  const std::string jsonl = slurp(json_dir / "trace.jsonl");
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == rows);
  const auto first = nlohmann::json::parse(first_line(jsonl));
  CHECK(first["iteration"] == 1);
  CHECK(first.contains("p_s2"));
}

TEST_CASE("identical runs write byte-identical files") {
  const std::string path = test::scenario_path("paper_2x3.json");
  for (Command c : kAll) {
    const auto a = scratch("repeat_a");
    const auto b = scratch("repeat_b");
    CAPTURE(to_string(c));
    const auto ra = run_command({c, path, a.string(), {}});
    const auto rb = run_command({c, path, b.string(), {}});
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
      CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
    }
  }
}

TEST_CASE("config echo reloads to the effective config") {
  const auto dir = scratch("echo");
  CommandRequest req{Command::SolveOt, test::scenario_path("paper_2x3.json"), dir.string(), {}};
  req.overrides.gamma = 0.02;
  REQUIRE(run_command(req).exit_code == kExitConverged);
  const auto echoed = load_scenario((dir / "config.json").string());
  CHECK(echoed.solver.gamma == 0.02);
  auto original = load_scenario(test::scenario_path("paper_2x3.json"));
  original.solver.gamma = 0.02;
  CHECK(echoed == original);
}

TEST_CASE("every error code maps to exactly one exit code") {
  for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    const int exit = exit_code_for(code);
    CHECK((exit == kExitInputError || exit == kExitNotConverged));
    const bool convergence =
        code == ErrorCode::NotConverged || code == ErrorCode::StageNotConverged;
    CHECK((exit == kExitNotConverged) == convergence);
  }
}

TEST_CASE("command names round-trip") {
  for (Command c : kAll) CHECK(parse_command(to_string(c)) == c);
  CHECK_FALSE(parse_command("nope").has_value());
}
