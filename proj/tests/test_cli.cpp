#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "run_config.hpp"
#include "switchrep/schedule.hpp"

using namespace switchrep;
using namespace switchrep::cli;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return SWITCHREP_CLI_PATH; }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "switchrep_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file,
            const fs::path& stderr_file) {
  const std::string command = std::string("\"") + cli_path() + "\" " + args + " > " +
                              stdout_file.string() + " 2> " + stderr_file.string();
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config resolution builds domain objects") {
  RunConfig cfg;
  cfg.rules = "pc,im";
  cfg.instants = "2";
  cfg.period = 5.0;
  const ResolvedRun run = resolve(cfg);
  CHECK(run.schedule.size() == 2);
  CHECK(run.schedule.rules[0].kind == RuleKind::PairwiseComparison);
  CHECK(run.schedule.rules[1].kind == RuleKind::Imitation);
  CHECK(run.schedule.rules[0].alpha == doctest::Approx(-1.0 / 375.0));
  CHECK(run.x0_list.size() == 1);

  cfg.rules = "0.01,-0.02,pc";
  cfg.instants = "1,2.5";
  const ResolvedRun custom = resolve(cfg);
  CHECK(custom.schedule.size() == 3);
  CHECK(custom.schedule.rules[0].kind == RuleKind::Custom);
  CHECK(custom.schedule.rules[1].alpha == doctest::Approx(-0.02));
}

TEST_CASE("config resolution reports field-precise errors") {
  RunConfig cfg;
  cfg.rules = "pc,xx";
  CHECK_THROWS_WITH_AS(resolve(cfg), doctest::Contains("rules:"), ConfigError);
  cfg = RunConfig{};
  cfg.instants = "3,2";
  cfg.rules = "pc,im,pc";
  CHECK_THROWS_WITH_AS(resolve(cfg), doctest::Contains("schedule:"), ConfigError);
  cfg = RunConfig{};
  cfg.engine = "magic";
  CHECK_THROWS_WITH_AS(resolve(cfg), doctest::Contains("engine:"), ConfigError);
  cfg = RunConfig{};
  cfg.omega = 2.0;
  CHECK_THROWS_WITH_AS(resolve(cfg), doctest::Contains("game parameters:"), ConfigError);
  cfg = RunConfig{};
  cfg.x0 = "0.5,1.5";
  CHECK_THROWS_WITH_AS(resolve(cfg), doctest::Contains("x0:"), ConfigError);
}

TEST_CASE("config files override flags and report line-precise errors") {
  const fs::path dir = scratch_dir();
  const fs::path good = dir / "good.cfg";
  {
    std::ofstream out(good);
    out << "# comment line\n";
    out << "omega = 0.02\n";
    out << "\n";
    out << "rules = im,pc\n";
  }
  RunConfig cfg;
  cfg.apply_file(good.string(), {});
  CHECK(cfg.omega == doctest::Approx(0.02));
  CHECK(cfg.rules == "im,pc");

  const fs::path bad_key = dir / "bad_key.cfg";
  {
    std::ofstream out(bad_key);
    out << "omega = 0.02\n";
    out << "omeega = 0.02\n";
  }
  RunConfig fresh;
  CHECK_THROWS_WITH_AS(fresh.apply_file(bad_key.string(), {}),
                       doctest::Contains(":2: unknown key"), ConfigError);

  const fs::path bad_value = dir / "bad_value.cfg";
  {
    std::ofstream out(bad_value);
    out << "omega = fast\n";
  }
  CHECK_THROWS_WITH_AS(fresh.apply_file(bad_value.string(), {}),
                       doctest::Contains(":1:"), ConfigError);
}

TEST_CASE("cli coeff prints the documented values") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "coeff.json";
  const fs::path err = dir / "coeff.err";
  const int code = run_cli("coeff --omega 0.01 --degree 4 --benefit 2 --cost 0.2 "
                           "--format json --out " + out.string(),
                           dir / "stdout.txt", err);
  REQUIRE(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["alpha_pc"].get<double>() == doctest::Approx(-1.0 / 375.0).epsilon(1e-14));
  CHECK(j["alpha_im"].get<double>() == doctest::Approx(32.0 / 9375.0).epsilon(1e-14));
  CHECK_FALSE(j["sign_boundary"].get<bool>());
}

TEST_CASE("cli thresholds reproduces p1/p2 and the verdicts") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "thresholds.json";
  const int code =
      run_cli("thresholds --rules pc,im --instants 2 --period 5 --format json --out " +
                  out.string(),
              dir / "stdout.txt", dir / "stderr.txt");
  REQUIRE(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["p1_pc_then_im"].get<double>() ==
        doctest::Approx(160.0 / 57.0).epsilon(1e-12));
  CHECK(j["p2_im_then_pc"].get<double>() ==
        doctest::Approx(125.0 / 57.0).epsilon(1e-12));
  CHECK(j["stable_point"].get<std::string>() == "FullCooperation");

  const fs::path out3 = dir / "thresholds3.json";
  const int code3 =
      run_cli("thresholds --rules pc,im --instants 3 --period 5 --format json --out " +
                  out3.string(),
              dir / "stdout.txt", dir / "stderr.txt");
  REQUIRE(code3 == 0);
  const auto j3 = nlohmann::json::parse(slurp(out3));
  CHECK(j3["stable_point"].get<std::string>() == "FullDefection");

  // degenerate coefficients yield exit code 3 and a degenerate flag
  const fs::path outd = dir / "thresholds_degenerate.json";
  const int coded =
      run_cli("thresholds --rules 0.01,0.01 --instants 2 --period 5 --format json --out " +
                  outd.string(),
              dir / "stdout.txt", dir / "stderr.txt");
  CHECK(coded == 3);
  const auto jd = nlohmann::json::parse(slurp(outd));
  CHECK(jd["degenerate"].get<bool>());
}

TEST_CASE("cli trajectory with x0 = 1 emits a constant unit column") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "flat.csv";
  const int code = run_cli(
      "trajectory --rules pc,im --instants 2 --period 5 --x0 1 --t-end 20 --dt 1 --out " +
          out.string(),
      dir / "stdout.txt", dir / "stderr.txt");
  REQUIRE(code == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# switchrep trajectory", 0) == 0);  // config echo comment
  std::getline(in, line);
  CHECK(line == "t,x_1");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    CHECK(line.substr(comma + 1) == "1");
    ++rows;
  }
  CHECK(rows == 21);
}

TEST_CASE("cli agent runs are byte-identical for a fixed seed") {
  const fs::path dir = scratch_dir();
  const fs::path a = dir / "agent_a.csv";
  const fs::path b = dir / "agent_b.csv";
  const std::string args =
      "simulate --rules pc,im --instants 2 --period 5 --x0 0.5 --pop-size 200 "
      "--t-end 10 --dt 1 --seed 7 --runs 4 --out ";
  REQUIRE(run_cli(args + a.string(), dir / "stdout.txt", dir / "stderr.txt") == 0);
  REQUIRE(run_cli(args + b.string(), dir / "stdout.txt", dir / "stderr.txt") == 0);
  const std::string bytes_a = slurp(a);
  const std::string bytes_b = slurp(b);
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());
}

TEST_CASE("cli honors config files over conflicting flags with a warning") {
  const fs::path dir = scratch_dir();
  const fs::path cfg = dir / "override.cfg";
  {
    std::ofstream out(cfg);
    out << "omega = 0.02\n";
  }
  const fs::path out = dir / "override.json";
  const fs::path err = dir / "override.err";
  const int code = run_cli("coeff --omega 0.01 --config " + cfg.string() +
                               " --format json --out " + out.string(),
                           dir / "stdout.txt", err);
  REQUIRE(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  // file value 0.02 wins over the flag's 0.01
  CHECK(j["alpha_pc"].get<double>() == doctest::Approx(-2.0 / 375.0).epsilon(1e-12));
  CHECK(slurp(err).find("overrides --omega") != std::string::npos);
}

TEST_CASE("cli trajectory json output carries config echo and rows") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "traj.json";
  const int code = run_cli(
      "trajectory --rules pc,im --instants 2 --period 5 --x0 0.5 --t-end 5 --dt 1 "
      "--format json --out " + out.string(),
      dir / "o.txt", dir / "e.txt");
  REQUIRE(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["config"].get<std::string>().find("switchrep trajectory") == 0);
  CHECK(j["columns"].size() == 2);
  CHECK(j["rows"].size() == 6);
  CHECK(j["rows"][0][1].get<double>() == 0.5);
}

TEST_CASE("cli exit codes: config errors are 2") {
  const fs::path dir = scratch_dir();
  CHECK(run_cli("trajectory --engine nonsense", dir / "o.txt", dir / "e.txt") == 2);
  CHECK(run_cli("trajectory --rules pc,bogus", dir / "o.txt", dir / "e.txt") == 2);
  CHECK(run_cli("coeff --degree 2", dir / "o.txt", dir / "e.txt") == 2);
  const fs::path cfg = scratch_dir() / "broken.cfg";
  {
    std::ofstream out(cfg);
    out << "nonsense = 1\n";
  }
  CHECK(run_cli("coeff --config " + cfg.string(), dir / "o.txt", dir / "e.txt") == 2);
}

TEST_CASE("cli coeff warns on the imitation sign boundary") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "boundary.txt";
  const int code = run_cli("coeff --benefit 1.2 --cost 0.2 --degree 4 --out " + out.string(),
                           dir / "stdout.txt", dir / "stderr.txt");
  REQUIRE(code == 0);
  CHECK(slurp(out).find("sign boundary") != std::string::npos);
}

TEST_CASE("ensemble worker cap comes from SWITCHREP_THREADS") {
  const fs::path dir = scratch_dir();
  const fs::path a = dir / "threads_a.csv";
  const fs::path b = dir / "threads_b.csv";
  const std::string args =
      "simulate --rules pc,im --instants 2 --period 5 --x0 0.5 --pop-size 100 "
      "--t-end 5 --dt 1 --seed 5 --runs 6 --out ";
  const std::string bin = std::string("\"") + cli_path() + "\" ";
  REQUIRE(std::system(("SWITCHREP_THREADS=1 " + bin + args + a.string() +
                       " > /dev/null 2>&1").c_str()) == 0);
  REQUIRE(std::system(("SWITCHREP_THREADS=4 " + bin + args + b.string() +
                       " > /dev/null 2>&1").c_str()) == 0);
  CHECK(slurp(a) == slurp(b));  // aggregation is order-independent
  // invalid values are config errors
  const int bad = WEXITSTATUS(std::system(
      ("SWITCHREP_THREADS=zero " + bin + args + a.string() + " > /dev/null 2>&1").c_str()));
  CHECK(bad == 2);
}

TEST_CASE("cli validate passes on the cooperation-side switching example") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "validate.json";
  const int code = run_cli(
      "validate --rules pc,im --instants 2 --period 5 --x0 0.5 --pop-size 500 "
      "--t-end 30 --step 0.001 --runs 6 --seed 3 --out " + out.string(),
      dir / "stdout.txt", dir / "stderr.txt");
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["closed_vs_reduced"]["pass"].get<bool>());
  CHECK(j["pair_vs_closed"]["pass"].get<bool>());
  CHECK(j["agent_drift"]["pass"].get<bool>());
  CHECK(j["pass"].get<bool>());
  CHECK(code == 0);

  // neutral handcrafted schedule is flagged
  const fs::path outn = dir / "validate_neutral.json";
  const int coden = run_cli(
      "validate --rules 0.01,-0.01 --instants 2.5 --period 5 --x0 0.5 --t-end 10 "
      "--out " + outn.string(),
      dir / "stdout.txt", dir / "stderr.txt");
  CHECK(coden == 0);
  const auto jn = nlohmann::json::parse(slurp(outn));
  CHECK(jn["classification"]["stable_point"].get<std::string>() == "Neutral");
  CHECK(jn["classification"]["note"].get<std::string>().find("Neutral") == 0);

  // equal coefficients: the thresholds section reports degenerate
  const fs::path outd = dir / "validate_degenerate.json";
  run_cli("validate --rules 0.01,0.01 --instants 2.5 --period 5 --x0 0.5 --t-end 10 "
          "--out " + outd.string(),
          dir / "stdout.txt", dir / "stderr.txt");
  const auto jd = nlohmann::json::parse(slurp(outd));
  CHECK(jd["thresholds"]["degenerate"].get<bool>());
}

TEST_CASE("cli reduced-ode trajectories agree with the closed form") {
  const fs::path dir = scratch_dir();
  const fs::path closed = dir / "closed.csv";
  const fs::path reduced = dir / "reduced.csv";
  const std::string common =
      " --rules pc,im --instants 2 --period 5 --x0 0.2,0.8 --t-end 25 --dt 0.5 --out ";
  REQUIRE(run_cli("trajectory --engine closed-form" + common + closed.string(),
                  dir / "o.txt", dir / "e.txt") == 0);
  REQUIRE(run_cli("trajectory --engine reduced-ode" + common + reduced.string(),
                  dir / "o.txt", dir / "e.txt") == 0);
  std::ifstream a(closed), b(reduced);
  std::string la, lb;
  std::getline(a, la);  // distinct config echoes
  std::getline(b, lb);
  std::getline(a, la);
  std::getline(b, lb);
  CHECK(la == lb);  // same header
  int rows = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    std::stringstream sa(la), sb(lb);
    std::string ca, cb;
    while (std::getline(sa, ca, ',') && std::getline(sb, cb, ',')) {
      const double va = std::strtod(ca.c_str(), nullptr);
      const double vb = std::strtod(cb.c_str(), nullptr);
      CHECK(std::abs(va - vb) < 1e-9);
    }
    ++rows;
  }
  CHECK(rows == 51);
}

TEST_CASE("cli agent trajectory emits mean and std columns") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "agent_traj.csv";
  const int code = run_cli(
      "trajectory --engine agent --rules pc,im --instants 2 --period 5 --x0 0.5 "
      "--pop-size 100 --t-end 5 --dt 1 --seed 2 --runs 3 --out " + out.string(),
      dir / "o.txt", dir / "e.txt");
  REQUIRE(code == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "t,x_mean,x_std");
}

TEST_CASE("cli pair-ode trajectory emits t,x,x_cc columns") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "pair.csv";
  const int code = run_cli(
      "trajectory --engine pair-ode --rules pc,im --instants 2 --period 5 --x0 0.5 "
      "--t-end 5 --dt 1 --out " + out.string(),
      dir / "stdout.txt", dir / "stderr.txt");
  REQUIRE(code == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);  // config echo
  std::getline(in, line);
  CHECK(line == "t,x,x_cc");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  // multiple x0 values are rejected for this engine
  CHECK(run_cli("trajectory --engine pair-ode --x0 0.1,0.5", dir / "o.txt", dir / "e.txt") ==
        2);
}
