#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "inducer_cli_test";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(work);
  const fs::path p = work / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

int run(const std::string& args, const std::string& out) {
  fs::remove_all(work / out);
  const std::string cmd = std::string(INDUCER_CLI) + " " + args + " --out " + (work / out).string() + " > " +
                          (work / (out + ".stdout")).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string stdout_of(const std::string& out) { return slurp(work / (out + ".stdout")); }

const std::string failing_doubling =
    "map = builtin:doubling\ndelta = e^-1\nlambda = 1\nkappa = 1\nc_star = 0.3333333333333333\n";

}  // namespace

TEST_CASE("check on chebyshev passes and echoes the config") {
  const std::string text = "# chebyshev\nmap = builtin:chebyshev\ndelta = e^-5\nLambda = 1.3862943611198906\n";
  const fs::path cfg = write_config("cheb.cfg", text);
  CHECK(run("check --config " + cfg.string(), "cheb") == 0);
  CHECK(slurp(work / "cheb" / "config.txt") == text);
  const std::string effective = slurp(work / "cheb" / "config.effective");
  const std::string hash_line = effective.substr(0, effective.find('\n'));
  CHECK(hash_line.rfind("# config_hash=", 0) == 0);
  for (const char* csv : {"hypotheses.csv", "binding.csv"}) {
    const std::string body = slurp(work / "cheb" / csv);
    CHECK(body.substr(0, body.find('\n')) == hash_line);
  }
  CHECK(stdout_of("cheb").find("verdict: pass") != std::string::npos);
  CHECK(fs::exists(work / "cheb" / "report_check.txt"));
}

TEST_CASE("failing hypothesis exits 2") {
  const fs::path cfg = write_config("bad.cfg", failing_doubling);
  CHECK(run("check --config " + cfg.string(), "bad") == 2);
  CHECK(run("tower --config " + cfg.string(), "bad_tower") == 2);
  CHECK_FALSE(fs::exists(work / "bad_tower" / "tower.csv"));
}

TEST_CASE("--force continues with a warning and keeps exit 2") {
  const fs::path cfg = write_config("force.cfg", failing_doubling + "tower_n_max = 60\nmass_floor = 1e-3\n"
                                                                    "tower_samples = 100\ndistortion_elements = 20\n");
  CHECK(run("tower --force --config " + cfg.string(), "force") == 2);
  CHECK(stdout_of("force").find("WARNING") != std::string::npos);
  CHECK(fs::exists(work / "force" / "tower.csv"));
}

TEST_CASE("zero max intervals exits 3") {
  const fs::path cfg = write_config("zero.cfg", "max_intervals = 0\n");
  CHECK(run("tower --config " + cfg.string(), "zero") == 3);
}

TEST_CASE("configuration errors exit 4") {
  CHECK(run("check --config " + write_config("unknown.cfg", "no_such_key = 1\n").string(), "e1") == 4);
  CHECK(run("check --config " + write_config("badval.cfg", "delta = -1\n").string(), "e2") == 4);
  CHECK(run("check --config " + write_config("dup.cfg", "alpha = 0.1\nalpha = 0.2\n").string(), "e3") == 4);
  CHECK(run("check --config " + write_config("map.cfg", "map = builtin:nothing\n").string(), "e4") == 4);
  CHECK(run("check --threads 0", "e5") == 4);
  CHECK(run("stats nonsense", "e6") == 4);
  CHECK(run("check --config " + (work / "missing.cfg").string(), "e7") == 4);
}

TEST_CASE("stats without a tower falls back with a notice") {
  const fs::path cfg = write_config("acip.cfg", "acip_iterates = 10000\nacip_bins = 1\nacip_burn_in = 10\n");
  CHECK(run("stats acip --config " + cfg.string(), "acip") == 0);
  CHECK(stdout_of("acip").find("notice: no tower outputs") != std::string::npos);
  const std::string csv = slurp(work / "acip" / "acip.csv");
  CHECK(csv.find("estimator,bin,left,right,mass,density\norbit-histogram,0,") != std::string::npos);
}

TEST_CASE("seed override changes the hash and reruns are identical") {
  const fs::path cfg = write_config("lyap.cfg", "lyapunov_iterates = 20000\n");
  CHECK(run("stats lyapunov --config " + cfg.string(), "l1") == 0);
  CHECK(run("stats lyapunov --threads 3 --config " + cfg.string(), "l2") == 0);
  CHECK(run("stats lyapunov --seed 7 --config " + cfg.string(), "l3") == 0);
  CHECK(slurp(work / "l1" / "lyapunov.csv") == slurp(work / "l2" / "lyapunov.csv"));
  CHECK(slurp(work / "l1" / "config.effective") != slurp(work / "l3" / "config.effective"));
}
