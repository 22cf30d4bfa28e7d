#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "inducer/run.hpp"

using namespace inducer;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out = "out";
  bool force = false;
  std::string which = "all";
};

// Lines go to stdout and to report_<command>.txt in the output directory.
class Report {
 public:
  void open(const std::string& path) { file_.open(path, std::ios::binary); }
  std::ostream& stream() { return buf_; }
  void flush() {
    const std::string s = buf_.str();
    std::cout << s.substr(done_) << std::flush;
    if (file_) file_ << s.substr(done_) << std::flush;
    done_ = s.size();
  }

 private:
  std::ostringstream buf_;
  std::ofstream file_;
  std::size_t done_ = 0;
};

RunContext make_context(const Options& opt, Report& report) {
  RunContext ctx;
  ctx.config = opt.config.empty() ? RunConfig() : RunConfig::load(opt.config);
  if (opt.seed) ctx.config.set("seed", std::to_string(*opt.seed));
  ctx.out = opt.out;
  ctx.threads = opt.threads;
  ctx.force = opt.force;
  ctx.report = &report.stream();
  return ctx;
}

int run(const std::string& command, const Options& opt) {
  Report report;
  RunContext ctx = make_context(opt, report);
  echo_config(ctx);
  report.open((std::filesystem::path(ctx.out) / ("report_" + command + ".txt")).string());
  report.stream() << "config_hash=" << ctx.config.hash() << " seed=" << ctx.config.get("seed") << "\n";
  const auto start = std::chrono::steady_clock::now();
  Setup setup(ctx.config);
  int code = exit_ok;

  if (command == "check" || command == "tower" || command == "all") {
    CheckOutcome check = run_check(ctx, setup);
    report.flush();
    if (!check.pass) {
      if (command == "check") return exit_hypothesis;
      if (!ctx.force) {
        report.stream() << "hypothesis check failed; rerun with --force to continue\n";
        report.flush();
        return exit_hypothesis;
      }
      report.stream() << "WARNING: hypothesis check failed, continuing because of --force\n";
      code = exit_hypothesis;
    }
  }
  if (command == "check") return code;

  std::optional<TowerOutcome> tower;
  if (command == "tower" || command == "all") {
    tower = run_tower(ctx, setup);
    report.flush();
    if (tower->limit_hit) return exit_resource;
  } else if (command == "stats") {
    const std::string which = opt.which;
    const bool wants_tower = which == "acip" || which == "symbolic" || which == "all" || which == "corr";
    if (wants_tower && tower_outputs_present(ctx.out, ctx.config.hash())) {
      report.stream() << "rebuilding the tower recorded in " << ctx.out << "\n";
      RunContext quiet = ctx;
      std::ostringstream sink;
      quiet.report = &sink;
      tower = run_tower(quiet, setup);
    }
  }
  if (command == "stats" || command == "all") {
    run_stats(ctx, setup, command == "all" ? "all" : opt.which, tower ? &*tower : nullptr);
    report.flush();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << command << " finished in " << secs << " s\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induced Markov map laboratory"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "run configuration (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "overrides the seed of the configuration");
    sub->add_option("--threads", opt.threads, "worker threads; results do not depend on it")
        ->check(CLI::Range(1, 1024));
    sub->add_option("--out", opt.out, "output directory");
    sub->add_flag("--force", opt.force, "continue after a failed hypothesis check");
  };
  CLI::App* check = app.add_subcommand("check", "hypothesis checks (hypotheses.csv, binding.csv)");
  CLI::App* tower = app.add_subcommand("tower", "escape tail, tower, return tail and distortion");
  CLI::App* stats = app.add_subcommand("stats", "statistics of the invariant measure");
  CLI::App* all = app.add_subcommand("all", "check, tower and every statistic");
  for (CLI::App* s : {check, tower, stats, all}) common(s);
  stats->add_option("which", opt.which, "acip | lyapunov | corr | clt | symbolic | all")
      ->check(CLI::IsMember({"acip", "lyapunov", "corr", "clt", "symbolic", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return exit_resource;
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
