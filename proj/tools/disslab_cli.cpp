#include "disslab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace disslab;

namespace {

std::string section_of(const std::string &command) {
  if (command == "mix")
    return "mixing";
  if (command == "lp-analyze")
    return "lp";
  if (command == "construction1" || command == "construction2")
    return command;
  return "";
}

// --out as typed, for errors raised before parsing completes
std::string raw_out(int argc, char **argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--out" && i + 1 < argc)
      return argv[i + 1];
    if (a.rfind("--out=", 0) == 0)
      return a.substr(6);
  }
  const char *env = std::getenv("DISSLAB_OUT");
  return env ? env : "";
}

void emit_error(const nlohmann::json &rec, const std::string &out) {
  std::cerr << rec.dump() << "\n";
  if (out.empty())
    return;
  try {
    ensure_dir(out);
    std::ofstream(out + "/error.json") << rec.dump(2) << "\n";
  } catch (const Error &) {
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"anomalous dissipation laboratory"};
  app.require_subcommand(1);
  std::string config = "default", out_flag, snapshot, axis, sweep_command;
  std::vector<std::string> sets;
  int workers = 0;
  long long seed = -1;
  std::vector<std::string> values;
  app.add_option("--config", config, "configuration file (\"default\" for the shipped one)");
  app.add_option("--set", sets, "override key=value (repeatable)")->allow_extra_args(false);
  app.add_option("--out", out_flag, "output directory (falls back to DISSLAB_OUT, then the config)");
  app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized corpora")->check(CLI::NonNegativeNumber);

  auto *lp = app.add_subcommand("lp-analyze", "shell spectrum and Besov norms of a snapshot");
  lp->add_option("snapshot,--snapshot", snapshot, "snapshot file");
  app.add_subcommand("mix", "run the mixer stages");
  app.add_subcommand("construction1", "run the construction-1 family");
  app.add_subcommand("construction2", "run the construction-2 family");
  auto *sw = app.add_subcommand("sweep", "fan a command out over parameter values");
  sw->add_option("--axis", axis, "m, n or grid")->required();
  sw->add_option("--values", values, "comma separated values")->delimiter(',')->expected(0, -1);
  sw->add_option("--command", sweep_command, "command to run per value")
      ->required()
      ->check(CLI::IsMember({"mix", "construction1", "construction2", "lp-analyze"}));
  sw->add_option("--snapshot", snapshot, "snapshot for lp-analyze sweeps");
  app.add_subcommand("verify", "run the acceptance suite");

  // global flags are accepted after the subcommand too
  for (auto *sub : app.get_subcommands({}))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    if (rc == 0)
      return 0;
    emit_error({{"error", {{"kind", "config"}, {"code", "bad_arguments"}, {"message", e.what()}, {"exit_code", 2}}}},
               raw_out(argc, argv));
    return 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  std::string out = out_flag;
  if (out.empty()) {
    const char *env = std::getenv("DISSLAB_OUT");
    out = env ? env : "";
  }
  try {
    if (seed >= 0)
      sets.push_back("seed=" + std::to_string(seed));
    if (workers > 0)
      sets.push_back("workers=" + std::to_string(workers));
    Config cfg = load_config(config, sets, section_of(cmd == "sweep" ? sweep_command : cmd));
    if (out.empty())
      out = cfg.out;
    RunReport rep;
    if (cmd == "lp-analyze")
      rep = cmd_lp_analyze(cfg, out, snapshot);
    else if (cmd == "mix")
      rep = cmd_mix(cfg, out);
    else if (cmd == "construction1")
      rep = cmd_construction1(cfg, out);
    else if (cmd == "construction2")
      rep = cmd_construction2(cfg, out);
    else if (cmd == "sweep")
    {
      // an empty --values= gives no tokens and an empty sweep
      std::vector<double> vs;
      for (const auto &v : values) {
        if (v.empty())
          continue;
        std::size_t used = 0;
        double x = 0;
        try {
          x = std::stod(v, &used);
        } catch (const std::exception &) {
        }
        if (used != v.size())
          fail_config("bad_sweep", "sweep value '" + v + "' is not a number");
        vs.push_back(x);
      }
      rep = cmd_sweep(cfg, out, {axis, vs, sweep_command, snapshot});
    }
    else
      rep = cmd_verify(cfg, out);
    rep.write(out);
    std::cout << rep.text();
    for (const auto &w : rep.warnings)
      std::cerr << "warning: " << w << "\n";
    return rep.all_pass() ? 0 : 1;
  } catch (const Error &e) {
    emit_error(error_record(e), out);
    return e.exit_code();
  } catch (const std::exception &e) {
    emit_error(error_record(e), out);
    return 3;
  }
}
