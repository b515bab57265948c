#pragma once

#include "disslab/config.hpp"
#include "disslab/construction_one.hpp"
#include "disslab/construction_two.hpp"
#include "disslab/report.hpp"

#include <string>
#include <vector>

namespace disslab {

Construction1Options c1_options(const Config &cfg, bool variant = false);
Construction2Options c2_options(const Config &cfg, double beta);
MixingProfile mixing_profile(const Config &cfg);

CheckRow from_verdict(const VerdictRow &v);
// one row over sub-checks: measured counts the failing ones
CheckRow aggregate(int id, std::string name, std::vector<CheckRow> sub, std::string detail = "");

// every command writes its artifacts below out and returns the report (not yet written)
RunReport cmd_lp_analyze(const Config &cfg, const std::string &out, const std::string &snapshot);
RunReport cmd_mix(const Config &cfg, const std::string &out);
RunReport cmd_construction1(const Config &cfg, const std::string &out);
RunReport cmd_construction2(const Config &cfg, const std::string &out);

struct SweepSpec {
  std::string axis;    // m, n or grid
  std::vector<double> values;
  std::string command; // mix, construction1, construction2, lp-analyze
  std::string snapshot; // for lp-analyze
};
// values are deduplicated (with a warning); per-value failures become failing rows
RunReport cmd_sweep(const Config &cfg, const std::string &out, const SweepSpec &spec);
// the config a single sweep value runs with
Config sweep_config(const Config &cfg, const std::string &axis, double value, const std::string &command);

// the full acceptance suite, one row per criterion; verify runs it twice for determinism
RunReport run_suite(const Config &cfg, const std::string &out);
RunReport cmd_verify(const Config &cfg, const std::string &out);

} // namespace disslab
