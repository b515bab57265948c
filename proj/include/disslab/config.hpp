#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

namespace disslab {

struct LpSection {
  int base = 5;
  int grid = 128;
  int trials = 100;
  int corpus = 50;
  double s = 1.0 / 3.0;
  double p = 3.0;
  std::string snapshot;
};

struct MixingSection {
  int base = 2;
  int grid = 512;
  int first_stage = 0;
  int last_stage = 4;
  double tail_tol = 1e-6;
  double linf_cap = 10.0;
};

struct Construction1Section {
  int base = 5;
  std::vector<int> m_list{4, 6, 8};
  std::string weights = "inverse_square";
  int grid_max = 1024;
  int resolution_factor = 8;
  double tail_tol = 1e-6;
  double cfl = 0.5;
  // feasible family for the shell diagnostics
  std::string variant_weights = "shifted_power:0.95,25,1.2";
  int variant_base = 2;
  std::vector<int> variant_m_list{4};
  int variant_grid_max = 256;
  bool snapshots = false; // theta at 0, the nodes t_n^m and 1, under out/snapshots
};

struct Construction2Section {
  double beta = 0.0;
  double eps = 4.0;
  int N = 4;
  int n_max = 10;
  std::vector<double> h_values{1.0 / 64, 1.0 / 128};
  std::vector<double> r_list{1.5, 1.9};
  std::vector<int> m_list{2, 4, 6};
  double trend_beta = 0.5;
  int test_fields = 10;
  int template_iterations = 1500;
};

struct Config {
  std::string out = "out";
  int workers = 1;
  std::uint64_t seed = 1;
  LpSection lp;
  MixingSection mixing;
  Construction1Section construction1;
  Construction2Section construction2;

  YAML::Node tree() const;     // fully resolved
  std::string dump() const;    // canonical text of tree()
  std::string hash() const;    // hex digest of dump()
};

// "default" (or empty) names the shipped defaults; bare override keys are looked up
// in `section` first, then among the globals
Config load_config(const std::string &path, const std::vector<std::string> &overrides = {},
                   const std::string &section = "");
Config config_from_yaml(const YAML::Node &root);
// key=value with key either section.key or bare; value parsed as YAML
void apply_override(YAML::Node &root, const std::string &assignment, const std::string &section = "");

} // namespace disslab
