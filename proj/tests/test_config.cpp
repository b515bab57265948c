#include "disslab/config.hpp"
#include "disslab/errors.hpp"
#include "disslab/experiments.hpp"
#include "disslab/storage.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace disslab;

namespace {

std::string scratch(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("disslab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

int config_error(const std::vector<std::string> &ov, const std::string &section = "") {
  try {
    load_config("default", ov, section);
  } catch (const Error &e) {
    return e.exit_code();
  }
  return 0;
}

} // namespace

TEST_CASE("defaults load and validate") {
  Config c = load_config("default");
  CHECK(c.lp.base == 5);
  CHECK(c.construction1.m_list == std::vector<int>{4, 6, 8});
  CHECK(c.construction2.n_max == 10);
  CHECK(c.workers == 1);
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK(config_error({"lp.nope=1"}) == 2);
  CHECK(config_error({"nope=1"}) == 2);
  CHECK(config_error({"lp.grid=abc"}) == 2);
  CHECK(config_error({"workers=0"}) == 2);
  CHECK(config_error({"lp.base=3"}) == 2);
}

TEST_CASE("bare keys resolve inside the section first") {
  Config c = load_config("default", {"m_list=[2,3]"}, "construction1");
  CHECK(c.construction1.m_list == std::vector<int>{2, 3});
  CHECK(c.construction2.m_list == std::vector<int>{2, 4, 6});
  Config d = load_config("default", {"seed=7"}, "construction1");
  CHECK(d.seed == 7);
}

TEST_CASE("config hash is stable and tracks overrides") {
  Config a = load_config("default"), b = load_config("default");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  Config c = load_config("default", {"mixing.grid=256"});
  CHECK(c.hash() != a.hash());
  // a dumped config reloads to the same hash
  std::string dir = scratch("cfg");
  std::ofstream(dir + "/c.yaml") << c.dump();
  CHECK(load_config(dir + "/c.yaml").hash() == c.hash());
}

TEST_CASE("lp-analyze puts a |k|=7 mode in shell 1") {
  std::string dir = scratch("lp");
  Grid g(2, 128);
  SpectralField u = from_function(g, 1, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::cos(7 * X[0])};
  });
  write_snapshot(dir + "/u.bin", u, {});
  Config cfg = load_config("default");
  RunReport rep = cmd_lp_analyze(cfg, dir + "/out", dir + "/u.bin");
  CHECK(rep.all_pass());
  std::ifstream in(dir + "/out/shell_spectrum.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "q,lambda,value");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string q, lam, val;
    std::getline(ls, q, ',');
    std::getline(ls, lam, ',');
    std::getline(ls, val, ',');
    const double v = std::stod(val);
    if (q == "1")
      CHECK(v > 0.1);
    else
      CHECK(std::abs(v) <= 1e-12);
    ++rows;
  }
  CHECK(rows >= 3);
}

TEST_CASE("lp-analyze without a snapshot is a config error") {
  Config cfg = load_config("default");
  CHECK_THROWS_AS(cmd_lp_analyze(cfg, scratch("lp2"), ""), Error);
}

TEST_CASE("sweeps deduplicate values and accept an empty list") {
  Config cfg = load_config("default", {"mixing.first_stage=0", "mixing.last_stage=0"});
  SweepSpec s{"grid", {32, 32}, "mix", ""};
  RunReport r = cmd_sweep(cfg, scratch("sweep"), s);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("duplicate") != std::string::npos);

  SweepSpec e{"grid", {}, "mix", ""};
  RunReport re = cmd_sweep(cfg, scratch("sweep_empty"), e);
  CHECK(re.rows.empty());
  CHECK(re.all_pass());

  SweepSpec bad{"grid", {2.5}, "mix", ""};
  CHECK_THROWS_AS(cmd_sweep(cfg, scratch("sweep_bad"), bad), Error);
}

TEST_CASE("construction1 rejects an invalid schedule before running") {
  Config cfg = load_config("default", {"construction1.m_list=[2]"});
  try {
    cmd_construction1(cfg, scratch("c1"));
    FAIL("expected a config error");
  } catch (const Error &e) {
    CHECK(e.exit_code() == 2);
  }
}
