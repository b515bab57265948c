// Acceptance driver.
//   acceptance --out DIR            run the suite (twice, for determinism), print one line per criterion
//   acceptance --out DIR --check N  re-read DIR/report.json and report criterion N (or "all")
// --keep-going exits 0 after a completed run even when criteria fail.
#include "disslab/config.hpp"
#include "disslab/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace disslab;

namespace {

void line(const nlohmann::json &r) {
  auto num = [](const nlohmann::json &v) { return v.is_null() ? std::string("nan") : std::to_string(v.get<double>()); };
  std::printf("%s criterion %2d %-32s measured %s %s %s\n", r["pass"].get<bool>() ? "PASS" : "FAIL",
              r["id"].get<int>(), r["name"].get<std::string>().c_str(), num(r["measured"]).c_str(),
              r["relation"].get<std::string>().c_str(), num(r["tolerance"]).c_str());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance suite"};
  std::string out = "acceptance_out", check, config = "default";
  bool keep_going = false;
  app.add_option("--out", out);
  app.add_option("--check", check);
  app.add_option("--config", config);
  app.add_flag("--keep-going", keep_going);
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json rep;
    if (check.empty()) {
      RunReport r = cmd_verify(load_config(config), out);
      r.write(out);
      rep = r.json();
    } else {
      std::ifstream in(out + "/report.json");
      if (!in) {
        std::cerr << "no report in " << out << "\n";
        return 2;
      }
      rep = nlohmann::json::parse(in);
    }
    bool ok = true;
    int seen = 0;
    for (const auto &r : rep["rows"]) {
      if (!check.empty() && check != "all" && std::to_string(r["id"].get<int>()) != check)
        continue;
      line(r);
      ok = ok && r["pass"].get<bool>();
      ++seen;
    }
    if (seen == 0) {
      std::cerr << "no criterion " << check << "\n";
      return 2;
    }
    return ok || (keep_going && check.empty()) ? 0 : 1;
  } catch (const std::exception &e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 3;
  }
}
