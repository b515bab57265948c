#include "disslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace disslab {

bool RunReport::all_pass() const {
  for (const auto &r : rows)
    if (!r.pass)
      return false;
  return true;
}

nlohmann::json row_json(const CheckRow &r) {
  nlohmann::json x;
  x["id"] = r.id;
  x["name"] = r.name;
  x["pass"] = r.pass;
  // JSON has no NaN or infinity
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  x["measured"] = num(r.measured);
  x["tolerance"] = num(r.tolerance);
  x["relation"] = r.relation;
  x["detail"] = r.detail;
  if (!r.sub.empty()) {
    auto &s = x["checks"] = nlohmann::json::array();
    for (const auto &c : r.sub)
      s.push_back(row_json(c));
  }
  return x;
}

nlohmann::json RunReport::json() const {
  nlohmann::json j;
  j["command"] = command;
  j["pass"] = all_pass();
  auto &rs = j["rows"] = nlohmann::json::array();
  for (const auto &r : rows)
    rs.push_back(row_json(r));
  j["warnings"] = warnings;
  j["artifacts"] = artifacts;
  auto &m = j["metrics"] = nlohmann::json::object();
  for (auto &[k, v] : metrics)
    m[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  j["provenance"] = {{"config_hash", config_hash}, {"version", version}, {"wall_seconds", wall_seconds}};
  return j;
}

std::string RunReport::text() const {
  std::ostringstream os;
  os << command << "  config " << config_hash << "  version " << version << "\n";
  for (const auto &r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %2d %-36s measured %-12.6g %s %-10.3g", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.measured, r.relation.c_str(), r.tolerance);
    os << buf;
    if (!r.detail.empty())
      os << "  " << r.detail;
    os << "\n";
    for (const auto &c : r.sub) {
      std::snprintf(buf, sizeof buf, "       %s %-34s measured %-12.6g %s %-10.3g", c.pass ? "ok  " : "FAIL",
                    c.name.c_str(), c.measured, c.relation.c_str(), c.tolerance);
      os << buf;
      if (!c.detail.empty())
        os << "  " << c.detail;
      os << "\n";
    }
  }
  for (const auto &w : warnings)
    os << "warning: " << w << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", wall_seconds);
  os << (all_pass() ? "all checks passed" : "some checks failed") << " (" << buf << " s)\n";
  return os.str();
}

void RunReport::write(const std::string &dir) const {
  ensure_dir(dir);
  std::ofstream(dir + "/report.json") << json().dump(2) << "\n";
  std::ofstream(dir + "/report.txt") << text();
}

nlohmann::json error_record(const Error &e) {
  static const char *kinds[] = {"", "check", "config", "numerical"};
  return {{"error",
           {{"kind", kinds[e.exit_code()]}, {"code", e.code()}, {"message", e.what()}, {"exit_code", e.exit_code()}}}};
}

nlohmann::json error_record(const std::exception &e) {
  return {{"error", {{"kind", "numerical"}, {"code", "unexpected"}, {"message", e.what()}, {"exit_code", 3}}}};
}

Csv &Csv::row(const std::vector<std::string> &cells) {
  rows_.push_back(cells);
  return *this;
}

std::string Csv::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Csv::num(long v) { return std::to_string(v); }

std::string Csv::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string> &v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? "," : "") << v[i];
    os << "\n";
  };
  line(header_);
  for (const auto &r : rows_)
    line(r);
  return os.str();
}

void Csv::write(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail_config("bad_output", "cannot write " + path);
  out << str();
}

std::string version_string() {
#ifdef DISSLAB_VERSION
  return DISSLAB_VERSION;
#else
  return "dev";
#endif
}

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    fail_config("bad_output", "cannot create output directory " + dir + ": " + ec.message());
}

} // namespace disslab
