#pragma once

#include "disslab/errors.hpp"

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace disslab {

struct CheckRow {
  int id = 0;              // acceptance criterion, 0 for informational checks
  std::string name;
  bool pass = false;
  double measured = 0;
  double tolerance = 0;
  std::string relation = "<="; // how measured compares to tolerance
  std::string detail;
  std::vector<CheckRow> sub; // sub-checks; pass requires all of them
};

nlohmann::json row_json(const CheckRow &r);

struct RunReport {
  std::string command;
  std::vector<CheckRow> rows;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts; // paths relative to the output directory
  std::map<std::string, double> metrics; // headline numbers, tabulated by sweep
  std::string config_hash;
  std::string version;
  double wall_seconds = 0;

  bool all_pass() const;
  nlohmann::json json() const;
  std::string text() const;
  // report.json and report.txt in dir
  void write(const std::string &dir) const;
};

nlohmann::json error_record(const Error &e);
nlohmann::json error_record(const std::exception &e); // unexpected failures count as numerical

// rows of numbers at full precision; text cells pass through
class Csv {
public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  Csv &row(const std::vector<std::string> &cells);
  static std::string num(double v);
  static std::string num(long v);
  std::string str() const;
  void write(const std::string &path) const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string version_string();
void ensure_dir(const std::string &dir);

} // namespace disslab
