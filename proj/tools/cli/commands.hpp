#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace rbk::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNumerical = 2,
  kInvalidConfig = 3,
};

struct Options {
  std::string config;
  std::string out;
  std::string chart;
  std::string suite;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<int> p;
  std::optional<double> cap;
};

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_blowup(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_constants(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err);

/// Path of the JSON report written next to a CSV output: `run.csv` -> `run.json`.
std::string report_path(const std::string& csv_path);

}  // namespace rbk::cli
