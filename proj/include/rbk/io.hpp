#pragma once

// CSV trajectory output (17 significant digits, lossless for binary64) and
// the matching reader.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rbk/error.hpp"
#include "rbk/integrate.hpp"

namespace rbk {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Column names for a trajectory: t/log-t charts give `t,c_1,...,c_N`,
/// the phi chart `y,phi_1,...,phi_{N-1}`. Accumulators listed in
/// `aux_columns` are appended by name.
inline std::vector<std::string> csv_header(const Trajectory& traj, const std::vector<std::string>& aux_columns = {}) {
  std::vector<std::string> h;
  const std::size_t dim = traj.dimension();
  switch (traj.chart()) {
    case Chart::t:
    case Chart::log_t:
      h.push_back("t");
      for (std::size_t j = 1; j <= dim; ++j) h.push_back("c_" + std::to_string(j));
      break;
    case Chart::phi_y:
      h.push_back("y");
      for (std::size_t j = 1; j <= dim; ++j) h.push_back("phi_" + std::to_string(j));
      break;
    case Chart::psi_tau:
      h.push_back("tau");
      for (std::size_t j = 1; j <= dim; ++j) h.push_back("psi_" + std::to_string(j));
      break;
  }
  for (const auto& a : aux_columns) h.push_back(a);
  return h;
}

inline void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& aux_columns = {}) {
  std::vector<std::size_t> aux_idx;
  for (const auto& a : aux_columns) {
    const auto i = traj.aux_index(a);
    if (!i) throw InvalidInput("write_csv: trajectory has no accumulator '" + a + "'");
    aux_idx.push_back(*i);
  }
  const auto header = csv_header(traj, aux_columns);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& s : traj.samples()) {
    os << format_double(s.x);
    for (double v : s.state) os << ',' << format_double(v);
    for (std::size_t i : aux_idx) os << ',' << format_double(s.aux[i]);
    os << '\n';
  }
}

inline std::string to_csv(const Trajectory& traj, const std::vector<std::string>& aux_columns = {}) {
  std::ostringstream os;
  write_csv(os, traj, aux_columns);
  return os.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vector> rows;
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(l);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(is, line)) throw InvalidInput("read_csv: missing header");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw InvalidInput("read_csv: ragged row");
    Vector row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') throw InvalidInput("read_csv: bad number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace rbk
