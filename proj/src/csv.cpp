#include "glim/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "glim/errors.hpp"

namespace glim {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void fail(const std::string& file, int lineno, const std::string& msg) {
  throw ValidationError(file + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& file, int lineno, const std::string& cell) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) fail(file, lineno, "trailing junk in number '" + cell + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(file, lineno, "not a number: '" + cell + "'");
  } catch (const std::out_of_range&) {
    fail(file, lineno, "number out of range: '" + cell + "'");
  }
}

long parse_long(const std::string& file, int lineno, const std::string& cell) {
  try {
    std::size_t used = 0;
    long v = std::stol(cell, &used);
    if (used != cell.size()) fail(file, lineno, "trailing junk in integer '" + cell + "'");
    return v;
  } catch (const std::exception&) {
    fail(file, lineno, "not an integer: '" + cell + "'");
  }
}

std::ifstream open_or_fail(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open '" + file + "'");
  return in;
}

// strip trailing \r so CRLF inputs parse
std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

PathDataset read_paths_csv(const std::string& file) {
  std::ifstream in = open_or_fail(file);
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) throw ValidationError(file + ": empty file");
  ++lineno;
  if (chomp(line) != "path_id,t,y") fail(file, lineno, "expected header 'path_id,t,y'");

  // id -> (t -> y), insertion order preserved separately
  std::map<std::string, std::map<long, double>> grid;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != 3) fail(file, lineno, "expected 3 fields, got " + std::to_string(cells.size()));
    const std::string& id = cells[0];
    if (id.empty()) fail(file, lineno, "empty path_id");
    long t = parse_long(file, lineno, cells[1]);
    double y = parse_double(file, lineno, cells[2]);
    if (t < 0) fail(file, lineno, "t must be >= 0");
    auto [it, fresh] = grid.try_emplace(id);
    if (fresh) order.push_back(id);
    if (!it->second.emplace(t, y).second) {
      fail(file, lineno, "duplicate grid point (path '" + id + "', t = " + std::to_string(t) + ")");
    }
  }
  if (grid.empty()) throw ValidationError(file + ": no data rows");

  long horizon = -1;
  for (const auto& [id, rows] : grid) {
    long h = rows.rbegin()->first;
    if (horizon < 0) horizon = h;
    if (h != horizon) {
      throw ValidationError(file + ": path '" + id + "' ends at t = " + std::to_string(h) +
                            " but path '" + grid.begin()->first + "' ends at t = " +
                            std::to_string(horizon));
    }
  }
  if (horizon < 1) throw ValidationError(file + ": horizon must be >= 1");

  PathDataset ds;
  ds.horizon = static_cast<int>(horizon);
  for (const auto& id : order) {
    const auto& rows = grid.at(id);
    ProbabilityPath p;
    p.id = id;
    p.y.resize(horizon + 1);
    for (long t = 0; t <= horizon; ++t) {
      auto it = rows.find(t);
      if (it == rows.end()) {
        throw ValidationError(file + ": path '" + id + "' is missing t = " + std::to_string(t));
      }
      p.y[t] = it->second;
    }
    ds.paths.push_back(std::move(p));
  }
  ds.covariates.resize(ds.paths.size(), 0);
  return ds;
}

void write_paths_csv(const PathDataset& ds, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << "path_id,t,y\n";
  for (const auto& p : ds.paths) {
    for (std::size_t t = 0; t < p.y.size(); ++t) {
      out << p.id << ',' << t << ',' << format_double(p.y[t]) << '\n';
    }
  }
}

void attach_covariates_csv(PathDataset& ds, const std::string& file) {
  std::ifstream in = open_or_fail(file);
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) throw ValidationError(file + ": empty file");
  ++lineno;
  auto header = split_line(chomp(line));
  if (header.size() < 2 || header[0] != "path_id") {
    fail(file, lineno, "expected header 'path_id,<name>,...'");
  }
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::map<std::string, std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      fail(file, lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(cells.size()));
    }
    std::vector<double> vals;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      vals.push_back(parse_double(file, lineno, cells[i]));
    }
    if (!rows.emplace(cells[0], std::move(vals)).second) {
      fail(file, lineno, "duplicate covariate row for path '" + cells[0] + "'");
    }
  }

  Eigen::MatrixXd X(ds.paths.size(), names.size());
  for (std::size_t i = 0; i < ds.paths.size(); ++i) {
    auto it = rows.find(ds.paths[i].id);
    if (it == rows.end()) {
      throw ValidationError(file + ": no covariates for path '" + ds.paths[i].id + "'");
    }
    for (std::size_t j = 0; j < names.size(); ++j) X(i, j) = it->second[j];
  }
  ds.covariate_names = std::move(names);
  ds.covariates = std::move(X);
}

void write_covariates_csv(const PathDataset& ds, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << "path_id";
  for (const auto& n : ds.covariate_names) out << ',' << n;
  out << '\n';
  for (int i = 0; i < ds.n_paths(); ++i) {
    out << ds.paths[i].id;
    for (int j = 0; j < ds.covariates.cols(); ++j) out << ',' << format_double(ds.covariates(i, j));
    out << '\n';
  }
}

SimulationEnsemble read_ensemble_csv(const std::string& file) {
  std::ifstream in = open_or_fail(file);
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) throw ValidationError(file + ": empty file");
  ++lineno;
  if (chomp(line) != "path_id,sample_id,t,y") {
    fail(file, lineno, "expected header 'path_id,sample_id,t,y'");
  }

  std::map<std::string, std::map<long, std::map<long, double>>> grid;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != 4) fail(file, lineno, "expected 4 fields, got " + std::to_string(cells.size()));
    const std::string& id = cells[0];
    long m = parse_long(file, lineno, cells[1]);
    long t = parse_long(file, lineno, cells[2]);
    double y = parse_double(file, lineno, cells[3]);
    if (m < 0 || t < 0) fail(file, lineno, "sample_id and t must be >= 0");
    auto [it, fresh] = grid.try_emplace(id);
    if (fresh) order.push_back(id);
    if (!it->second[m].emplace(t, y).second) {
      fail(file, lineno, "duplicate grid point (path '" + id + "', sample " + std::to_string(m) +
                             ", t = " + std::to_string(t) + ")");
    }
  }
  if (grid.empty()) throw ValidationError(file + ": no data rows");

  SimulationEnsemble ens;
  ens.horizon = -1;
  ens.samples_per_path = -1;
  for (const auto& id : order) {
    const auto& samples = grid.at(id);
    EnsemblePathSet entry;
    entry.path_id = id;
    long expect_m = 0;
    for (const auto& [m, rows] : samples) {
      if (m != expect_m++) {
        throw ValidationError(file + ": path '" + id + "' sample ids are not contiguous from 0");
      }
      long h = rows.rbegin()->first;
      if (ens.horizon < 0) ens.horizon = static_cast<int>(h);
      if (h != ens.horizon) {
        throw ValidationError(file + ": path '" + id + "' sample " + std::to_string(m) +
                              " has a different horizon");
      }
      ProbabilityPath p;
      p.id = id + "#" + std::to_string(m);
      p.y.resize(h + 1);
      for (long t = 0; t <= h; ++t) {
        auto it = rows.find(t);
        if (it == rows.end()) {
          throw ValidationError(file + ": path '" + id + "' sample " + std::to_string(m) +
                                " is missing t = " + std::to_string(t));
        }
        p.y[t] = it->second;
      }
      entry.samples.push_back(std::move(p));
    }
    if (ens.samples_per_path < 0) {
      ens.samples_per_path = static_cast<int>(entry.samples.size());
    } else if (static_cast<int>(entry.samples.size()) != ens.samples_per_path) {
      throw ValidationError(file + ": path '" + id + "' has " +
                            std::to_string(entry.samples.size()) + " samples, expected " +
                            std::to_string(ens.samples_per_path));
    }
    entry.y0 = entry.samples.front().y.front();
    ens.entries.push_back(std::move(entry));
  }
  return ens;
}

void write_ensemble_csv(const SimulationEnsemble& ens, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << "path_id,sample_id,t,y\n";
  for (const auto& e : ens.entries) {
    for (std::size_t m = 0; m < e.samples.size(); ++m) {
      const auto& y = e.samples[m].y;
      for (std::size_t t = 0; t < y.size(); ++t) {
        out << e.path_id << ',' << m << ',' << t << ',' << format_double(y[t]) << '\n';
      }
    }
  }
}

}  // namespace glim
