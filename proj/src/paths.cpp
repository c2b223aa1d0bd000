#include "glim/paths.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "glim/errors.hpp"

namespace glim {

int ProbabilityPath::terminal() const {
  if (!terminal_known) {
    throw ValidationError("path '" + id + "': terminal outcome is unknown");
  }
  return y.back() == 1.0 ? 1 : 0;
}

double realized_volatility(const ProbabilityPath& path) {
  if (path.y.size() < 2) {
    throw ValidationError("path '" + path.id + "': need horizon >= 1 for realized volatility");
  }
  if (!path.terminal_known) {
    throw ValidationError("path '" + path.id + "': realized volatility needs a complete path");
  }
  double q = 0.0;
  for (std::size_t t = 1; t < path.y.size(); ++t) {
    double d = path.y[t] - path.y[t - 1];
    q += d * d;
  }
  return q;
}

void validate_dataset(const PathDataset& ds) {
  std::ostringstream problems;
  int n_bad = 0;
  auto complain = [&](const std::string& msg) {
    if (n_bad++) problems << "; ";
    problems << msg;
  };

  if (ds.paths.empty()) {
    throw ValidationError("dataset: no paths");
  }
  if (ds.horizon < 1) complain("dataset: horizon must be >= 1");

  std::set<std::string> seen;
  for (const auto& p : ds.paths) {
    if (!seen.insert(p.id).second) complain("path '" + p.id + "': duplicate id");
    if (static_cast<int>(p.y.size()) != ds.horizon + 1) {
      complain("path '" + p.id + "': expected " + std::to_string(ds.horizon + 1) + " grid points");
      continue;
    }
    for (std::size_t t = 0; t < p.y.size(); ++t) {
      double v = p.y[t];
      bool terminal = (t + 1 == p.y.size());
      if (terminal && !p.terminal_known) continue;
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        complain("path '" + p.id + "': y_" + std::to_string(t) + " = " + std::to_string(v) +
                 " outside [0,1]");
      } else if (terminal && v != 0.0 && v != 1.0) {
        complain("path '" + p.id + "': terminal y_" + std::to_string(t) + " = " +
                 std::to_string(v) + " must be exactly 0 or 1");
      }
    }
  }

  if (ds.covariates.rows() != static_cast<long>(ds.paths.size()) &&
      !(ds.covariates.size() == 0 && ds.covariate_names.empty())) {
    complain("dataset: covariate rows (" + std::to_string(ds.covariates.rows()) +
             ") do not match path count (" + std::to_string(ds.paths.size()) + ")");
  }
  if (ds.covariates.size() > 0) {
    if (ds.covariates.cols() != static_cast<long>(ds.covariate_names.size())) {
      complain("dataset: covariate columns do not match covariate names");
    }
    if (!ds.covariates.allFinite()) complain("dataset: non-finite covariate entry");
  }

  if (n_bad > 0) throw ValidationError(problems.str());
}

void validate_ensemble(const SimulationEnsemble& ens) {
  if (ens.entries.empty()) throw ValidationError("ensemble: no entries");
  std::ostringstream problems;
  int n_bad = 0;
  auto complain = [&](const std::string& msg) {
    if (n_bad++) problems << "; ";
    problems << msg;
  };

  for (const auto& e : ens.entries) {
    if (static_cast<int>(e.samples.size()) != ens.samples_per_path) {
      complain("ensemble path '" + e.path_id + "': " + std::to_string(e.samples.size()) +
               " samples, expected " + std::to_string(ens.samples_per_path));
    }
    for (const auto& s : e.samples) {
      if (s.horizon() != ens.horizon) {
        complain("ensemble path '" + e.path_id + "': sample horizon mismatch");
        break;
      }
      if (s.y.front() != e.y0) {
        complain("ensemble path '" + e.path_id + "': sample does not start at y_0");
        break;
      }
    }
  }
  if (n_bad > 0) throw ValidationError(problems.str());
}

}  // namespace glim
