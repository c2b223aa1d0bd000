#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace glim {

// One forecast trajectory y_0..y_T on the integer grid t = 0..T. Interior
// entries are probabilities; the terminal entry is the realized outcome and is
// stored as an exact 0 or 1. terminal_known = false marks a simulated prefix
// whose outcome was never drawn (the terminal slot is then ignored).
struct ProbabilityPath {
  std::string id;
  std::vector<double> y;
  bool terminal_known = true;

  int horizon() const { return static_cast<int>(y.size()) - 1; }
  double y0() const { return y.front(); }
  // Realized outcome as an integer; throws if the terminal is unknown.
  int terminal() const;
};

// Sum of squared one-step moves sum_{t=1..T} (y_t - y_{t-1})^2. Requires a
// complete path (known terminal).
double realized_volatility(const ProbabilityPath& path);

// Aligned collection: covariates.row(i) belongs to paths[i]. Zero covariate
// columns is legal and means "no covariates supplied".
struct PathDataset {
  int horizon = 0;
  std::vector<ProbabilityPath> paths;
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd covariates;

  int n_paths() const { return static_cast<int>(paths.size()); }
  Eigen::VectorXd covariate_row(int i) const { return covariates.row(i).transpose(); }
};

// Semantic checks over an assembled dataset: common horizon >= 1, every y in
// [0,1], terminal exactly 0 or 1, unique ids, covariate rows aligned and
// finite. Throws ValidationError listing every offending path by id.
void validate_dataset(const PathDataset& ds);

// M simulated continuations for one observed path, all starting at its y_0.
struct EnsemblePathSet {
  std::string path_id;
  double y0 = 0.0;
  std::vector<ProbabilityPath> samples;
};

struct SimulationEnsemble {
  int horizon = 0;
  int samples_per_path = 0;
  std::vector<EnsemblePathSet> entries;
};

// Same-shape checks for an ensemble: equal sample count per path, common
// horizon, every sample anchored at the entry's y_0.
void validate_ensemble(const SimulationEnsemble& ens);

}  // namespace glim
