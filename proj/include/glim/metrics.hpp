#pragma once

#include <vector>

#include "glim/paths.hpp"

namespace glim {

// Central alpha-interval coverage at one checkpoint, aggregated over paths.
struct CoverageCell {
  int t = 0;
  double alpha = 0.0;
  double coverage = 0.0;  // fraction of observed values inside the interval
  double error = 0.0;     // coverage - alpha
};

struct MetricsReport {
  int samples_per_path = 0;
  std::vector<double> calibration_mse_per_t;  // index 0 <-> t = 1
  double calibration_mse = 0.0;               // grand mean over t
  double volatility_mse = 0.0;
  std::vector<CoverageCell> coverage;
};

// Inclusive nearest-rank sample quantile: rank ceil(q*M) clamped into [1, M].
// xs is taken by value and sorted.
double quantile_nearest_rank(std::vector<double> xs, double q);

// Default checkpoints {1, ceil(T/2), T-1}, deduplicated and sorted.
std::vector<int> default_checkpoints(int horizon);

// Per-step calibration error e_{p,t} = mean_m y^(m)_t - y_0(p); entry t-1 of
// the result is the mean of e^2 over paths.
std::vector<double> mean_calibration_mse(const SimulationEnsemble& ens);

// Per path: mean realized volatility over samples vs the binary-outcome
// target y_0(1 - y_0); result is the mean squared gap over paths.
double volatility_mse(const SimulationEnsemble& ens);

// Coverage of central alpha-intervals built from the per-path sample spread,
// checked against the observed paths (matched by id) at the given checkpoints.
std::vector<CoverageCell> ci_coverage_error(const SimulationEnsemble& ens,
                                            const PathDataset& observed,
                                            const std::vector<int>& checkpoints,
                                            const std::vector<double>& alphas);

MetricsReport evaluate_ensemble(const SimulationEnsemble& ens, const PathDataset& observed,
                                const std::vector<int>& checkpoints,
                                const std::vector<double>& alphas);

}  // namespace glim
