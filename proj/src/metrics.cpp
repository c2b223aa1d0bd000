#include "glim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "glim/errors.hpp"

namespace glim {

double quantile_nearest_rank(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile_nearest_rank: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_nearest_rank: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const int m = static_cast<int>(xs.size());
  int rank = static_cast<int>(std::ceil(q * m));
  rank = std::min(std::max(rank, 1), m);
  return xs[rank - 1];
}

std::vector<int> default_checkpoints(int horizon) {
  std::set<int> pts;
  if (horizon >= 2) {
    pts.insert(1);
    pts.insert((horizon + 1) / 2);
    pts.insert(horizon - 1);
  }
  return {pts.begin(), pts.end()};
}

std::vector<double> mean_calibration_mse(const SimulationEnsemble& ens) {
  const int T = ens.horizon;
  std::vector<double> mse(T, 0.0);
  for (const auto& entry : ens.entries) {
    for (int t = 1; t <= T; ++t) {
      double mean = 0.0;
      for (const auto& s : entry.samples) mean += s.y[t];
      mean /= entry.samples.size();
      double e = mean - entry.y0;
      mse[t - 1] += e * e;
    }
  }
  for (double& v : mse) v /= ens.entries.size();
  return mse;
}

double volatility_mse(const SimulationEnsemble& ens) {
  double out = 0.0;
  for (const auto& entry : ens.entries) {
    double q = 0.0;
    for (const auto& s : entry.samples) q += realized_volatility(s);
    q /= entry.samples.size();
    const double target = entry.y0 * (1.0 - entry.y0);
    out += (q - target) * (q - target);
  }
  return out / ens.entries.size();
}

std::vector<CoverageCell> ci_coverage_error(const SimulationEnsemble& ens,
                                            const PathDataset& observed,
                                            const std::vector<int>& checkpoints,
                                            const std::vector<double>& alphas) {
  if (observed.horizon != ens.horizon) {
    throw ValidationError("ci_coverage_error: ensemble and observed horizons differ");
  }
  std::map<std::string, const ProbabilityPath*> by_id;
  for (const auto& p : observed.paths) by_id[p.id] = &p;

  std::ostringstream missing;
  int n_missing = 0;
  for (const auto& e : ens.entries) {
    if (!by_id.count(e.path_id)) {
      missing << (n_missing++ ? ", " : "") << "'" << e.path_id << "'";
    }
  }
  if (n_missing > 0) {
    throw ValidationError("ci_coverage_error: ensemble paths missing from observed data: " +
                          missing.str());
  }

  for (int t : checkpoints) {
    if (t < 1 || t > ens.horizon) {
      throw ValidationError("ci_coverage_error: checkpoint t = " + std::to_string(t) +
                            " outside 1..T");
    }
  }

  std::vector<CoverageCell> cells;
  for (int t : checkpoints) {
    for (double alpha : alphas) {
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("ci_coverage_error: alpha must lie in (0,1)");
      }
      int covered = 0;
      for (const auto& e : ens.entries) {
        std::vector<double> ys;
        ys.reserve(e.samples.size());
        for (const auto& s : e.samples) ys.push_back(s.y[t]);
        double lo = quantile_nearest_rank(ys, (1.0 - alpha) / 2.0);
        double hi = quantile_nearest_rank(ys, (1.0 + alpha) / 2.0);
        double y_obs = by_id.at(e.path_id)->y[t];
        if (lo <= y_obs && y_obs <= hi) ++covered;  // inclusive interval
      }
      CoverageCell cell;
      cell.t = t;
      cell.alpha = alpha;
      cell.coverage = static_cast<double>(covered) / ens.entries.size();
      cell.error = cell.coverage - alpha;
      cells.push_back(cell);
    }
  }
  return cells;
}

MetricsReport evaluate_ensemble(const SimulationEnsemble& ens, const PathDataset& observed,
                                const std::vector<int>& checkpoints,
                                const std::vector<double>& alphas) {
  validate_ensemble(ens);
  MetricsReport rep;
  rep.samples_per_path = ens.samples_per_path;
  rep.calibration_mse_per_t = mean_calibration_mse(ens);
  double sum = 0.0;
  for (double v : rep.calibration_mse_per_t) sum += v;
  rep.calibration_mse = sum / rep.calibration_mse_per_t.size();
  rep.volatility_mse = volatility_mse(ens);
  rep.coverage = ci_coverage_error(ens, observed, checkpoints, alphas);
  return rep;
}

}  // namespace glim
