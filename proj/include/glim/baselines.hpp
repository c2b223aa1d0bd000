#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "glim/paths.hpp"
#include "glim/rng.hpp"

namespace glim {

// Gaussian model of the per-step forecast increments d_t = y_t - y_{t-1},
// t = 1..T: mean-centered sample covariance over paths, 1e-10 diagonal jitter
// before factorization so a merely PSD estimate still factors.
struct MmfeModel {
  int horizon = 0;
  Eigen::MatrixXd increment_cov;  // T x T, without jitter
  Eigen::MatrixXd chol_lower;     // factor of the jittered matrix
};

// Requires at least T+1 paths.
MmfeModel mmfe_fit(const PathDataset& ds);

// Draws one increment vector, cumulates the first T-1 entries onto y0 (each
// level clamped into [eps, 1-eps]), then finishes with a Bernoulli(y_{T-1})
// terminal.
ProbabilityPath mmfe_sample(const MmfeModel& m, const std::string& id, double y0,
                            double clamp_eps, RngStream& rng);

// Per-step least squares y_t ~ (intercept, X, y_0) for t = 1..T-1 with
// homoskedastic Gaussian residuals; terminal Bernoulli(y_{T-1}) like every
// other model.
struct LrModel {
  int horizon = 0;
  int n_covariates = 0;
  std::vector<Eigen::VectorXd> coef;  // per t, length 2 + n_covariates
  std::vector<double> resid_sd;
};

// Requires at least 2 + n_covariates paths; a rank-deficient design is an
// error naming the collinear column.
LrModel lr_fit(const PathDataset& ds);

ProbabilityPath lr_sample(const LrModel& m, const std::string& id, double y0,
                          const Eigen::VectorXd& X, double clamp_eps, RngStream& rng);

}  // namespace glim
