#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glim/covariance.hpp"
#include "glim/paths.hpp"

namespace glim {

enum class FitMode { kMle, kMcmc };

// Normal prior on one unconstrained coordinate.
struct PriorSpec {
  double loc = 0.0;
  double scale = 1.0;
};

struct FitOptions {
  FitMode mode = FitMode::kMle;

  // simplex search
  int restarts = 8;
  int max_iters = 400;
  double tol = 1e-7;

  // adaptive random-walk chains
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.3;
  double init_step = 0.5;
  // Drops the likelihood term so chains sample the prior (sampler sanity switch).
  bool prior_only = false;

  // Priors by unconstrained parameter name ("rho", "beta[0]", "p"); anything
  // unnamed gets N(0,1).
  std::map<std::string, PriorSpec> priors;

  std::uint64_t seed = 0;
  int threads = 1;
  double probit_clamp = 1e-9;
};

struct FitDiagnostics {
  FitMode mode = FitMode::kMle;
  double log_likelihood = 0.0;  // at the point estimate
  bool converged = false;
  int n_paths = 0;
  // MCMC: post-adaptation acceptance per chain and split-Rhat per parameter.
  std::vector<double> acceptance;
  std::map<std::string, double> rhat;
  // MLE: best objective (negative log likelihood) per restart.
  std::vector<double> restart_objectives;
};

struct FitResult {
  CovarianceSpec point;
  std::vector<CovarianceSpec> draws;  // kept posterior draws (MCMC mode)
  FitDiagnostics diagnostics;
};

// Unconstrained <-> constrained parameter packing: rho through atanh when
// free, beta raw, quadratic-softplus p through a scaled logit into
// [p_lo, p_hi]. The template fixes everything that is not searched over.
class ParamSpace {
 public:
  explicit ParamSpace(const CovarianceSpec& tmpl);

  int dim() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  Eigen::VectorXd pack(const CovarianceSpec& spec) const;
  CovarianceSpec unpack(const Eigen::VectorXd& u) const;

 private:
  CovarianceSpec tmpl_;
  std::vector<std::string> names_;
};

// Sum of path log densities under Sigma(X, theta). Conditioning artifacts are
// built once per distinct covariate row and shared. Any numerical-domain
// failure (non-PD Sigma, variance overflow) yields -infinity: a rejected
// point, not a crash.
double dataset_log_likelihood(const CovarianceSpec& spec, const PathDataset& ds,
                              double probit_clamp = 1e-9);

// Maximum likelihood by Nelder-Mead in the unconstrained space; restart 0
// starts at the template, the rest draw from the priors. The returned
// objective never exceeds the starting objective of its restart.
FitResult fit_mle(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt);

// Adaptive random-walk Metropolis: step size tuned during warmup toward the
// target acceptance rate and frozen afterwards. converged means split-Rhat
// < 1.05 for every parameter; results are still returned otherwise, flagged.
FitResult fit_posterior(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt);

FitResult fit(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt);

// Split-half Rhat over kept draws (one vector per chain).
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace glim
