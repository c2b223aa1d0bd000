#pragma once

#include <span>
#include <vector>

#include "glim/gaussian.hpp"
#include "glim/paths.hpp"

namespace glim {

// Schur-complement state for one latent covariance, indexed t = 0..T-1:
//   cond[t]   Cov(Z_{t+1..T} | Z_1..t), (T-t)x(T-t); cond[0] = Sigma
//   a[t]      1' Sigma21 Sigma11^{-1} at split t (length t; a[0] empty)
//   s[t]      sum of entries of cond[t], compensated
//   mu_row[t] first row of Sigma21 Sigma11^{-1} (length t): E[Z_{t+1}|z_1..t]
//             = mu_row[t] . z
struct ConditioningArtifacts {
  std::vector<Eigen::MatrixXd> cond;
  std::vector<Eigen::VectorXd> a;
  std::vector<double> s;
  std::vector<Eigen::VectorXd> mu_row;
};

// Computed once per Sigma; everything downstream (density, sampling, latent
// recovery) reads from this cache.
ConditioningArtifacts conditioning_artifacts(const CovMatrix& sigma);

// Conditional law of probit(Y_t): probit(Y_t) | z_1..t-1 ~ N(mu, sd^2).
struct StepParams {
  double mu = 0.0;
  double sd = 1.0;
};

// Path law for one latent covariance. The anchor gamma is identified from the
// starting probability: gamma(y0) = quantile(y0) * sqrt(sum Sigma). Interior
// probabilities are clamped into [eps, 1-eps] before any probit transform;
// the terminal entry is used only through its Bernoulli term.
//
// Instances are immutable after construction and safe to share across
// threads; sampling draws from a caller-owned stream.
class GlimModel {
 public:
  explicit GlimModel(CovMatrix sigma, double probit_clamp = 1e-9);

  int horizon() const { return sigma_.dim(); }
  const CovMatrix& sigma() const { return sigma_; }
  const ConditioningArtifacts& artifacts() const { return arts_; }
  double probit_clamp() const { return clamp_; }
  bool diagonal() const { return diagonal_; }

  double gamma_for(double y0) const;

  // Log density of a complete path: T-1 interior transition terms plus the
  // terminal Bernoulli term. Paths pressed against the clamp produce large
  // negative values, never errors. Dispatches to the diagonal shortcut when
  // Sigma is diagonal.
  double log_density(const ProbabilityPath& path) const;
  // The two routes individually (the general one works for any Sigma; the
  // shortcut requires diagonal Sigma and exists because it is O(T) per path).
  double log_density_general(const ProbabilityPath& path) const;
  double log_density_diagonal(const ProbabilityPath& path) const;

  // Latent increments z_1..z_{T-1} implied by the interior probabilities.
  // Errors if a step coefficient degenerates (|1 + a_t| below the pivot floor).
  std::vector<double> recover_latents(const ProbabilityPath& path) const;

  // Distribution of probit(Y_t) given the first t-1 latent increments,
  // t in 1..T-1.
  StepParams step_params(double gamma, std::span<const double> z_prefix, int t) const;

  // Deterministic path induced by a full latent vector z_1..z_T: interior
  // probabilities through the conditional-probability map, terminal indicator
  // 1{gamma + sum z >= 0} (ties count as 1).
  ProbabilityPath path_from_latents(double gamma, std::span<const double> z) const;

  // z ~ N(0, Sigma) pushed through path_from_latents; y_0 is set to the given
  // anchor exactly.
  ProbabilityPath sample_path(double y0, RngStream& rng) const;

 private:
  CovMatrix sigma_;
  ConditioningArtifacts arts_;
  double clamp_;
  bool diagonal_;
  std::vector<double> suffix_var_;  // diagonal route: A_t = sum_{i>=t} sigma^2_i, 1-based
};

}  // namespace glim
