#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "glim/gaussian.hpp"

namespace glim {

// Per-step latent variances sigma^2_1..sigma^2_T.
struct VarianceProfile {
  std::vector<double> sigma2;
};

// Parameters of the latent covariance Sigma(X, theta):
//   Sigma_(i,j) = sigma_i sigma_j rho^|i-j|
// with the per-step variances produced by a registered family keyed by
// variance_fn. rho_free = false pins rho at 0 during fitting.
struct CovarianceSpec {
  std::string variance_fn = "exp-linear";
  Eigen::VectorXd beta;
  double rho = 0.0;
  bool rho_free = true;

  // sigmoid-scaled family: sigma^2_t = exp(c * sigmoid(beta.X) * (t-1)).
  double c = 5.0 / 23.0;

  // quadratic-softplus family: sigma^2_t = exp(a (t-1)^2 + b (t-1) + c_t[t-1])
  // with a = softplus(beta.X), b = -p a. c_t needs at least T entries; extras
  // (the conventional T+1st) are ignored. renormalize_first rescales so
  // sigma^2_1 = 1.
  std::vector<double> c_t;
  double p = 4.5;
  double p_lo = 4.0;
  double p_hi = 5.0;
  bool renormalize_first = false;
};

using VarianceFn =
    std::function<VarianceProfile(const CovarianceSpec&, const Eigen::VectorXd&, int)>;

// Named registry of variance families. Built-ins: "exp-linear",
// "sigmoid-scaled", "quadratic-softplus". Registering an existing name
// replaces it.
void register_variance_fn(const std::string& name, VarianceFn fn);
VarianceFn variance_fn_by_name(const std::string& name);
std::vector<std::string> registered_variance_fns();

VarianceProfile variance_profile(const CovarianceSpec& spec, const Eigen::VectorXd& X, int T);

// Assembles Sigma(X, theta) and runs the positive-definiteness gate. |rho|
// must be < 1.
CovMatrix build_sigma(const CovarianceSpec& spec, const Eigen::VectorXd& X, int T);

}  // namespace glim
