#pragma once

#include <Eigen/Dense>

#include "glim/rng.hpp"

namespace glim {

// Cholesky pivots below this are treated as "not positive definite".
inline constexpr double kCholeskyPivotFloor = 1e-12;

double normal_pdf(double x);

// Standard normal CDF via erfc; absolute error well under 1e-12. The result is
// forced into the open interval (0,1) so downstream probit transforms stay finite.
double normal_cdf(double x);

// Inverse standard normal CDF: rational initial approximation refined by one
// Newton step. p must lie strictly inside (0,1).
double normal_quantile(double p);

// Symmetric positive-definite matrix with its lower Cholesky factor computed
// at construction. Rejects asymmetry beyond 1e-12 (relative to the largest
// entry) and any Cholesky pivot below kCholeskyPivotFloor.
class CovMatrix {
 public:
  explicit CovMatrix(Eigen::MatrixXd m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const Eigen::MatrixXd& cholesky_lower() const { return lower_; }
  double operator()(int i, int j) const { return m_(i, j); }

  // Kahan-compensated sum of all entries.
  double sum_entries() const;
  bool is_diagonal() const;

 private:
  Eigen::MatrixXd m_;
  Eigen::MatrixXd lower_;
};

struct ConditionalGaussian {
  Eigen::VectorXd mean;
  CovMatrix cov;
};

// Law of (x_{t+1..n} | x_1..t = z) for x ~ N(0, sigma). t counts conditioned
// leading coordinates, 0 < t < n; z carries their observed values (length t).
ConditionalGaussian mvn_condition(const CovMatrix& sigma, int t, const Eigen::VectorXd& z);

// One draw from N(mean, sigma) through the cached factor.
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& sigma, RngStream& rng);

}  // namespace glim
