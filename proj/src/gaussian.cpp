#include "glim/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "glim/errors.hpp"
#include "glim/numeric.hpp"

namespace glim {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("normal_cdf: non-finite input");
  double p = 0.5 * std::erfc(-x * kInvSqrt2);
  // Contract: open interval, so probit(cdf(x)) stays finite.
  if (p <= 0.0) return std::numeric_limits<double>::min();
  if (p >= 1.0) return 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return p;
}

namespace {

// Rational approximation of the probit (relative error < 1.15e-9 everywhere),
// split at p = 0.02425 between a central and two tail branches.
double probit_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "normal_quantile: p = " << p << " outside (0,1)";
    throw std::domain_error(msg.str());
  }
  double x = probit_estimate(p);
  // One Newton step against the erfc-based CDF squares the approximation error.
  double err = 0.5 * std::erfc(-x * kInvSqrt2) - p;
  x -= err / normal_pdf(x);
  return x;
}

CovMatrix::CovMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  const int n = static_cast<int>(m_.rows());
  if (n < 1 || m_.cols() != m_.rows()) {
    throw std::invalid_argument("CovMatrix: matrix must be square and non-empty");
  }
  if (!m_.allFinite()) throw NumericalError("CovMatrix: non-finite entry");

  double scale = m_.cwiseAbs().maxCoeff();
  double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    throw NumericalError("CovMatrix: matrix is not symmetric");
  }

  // Hand-rolled lower Cholesky so the pivot floor is checked exactly as
  // specified, not inferred from a library failure code.
  lower_ = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m_(j, j);
    for (int k = 0; k < j; ++k) d -= lower_(j, k) * lower_(j, k);
    if (d < kCholeskyPivotFloor) {
      std::ostringstream msg;
      msg << "CovMatrix: not positive definite (pivot " << d << " at index " << j << ")";
      throw NumericalError(msg.str());
    }
    lower_(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double v = m_(i, j);
      for (int k = 0; k < j; ++k) v -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = v / lower_(j, j);
    }
  }
}

double CovMatrix::sum_entries() const {
  std::vector<double> cells;
  cells.reserve(static_cast<std::size_t>(m_.size()));
  for (int j = 0; j < m_.cols(); ++j) {
    for (int i = 0; i < m_.rows(); ++i) cells.push_back(m_(i, j));
  }
  return kahan_sum(cells);
}

bool CovMatrix::is_diagonal() const {
  for (int j = 0; j < m_.cols(); ++j) {
    for (int i = 0; i < m_.rows(); ++i) {
      if (i != j && m_(i, j) != 0.0) return false;
    }
  }
  return true;
}

ConditionalGaussian mvn_condition(const CovMatrix& sigma, int t, const Eigen::VectorXd& z) {
  const int n = sigma.dim();
  if (t < 1 || t >= n) throw std::invalid_argument("mvn_condition: need 0 < t < dim");
  if (z.size() != t) throw std::invalid_argument("mvn_condition: z must have length t");

  // The top-left t x t block of the full factor is the factor of Sigma11.
  Eigen::MatrixXd L11 = sigma.cholesky_lower().topLeftCorner(t, t);

  Eigen::MatrixXd S12 = sigma.matrix().topRightCorner(t, n - t);
  Eigen::MatrixXd W = L11.triangularView<Eigen::Lower>().solve(S12);  // L11 W = Sigma12
  Eigen::VectorXd v = L11.triangularView<Eigen::Lower>().solve(z);    // L11 v = z
  Eigen::MatrixXd cond = sigma.matrix().bottomRightCorner(n - t, n - t) - W.transpose() * W;
  cond = ((cond + cond.transpose()) * 0.5).eval();   // kill roundoff asymmetry
  Eigen::VectorXd mean = W.transpose() * v;
  return ConditionalGaussian{std::move(mean), CovMatrix(std::move(cond))};
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& sigma, RngStream& rng) {
  if (mean.size() != sigma.dim()) {
    throw std::invalid_argument("mvn_sample: mean/covariance dimension mismatch");
  }
  Eigen::VectorXd xi(sigma.dim());
  for (int i = 0; i < xi.size(); ++i) xi(i) = rng.gauss();
  return mean + sigma.cholesky_lower() * xi;
}

}  // namespace glim
