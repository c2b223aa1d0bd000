#include "glim/baselines.hpp"

#include <cmath>
#include <sstream>

#include "glim/errors.hpp"
#include "glim/gaussian.hpp"
#include "glim/numeric.hpp"

namespace glim {

namespace {
constexpr double kMmfeJitter = 1e-10;
}

MmfeModel mmfe_fit(const PathDataset& ds) {
  const int n = ds.n_paths();
  const int T = ds.horizon;
  if (n < T + 1) {
    std::ostringstream msg;
    msg << "mmfe_fit: need at least T+1 = " << T + 1 << " paths for a " << T
        << "-dimensional increment covariance, have " << n;
    throw FitError(msg.str());
  }

  Eigen::MatrixXd D(n, T);
  for (int i = 0; i < n; ++i) {
    const auto& y = ds.paths[i].y;
    for (int t = 1; t <= T; ++t) D(i, t - 1) = y[t] - y[t - 1];
  }
  Eigen::RowVectorXd mean = D.colwise().mean();
  D.rowwise() -= mean;
  Eigen::MatrixXd cov = (D.transpose() * D) / (n - 1);

  MmfeModel m;
  m.horizon = T;
  m.increment_cov = cov;
  Eigen::MatrixXd jittered = cov + kMmfeJitter * Eigen::MatrixXd::Identity(T, T);
  m.chol_lower = CovMatrix(std::move(jittered)).cholesky_lower();
  return m;
}

ProbabilityPath mmfe_sample(const MmfeModel& m, const std::string& id, double y0,
                            double clamp_eps, RngStream& rng) {
  const int T = m.horizon;
  Eigen::VectorXd xi(T);
  for (int i = 0; i < T; ++i) xi(i) = rng.gauss();
  Eigen::VectorXd d = m.chol_lower * xi;

  ProbabilityPath path;
  path.id = id;
  path.y.resize(T + 1);
  path.y[0] = y0;
  double level = y0;  // raw cumulation; only the stored values are clamped
  for (int t = 1; t < T; ++t) {
    level += d(t - 1);
    path.y[t] = clamp_probability(level, clamp_eps);
  }
  const double prev = T >= 2 ? path.y[T - 1] : clamp_probability(y0, clamp_eps);
  path.y[T] = rng.uniform() < prev ? 1.0 : 0.0;
  path.terminal_known = true;
  return path;
}

LrModel lr_fit(const PathDataset& ds) {
  const int n = ds.n_paths();
  const int T = ds.horizon;
  const int k = static_cast<int>(ds.covariate_names.size());
  const int p = 2 + k;  // intercept, covariates, y0
  if (n < p) {
    std::ostringstream msg;
    msg << "lr_fit: need at least " << p << " paths for " << p << " regressors, have " << n;
    throw FitError(msg.str());
  }

  Eigen::MatrixXd A(n, p);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    for (int j = 0; j < k; ++j) A(i, 1 + j) = ds.covariates(i, j);
    A(i, p - 1) = ds.paths[i].y0();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < p) {
    // Columns permuted past the rank are linear combinations of earlier ones.
    std::vector<std::string> labels;
    labels.push_back("intercept");
    for (const auto& nm : ds.covariate_names) labels.push_back(nm);
    labels.push_back("y0");
    int dropped = qr.colsPermutation().indices()(qr.rank());
    throw FitError("lr_fit: design is rank-deficient (column '" + labels[dropped] +
                   "' is collinear)");
  }

  LrModel m;
  m.horizon = T;
  m.n_covariates = k;
  for (int t = 1; t < T; ++t) {
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = ds.paths[i].y[t];
    Eigen::VectorXd coef = qr.solve(b);
    double ssr = (b - A * coef).squaredNorm();
    double dof = std::max(1, n - p);
    m.coef.push_back(std::move(coef));
    m.resid_sd.push_back(std::sqrt(ssr / dof));
  }
  return m;
}

ProbabilityPath lr_sample(const LrModel& m, const std::string& id, double y0,
                          const Eigen::VectorXd& X, double clamp_eps, RngStream& rng) {
  if (X.size() != m.n_covariates) {
    throw ValidationError("lr_sample: covariate vector has wrong length");
  }
  const int T = m.horizon;
  Eigen::VectorXd f(2 + m.n_covariates);
  f(0) = 1.0;
  for (int j = 0; j < m.n_covariates; ++j) f(1 + j) = X(j);
  f(f.size() - 1) = y0;

  ProbabilityPath path;
  path.id = id;
  path.y.resize(T + 1);
  path.y[0] = y0;
  for (int t = 1; t < T; ++t) {
    double level = m.coef[t - 1].dot(f) + m.resid_sd[t - 1] * rng.gauss();
    path.y[t] = clamp_probability(level, clamp_eps);
  }
  const double prev = T >= 2 ? path.y[T - 1] : clamp_probability(y0, clamp_eps);
  path.y[T] = rng.uniform() < prev ? 1.0 : 0.0;
  path.terminal_known = true;
  return path;
}

}  // namespace glim
