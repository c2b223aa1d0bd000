#include "glim/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "glim/errors.hpp"
#include "glim/numeric.hpp"

namespace glim {

namespace {

constexpr double kDegenerateStep = 1e-12;

double kahan_matrix_sum(const Eigen::MatrixXd& m) {
  std::vector<double> cells;
  cells.reserve(static_cast<std::size_t>(m.size()));
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) cells.push_back(m(i, j));
  }
  return kahan_sum(cells);
}

}  // namespace

ConditioningArtifacts conditioning_artifacts(const CovMatrix& sigma) {
  const int n = sigma.dim();
  ConditioningArtifacts arts;
  arts.cond.resize(n);
  arts.a.resize(n);
  arts.s.resize(n);
  arts.mu_row.resize(n);

  arts.cond[0] = sigma.matrix();
  arts.a[0] = Eigen::VectorXd();
  arts.s[0] = sigma.sum_entries();
  arts.mu_row[0] = Eigen::VectorXd();

  const Eigen::MatrixXd& L = sigma.cholesky_lower();
  for (int t = 1; t < n; ++t) {
    // The top-left t x t block of the full factor is the factor of Sigma11,
    // so every split reuses the one decomposition.
    Eigen::MatrixXd L11 = L.topLeftCorner(t, t);
    Eigen::MatrixXd S12 = sigma.matrix().topRightCorner(t, n - t);
    Eigen::MatrixXd W = L11.triangularView<Eigen::Lower>().solve(S12);
    // V = Sigma11^{-1} Sigma12, t x (n-t)
    Eigen::MatrixXd V = L11.transpose().triangularView<Eigen::Upper>().solve(W);

    Eigen::MatrixXd cond = sigma.matrix().bottomRightCorner(n - t, n - t) - W.transpose() * W;
    arts.cond[t] = (cond + cond.transpose()) * 0.5;
    arts.a[t] = V.rowwise().sum();  // 1' Sigma21 Sigma11^{-1}, length t
    arts.mu_row[t] = V.col(0);      // E[Z_{t+1} | z_1..t] = mu_row[t] . z
    arts.s[t] = kahan_matrix_sum(arts.cond[t]);
    if (!(arts.s[t] > 0.0)) {
      std::ostringstream msg;
      msg << "conditioning_artifacts: residual mass s_" << t << " = " << arts.s[t]
          << " is not positive";
      throw NumericalError(msg.str());
    }
  }
  return arts;
}

GlimModel::GlimModel(CovMatrix sigma, double probit_clamp)
    : sigma_(std::move(sigma)),
      arts_(conditioning_artifacts(sigma_)),
      clamp_(probit_clamp),
      diagonal_(sigma_.is_diagonal()) {
  if (!(clamp_ > 0.0 && clamp_ < 0.5)) {
    throw std::invalid_argument("GlimModel: probit clamp must lie in (0, 0.5)");
  }
  // Suffix variance sums A_t = sum_{i=t..T} sigma^2_i back the diagonal
  // shortcut; A is 1-based with A_{T+1} = 0.
  const int T = sigma_.dim();
  suffix_var_.assign(T + 2, 0.0);
  for (int t = T; t >= 1; --t) suffix_var_[t] = suffix_var_[t + 1] + sigma_(t - 1, t - 1);
}

double GlimModel::gamma_for(double y0) const {
  return normal_quantile(clamp_probability(y0, clamp_)) * std::sqrt(arts_.s[0]);
}

namespace {

void check_horizon(const ProbabilityPath& path, int T, const char* op) {
  if (path.horizon() != T) {
    std::ostringstream msg;
    msg << op << ": path '" << path.id << "' has horizon " << path.horizon() << ", model has "
        << T;
    throw ValidationError(msg.str());
  }
}

}  // namespace

double GlimModel::log_density(const ProbabilityPath& path) const {
  return diagonal_ ? log_density_diagonal(path) : log_density_general(path);
}

double GlimModel::log_density_general(const ProbabilityPath& path) const {
  const int T = horizon();
  check_horizon(path, T, "log_density");
  const int outcome = path.terminal();
  const double gamma = gamma_for(path.y[0]);

  double ll = 0.0;
  std::vector<double> z(T - 1);
  for (int t = 1; t < T; ++t) {
    const Eigen::VectorXd& at = arts_.a[t];
    double weighted_prev = 0.0;  // sum_{i<t} (1 + a_i) z_i under the split at t
    for (int i = 0; i < t - 1; ++i) weighted_prev += (1.0 + at(i)) * z[i];
    const double denom = 1.0 + at(t - 1);
    if (std::abs(denom) < kDegenerateStep) {
      std::ostringstream msg;
      msg << "log_density: degenerate step coefficient at t = " << t;
      throw NumericalError(msg.str());
    }
    const double sqrt_st = std::sqrt(arts_.s[t]);

    double mu_prev = 0.0;  // E[Z_t | z_1..t-1]
    for (int i = 0; i < t - 1; ++i) mu_prev += arts_.mu_row[t - 1](i) * z[i];
    const double sd_prev = std::sqrt(arts_.cond[t - 1](0, 0));

    const double mu_tilde = (gamma + weighted_prev + denom * mu_prev) / sqrt_st;
    const double sd_tilde = std::abs(denom) * sd_prev / sqrt_st;

    const double u = normal_quantile(clamp_probability(path.y[t], clamp_));
    const double r = (u - mu_tilde) / sd_tilde;
    ll += -std::log(sd_tilde) - 0.5 * r * r + 0.5 * u * u;

    z[t - 1] = (sqrt_st * u - weighted_prev - gamma) / denom;
  }

  const double prev = clamp_probability(path.y[T - 1], clamp_);
  ll += outcome == 1 ? std::log(prev) : std::log1p(-prev);
  return ll;
}

double GlimModel::log_density_diagonal(const ProbabilityPath& path) const {
  if (!diagonal_) {
    throw ValidationError("log_density_diagonal: covariance has off-diagonal mass");
  }
  const int T = horizon();
  check_horizon(path, T, "log_density_diagonal");
  const int outcome = path.terminal();

  double ll = 0.0;
  double u_prev = normal_quantile(clamp_probability(path.y[0], clamp_));
  for (int t = 1; t < T; ++t) {
    // A_t / A_{t+1} shrinks the previous probit toward 0 as mass resolves.
    const double mu_tilde = u_prev * std::sqrt(suffix_var_[t] / suffix_var_[t + 1]);
    const double sd_tilde = std::sqrt(sigma_(t - 1, t - 1) / suffix_var_[t + 1]);

    const double u = normal_quantile(clamp_probability(path.y[t], clamp_));
    const double r = (u - mu_tilde) / sd_tilde;
    ll += -std::log(sd_tilde) - 0.5 * r * r + 0.5 * u * u;
    u_prev = u;
  }

  const double prev = clamp_probability(path.y[T - 1], clamp_);
  ll += outcome == 1 ? std::log(prev) : std::log1p(-prev);
  return ll;
}

std::vector<double> GlimModel::recover_latents(const ProbabilityPath& path) const {
  const int T = horizon();
  check_horizon(path, T, "recover_latents");
  const double gamma = gamma_for(path.y[0]);

  std::vector<double> z(T - 1);
  for (int t = 1; t < T; ++t) {
    const Eigen::VectorXd& at = arts_.a[t];
    double weighted_prev = 0.0;
    for (int i = 0; i < t - 1; ++i) weighted_prev += (1.0 + at(i)) * z[i];
    const double denom = 1.0 + at(t - 1);
    if (std::abs(denom) < kDegenerateStep) {
      std::ostringstream msg;
      msg << "recover_latents: degenerate step coefficient at t = " << t;
      throw NumericalError(msg.str());
    }
    const double u = normal_quantile(clamp_probability(path.y[t], clamp_));
    z[t - 1] = (std::sqrt(arts_.s[t]) * u - weighted_prev - gamma) / denom;
  }
  return z;
}

StepParams GlimModel::step_params(double gamma, std::span<const double> z_prefix, int t) const {
  const int T = horizon();
  if (t < 1 || t >= T) throw std::invalid_argument("step_params: need 1 <= t <= T-1");
  if (static_cast<int>(z_prefix.size()) != t - 1) {
    throw std::invalid_argument("step_params: z_prefix must have length t-1");
  }
  const Eigen::VectorXd& at = arts_.a[t];
  double weighted_prev = 0.0;
  for (int i = 0; i < t - 1; ++i) weighted_prev += (1.0 + at(i)) * z_prefix[i];
  const double denom = 1.0 + at(t - 1);
  if (std::abs(denom) < kDegenerateStep) {
    std::ostringstream msg;
    msg << "step_params: degenerate step coefficient at t = " << t;
    throw NumericalError(msg.str());
  }
  const double sqrt_st = std::sqrt(arts_.s[t]);

  double mu_prev = 0.0;
  for (int i = 0; i < t - 1; ++i) mu_prev += arts_.mu_row[t - 1](i) * z_prefix[i];
  const double sd_prev = std::sqrt(arts_.cond[t - 1](0, 0));

  return StepParams{(gamma + weighted_prev + denom * mu_prev) / sqrt_st,
                    std::abs(denom) * sd_prev / sqrt_st};
}

ProbabilityPath GlimModel::path_from_latents(double gamma, std::span<const double> z) const {
  const int T = horizon();
  if (static_cast<int>(z.size()) != T) {
    throw std::invalid_argument("path_from_latents: z must have length T");
  }
  ProbabilityPath path;
  path.y.resize(T + 1);
  path.y[0] = normal_cdf(gamma / std::sqrt(arts_.s[0]));
  for (int t = 1; t < T; ++t) {
    const Eigen::VectorXd& at = arts_.a[t];
    double num = gamma;
    for (int i = 0; i < t; ++i) num += (1.0 + at(i)) * z[i];
    path.y[t] = normal_cdf(num / std::sqrt(arts_.s[t]));
  }
  const double total = gamma + std::accumulate(z.begin(), z.end(), 0.0);
  path.y[T] = total >= 0.0 ? 1.0 : 0.0;  // ties resolve to the positive outcome
  path.terminal_known = true;
  return path;
}

ProbabilityPath GlimModel::sample_path(double y0, RngStream& rng) const {
  const double gamma = gamma_for(y0);
  Eigen::VectorXd z = mvn_sample(Eigen::VectorXd::Zero(horizon()), sigma_, rng);
  ProbabilityPath path = path_from_latents(gamma, std::span<const double>(z.data(), z.size()));
  path.y[0] = y0;  // anchor exactly at the observed start
  return path;
}

}  // namespace glim
