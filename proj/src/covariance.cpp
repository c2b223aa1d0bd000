#include "glim/covariance.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "glim/errors.hpp"
#include "glim/numeric.hpp"

namespace glim {

namespace {

double dot_or_zero(const Eigen::VectorXd& beta, const Eigen::VectorXd& X,
                   const std::string& family) {
  if (beta.size() != X.size()) {
    std::ostringstream msg;
    msg << family << ": beta has " << beta.size() << " entries but X has " << X.size();
    throw ValidationError(msg.str());
  }
  if (beta.size() == 0) return 0.0;
  return beta.dot(X);
}

double checked_exp(double exponent, const std::string& family) {
  // exp overflows past ~709.78; treat it as a domain failure of the profile.
  if (!std::isfinite(exponent) || exponent > 700.0) {
    std::ostringstream msg;
    msg << family << ": variance exponent " << exponent << " overflows";
    throw NumericalError(msg.str());
  }
  return std::exp(exponent);
}

VarianceProfile profile_exp_linear(const CovarianceSpec& spec, const Eigen::VectorXd& X, int T) {
  double bx = dot_or_zero(spec.beta, X, "exp-linear");
  VarianceProfile out;
  out.sigma2.resize(T);
  for (int t = 1; t <= T; ++t) out.sigma2[t - 1] = checked_exp(bx * (t - 1), "exp-linear");
  return out;
}

VarianceProfile profile_sigmoid_scaled(const CovarianceSpec& spec, const Eigen::VectorXd& X,
                                       int T) {
  double rate = spec.c * sigmoid(dot_or_zero(spec.beta, X, "sigmoid-scaled"));
  VarianceProfile out;
  out.sigma2.resize(T);
  for (int t = 1; t <= T; ++t) out.sigma2[t - 1] = checked_exp(rate * (t - 1), "sigmoid-scaled");
  return out;
}

VarianceProfile profile_quadratic_softplus(const CovarianceSpec& spec, const Eigen::VectorXd& X,
                                           int T) {
  if (static_cast<int>(spec.c_t.size()) < T && !spec.c_t.empty()) {
    std::ostringstream msg;
    msg << "quadratic-softplus: c_t has " << spec.c_t.size() << " entries, need at least " << T;
    throw ValidationError(msg.str());
  }
  double a = softplus(dot_or_zero(spec.beta, X, "quadratic-softplus"));
  double b = -spec.p * a;
  VarianceProfile out;
  out.sigma2.resize(T);
  for (int t = 1; t <= T; ++t) {
    double ct = spec.c_t.empty() ? 0.0 : spec.c_t[t - 1];
    double u = static_cast<double>(t - 1);
    out.sigma2[t - 1] = checked_exp(a * u * u + b * u + ct, "quadratic-softplus");
  }
  if (spec.renormalize_first) {
    double s1 = out.sigma2.front();
    for (double& v : out.sigma2) v /= s1;
  }
  return out;
}

std::map<std::string, VarianceFn>& registry() {
  static std::map<std::string, VarianceFn> reg = {
      {"exp-linear", profile_exp_linear},
      {"sigmoid-scaled", profile_sigmoid_scaled},
      {"quadratic-softplus", profile_quadratic_softplus},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_variance_fn(const std::string& name, VarianceFn fn) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(fn);
}

VarianceFn variance_fn_by_name(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::ostringstream msg;
    msg << "unknown variance family '" << name << "' (have:";
    for (const auto& [k, v] : registry()) msg << ' ' << k;
    msg << ')';
    throw ValidationError(msg.str());
  }
  return it->second;
}

std::vector<std::string> registered_variance_fns() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

VarianceProfile variance_profile(const CovarianceSpec& spec, const Eigen::VectorXd& X, int T) {
  if (T < 1) throw ValidationError("variance_profile: horizon must be >= 1");
  VarianceFn fn = variance_fn_by_name(spec.variance_fn);
  VarianceProfile prof = fn(spec, X, T);
  if (static_cast<int>(prof.sigma2.size()) != T) {
    throw NumericalError("variance family '" + spec.variance_fn + "' returned wrong length");
  }
  for (double v : prof.sigma2) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw NumericalError("variance family '" + spec.variance_fn +
                           "' produced a non-positive step variance");
    }
  }
  return prof;
}

CovMatrix build_sigma(const CovarianceSpec& spec, const Eigen::VectorXd& X, int T) {
  if (!(spec.rho > -1.0 && spec.rho < 1.0)) {
    std::ostringstream msg;
    msg << "build_sigma: rho = " << spec.rho << " outside (-1,1)";
    throw ValidationError(msg.str());
  }
  VarianceProfile prof = variance_profile(spec, X, T);
  std::vector<double> sd(T);
  for (int i = 0; i < T; ++i) sd[i] = std::sqrt(prof.sigma2[i]);

  // rho^|i-j| by running product keeps rho = 0 off-diagonals exactly zero.
  std::vector<double> rho_pow(T);
  rho_pow[0] = 1.0;
  for (int k = 1; k < T; ++k) rho_pow[k] = rho_pow[k - 1] * spec.rho;

  Eigen::MatrixXd m(T, T);
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = sd[i] * sd[j] * rho_pow[i - j];
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return CovMatrix(std::move(m));
}

}  // namespace glim
