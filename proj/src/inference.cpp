#include "glim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "glim/errors.hpp"
#include "glim/model.hpp"
#include "glim/numeric.hpp"
#include "glim/rng.hpp"
#include "glim/threading.hpp"

namespace glim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// parameter packing

ParamSpace::ParamSpace(const CovarianceSpec& tmpl) : tmpl_(tmpl) {
  if (tmpl_.rho_free) names_.push_back("rho");
  for (int k = 0; k < tmpl_.beta.size(); ++k) {
    names_.push_back("beta[" + std::to_string(k) + "]");
  }
  if (tmpl_.variance_fn == "quadratic-softplus") names_.push_back("p");
}

Eigen::VectorXd ParamSpace::pack(const CovarianceSpec& spec) const {
  Eigen::VectorXd u(dim());
  int i = 0;
  if (tmpl_.rho_free) {
    if (!(spec.rho > -1.0 && spec.rho < 1.0)) {
      throw ValidationError("ParamSpace::pack: rho outside (-1,1)");
    }
    u(i++) = std::atanh(spec.rho);
  }
  for (int k = 0; k < tmpl_.beta.size(); ++k) u(i++) = spec.beta(k);
  if (tmpl_.variance_fn == "quadratic-softplus") {
    // Pull p into the open interval before the logit so boundary templates pack.
    double w = (spec.p - tmpl_.p_lo) / (tmpl_.p_hi - tmpl_.p_lo);
    w = std::min(std::max(w, 1e-12), 1.0 - 1e-12);
    u(i++) = std::log(w / (1.0 - w));
  }
  return u;
}

CovarianceSpec ParamSpace::unpack(const Eigen::VectorXd& u) const {
  if (u.size() != dim()) throw std::invalid_argument("ParamSpace::unpack: wrong length");
  CovarianceSpec spec = tmpl_;
  int i = 0;
  if (tmpl_.rho_free) {
    // tanh saturates to +-1 in doubles for |u| beyond ~19; keep rho strictly
    // inside (-1,1) so wild proposals become rejected points, not crashes.
    const double r = std::tanh(u(i++));
    spec.rho = std::min(std::max(r, -1.0 + 1e-12), 1.0 - 1e-12);
  }
  for (int k = 0; k < tmpl_.beta.size(); ++k) spec.beta(k) = u(i++);
  if (tmpl_.variance_fn == "quadratic-softplus") {
    spec.p = tmpl_.p_lo + (tmpl_.p_hi - tmpl_.p_lo) * sigmoid(u(i++));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// likelihood

double dataset_log_likelihood(const CovarianceSpec& spec, const PathDataset& ds,
                              double probit_clamp) {
  if (ds.paths.empty()) throw ValidationError("dataset_log_likelihood: no paths");

  // One model per distinct covariate row; the conditioning artifacts dominate
  // the cost and are shared by every path in the group.
  std::map<std::string, std::vector<int>> groups;
  for (int i = 0; i < ds.n_paths(); ++i) {
    Eigen::VectorXd x = ds.covariate_row(i);
    std::string key(reinterpret_cast<const char*>(x.data()), x.size() * sizeof(double));
    groups[key].push_back(i);
  }

  double total = 0.0;
  for (const auto& [key, members] : groups) {
    try {
      CovMatrix sigma = build_sigma(spec, ds.covariate_row(members.front()), ds.horizon);
      GlimModel model(std::move(sigma), probit_clamp);
      for (int i : members) total += model.log_density(ds.paths[i]);
    } catch (const NumericalError&) {
      // Rejected point (non-PD, overflow, degenerate step), not a crash.
      return -kInf;
    }
  }
  return std::isnan(total) ? -kInf : total;
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex (objective minimizer in the unconstrained space)

namespace {

struct SimplexOutcome {
  Eigen::VectorXd x;
  double f = kInf;
  bool converged = false;
};

SimplexOutcome nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                           const Eigen::VectorXd& x0, double step, int max_iters, double ftol) {
  const int n = static_cast<int>(x0.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i](i - 1) += step;
  for (int i = 0; i <= n; ++i) fs[i] = fn(xs[i]);

  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  auto sort_vertices = [&] {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  };

  bool converged = false;
  for (int iter = 0; iter < max_iters; ++iter) {
    sort_vertices();
    const int best = order[0], worst = order[n], second_worst = order[n - 1];
    if (std::isfinite(fs[best]) &&
        std::abs(fs[worst] - fs[best]) <= ftol * (std::abs(fs[best]) + ftol)) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= n;

    Eigen::VectorXd xr = centroid + alpha * (centroid - xs[worst]);
    double fr = fn(xr);
    if (fr < fs[best]) {
      Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      double fe = fn(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      Eigen::VectorXd xc = centroid + rho * (xs[worst] - centroid);
      double fc = fn(xc);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + shrink * (xs[i] - xs[best]);
          fs[i] = fn(xs[i]);
        }
      }
    }
  }
  sort_vertices();
  return SimplexOutcome{xs[order[0]], fs[order[0]], converged};
}

PriorSpec prior_for(const FitOptions& opt, const std::string& name) {
  auto it = opt.priors.find(name);
  return it == opt.priors.end() ? PriorSpec{} : it->second;
}

void check_fittable(const PathDataset& ds, const CovarianceSpec& tmpl) {
  if (ds.n_paths() < 3) {
    throw FitError("fit: need at least 3 paths, have " + std::to_string(ds.n_paths()));
  }
  if (tmpl.beta.size() != static_cast<long>(ds.covariate_names.size())) {
    std::ostringstream msg;
    msg << "fit: template beta has " << tmpl.beta.size() << " entries but the dataset carries "
        << ds.covariate_names.size() << " covariates";
    throw FitError(msg.str());
  }
}

}  // namespace

FitResult fit_mle(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt) {
  check_fittable(ds, tmpl);
  ParamSpace ps(tmpl);
  if (ps.dim() == 0) throw FitError("fit: no free parameters");

  auto objective = [&](const Eigen::VectorXd& u) {
    double ll = dataset_log_likelihood(ps.unpack(u), ds, opt.probit_clamp);
    return std::isfinite(ll) ? -ll : kInf;
  };

  struct Restart {
    SimplexOutcome out;
  };
  std::vector<Restart> runs(std::max(opt.restarts, 1));
  parallel_for(static_cast<int>(runs.size()), opt.threads, [&](int r) {
    Eigen::VectorXd u0;
    if (r == 0) {
      u0 = ps.pack(tmpl);
    } else {
      RngStream rng(opt.seed, "mle-restart", static_cast<std::uint64_t>(r));
      u0.resize(ps.dim());
      for (int i = 0; i < ps.dim(); ++i) {
        PriorSpec prior = prior_for(opt, ps.names()[i]);
        u0(i) = prior.loc + prior.scale * rng.gauss();
      }
    }
    runs[r].out = nelder_mead(objective, u0, 0.25, opt.max_iters, opt.tol);
  });

  int best = 0;
  for (int r = 1; r < static_cast<int>(runs.size()); ++r) {
    if (runs[r].out.f < runs[best].out.f) best = r;
  }
  if (!std::isfinite(runs[best].out.f)) {
    throw FitError("fit: every restart ended at a rejected point");
  }

  FitResult result;
  result.point = ps.unpack(runs[best].out.x);
  result.diagnostics.mode = FitMode::kMle;
  result.diagnostics.log_likelihood = -runs[best].out.f;
  result.diagnostics.converged = runs[best].out.converged;
  result.diagnostics.n_paths = ds.n_paths();
  for (const auto& r : runs) result.diagnostics.restart_objectives.push_back(r.out.f);
  return result;
}

// ---------------------------------------------------------------------------
// adaptive random-walk Metropolis

double split_rhat(const std::vector<std::vector<double>>& chains) {
  // Each chain splits in half; Rhat compares between- to within-half variance.
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    std::size_t n = c.size() / 2;
    if (n < 2) throw std::invalid_argument("split_rhat: need at least 4 draws per chain");
    halves.emplace_back(c.begin(), c.begin() + n);
    halves.emplace_back(c.end() - n, c.end());
  }
  const std::size_t m = halves.size();
  const std::size_t n = halves.front().size();

  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = std::accumulate(halves[j].begin(), halves[j].end(), 0.0) / n;
    grand += means[j];
  }
  grand /= m;

  double b = 0.0;  // between-sequence variance * n
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / (m - 1);

  double w = 0.0;  // mean within-sequence variance
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : halves[j]) s += (v - means[j]) * (v - means[j]);
    w += s / (n - 1);
  }
  w /= m;

  if (w <= 0.0) return b <= 0.0 ? 1.0 : kInf;
  double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

FitResult fit_posterior(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt) {
  check_fittable(ds, tmpl);
  ParamSpace ps(tmpl);
  const int dim = ps.dim();
  if (dim == 0) throw FitError("fit: no free parameters");
  if (opt.chains < 1 || opt.draws < 4) {
    throw FitError("fit: need at least 1 chain and 4 kept draws");
  }

  std::vector<PriorSpec> priors(dim);
  for (int i = 0; i < dim; ++i) priors[i] = prior_for(opt, ps.names()[i]);

  auto log_post = [&](const Eigen::VectorXd& u) {
    double lp = 0.0;
    for (int i = 0; i < dim; ++i) {
      double r = (u(i) - priors[i].loc) / priors[i].scale;
      lp += -0.5 * r * r - std::log(priors[i].scale);
    }
    if (!opt.prior_only) {
      double ll = dataset_log_likelihood(ps.unpack(u), ds, opt.probit_clamp);
      if (!std::isfinite(ll)) return -kInf;
      lp += ll;
    }
    return lp;
  };

  struct Chain {
    std::vector<Eigen::VectorXd> kept;
    double acceptance = 0.0;
  };
  std::vector<Chain> chains(opt.chains);

  parallel_for(opt.chains, opt.threads, [&](int c) {
    RngStream rng(opt.seed, "mcmc-chain", static_cast<std::uint64_t>(c));
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u(i) = priors[i].loc + priors[i].scale * rng.gauss();
    double f = log_post(u);

    double log_step = std::log(opt.init_step);
    const double lo = std::log(1e-4), hi = std::log(50.0);
    int accepted = 0;
    chains[c].kept.reserve(opt.draws);

    for (int iter = 0; iter < opt.warmup + opt.draws; ++iter) {
      Eigen::VectorXd prop(dim);
      const double step = std::exp(log_step);
      for (int i = 0; i < dim; ++i) prop(i) = u(i) + step * priors[i].scale * rng.gauss();
      double fp = log_post(prop);
      double accept_prob = fp > f ? 1.0 : (std::isfinite(fp) ? std::exp(fp - f) : 0.0);
      if (rng.uniform() < accept_prob) {
        u = prop;
        f = fp;
        if (iter >= opt.warmup) ++accepted;
      }
      if (iter < opt.warmup) {
        // Robbins-Monro on the log step: decaying pull toward the target rate,
        // frozen once warmup ends.
        log_step += (accept_prob - opt.target_accept) / std::pow(iter + 1.0, 0.6);
        log_step = std::min(std::max(log_step, lo), hi);
      } else {
        chains[c].kept.push_back(u);
      }
    }
    chains[c].acceptance = static_cast<double>(accepted) / opt.draws;
  });

  FitResult result;
  result.diagnostics.mode = FitMode::kMcmc;
  result.diagnostics.n_paths = ds.n_paths();

  // Split-Rhat per unconstrained coordinate.
  bool converged = true;
  for (int i = 0; i < dim; ++i) {
    std::vector<std::vector<double>> series(opt.chains);
    for (int c = 0; c < opt.chains; ++c) {
      series[c].reserve(opt.draws);
      for (const auto& u : chains[c].kept) series[c].push_back(u(i));
    }
    double r = split_rhat(series);
    result.diagnostics.rhat[ps.names()[i]] = r;
    if (!(r < 1.05)) converged = false;
  }
  result.diagnostics.converged = converged;
  for (const auto& c : chains) result.diagnostics.acceptance.push_back(c.acceptance);

  // Point estimate: mean of the constrained draws; draws are kept in
  // constrained form as well.
  CovarianceSpec point = tmpl;
  double rho_sum = 0.0, p_sum = 0.0;
  Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(tmpl.beta.size());
  std::size_t total = 0;
  for (const auto& chain : chains) {
    for (const auto& u : chain.kept) {
      CovarianceSpec s = ps.unpack(u);
      result.draws.push_back(s);
      rho_sum += s.rho;
      p_sum += s.p;
      beta_sum += s.beta;
      ++total;
    }
  }
  if (tmpl.rho_free) point.rho = rho_sum / total;
  point.beta = beta_sum / total;
  if (tmpl.variance_fn == "quadratic-softplus") point.p = p_sum / total;
  result.point = point;
  result.diagnostics.log_likelihood = dataset_log_likelihood(point, ds, opt.probit_clamp);
  return result;
}

FitResult fit(const PathDataset& ds, const CovarianceSpec& tmpl, const FitOptions& opt) {
  return opt.mode == FitMode::kMle ? fit_mle(ds, tmpl, opt) : fit_posterior(ds, tmpl, opt);
}

}  // namespace glim
