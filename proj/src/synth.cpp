#include "glim/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "glim/csv.hpp"
#include "glim/errors.hpp"
#include "glim/model.hpp"
#include "glim/threading.hpp"

namespace glim {

namespace {

std::string path_id_for(int index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%06d", index);
  return buf;
}

}  // namespace

PathDataset generate_dataset(const SynthSpec& spec) {
  if (spec.horizon < 1) throw ValidationError("generate_dataset: horizon must be >= 1");
  if (spec.n_paths < 1) throw ValidationError("generate_dataset: need at least one path");
  if (!(spec.y0 > 0.0 && spec.y0 < 1.0)) {
    throw ValidationError("generate_dataset: y0 must lie strictly inside (0,1)");
  }

  PathDataset ds;
  ds.horizon = spec.horizon;
  ds.covariate_names = {"x"};
  ds.covariates.resize(spec.n_paths, 1);
  for (int i = 0; i < spec.n_paths; ++i) {
    ds.covariates(i, 0) =
        spec.scheme == CovariateScheme::kConstantOne ? 1.0 : (i < spec.n_paths / 2 ? 0.0 : 1.0);
  }

  // One latent model per distinct covariate value; construction is the
  // expensive part and the sampler itself is read-only afterwards.
  std::map<double, std::shared_ptr<const GlimModel>> models;
  for (int i = 0; i < spec.n_paths; ++i) {
    double x = ds.covariates(i, 0);
    if (!models.count(x)) {
      Eigen::VectorXd xv(1);
      xv << x;
      models[x] = std::make_shared<const GlimModel>(build_sigma(spec.cov, xv, spec.horizon),
                                                    spec.probit_clamp);
    }
  }

  ds.paths.resize(spec.n_paths);
  parallel_for(spec.n_paths, spec.threads, [&](int i) {
    RngStream rng(spec.seed, "synth-path", static_cast<std::uint64_t>(i));
    ProbabilityPath p = models.at(ds.covariates(i, 0))->sample_path(spec.y0, rng);
    p.id = path_id_for(i);
    ds.paths[i] = std::move(p);
  });

  validate_dataset(ds);
  return ds;
}

std::vector<RecoveryCell> run_recovery(const RecoveryOptions& opt) {
  if (opt.replicates < 1) throw ValidationError("run_recovery: need at least one replicate");
  const int n_cells = static_cast<int>(opt.beta_grid.size() * opt.rho_grid.size());
  const int n_tasks = n_cells * opt.replicates;

  struct TaskResult {
    bool ok = false;
    double beta_hat = 0.0;
    double rho_hat = 0.0;
  };
  std::vector<TaskResult> results(n_tasks);

  parallel_for(n_tasks, opt.threads, [&](int k) {
    const int cell = k / opt.replicates;
    const double beta_true = opt.beta_grid[cell / opt.rho_grid.size()];
    const double rho_true = opt.rho_grid[cell % opt.rho_grid.size()];

    SynthSpec synth;
    synth.horizon = opt.horizon;
    synth.n_paths = opt.paths_per_set;
    synth.y0 = opt.y0;
    synth.scheme = CovariateScheme::kBinaryHalf;
    synth.probit_clamp = opt.fit.probit_clamp;
    synth.cov.variance_fn = "exp-linear";
    synth.cov.beta = Eigen::VectorXd::Constant(1, beta_true);
    synth.cov.rho = rho_true;
    synth.seed = derive_seed(opt.seed, "recover-data", static_cast<std::uint64_t>(k));
    synth.threads = 1;

    try {
      PathDataset ds = generate_dataset(synth);
      CovarianceSpec tmpl;
      tmpl.variance_fn = "exp-linear";
      tmpl.beta = Eigen::VectorXd::Zero(1);
      FitOptions fopt = opt.fit;
      fopt.seed = derive_seed(opt.seed, "recover-fit", static_cast<std::uint64_t>(k));
      fopt.threads = 1;
      FitResult fr = fit(ds, tmpl, fopt);
      results[k].ok = true;
      results[k].beta_hat = fr.point.beta(0);
      results[k].rho_hat = fr.point.rho;
    } catch (const std::exception&) {
      results[k].ok = false;  // failed replicates count against n_ok only
    }
  });

  std::vector<RecoveryCell> cells(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    RecoveryCell& cell = cells[c];
    cell.beta_true = opt.beta_grid[c / opt.rho_grid.size()];
    cell.rho_true = opt.rho_grid[c % opt.rho_grid.size()];

    std::vector<double> bs, rs;
    for (int r = 0; r < opt.replicates; ++r) {
      const TaskResult& tr = results[c * opt.replicates + r];
      if (tr.ok) {
        bs.push_back(tr.beta_hat);
        rs.push_back(tr.rho_hat);
      }
    }
    cell.n_ok = static_cast<int>(bs.size());
    auto mean_sd = [](const std::vector<double>& xs, double& mean, double& sd) {
      mean = 0.0;
      sd = 0.0;
      if (xs.empty()) return;
      for (double x : xs) mean += x;
      mean /= xs.size();
      if (xs.size() < 2) return;
      for (double x : xs) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / (xs.size() - 1));
    };
    mean_sd(bs, cell.beta_hat_mean, cell.beta_hat_sd);
    mean_sd(rs, cell.rho_hat_mean, cell.rho_hat_sd);
  }
  return cells;
}

void write_recovery_csv(const std::vector<RecoveryCell>& cells, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << "beta_true,rho_true,beta_hat_mean,beta_hat_sd,rho_hat_mean,rho_hat_sd,n_ok\n";
  for (const auto& c : cells) {
    out << format_double(c.beta_true) << ',' << format_double(c.rho_true) << ','
        << format_double(c.beta_hat_mean) << ',' << format_double(c.beta_hat_sd) << ','
        << format_double(c.rho_hat_mean) << ',' << format_double(c.rho_hat_sd) << ',' << c.n_ok
        << '\n';
  }
}

}  // namespace glim
