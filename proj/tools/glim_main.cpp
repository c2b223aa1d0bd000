// Command-line front end: validate / fit / simulate / evaluate / synth /
// recover over the probability-path CSV and JSON artifact formats.
//
// Every configuration key can live in a flat "key = value" config file
// (--config) and every key is overridable on the command line as --<dotted.key>
// <value>. Dedicated flags (--paths, --model, --samples, --seed, --threads,
// --clamp) are aliases for the top-level keys of the same name.
//
// Exit codes: 0 ok, 2 input/validation error, 3 fit did not converge (artifact
// is still written), 4 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "glim/baselines.hpp"
#include "glim/config.hpp"
#include "glim/covariance.hpp"
#include "glim/csv.hpp"
#include "glim/errors.hpp"
#include "glim/inference.hpp"
#include "glim/json_io.hpp"
#include "glim/metrics.hpp"
#include "glim/model.hpp"
#include "glim/paths.hpp"
#include "glim/rng.hpp"
#include "glim/synth.hpp"
#include "glim/threading.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct Args {
  std::string config;
  std::string paths;
  std::string covariates;
  std::string fit_file;
  std::string ensemble;
  std::string out;
  std::string model;
  int samples = 100;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  double clamp = 1e-9;
  bool full_grid = false;
};

// Leftover tokens must be --dotted.key value or --dotted.key=value; they are
// applied to the config after the file so the command line wins.
void apply_dotted_overrides(glim::Config& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0) {
      throw glim::ValidationError("unrecognized argument '" + tok + "'");
    }
    tok = tok.substr(2);
    std::string key;
    std::string value;
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      key = tok.substr(0, eq);
      value = tok.substr(eq + 1);
    } else {
      key = tok;
      if (++i >= extras.size()) {
        throw glim::ValidationError("flag '--" + key + "' needs a value");
      }
      value = extras[i];
    }
    if (key.find('.') == std::string::npos) {
      throw glim::ValidationError("unknown flag '--" + key + "'");
    }
    cfg.set(key, value);
  }
}

glim::Config assemble_config(const CLI::App* sub, const Args& args) {
  glim::Config cfg;
  if (!args.config.empty()) cfg = glim::Config::from_file(args.config);
  apply_dotted_overrides(cfg, sub->remaining());
  const auto given = [&](const char* flag) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--model")) cfg.set("model", args.model);
  if (given("--samples")) cfg.set("samples", std::to_string(args.samples));
  if (given("--seed")) cfg.set("seed", std::to_string(args.seed));
  if (given("--threads")) cfg.set("threads", std::to_string(args.threads));
  if (given("--clamp")) cfg.set("clamp", glim::format_double(args.clamp));
  return cfg;
}

glim::PathDataset load_dataset(const std::string& paths_file, const std::string& cov_file) {
  glim::PathDataset ds = glim::read_paths_csv(paths_file);
  if (!cov_file.empty()) glim::attach_covariates_csv(ds, cov_file);
  glim::validate_dataset(ds);
  return ds;
}

// Models that condition on covariates fall back to a single constant column
// when no covariates file was supplied.
void ensure_default_covariates(glim::PathDataset& ds) {
  if (!ds.covariate_names.empty()) return;
  ds.covariate_names = {"const"};
  ds.covariates = Eigen::MatrixXd::Ones(ds.n_paths(), 1);
}

glim::CovarianceSpec cov_from_config(const glim::Config& cfg, int n_covariates) {
  glim::CovarianceSpec spec;
  spec.variance_fn = cfg.get_string("cov.variance_fn", spec.variance_fn);
  std::vector<double> beta = cfg.get_double_list("cov.beta", {});
  if (beta.empty()) beta.assign(static_cast<std::size_t>(n_covariates), 0.0);
  if (static_cast<int>(beta.size()) != n_covariates) {
    throw glim::ValidationError("cov.beta has " + std::to_string(beta.size()) +
                                " entries but the dataset has " + std::to_string(n_covariates) +
                                " covariate column(s)");
  }
  spec.beta = Eigen::VectorXd(n_covariates);
  for (int k = 0; k < n_covariates; ++k) spec.beta(k) = beta[static_cast<std::size_t>(k)];
  spec.rho = cfg.get_double("cov.rho", spec.rho);
  spec.rho_free = cfg.get_bool("cov.rho_free", spec.rho_free);
  spec.c = cfg.get_double("cov.c", spec.c);
  spec.c_t = cfg.get_double_list("cov.c_t", spec.c_t);
  spec.p = cfg.get_double("cov.p", spec.p);
  spec.p_lo = cfg.get_double("cov.p_lo", spec.p_lo);
  spec.p_hi = cfg.get_double("cov.p_hi", spec.p_hi);
  spec.renormalize_first = cfg.get_bool("cov.renormalize_first", spec.renormalize_first);
  return spec;
}

glim::FitOptions fit_options_from_config(const glim::Config& cfg) {
  glim::FitOptions opt;
  const std::string mode = cfg.get_string("fit.mode", "mle");
  if (mode == "mle") {
    opt.mode = glim::FitMode::kMle;
  } else if (mode == "mcmc") {
    opt.mode = glim::FitMode::kMcmc;
  } else {
    throw glim::ValidationError("fit.mode must be 'mle' or 'mcmc', got '" + mode + "'");
  }
  opt.restarts = cfg.get_int("fit.restarts", opt.restarts);
  opt.max_iters = cfg.get_int("fit.max_iters", opt.max_iters);
  opt.tol = cfg.get_double("fit.tol", opt.tol);
  opt.chains = cfg.get_int("fit.chains", opt.chains);
  opt.warmup = cfg.get_int("fit.warmup", opt.warmup);
  opt.draws = cfg.get_int("fit.draws", opt.draws);
  opt.target_accept = cfg.get_double("fit.target_accept", opt.target_accept);
  opt.init_step = cfg.get_double("fit.init_step", opt.init_step);
  opt.prior_only = cfg.get_bool("fit.prior_only", opt.prior_only);
  for (const auto& [key, value] : cfg.entries()) {
    (void)value;
    const std::string prefix = "fit.prior.";
    if (key.rfind(prefix, 0) != 0) continue;
    std::string rest = key.substr(prefix.size());
    std::string field;
    for (const char* suffix : {".loc", ".scale"}) {
      const std::string s = suffix;
      if (rest.size() > s.size() && rest.compare(rest.size() - s.size(), s.size(), s) == 0) {
        field = s;
        rest = rest.substr(0, rest.size() - s.size());
        break;
      }
    }
    if (field.empty()) {
      throw glim::ValidationError("prior key '" + key + "' must end in .loc or .scale");
    }
    glim::PriorSpec& prior = opt.priors[rest];
    if (field == ".loc") {
      prior.loc = cfg.get_double(key, prior.loc);
    } else {
      prior.scale = cfg.get_double(key, prior.scale);
    }
  }
  opt.seed = cfg.get_u64("seed", kDefaultSeed);
  opt.threads = cfg.get_int("threads", 1);
  opt.probit_clamp = cfg.get_double("clamp", 1e-9);
  return opt;
}

std::vector<int> checkpoints_from_config(const glim::Config& cfg, int horizon) {
  const std::vector<double> raw = cfg.get_double_list("eval.checkpoints", {});
  if (raw.empty()) return glim::default_checkpoints(horizon);
  std::vector<int> out;
  for (double v : raw) {
    const int t = static_cast<int>(v);
    if (static_cast<double>(t) != v) {
      throw glim::ValidationError("eval.checkpoints entries must be integers");
    }
    out.push_back(t);
  }
  return out;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int run_validate(const Args& args) {
  const glim::PathDataset ds = load_dataset(args.paths, args.covariates);
  std::cout << "[validate] ok: " << ds.n_paths() << " path(s), horizon " << ds.horizon << ", "
            << ds.covariate_names.size() << " covariate column(s)";
  for (const auto& name : ds.covariate_names) std::cout << " " << name;
  std::cout << "\n";
  return 0;
}

int run_fit(const CLI::App* sub, const Args& args) {
  const glim::Config cfg = assemble_config(sub, args);
  glim::PathDataset ds = load_dataset(args.paths, args.covariates);
  const std::string model = cfg.get_string("model", "glim");

  glim::FitArtifact art;
  art.horizon = ds.horizon;
  int rc = 0;
  if (model == "glim") {
    ensure_default_covariates(ds);
    art.model = "glim";
    art.covariate_names = ds.covariate_names;
    const glim::CovarianceSpec tmpl =
        cov_from_config(cfg, static_cast<int>(ds.covariate_names.size()));
    const glim::FitOptions opt = fit_options_from_config(cfg);
    art.glim = glim::fit(ds, tmpl, opt);
    const auto& d = art.glim.diagnostics;
    std::cout << "[fit] glim " << (d.mode == glim::FitMode::kMle ? "mle" : "mcmc")
              << ": log_likelihood=" << glim::format_double(d.log_likelihood)
              << " converged=" << (d.converged ? "yes" : "no") << " paths=" << d.n_paths << "\n";
    std::cout << "[fit] point: variance_fn=" << art.glim.point.variance_fn << " beta=";
    for (int k = 0; k < art.glim.point.beta.size(); ++k) {
      if (k > 0) std::cout << ",";
      std::cout << glim::format_double(art.glim.point.beta(k));
    }
    std::cout << " rho=" << glim::format_double(art.glim.point.rho) << "\n";
    if (!d.converged) {
      std::cerr << "warning: fit did not converge; artifact written anyway\n";
      rc = 3;
    }
  } else if (model == "mmfe") {
    art.model = "mmfe";
    art.covariate_names = ds.covariate_names;
    art.mmfe = glim::mmfe_fit(ds);
    std::cout << "[fit] mmfe: " << ds.n_paths() << " paths, " << art.mmfe.horizon
              << "-dimensional increment covariance\n";
  } else if (model == "lr") {
    // no constant-column fallback here: the per-step regressions already
    // carry an intercept, a const covariate would be collinear with it
    art.model = "lr";
    art.covariate_names = ds.covariate_names;
    art.lr = glim::lr_fit(ds);
    std::cout << "[fit] lr: " << (art.lr.horizon - 1) << " per-step regressions on "
              << art.lr.n_covariates << " covariate(s)\n";
  } else {
    throw glim::ValidationError("unknown model '" + model + "' (expected glim, mmfe, or lr)");
  }

  const std::string file = out_path(args.out, "fit.json");
  glim::write_fit_json(art, file);
  std::cout << "[fit] wrote " << file << "\n";
  return rc;
}

int run_simulate(const CLI::App* sub, const Args& args) {
  const glim::Config cfg = assemble_config(sub, args);
  const glim::FitArtifact art = glim::read_fit_json(args.fit_file);
  if (cfg.has("model") && cfg.get_string("model", "") != art.model) {
    throw glim::ValidationError("fit artifact holds model '" + art.model + "' but '" +
                                cfg.get_string("model", "") + "' was requested");
  }
  glim::PathDataset ds = load_dataset(args.paths, args.covariates);
  if (ds.horizon != art.horizon) {
    throw glim::ValidationError("dataset horizon " + std::to_string(ds.horizon) +
                                " does not match fit artifact horizon " +
                                std::to_string(art.horizon));
  }
  const int samples = cfg.get_int("samples", 100);
  if (samples < 2) throw glim::ValidationError("samples must be >= 2");
  const std::uint64_t seed = cfg.get_u64("seed", kDefaultSeed);
  const int threads = cfg.get_int("threads", 1);
  const double clamp = cfg.get_double("clamp", 1e-9);
  const int n = ds.n_paths();
  const int horizon = ds.horizon;

  if (art.model == "glim") ensure_default_covariates(ds);
  if (art.model == "glim" || art.model == "lr") {
    if (ds.covariate_names != art.covariate_names) {
      throw glim::ValidationError("covariate columns do not match the fit artifact");
    }
  }

  glim::SimulationEnsemble ens;
  ens.horizon = horizon;
  ens.samples_per_path = samples;
  ens.entries.resize(static_cast<std::size_t>(n));

  glim::parallel_for(n, threads, [&](int i) {
    glim::RngStream rng(seed, "simulate-path", static_cast<std::uint64_t>(i));
    auto& entry = ens.entries[static_cast<std::size_t>(i)];
    entry.path_id = ds.paths[static_cast<std::size_t>(i)].id;
    entry.y0 = ds.paths[static_cast<std::size_t>(i)].y0();
    entry.samples.reserve(static_cast<std::size_t>(samples));
    if (art.model == "glim") {
      const Eigen::VectorXd x = ds.covariate_row(i);
      // one latent model per distinct posterior draw used on this path
      std::map<std::size_t, std::unique_ptr<glim::GlimModel>> cache;
      const std::size_t n_draws = art.glim.draws.size();
      for (int m = 0; m < samples; ++m) {
        const std::size_t idx =
            n_draws == 0 ? static_cast<std::size_t>(-1) : rng.next_u64() % n_draws;
        auto it = cache.find(idx);
        if (it == cache.end()) {
          const glim::CovarianceSpec& spec =
              n_draws == 0 ? art.glim.point : art.glim.draws[idx];
          it = cache
                   .emplace(idx, std::make_unique<glim::GlimModel>(
                                     glim::build_sigma(spec, x, horizon), clamp))
                   .first;
        }
        entry.samples.push_back(it->second->sample_path(entry.y0, rng));
      }
    } else if (art.model == "mmfe") {
      for (int m = 0; m < samples; ++m) {
        entry.samples.push_back(glim::mmfe_sample(art.mmfe, entry.path_id, entry.y0, clamp, rng));
      }
    } else {
      const Eigen::VectorXd x = ds.covariate_row(i);
      for (int m = 0; m < samples; ++m) {
        entry.samples.push_back(glim::lr_sample(art.lr, entry.path_id, entry.y0, x, clamp, rng));
      }
    }
  });

  glim::validate_ensemble(ens);
  const std::string file = out_path(args.out, "ensemble.csv");
  glim::write_ensemble_csv(ens, file);
  std::cout << "[simulate] wrote " << file << " (" << n << " path(s) x " << samples
            << " sample(s), horizon " << horizon << ")\n";
  return 0;
}

int run_evaluate(const CLI::App* sub, const Args& args) {
  const glim::Config cfg = assemble_config(sub, args);
  const glim::SimulationEnsemble ens = glim::read_ensemble_csv(args.ensemble);
  const glim::PathDataset obs = load_dataset(args.paths, "");
  const std::vector<int> checkpoints = checkpoints_from_config(cfg, ens.horizon);
  const std::vector<double> alphas =
      cfg.get_double_list("eval.alphas", {0.5, 0.8, 0.9, 0.95});
  const glim::MetricsReport rep = glim::evaluate_ensemble(ens, obs, checkpoints, alphas);

  const std::string jfile = out_path(args.out, "metrics.json");
  const std::string cfile = out_path(args.out, "metrics.csv");
  glim::write_metrics_json(rep, jfile);
  glim::write_metrics_csv(rep, cfile);

  double worst = 0.0;
  for (const auto& cell : rep.coverage) worst = std::max(worst, std::abs(cell.error));
  std::cout << "[evaluate] mean_calibration_mse=" << glim::format_double(rep.calibration_mse)
            << " volatility_mse=" << glim::format_double(rep.volatility_mse)
            << " max|coverage error|=" << glim::format_double(worst) << "\n";
  std::cout << "[evaluate] wrote " << jfile << " and " << cfile << "\n";
  return 0;
}

int run_synth(const CLI::App* sub, const Args& args) {
  const glim::Config cfg = assemble_config(sub, args);
  glim::SynthSpec spec;
  spec.horizon = cfg.get_int("synth.horizon", spec.horizon);
  spec.n_paths = cfg.get_int("synth.n_paths", spec.n_paths);
  spec.y0 = cfg.get_double("synth.y0", spec.y0);
  const std::string scheme = cfg.get_string("synth.scheme", "binary-half");
  if (scheme == "binary-half") {
    spec.scheme = glim::CovariateScheme::kBinaryHalf;
  } else if (scheme == "const-one") {
    spec.scheme = glim::CovariateScheme::kConstantOne;
  } else {
    throw glim::ValidationError("synth.scheme must be 'binary-half' or 'const-one', got '" +
                                scheme + "'");
  }
  spec.cov = cov_from_config(cfg, 1);
  spec.probit_clamp = cfg.get_double("clamp", 1e-9);
  spec.seed = cfg.get_u64("seed", kDefaultSeed);
  spec.threads = cfg.get_int("threads", 1);

  const glim::PathDataset ds = glim::generate_dataset(spec);
  const std::string pfile = out_path(args.out, "paths.csv");
  const std::string cfile = out_path(args.out, "covariates.csv");
  glim::write_paths_csv(ds, pfile);
  glim::write_covariates_csv(ds, cfile);
  std::cout << "[synth] wrote " << pfile << " and " << cfile << " (" << ds.n_paths()
            << " path(s), horizon " << ds.horizon << ")\n";
  return 0;
}

int run_recover(const CLI::App* sub, const Args& args) {
  const glim::Config cfg = assemble_config(sub, args);
  glim::RecoveryOptions opt;
  opt.beta_grid = cfg.get_double_list("recover.beta_grid", opt.beta_grid);
  opt.rho_grid = cfg.get_double_list("recover.rho_grid", opt.rho_grid);
  opt.replicates = cfg.get_int("recover.replicates", opt.replicates);
  opt.paths_per_set = cfg.get_int("recover.paths_per_set", opt.paths_per_set);
  opt.horizon = cfg.get_int("recover.horizon", opt.horizon);
  opt.y0 = cfg.get_double("recover.y0", opt.y0);
  opt.fit = fit_options_from_config(cfg);
  opt.seed = cfg.get_u64("seed", kDefaultSeed);
  opt.threads = cfg.get_int("threads", 1);
  if (args.full_grid) {
    opt.beta_grid = {-0.4, -0.2, 0.0, 0.2, 0.4};
    opt.rho_grid = {-0.4, -0.2, 0.0, 0.2, 0.4};
    opt.replicates = 50;
  }

  const std::vector<glim::RecoveryCell> cells = glim::run_recovery(opt);
  const std::string file = out_path(args.out, "recovery.csv");
  glim::write_recovery_csv(cells, file);
  for (const auto& cell : cells) {
    std::cout << "[recover] beta=" << glim::format_double(cell.beta_true)
              << " rho=" << glim::format_double(cell.rho_true)
              << ": beta_hat=" << glim::format_double(cell.beta_hat_mean) << " (sd "
              << glim::format_double(cell.beta_hat_sd)
              << "), rho_hat=" << glim::format_double(cell.rho_hat_mean) << " (sd "
              << glim::format_double(cell.rho_hat_sd) << "), ok " << cell.n_ok << "/"
              << opt.replicates << "\n";
  }
  std::cout << "[recover] wrote " << file << "\n";
  return 0;
}

void add_common_flags(CLI::App* sub, Args& args, bool with_model) {
  sub->add_option("--config", args.config, "flat key = value config file");
  sub->add_option("--seed", args.seed, "master seed for all derived streams");
  sub->add_option("--threads", args.threads, "worker threads");
  sub->add_option("--clamp", args.clamp, "probability clamp for probit transforms");
  if (with_model) {
    sub->add_option("--model", args.model, "glim, mmfe, or lr")
        ->check(CLI::IsMember({"glim", "mmfe", "lr"}));
  }
  sub->allow_extras();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent-Gaussian probability path modeling toolkit"};
  app.require_subcommand(1);
  Args args;

  CLI::App* validate = app.add_subcommand("validate", "check a paths/covariates CSV pair");
  validate->add_option("--paths", args.paths, "paths CSV")->required();
  validate->add_option("--covariates", args.covariates, "covariates CSV");
  validate->allow_extras();

  CLI::App* fit = app.add_subcommand("fit", "fit a model and write fit.json");
  fit->add_option("--paths", args.paths, "paths CSV")->required();
  fit->add_option("--covariates", args.covariates, "covariates CSV");
  fit->add_option("--out", args.out, "output directory")->required();
  add_common_flags(fit, args, true);

  CLI::App* simulate =
      app.add_subcommand("simulate", "sample continuation ensembles for observed paths");
  simulate->add_option("--fit", args.fit_file, "fit.json from the fit step")->required();
  simulate->add_option("--paths", args.paths, "paths CSV")->required();
  simulate->add_option("--covariates", args.covariates, "covariates CSV");
  simulate->add_option("--out", args.out, "output directory")->required();
  simulate->add_option("--samples", args.samples, "samples per path");
  add_common_flags(simulate, args, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score an ensemble against observations");
  evaluate->add_option("--ensemble", args.ensemble, "ensemble CSV")->required();
  evaluate->add_option("--paths", args.paths, "observed paths CSV")->required();
  evaluate->add_option("--out", args.out, "output directory")->required();
  add_common_flags(evaluate, args, false);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", args.out, "output directory")->required();
  add_common_flags(synth, args, false);

  CLI::App* recover = app.add_subcommand("recover", "parameter recovery sweep");
  recover->add_option("--out", args.out, "output directory")->required();
  recover->add_flag("--full-grid", args.full_grid,
                    "5x5 grid with 50 replicates instead of the reduced sweep");
  add_common_flags(recover, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return run_validate(args);
    if (fit->parsed()) return run_fit(fit, args);
    if (simulate->parsed()) return run_simulate(simulate, args);
    if (evaluate->parsed()) return run_evaluate(evaluate, args);
    if (synth->parsed()) return run_synth(synth, args);
    if (recover->parsed()) return run_recover(recover, args);
  } catch (const glim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const glim::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const glim::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
