#include "glim/json_io.hpp"

#include <fstream>

#include <json.hpp>

#include "glim/csv.hpp"
#include "glim/errors.hpp"
#include "glim/gaussian.hpp"

namespace glim {

namespace {

using nlohmann::json;

json spec_to_json(const CovarianceSpec& s) {
  json j;
  j["variance_fn"] = s.variance_fn;
  j["beta"] = std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size());
  j["rho"] = s.rho;
  j["rho_free"] = s.rho_free;
  j["c"] = s.c;
  j["c_t"] = s.c_t;
  j["p"] = s.p;
  j["p_lo"] = s.p_lo;
  j["p_hi"] = s.p_hi;
  j["renormalize_first"] = s.renormalize_first;
  return j;
}

CovarianceSpec spec_from_json(const json& j) {
  CovarianceSpec s;
  s.variance_fn = j.at("variance_fn").get<std::string>();
  auto beta = j.at("beta").get<std::vector<double>>();
  s.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  s.rho = j.at("rho").get<double>();
  s.rho_free = j.at("rho_free").get<bool>();
  s.c = j.at("c").get<double>();
  s.c_t = j.at("c_t").get<std::vector<double>>();
  s.p = j.at("p").get<double>();
  s.p_lo = j.at("p_lo").get<double>();
  s.p_hi = j.at("p_hi").get<double>();
  s.renormalize_first = j.at("renormalize_first").get<bool>();
  return s;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (j.empty()) return Eigen::MatrixXd();
  Eigen::MatrixXd m(j.size(), j.front().size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != static_cast<std::size_t>(m.cols())) {
      throw ValidationError("fit json: ragged matrix");
    }
    for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

void write_fit_json(const FitArtifact& art, const std::string& file) {
  json j;
  j["model"] = art.model;
  j["horizon"] = art.horizon;
  j["covariate_names"] = art.covariate_names;

  if (art.model == "glim") {
    json fit;
    fit["point"] = spec_to_json(art.glim.point);
    json draws = json::array();
    for (const auto& d : art.glim.draws) draws.push_back(spec_to_json(d));
    fit["draws"] = std::move(draws);

    const FitDiagnostics& d = art.glim.diagnostics;
    json diag;
    diag["mode"] = d.mode == FitMode::kMle ? "mle" : "mcmc";
    diag["log_likelihood"] = d.log_likelihood;
    diag["converged"] = d.converged;
    diag["n_paths"] = d.n_paths;
    diag["acceptance"] = d.acceptance;
    diag["rhat"] = d.rhat;
    diag["restart_objectives"] = d.restart_objectives;
    fit["diagnostics"] = std::move(diag);
    j["fit"] = std::move(fit);
  } else if (art.model == "mmfe") {
    j["mmfe"]["increment_cov"] = matrix_to_json(art.mmfe.increment_cov);
  } else if (art.model == "lr") {
    json coef = json::array();
    for (const auto& c : art.lr.coef) {
      coef.push_back(std::vector<double>(c.data(), c.data() + c.size()));
    }
    j["lr"]["coef"] = std::move(coef);
    j["lr"]["resid_sd"] = art.lr.resid_sd;
    j["lr"]["n_covariates"] = art.lr.n_covariates;
  } else {
    throw ValidationError("write_fit_json: unknown model '" + art.model + "'");
  }

  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << j.dump(2) << '\n';
}

FitArtifact read_fit_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open '" + file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(file + ": " + e.what());
  }

  FitArtifact art;
  try {
    art.model = j.at("model").get<std::string>();
    art.horizon = j.at("horizon").get<int>();
    art.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();

    if (art.model == "glim") {
      const json& fit = j.at("fit");
      art.glim.point = spec_from_json(fit.at("point"));
      for (const auto& d : fit.at("draws")) art.glim.draws.push_back(spec_from_json(d));
      const json& diag = fit.at("diagnostics");
      art.glim.diagnostics.mode =
          diag.at("mode").get<std::string>() == "mle" ? FitMode::kMle : FitMode::kMcmc;
      art.glim.diagnostics.log_likelihood = diag.at("log_likelihood").get<double>();
      art.glim.diagnostics.converged = diag.at("converged").get<bool>();
      art.glim.diagnostics.n_paths = diag.at("n_paths").get<int>();
      art.glim.diagnostics.acceptance = diag.at("acceptance").get<std::vector<double>>();
      art.glim.diagnostics.rhat = diag.at("rhat").get<std::map<std::string, double>>();
      art.glim.diagnostics.restart_objectives =
          diag.at("restart_objectives").get<std::vector<double>>();
    } else if (art.model == "mmfe") {
      art.mmfe.horizon = art.horizon;
      art.mmfe.increment_cov = matrix_from_json(j.at("mmfe").at("increment_cov"));
      if (art.mmfe.increment_cov.rows() != art.horizon) {
        throw ValidationError(file + ": increment_cov does not match horizon");
      }
      Eigen::MatrixXd jittered =
          art.mmfe.increment_cov +
          1e-10 * Eigen::MatrixXd::Identity(art.horizon, art.horizon);
      art.mmfe.chol_lower = CovMatrix(std::move(jittered)).cholesky_lower();
    } else if (art.model == "lr") {
      art.lr.horizon = art.horizon;
      art.lr.n_covariates = j.at("lr").at("n_covariates").get<int>();
      for (const auto& c : j.at("lr").at("coef")) {
        auto v = c.get<std::vector<double>>();
        art.lr.coef.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
      }
      art.lr.resid_sd = j.at("lr").at("resid_sd").get<std::vector<double>>();
    } else {
      throw ValidationError(file + ": unknown model '" + art.model + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(file + ": " + e.what());
  }
  return art;
}

void write_metrics_json(const MetricsReport& rep, const std::string& file) {
  json j;
  j["samples_per_path"] = rep.samples_per_path;
  j["mean_calibration_mse"]["per_t"] = rep.calibration_mse_per_t;
  j["mean_calibration_mse"]["aggregate"] = rep.calibration_mse;
  j["volatility_mse"] = rep.volatility_mse;
  json cov = json::array();
  for (const auto& c : rep.coverage) {
    cov.push_back({{"t", c.t}, {"alpha", c.alpha}, {"coverage", c.coverage}, {"error", c.error}});
  }
  j["ci_coverage_error"] = std::move(cov);

  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << j.dump(2) << '\n';
}

void write_metrics_csv(const MetricsReport& rep, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write '" + file + "'");
  out << "metric,t,alpha,value\n";
  for (std::size_t t = 1; t <= rep.calibration_mse_per_t.size(); ++t) {
    out << "mean_calibration_mse," << t << ",," << format_double(rep.calibration_mse_per_t[t - 1])
        << '\n';
  }
  out << "mean_calibration_mse,,," << format_double(rep.calibration_mse) << '\n';
  out << "volatility_mse,,," << format_double(rep.volatility_mse) << '\n';
  for (const auto& c : rep.coverage) {
    out << "ci_coverage_error," << c.t << ',' << format_double(c.alpha) << ','
        << format_double(c.error) << '\n';
  }
}

}  // namespace glim
