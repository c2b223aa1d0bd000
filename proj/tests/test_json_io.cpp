#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glim/errors.hpp"
#include "glim/json_io.hpp"

using glim::FitArtifact;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("glim_json_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("latent-model fit artifacts round trip with full precision") {
  TempDir tmp;
  FitArtifact art;
  art.model = "glim";
  art.horizon = 3;
  art.covariate_names = {"x", "windspeed"};

  glim::CovarianceSpec point;
  point.variance_fn = "quadratic-softplus";
  point.beta = Eigen::VectorXd(2);
  point.beta << 0.3, -0.1;
  point.rho = 0.25718273645192837;
  point.c = 0.4;
  point.c_t = {0.1, 0.2, -0.3};
  point.p = 4.7;
  point.renormalize_first = true;
  art.glim.point = point;

  glim::CovarianceSpec draw = point;
  draw.rho = -0.125;
  art.glim.draws = {point, draw};

  art.glim.diagnostics.mode = glim::FitMode::kMcmc;
  art.glim.diagnostics.log_likelihood = -123.45678901234567;
  art.glim.diagnostics.converged = true;
  art.glim.diagnostics.n_paths = 42;
  art.glim.diagnostics.acceptance = {0.31, 0.29};
  art.glim.diagnostics.rhat = {{"rho", 1.01}, {"beta[0]", 1.002}};

  const std::string file = tmp.file("fit.json");
  glim::write_fit_json(art, file);
  const FitArtifact back = glim::read_fit_json(file);

  CHECK(back.model == "glim");
  CHECK(back.horizon == 3);
  CHECK(back.covariate_names == art.covariate_names);
  CHECK(back.glim.point.variance_fn == "quadratic-softplus");
  CHECK(back.glim.point.beta == point.beta);
  CHECK(back.glim.point.rho == point.rho);  // bit-exact through the text form
  CHECK(back.glim.point.c == point.c);
  CHECK(back.glim.point.c_t == point.c_t);
  CHECK(back.glim.point.p == point.p);
  CHECK(back.glim.point.p_lo == point.p_lo);
  CHECK(back.glim.point.p_hi == point.p_hi);
  CHECK(back.glim.point.renormalize_first);
  REQUIRE(back.glim.draws.size() == 2);
  CHECK(back.glim.draws[1].rho == -0.125);
  CHECK(back.glim.diagnostics.mode == glim::FitMode::kMcmc);
  CHECK(back.glim.diagnostics.log_likelihood == art.glim.diagnostics.log_likelihood);
  CHECK(back.glim.diagnostics.converged);
  CHECK(back.glim.diagnostics.n_paths == 42);
  CHECK(back.glim.diagnostics.acceptance == art.glim.diagnostics.acceptance);
  CHECK(back.glim.diagnostics.rhat == art.glim.diagnostics.rhat);
}

TEST_CASE("increment-model artifacts rebuild their factor on read") {
  TempDir tmp;
  FitArtifact art;
  art.model = "mmfe";
  art.horizon = 2;
  Eigen::MatrixXd cov(2, 2);
  cov << 0.04, 0.01, 0.01, 0.09;
  art.mmfe.horizon = 2;
  art.mmfe.increment_cov = cov;

  const std::string file = tmp.file("mmfe.json");
  glim::write_fit_json(art, file);
  const FitArtifact back = glim::read_fit_json(file);
  CHECK(back.model == "mmfe");
  CHECK(back.mmfe.horizon == 2);
  CHECK(back.mmfe.increment_cov == cov);
  // factor of the jittered matrix is recomputed, lower-triangular, consistent
  const Eigen::MatrixXd l = back.mmfe.chol_lower;
  CHECK(l(0, 1) == 0.0);
  const Eigen::MatrixXd rebuilt = l * l.transpose();
  CHECK(std::abs(rebuilt(0, 0) - 0.04) <= 1e-9);
  CHECK(std::abs(rebuilt(1, 1) - 0.09) <= 1e-9);

  // horizon disagreement is rejected
  FitArtifact wrong = art;
  wrong.horizon = 5;
  const std::string bad = tmp.file("mmfe_bad.json");
  glim::write_fit_json(wrong, bad);
  CHECK_THROWS_AS((void)glim::read_fit_json(bad), glim::ValidationError);
}

TEST_CASE("least-squares artifacts round trip") {
  TempDir tmp;
  FitArtifact art;
  art.model = "lr";
  art.horizon = 3;
  art.covariate_names = {"x"};
  art.lr.horizon = 3;
  art.lr.n_covariates = 1;
  Eigen::VectorXd c1(3), c2(3);
  c1 << 0.2, 0.1, 0.4;
  c2 << 0.1, -0.05, 0.6;
  art.lr.coef = {c1, c2};
  art.lr.resid_sd = {0.03, 0.05};

  const std::string file = tmp.file("lr.json");
  glim::write_fit_json(art, file);
  const FitArtifact back = glim::read_fit_json(file);
  CHECK(back.model == "lr");
  CHECK(back.lr.horizon == 3);
  CHECK(back.lr.n_covariates == 1);
  REQUIRE(back.lr.coef.size() == 2);
  CHECK(back.lr.coef[0] == c1);
  CHECK(back.lr.coef[1] == c2);
  CHECK(back.lr.resid_sd == art.lr.resid_sd);
}

TEST_CASE("malformed fit files are named in the error") {
  TempDir tmp;

  FitArtifact unknown;
  unknown.model = "oracle";
  CHECK_THROWS_AS(glim::write_fit_json(unknown, tmp.file("x.json")), glim::ValidationError);

  const std::string garbled = tmp.file("garbled.json");
  std::ofstream(garbled) << "not json {";
  try {
    (void)glim::read_fit_json(garbled);
    FAIL("expected a validation error");
  } catch (const glim::ValidationError& e) {
    CHECK(std::string(e.what()).find("garbled.json") != std::string::npos);
  }

  const std::string partial = tmp.file("partial.json");
  std::ofstream(partial) << R"({"model":"glim","horizon":2,"covariate_names":[]})";
  CHECK_THROWS_AS((void)glim::read_fit_json(partial), glim::ValidationError);

  CHECK_THROWS_AS((void)glim::read_fit_json(tmp.file("absent.json")), glim::ValidationError);
}

TEST_CASE("metrics reports serialize to json and a flat table") {
  TempDir tmp;
  glim::MetricsReport rep;
  rep.samples_per_path = 100;
  rep.calibration_mse_per_t = {0.25, 0.125};
  rep.calibration_mse = 0.1875;
  rep.volatility_mse = 0.0625;
  glim::CoverageCell cell;
  cell.t = 1;
  cell.alpha = 0.5;
  cell.coverage = 0.53125;
  cell.error = 0.03125;
  rep.coverage = {cell};

  const std::string jfile = tmp.file("metrics.json");
  glim::write_metrics_json(rep, jfile);
  std::ifstream in(jfile);
  nlohmann::json j;
  in >> j;
  CHECK(j.at("samples_per_path") == 100);
  CHECK(j.at("mean_calibration_mse").at("per_t") == std::vector<double>{0.25, 0.125});
  CHECK(j.at("mean_calibration_mse").at("aggregate") == 0.1875);
  CHECK(j.at("volatility_mse") == 0.0625);
  REQUIRE(j.at("ci_coverage_error").size() == 1);
  CHECK(j.at("ci_coverage_error")[0].at("t") == 1);
  CHECK(j.at("ci_coverage_error")[0].at("alpha") == 0.5);
  CHECK(j.at("ci_coverage_error")[0].at("coverage") == 0.53125);
  CHECK(j.at("ci_coverage_error")[0].at("error") == 0.03125);

  const std::string cfile = tmp.file("metrics.csv");
  glim::write_metrics_csv(rep, cfile);
  std::ifstream cin(cfile);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(cin, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "metric,t,alpha,value");
  CHECK(lines[1] == "mean_calibration_mse,1,,0.25");
  CHECK(lines[2] == "mean_calibration_mse,2,,0.125");
  CHECK(lines[3] == "mean_calibration_mse,,,0.1875");
  CHECK(lines[4] == "volatility_mse,,,0.0625");
  CHECK(lines[5] == "ci_coverage_error,1,0.5,0.03125");
}
