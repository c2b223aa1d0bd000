#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "glim/errors.hpp"
#include "glim/gaussian.hpp"
#include "glim/metrics.hpp"
#include "glim/model.hpp"
#include "glim/paths.hpp"
#include "glim/rng.hpp"
#include "support/oracles.hpp"

using glim::EnsemblePathSet;
using glim::PathDataset;
using glim::ProbabilityPath;
using glim::SimulationEnsemble;

namespace {

ProbabilityPath levels(std::string id, std::vector<double> y) {
  ProbabilityPath p;
  p.id = std::move(id);
  p.y = std::move(y);
  p.terminal_known = true;
  return p;
}

}  // namespace

TEST_CASE("nearest-rank quantiles are inclusive order statistics") {
  const std::vector<double> xs = {3.0, 1.0, 2.0, 5.0, 4.0};
  CHECK(glim::quantile_nearest_rank(xs, 0.5) == 3.0);   // rank ceil(2.5) = 3
  CHECK(glim::quantile_nearest_rank(xs, 0.0) == 1.0);   // rank clamps up to 1
  CHECK(glim::quantile_nearest_rank(xs, 1.0) == 5.0);
  CHECK(glim::quantile_nearest_rank(xs, 0.2) == 1.0);   // ceil(1.0) = 1
  CHECK(glim::quantile_nearest_rank(xs, 0.21) == 2.0);  // ceil(1.05) = 2

  const std::vector<double> quad = {10.0, 20.0, 30.0, 40.0};
  CHECK(glim::quantile_nearest_rank(quad, 0.025) == 10.0);
  CHECK(glim::quantile_nearest_rank(quad, 0.975) == 40.0);
  CHECK(glim::quantile_nearest_rank(quad, 0.25) == 10.0);

  CHECK(glim::quantile_nearest_rank({2.0, 2.0, 2.0}, 0.7) == 2.0);
  CHECK_THROWS_AS((void)glim::quantile_nearest_rank({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)glim::quantile_nearest_rank(xs, -0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)glim::quantile_nearest_rank(xs, 1.1), std::invalid_argument);
}

TEST_CASE("default checkpoints cover start, middle, and last interior step") {
  CHECK(glim::default_checkpoints(2) == std::vector<int>{1});
  CHECK(glim::default_checkpoints(3) == std::vector<int>{1, 2});
  CHECK(glim::default_checkpoints(4) == std::vector<int>{1, 2, 3});
  CHECK(glim::default_checkpoints(5) == std::vector<int>{1, 3, 4});
  CHECK(glim::default_checkpoints(10) == std::vector<int>{1, 5, 9});
  CHECK(glim::default_checkpoints(1).empty());
}

TEST_CASE("calibration error squares the gap between sample means and the anchor") {
  SimulationEnsemble ens;
  ens.horizon = 2;
  ens.samples_per_path = 2;
  ens.entries.push_back(
      {"a", 0.5, {levels("a/0", {0.5, 0.6, 1.0}), levels("a/1", {0.5, 0.5, 0.0})}});
  ens.entries.push_back(
      {"b", 0.4, {levels("b/0", {0.4, 0.45, 0.0}), levels("b/1", {0.4, 0.35, 1.0})}});

  const auto mse = glim::mean_calibration_mse(ens);
  REQUIRE(mse.size() == 2);
  // t=1: entry a misses by 0.05, entry b is exact
  CHECK(std::abs(mse[0] - 0.5 * 0.05 * 0.05) <= 1e-12);
  // t=2 (terminal): entry a mean 0.5 hits, entry b mean 0.5 misses by 0.1
  CHECK(std::abs(mse[1] - 0.5 * 0.1 * 0.1) <= 1e-12);
}

TEST_CASE("volatility error compares mean realized volatility to the binary target") {
  SimulationEnsemble ens;
  ens.horizon = 2;
  ens.samples_per_path = 4;
  ens.entries.push_back({"a",
                         0.5,
                         {levels("0", {0.5, 0.7, 1.0}), levels("1", {0.5, 0.3, 0.0}),
                          levels("2", {0.5, 0.5, 1.0}), levels("3", {0.5, 0.5, 0.0})}});
  // Q values: 0.13, 0.13, 0.25, 0.25 -> mean 0.19 vs target 0.25
  CHECK(std::abs(glim::volatility_mse(ens) - 0.0036) <= 1e-12);

  // exact outcome frequencies make the target an exact fixed point:
  // flat interior, 6 of 10 terminal ones at y0 = 0.6
  SimulationEnsemble flat;
  flat.horizon = 2;
  flat.samples_per_path = 10;
  EnsemblePathSet e;
  e.path_id = "p";
  e.y0 = 0.6;
  for (int i = 0; i < 10; ++i) {
    e.samples.push_back(levels(std::to_string(i), {0.6, 0.6, i < 6 ? 1.0 : 0.0}));
  }
  flat.entries.push_back(e);
  CHECK(glim::volatility_mse(flat) <= 1e-15);
}

TEST_CASE("interval coverage counts inclusively at nearest-rank bounds") {
  SimulationEnsemble ens;
  ens.horizon = 2;
  ens.samples_per_path = 10;
  EnsemblePathSet e;
  e.path_id = "p";
  e.y0 = 0.5;
  // dyadic grid i/16 so order statistics are exact doubles
  for (int i = 1; i <= 10; ++i) {
    e.samples.push_back(levels(std::to_string(i), {0.5, i / 16.0, 1.0}));
  }
  ens.entries.push_back(e);

  PathDataset obs;
  obs.horizon = 2;
  obs.paths.push_back(levels("p", {0.5, 9.0 / 16.0, 1.0}));
  obs.covariates = Eigen::MatrixXd::Zero(1, 0);

  // alpha = 0.8: bounds are the 1st and 9th order statistics, 1/16 and 9/16
  auto cells = glim::ci_coverage_error(ens, obs, {1}, {0.8});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].t == 1);
  CHECK(cells[0].alpha == 0.8);
  CHECK(cells[0].coverage == 1.0);  // sits exactly on the upper bound
  CHECK(std::abs(cells[0].error - 0.2) <= 1e-12);

  obs.paths[0].y[1] = 0.7;  // now outside
  CHECK(glim::ci_coverage_error(ens, obs, {1}, {0.8})[0].coverage == 0.0);

  // alpha = 0.5: ranks 3 and 8; an observation on the lower bound counts
  obs.paths[0].y[1] = 3.0 / 16.0;
  CHECK(glim::ci_coverage_error(ens, obs, {1}, {0.5})[0].coverage == 1.0);

  // fractional coverage across several paths
  SimulationEnsemble multi;
  multi.horizon = 2;
  multi.samples_per_path = 10;
  PathDataset obs4;
  obs4.horizon = 2;
  obs4.covariates = Eigen::MatrixXd::Zero(4, 0);
  for (int k = 0; k < 4; ++k) {
    EnsemblePathSet ek;
    ek.path_id = "q" + std::to_string(k);
    ek.y0 = 0.5;
    for (int i = 1; i <= 10; ++i) {
      ek.samples.push_back(levels(std::to_string(i), {0.5, 0.1 * i, 1.0}));
    }
    multi.entries.push_back(ek);
    // three observations inside [0.1, 0.9], one outside
    obs4.paths.push_back(levels(ek.path_id, {0.5, k == 3 ? 0.95 : 0.5, 1.0}));
  }
  const auto frac = glim::ci_coverage_error(multi, obs4, {1}, {0.8});
  CHECK(std::abs(frac[0].coverage - 0.75) <= 1e-12);
  CHECK(std::abs(frac[0].error - (0.75 - 0.8)) <= 1e-12);

  // the terminal step is a legal checkpoint
  CHECK(glim::ci_coverage_error(ens, obs, {2}, {0.8})[0].t == 2);
}

TEST_CASE("coverage contract violations name the offenders") {
  SimulationEnsemble ens;
  ens.horizon = 2;
  ens.samples_per_path = 2;
  ens.entries.push_back({"known", 0.5, {levels("0", {0.5, 0.4, 0.0}), levels("1", {0.5, 0.6, 1.0})}});
  ens.entries.push_back({"ghost", 0.5, {levels("0", {0.5, 0.4, 0.0}), levels("1", {0.5, 0.6, 1.0})}});
  ens.entries.push_back({"phantom", 0.5, {levels("0", {0.5, 0.4, 0.0}), levels("1", {0.5, 0.6, 1.0})}});

  PathDataset obs;
  obs.horizon = 2;
  obs.paths.push_back(levels("known", {0.5, 0.5, 1.0}));
  obs.covariates = Eigen::MatrixXd::Zero(1, 0);

  try {
    (void)glim::ci_coverage_error(ens, obs, {1}, {0.5});
    FAIL("expected a validation error");
  } catch (const glim::ValidationError& err) {
    const std::string what = err.what();
    CHECK(what.find("'ghost'") != std::string::npos);
    CHECK(what.find("'phantom'") != std::string::npos);
    CHECK(what.find("'known'") == std::string::npos);
  }

  SimulationEnsemble ok;
  ok.horizon = 2;
  ok.samples_per_path = 2;
  ok.entries.push_back(ens.entries[0]);

  PathDataset tall;
  tall.horizon = 3;
  tall.paths.push_back(levels("known", {0.5, 0.5, 0.5, 1.0}));
  tall.covariates = Eigen::MatrixXd::Zero(1, 0);
  CHECK_THROWS_AS((void)glim::ci_coverage_error(ok, tall, {1}, {0.5}), glim::ValidationError);

  CHECK_THROWS_AS((void)glim::ci_coverage_error(ok, obs, {0}, {0.5}), glim::ValidationError);
  CHECK_THROWS_AS((void)glim::ci_coverage_error(ok, obs, {3}, {0.5}), glim::ValidationError);
  CHECK_THROWS_AS((void)glim::ci_coverage_error(ok, obs, {1}, {0.0}), glim::ValidationError);
  CHECK_THROWS_AS((void)glim::ci_coverage_error(ok, obs, {1}, {1.0}), glim::ValidationError);
}

TEST_CASE("a correctly specified ensemble scores near its statistical floors") {
  // Observed paths and per-path ensembles drawn from the same law; the report
  // should sit at the Monte Carlo floor of each metric.
  std::vector<double> sig = {0.8, 1.1, 1.5};
  Eigen::MatrixXd s(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s(i, j) = sig[i] * sig[j] * std::pow(0.2, std::abs(i - j));
  }
  const glim::GlimModel model{glim::CovMatrix{s}};
  const double y0 = 0.5;
  const int n = 1000, m = 100;

  PathDataset obs;
  obs.horizon = 3;
  obs.covariates = Eigen::MatrixXd::Zero(n, 0);
  SimulationEnsemble ens;
  ens.horizon = 3;
  ens.samples_per_path = m;

  for (int i = 0; i < n; ++i) {
    glim::RngStream rng(2468u, "metrics-observed", static_cast<std::uint64_t>(i));
    auto path = model.sample_path(y0, rng);
    path.id = "p" + std::to_string(i);
    obs.paths.push_back(path);

    EnsemblePathSet entry;
    entry.path_id = path.id;
    entry.y0 = y0;
    glim::RngStream erng(2468u, "metrics-ensemble", static_cast<std::uint64_t>(i));
    for (int j = 0; j < m; ++j) entry.samples.push_back(model.sample_path(y0, erng));
    ens.entries.push_back(std::move(entry));
  }

  const auto rep = glim::evaluate_ensemble(ens, obs, glim::default_checkpoints(3), {0.5, 0.9});
  CHECK(rep.samples_per_path == m);
  REQUIRE(rep.coverage.size() == 4);  // {1,2} x {0.5,0.9}
  for (const auto& cell : rep.coverage) CHECK(std::abs(cell.error) <= 0.05);

  // calibration floor: Var(mean of m draws of y_t) = Var(y_t) / m
  REQUIRE(rep.calibration_mse_per_t.size() == 3);
  for (int t = 1; t <= 3; ++t) {
    std::vector<double> yt;
    for (const auto& p : obs.paths) yt.push_back(p.y[t]);
    const double sd = oracle::sample_sd(yt);
    const double floor = sd * sd / m;
    CHECK(rep.calibration_mse_per_t[t - 1] <= 2.2 * floor);
    CHECK(rep.calibration_mse_per_t[t - 1] >= 0.4 * floor);
  }
  double grand = 0.0;
  for (double v : rep.calibration_mse_per_t) grand += v;
  CHECK(std::abs(rep.calibration_mse - grand / 3.0) <= 1e-15);

  // volatility floor: Var(mean of m draws of Q) = Var(Q) / m
  std::vector<double> q;
  for (const auto& entry : ens.entries) {
    for (const auto& s2 : entry.samples) q.push_back(glim::realized_volatility(s2));
  }
  const double q_sd = oracle::sample_sd(q);
  const double q_floor = q_sd * q_sd / m;
  CHECK(rep.volatility_mse <= 2.2 * q_floor);
  CHECK(rep.volatility_mse >= 0.4 * q_floor);
}

TEST_CASE("report assembly validates the ensemble first") {
  SimulationEnsemble ragged;
  ragged.horizon = 2;
  ragged.samples_per_path = 2;
  ragged.entries.push_back(
      {"a", 0.5, {levels("0", {0.5, 0.4, 0.0}), levels("1", {0.5, 0.6, 1.0})}});
  ragged.entries.push_back({"b", 0.5, {levels("0", {0.5, 0.4, 0.0})}});  // one sample short

  PathDataset obs;
  obs.horizon = 2;
  obs.paths.push_back(levels("a", {0.5, 0.5, 1.0}));
  obs.paths.push_back(levels("b", {0.5, 0.5, 1.0}));
  obs.covariates = Eigen::MatrixXd::Zero(2, 0);

  CHECK_THROWS_AS((void)glim::evaluate_ensemble(ragged, obs, {1}, {0.5}), glim::ValidationError);
}
