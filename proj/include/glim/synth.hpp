#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glim/covariance.hpp"
#include "glim/inference.hpp"
#include "glim/paths.hpp"

namespace glim {

enum class CovariateScheme {
  kConstantOne,  // single covariate column fixed at 1
  kBinaryHalf,   // first half 0, second half 1
};

struct SynthSpec {
  int horizon = 5;
  int n_paths = 500;
  double y0 = 0.5;
  CovarianceSpec cov;
  CovariateScheme scheme = CovariateScheme::kBinaryHalf;
  double probit_clamp = 1e-9;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Ground-truth sampler: one latent model per distinct covariate value, one
// stream per path keyed by (seed, "synth-path", index). Output is identical
// for any thread count.
PathDataset generate_dataset(const SynthSpec& spec);

struct RecoveryCell {
  double beta_true = 0.0;
  double rho_true = 0.0;
  double beta_hat_mean = 0.0;
  double beta_hat_sd = 0.0;
  double rho_hat_mean = 0.0;
  double rho_hat_sd = 0.0;
  int n_ok = 0;
};

struct RecoveryOptions {
  std::vector<double> beta_grid{-0.4, 0.0, 0.4};
  std::vector<double> rho_grid{-0.4, 0.0, 0.4};
  int replicates = 10;
  int paths_per_set = 500;
  int horizon = 5;
  double y0 = 0.5;
  FitOptions fit;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Simulate -> fit over the (beta, rho) grid; failed fits are counted out of
// n_ok, never fatal. Cells come back in grid order (beta outer, rho inner).
std::vector<RecoveryCell> run_recovery(const RecoveryOptions& opt);

void write_recovery_csv(const std::vector<RecoveryCell>& cells, const std::string& file);

}  // namespace glim
