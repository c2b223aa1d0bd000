#pragma once

#include <string>

#include "glim/paths.hpp"

namespace glim {

// Fixed-width formatting for doubles in text outputs ("%.17g": bytes are
// stable across runs and values round-trip exactly).
std::string format_double(double x);

// paths file: header "path_id,t,y", one row per grid point, rows in any
// order. Every path must cover t = 0..T for the common T. Parse errors carry
// 1-based line numbers.
PathDataset read_paths_csv(const std::string& file);
void write_paths_csv(const PathDataset& ds, const std::string& file);

// covariates file: header "path_id,<name>,...". Every path in ds must appear
// exactly once; unknown path ids are errors.
void attach_covariates_csv(PathDataset& ds, const std::string& file);
void write_covariates_csv(const PathDataset& ds, const std::string& file);

// ensemble file: header "path_id,sample_id,t,y", sample_id = 0..M-1.
SimulationEnsemble read_ensemble_csv(const std::string& file);
void write_ensemble_csv(const SimulationEnsemble& ens, const std::string& file);

}  // namespace glim
