#pragma once

#include <string>
#include <vector>

#include "glim/baselines.hpp"
#include "glim/inference.hpp"
#include "glim/metrics.hpp"

namespace glim {

// fit.json payload, tagged by "model" (glim | mmfe | lr); exactly one of the
// three bodies is meaningful.
struct FitArtifact {
  std::string model = "glim";
  int horizon = 0;
  std::vector<std::string> covariate_names;
  FitResult glim;
  MmfeModel mmfe;
  LrModel lr;
};

void write_fit_json(const FitArtifact& art, const std::string& file);
FitArtifact read_fit_json(const std::string& file);

void write_metrics_json(const MetricsReport& rep, const std::string& file);
// Flat table: metric,t,alpha,value with empty fields where a dimension does
// not apply.
void write_metrics_csv(const MetricsReport& rep, const std::string& file);

}  // namespace glim
