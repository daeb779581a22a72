#pragma once

#include "onmf/data.hpp"
#include "onmf/predictor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace onmf {

// Everything a CLI run needs. Defaults reproduce the published experiment:
// N=100, k=6, r=50, lambda=3, M=20, beta=1 (minibatch), beta=4 (online),
// lambda'=0, L=30, 1000 trials, 5-day trailing average and log(x+1).
struct RunConfig {
  std::map<CaseType, std::filesystem::path> inputs;
  std::vector<std::string> countries;
  std::vector<std::string> case_types{"confirmed", "deaths", "recovered"};
  TransformSpec transform;
  SchemeConfig scheme = default_scheme();
  std::filesystem::path output_dir = "onmf-out";
  bool sort_atoms = true;

  static SchemeConfig default_scheme();
};

// Parses and validates a JSON config document. Relative paths resolve
// against `base_dir`. Every failure is a ConfigError whose field() is the
// dotted path of the offending key (e.g. "learner.window").
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Re-checks the cross-field invariants and input-file existence.
void validate_run_config(const RunConfig& cfg);

// JSON echo of the effective configuration (paths as given).
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace onmf
