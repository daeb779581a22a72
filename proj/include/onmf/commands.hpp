#pragma once

#include "onmf/checkpoint.hpp"
#include "onmf/config.hpp"
#include "onmf/predictor.hpp"

#include <filesystem>
#include <optional>

namespace onmf {

struct PreparedPanel {
  TimeSeriesPanel daily;        // daily new cases
  TimeSeriesPanel smoothed;     // after the moving average
  TimeSeriesPanel transformed;  // after the log map; what the model sees
};

// Loads the configured CSVs and builds the case-type-major panel.
PreparedPanel prepare_panel(const RunConfig& cfg);

inline constexpr const char* kCheckpointFile = "model.json";
inline constexpr const char* kImportanceFile = "importance.csv";
inline constexpr const char* kPredictionFile = "predictions.csv";
inline constexpr const char* kReconstructionFile = "reconstruction.csv";
inline constexpr const char* kReconstructionSummaryFile = "reconstruction_summary.csv";

struct LearnOutput {
  Checkpoint checkpoint;
  Importance importance;
  std::filesystem::path checkpoint_path;
  std::filesystem::path importance_path;
};

// Minibatch + online learning with seed learner.seed; writes the checkpoint
// and the importance table (atom_index,importance) into output_dir.
LearnOutput cmd_learn(const RunConfig& cfg);

struct PredictOutput {
  PredictionEnsemble ensemble;  // original units
  std::filesystem::path path;
};

// Full scheme, or online + extrapolation from a checkpoint when one is
// given. Writes date,entity,case_type,kind,value rows with kind in
// {observed, one_step, extrapolated_mean, extrapolated_std}.
PredictOutput cmd_predict(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint);

struct ReconstructOutput {
  Matrix reconstruction;   // model (transformed) units
  Vector relative_errors;  // per row, ||x_hat - x|| / ||x||
  std::filesystem::path path;
  std::filesystem::path summary_path;
};

ReconstructOutput cmd_reconstruct(const RunConfig& cfg, const std::filesystem::path& checkpoint);

// %.17g; shortest text that reads back to the same double.
std::string format_value(double value);

}  // namespace onmf
