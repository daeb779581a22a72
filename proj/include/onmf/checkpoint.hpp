#pragma once

#include "onmf/learner.hpp"
#include "onmf/tensor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace onmf {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to resume learning or predict from a learned model.
//
// JSON layout (version 1):
//   format      "onmf-checkpoint"
//   version     1
//   d, k, r     dimensions
//   beta, step  aggregate-state fields
//   W           {"shape": [d, k, r], "order": "row-major (entity, lag, atom)", "data": [...]}
//   A           {"shape": [r, r], "order": "row-major", "data": [...]}
//   B           {"shape": [r, d*k], "order": "row-major", "data": [...]}
//   importance  [r]
//   row_labels  [[entity, case_type], ...]
//   config      free-form echo of the run configuration
//
// Doubles are written in shortest round-trip form, so load(save(x)) == x
// bit for bit.
struct Checkpoint {
  LearnedModel model;
  std::vector<RowLabel> labels;
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
// Throws Error on a wrong format tag, unsupported version or shape mismatch.
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace onmf
