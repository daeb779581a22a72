#pragma once

#include "onmf/solvers.hpp"
#include "onmf/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace onmf {

struct LearnerConfig {
  Index memory = 100;      // N: days of history held per step
  Index window = 6;        // k: segment length
  Index atoms = 50;        // r
  double lambda = 3.0;     // sparse-coding L1 weight
  double beta = 1.0;       // learning exponent
  Index minibatch_iterations = 20;  // M
  std::uint64_t seed = 0;
  // Dictionary entry bound; when unset it resolves to
  // kDefaultCapFactor * max|panel| for the panel being learned.
  std::optional<double> elementwise_cap;
  SolverOptions coding = SolverOptions::sparse_coding();
  SolverOptions dictionary = SolverOptions::dictionary(std::numeric_limits<double>::infinity());

  // Throws ConfigError naming the offending field.
  void validate() const;
};

inline constexpr double kDefaultCapFactor = 10.0;

double resolve_cap(const LearnerConfig& cfg, const TimeSeriesPanel& panel);

// Discounted sufficient statistics of past codes. `step` counts the updates
// folded in so far; the next update is weighted by (step + 1)^-beta.
struct AggregateState {
  Matrix A;  // r x r
  Matrix B;  // r x dk
  std::int64_t step = 0;
  double beta = 1.0;

  double next_weight() const;
};

struct StepResult {
  DictionaryTensor dictionary;
  AggregateState state;
  Matrix codes;  // r x (N_eff - k + 1)
  SolverStatus coding_status;
  DictionaryUpdateResult dictionary_update;
};

// One pass of sparse coding, aggregation and dictionary update on the
// Hankel window ending at column t (0-based). The window covers columns
// max(0, t - N + 1) .. t.
StepResult online_step(DictionaryTensor dictionary, AggregateState state,
                       const TimeSeriesPanel& panel, Index t, const LearnerConfig& cfg);

struct LearnedModel {
  DictionaryTensor dictionary;
  AggregateState state;
};

// Uniform(0,1) initialisation of W, A, B from `rng`. A is drawn on and above
// the diagonal and mirrored so it is symmetric. W entries are clipped to cap.
LearnedModel random_initialization(Index d, Index k, Index r, double cap, std::mt19937_64& rng);

// Random initialisation followed by M online steps at window ends drawn
// uniformly from max(k-1, T-N) .. T-1; the j-th step has weight j^-beta.
LearnedModel minibatch_learn(const TimeSeriesPanel& panel, const LearnerConfig& cfg);

struct Importance {
  Vector weights;  // sums to 1
  bool uniform_fallback = false;  // accumulator was all zero
};

Importance importance_metric(const DictionaryTensor& dictionary);

// Atom indices by descending importance; ties keep the original order.
std::vector<Index> importance_order(const DictionaryTensor& dictionary);

DictionaryTensor sort_atoms_by_importance(const DictionaryTensor& dictionary);

// Reorders atoms together with the matching rows/columns of A and rows of B,
// so the permuted model describes the same factorisation.
LearnedModel permute_atoms(const LearnedModel& model, const std::vector<Index>& order);

// Helpers for reproducible draws independent of the standard library's
// distribution implementations.
double uniform_unit(std::mt19937_64& rng);
Index uniform_index(std::mt19937_64& rng, Index lo, Index hi);  // inclusive

}  // namespace onmf
