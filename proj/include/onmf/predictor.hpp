#pragma once

#include "onmf/learner.hpp"
#include "onmf/solvers.hpp"
#include "onmf/tensor.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace onmf {

struct SchemeConfig {
  LearnerConfig learner;                  // minibatch stage (and shared N, k, r, lambda)
  double online_beta = 4.0;
  double online_lambda_prime = 0.0;       // partial fitting during the online stage
  double extrapolation_lambda_prime = 0.0;
  Index horizon = 30;                     // L
  Index trials = 1;
  // Minibatch stage only sees the first k columns, so every one-step
  // prediction uses data strictly before its target.
  bool strict_causal = false;
  SolverOptions prediction = SolverOptions::sparse_coding();
  unsigned threads = 0;                   // 0: hardware concurrency

  void validate() const;
};

// One-step predictions cover target columns first_target .. T, where column
// T is the first day after the panel. Extrapolations cover T .. T + L - 1.
struct PredictionEnsemble {
  Index first_target = 0;
  std::vector<std::uint64_t> seeds;        // seed of each successful trial
  std::vector<Matrix> one_step_trials;     // each d x (T - k + 1)
  std::vector<Matrix> extrapolation_trials;  // each d x L
  Matrix one_step;                         // mean over trials
  Matrix one_step_std;
  Matrix mean;                             // extrapolation mean, d x L
  Matrix std;                              // population std, d x L
  std::vector<std::pair<std::uint64_t, std::string>> failures;

  // Recomputes the pointwise mean/std from the stored trials.
  void summarize();
  // Applies `fn` to every stored trial value, then re-summarizes. Trials
  // that become non-finite move to `failures`; throws Error if none remain.
  PredictionEnsemble map_values(const std::function<double(double)>& fn) const;
};

// Pointwise mean and population standard deviation of equally-shaped
// matrices.
std::pair<Matrix, Matrix> pointwise_mean_std(const std::vector<Matrix>& samples);

// Codes the last k-1 observations (d x (k-1) context) against the first k-1
// lags of every atom and returns the k-th lag of the fitted combination.
Vector partial_fit_predict(const DictionaryTensor& dictionary, const Matrix& context,
                           double lambda_prime, const SolverOptions& opts);

// Feeds predictions back as context L times; returns d x L.
Matrix recursive_extrapolate(const DictionaryTensor& dictionary, const Matrix& tail, Index horizon,
                             double lambda_prime, const SolverOptions& opts);

// Codes every length-k window of the panel and averages the overlapping
// window reconstructions column by column.
Matrix reconstruct(const DictionaryTensor& dictionary, const TimeSeriesPanel& panel, double lambda,
                   const SolverOptions& opts);

using StepObserver = std::function<void(Index t, const StepResult&)>;

// Minibatch stage for one seed. In strict-causal mode it only sees the first
// k columns. The returned config has its elementwise cap resolved.
LearnedModel initial_model(const TimeSeriesPanel& panel, const SchemeConfig& cfg, std::uint64_t seed,
                           SchemeConfig* resolved = nullptr);

// Online learning over t = k-1 .. T-1 with weight (t+1)^-online_beta,
// starting from `initial`. `observer` sees every step before the next one.
LearnedModel online_pass(LearnedModel initial, const TimeSeriesPanel& panel, const SchemeConfig& cfg,
                         const StepObserver& observer = {});

struct TrialResult {
  LearnedModel model;      // state after the online stage
  Matrix one_step;         // d x (T - k + 1)
  Matrix extrapolation;    // d x L
};

// online_pass with a one-step prediction after every step, then recursive
// extrapolation from the last k-1 columns.
TrialResult run_online_and_extrapolate(LearnedModel initial, const TimeSeriesPanel& panel,
                                       const SchemeConfig& cfg);

// Minibatch stage with the given seed, then run_online_and_extrapolate.
TrialResult run_trial(const TimeSeriesPanel& panel, const SchemeConfig& cfg, std::uint64_t seed);

struct SchemeResult {
  LearnedModel model;  // from the lowest-seed successful trial
  PredictionEnsemble ensemble;
};

// Trials use seeds learner.seed + 0 .. learner.seed + trials - 1 and may run
// in parallel; the reduction is in seed order. Throws only if every trial
// fails.
SchemeResult run_scheme(const TimeSeriesPanel& panel, const SchemeConfig& cfg);

}  // namespace onmf
