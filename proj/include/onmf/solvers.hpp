#pragma once

#include "onmf/tensor.hpp"

#include <limits>
#include <vector>

namespace onmf {

struct SolverOptions {
  int max_iterations = 200;
  // Stop once a full sweep lowers the objective by less than
  // tolerance * |previous objective|.
  double tolerance = 1e-6;
  // Upper bound for dictionary entries; unused by the sparse coder.
  double elementwise_cap = std::numeric_limits<double>::infinity();
  // Keep per-sweep objective values (sparse coder only; the dictionary
  // update always records them).
  bool record_trace = false;

  // Throws ConfigError on max_iterations < 1, tolerance <= 0 or cap <= 0.
  void validate() const;

  static SolverOptions sparse_coding() { return {}; }
  static SolverOptions dictionary(double cap) { return {50, 1e-6, cap, false}; }
};

// Outcome of an iterative solve. A solve that hits max_iterations is not an
// error: the last iterate is returned with converged == false.
struct SolverStatus {
  bool converged = true;
  int iterations = 0;
  double objective = 0.0;
  // Objective decrease produced by the final sweep.
  double last_decrease = 0.0;
};

struct LassoResult {
  Matrix codes;  // r x m, nonnegative
  SolverStatus status;
  // Per column: objective after each sweep, starting with the value at
  // H = 0. Empty unless SolverOptions::record_trace.
  std::vector<std::vector<double>> trace;
};

// ||X - W H||_F^2 + lambda * sum(H).
double lasso_objective(const Matrix& data, const Matrix& dictionary, const Matrix& codes,
                       double lambda);

// Nonnegative L1-penalised least squares, one column of `data` at a time,
// by cyclic coordinate descent with closed-form nonnegative soft
// thresholding. Starts from H = 0; sweep order is ascending atom index.
LassoResult nonneg_lasso(const Matrix& data, const Matrix& dictionary, double lambda,
                         const SolverOptions& opts);

struct DictionaryUpdateResult {
  Tensor3 atoms;
  SolverStatus status;
  // Surrogate objective at the warm start followed by one value per sweep.
  std::vector<double> sweep_objectives;
  // Atoms left untouched because A(j, j) fell below kDeadAtomFloor.
  std::vector<Index> skipped_atoms;
};

inline constexpr double kDeadAtomFloor = 1e-12;

// tr(W A W^T) - 2 tr(B W) for a (dk x r) dictionary W.
double surrogate_objective(const Matrix& dictionary, const Matrix& A, const Matrix& B);

// Minimises the surrogate over 0 <= W <= cap by cyclic block coordinate
// descent on the columns of the unfolded dictionary, warm-started at
// `previous`. Each column step is the exact projected minimiser with the
// other columns held fixed, so the objective never increases.
DictionaryUpdateResult dictionary_update(const Tensor3& previous, const Matrix& A,
                                         const Matrix& B, const SolverOptions& opts);

}  // namespace onmf
