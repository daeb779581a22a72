#include "onmf/solvers.hpp"

#include "onmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onmf {

void SolverOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance", "must be > 0");
  if (!(elementwise_cap > 0.0)) throw ConfigError("elementwise_cap", "must be > 0");
}

namespace {

bool small_decrease(double previous, double current, double tolerance) {
  return previous - current <= tolerance * std::abs(previous);
}

}  // namespace

double lasso_objective(const Matrix& data, const Matrix& dictionary, const Matrix& codes,
                       double lambda) {
  return (data - dictionary * codes).squaredNorm() + lambda * codes.sum();
}

LassoResult nonneg_lasso(const Matrix& data, const Matrix& dictionary, double lambda,
                         const SolverOptions& opts) {
  opts.validate();
  if (data.rows() != dictionary.rows())
    throw DimensionError("nonneg_lasso: data has " + std::to_string(data.rows()) +
                         " rows, dictionary has " + std::to_string(dictionary.rows()));
  if (!(lambda >= 0.0)) throw DomainError("nonneg_lasso: lambda must be >= 0");

  const Index r = dictionary.cols();
  const Index m = data.cols();
  const Matrix gram = dictionary.transpose() * dictionary;
  const Matrix correlation = dictionary.transpose() * data;
  const double half_lambda = 0.5 * lambda;

  LassoResult result;
  result.codes = Matrix::Zero(r, m);
  if (opts.record_trace) result.trace.resize(static_cast<std::size_t>(m));
  result.status = SolverStatus{true, 0, 0.0, 0.0};

  Vector gh(r);
  for (Index col = 0; col < m; ++col) {
    auto h = result.codes.col(col);
    const auto c = correlation.col(col);
    const double data_norm2 = data.col(col).squaredNorm();
    gh.setZero();

    // f(h) = ||x||^2 - 2 c.h + h.G h + lambda sum(h), with gh = G h kept current.
    auto objective = [&] { return data_norm2 - 2.0 * c.dot(h) + h.dot(gh) + lambda * h.sum(); };

    double previous = data_norm2;
    double current = previous;
    bool converged = false;
    int sweeps = 0;
    if (opts.record_trace) result.trace[col].push_back(previous);
    while (sweeps < opts.max_iterations) {
      for (Index j = 0; j < r; ++j) {
        const double gjj = gram(j, j);
        double next = 0.0;
        if (gjj > 0.0) next = std::max(0.0, (c(j) - (gh(j) - gjj * h(j)) - half_lambda) / gjj);
        const double delta = next - h(j);
        if (delta != 0.0) {
          h(j) = next;
          gh.noalias() += gram.col(j) * delta;
        }
      }
      ++sweeps;
      current = objective();
      if (opts.record_trace) result.trace[col].push_back(current);
      if (small_decrease(previous, current, opts.tolerance)) {
        converged = true;
        break;
      }
      previous = current;
    }
    result.status.converged = result.status.converged && converged;
    result.status.iterations = std::max(result.status.iterations, sweeps);
    result.status.objective += current;
    result.status.last_decrease = std::max(result.status.last_decrease, previous - current);
  }
  return result;
}

double surrogate_objective(const Matrix& dictionary, const Matrix& A, const Matrix& B) {
  return ((dictionary.transpose() * dictionary).cwiseProduct(A)).sum() -
         2.0 * (B * dictionary).trace();
}

DictionaryUpdateResult dictionary_update(const Tensor3& previous, const Matrix& A,
                                         const Matrix& B, const SolverOptions& opts) {
  opts.validate();
  const Index r = previous.dim3();
  const Index rows = previous.dim1() * previous.dim2();
  if (A.rows() != r || A.cols() != r)
    throw DimensionError("dictionary_update: A must be " + std::to_string(r) + "x" +
                         std::to_string(r));
  if (B.rows() != r || B.cols() != rows)
    throw DimensionError("dictionary_update: B must be " + std::to_string(r) + "x" +
                         std::to_string(rows));

  // Only the symmetric part of A enters the objective.
  const Matrix sym = 0.5 * (A + A.transpose());
  const double cap = opts.elementwise_cap;

  DictionaryUpdateResult result;
  result.atoms = previous;
  Matrix& W = result.atoms.unfolded();
  for (Index j = 0; j < r; ++j)
    if (!(sym(j, j) >= kDeadAtomFloor)) result.skipped_atoms.push_back(j);

  double last = surrogate_objective(W, sym, B);
  result.sweep_objectives.push_back(last);
  result.status = SolverStatus{false, 0, last, 0.0};

  Vector grad(rows);
  for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
    for (Index j = 0; j < r; ++j) {
      const double ajj = sym(j, j);
      if (!(ajj >= kDeadAtomFloor)) continue;
      grad.noalias() = W * sym.col(j);
      grad -= B.row(j).transpose();
      W.col(j) = (W.col(j) - grad / ajj).cwiseMax(0.0).cwiseMin(cap);
    }
    const double current = surrogate_objective(W, sym, B);
    result.sweep_objectives.push_back(current);
    result.status.iterations = sweep + 1;
    result.status.objective = current;
    result.status.last_decrease = last - current;
    if (small_decrease(last, current, opts.tolerance)) {
      result.status.converged = true;
      break;
    }
    last = current;
  }
  return result;
}

}  // namespace onmf
