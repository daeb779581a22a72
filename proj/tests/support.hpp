#pragma once

// Test helpers and independent oracles. Nothing here calls the solvers under
// test.

#include "onmf/tensor.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using onmf::Index;
using onmf::Matrix;
using onmf::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline std::vector<onmf::RowLabel> labels(Index d) {
  std::vector<onmf::RowLabel> out;
  for (Index i = 0; i < d; ++i) out.push_back({"e" + std::to_string(i), "confirmed"});
  return out;
}

inline onmf::TimeSeriesPanel panel(const Matrix& values) {
  using namespace std::chrono;
  return onmf::TimeSeriesPanel(values, labels(values.rows()), sys_days{year{2020} / 1 / 22});
}

// x(i, a, b) = segment(i, b + a), by brute-force enumeration.
inline Matrix naive_hankel_unfolding(const Matrix& segment, Index k) {
  const Index d = segment.rows();
  const Index m = segment.cols() - k + 1;
  Matrix out(d * k, m);
  for (Index b = 0; b < m; ++b) {
    Index row = 0;
    for (Index i = 0; i < d; ++i)
      for (Index a = 0; a < k; ++a) out(row++, b) = segment(i, b + a);
  }
  return out;
}

// Global minimiser of ||x - W h||^2 + lambda * sum(h) over h >= 0 by
// enumerating supports. For each support S with full column rank, the
// stationarity condition on S is W_S^T W_S h_S = W_S^T x - lambda/2; a
// candidate is kept when h_S > 0 and the objective is evaluated directly.
// Some optimum always has a linearly independent support, so the minimum
// over candidates is the global one.
struct OracleSolution {
  Vector h;
  double objective = 0.0;
};

inline double column_objective(const Vector& x, const Matrix& W, const Vector& h, double lambda) {
  return (x - W * h).squaredNorm() + lambda * h.sum();
}

inline OracleSolution enumerate_nonneg_lasso(const Vector& x, const Matrix& W, double lambda) {
  const Index r = W.cols();
  OracleSolution best{Vector::Zero(r), x.squaredNorm()};
  for (std::uint32_t mask = 1; mask < (1u << r); ++mask) {
    std::vector<Index> support;
    for (Index j = 0; j < r; ++j)
      if (mask & (1u << j)) support.push_back(j);
    Matrix Ws(W.rows(), static_cast<Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) Ws.col(static_cast<Index>(s)) = W.col(support[s]);
    const Matrix G = Ws.transpose() * Ws;
    Eigen::FullPivLU<Matrix> lu(G);
    if (lu.rank() < G.rows()) continue;
    const Vector rhs = Ws.transpose() * x - Vector::Constant(G.rows(), 0.5 * lambda);
    const Vector hs = lu.solve(rhs);
    if ((hs.array() <= 0.0).any()) continue;
    Vector h = Vector::Zero(r);
    for (std::size_t s = 0; s < support.size(); ++s) h(support[s]) = hs(static_cast<Index>(s));
    const double f = column_objective(x, W, h, lambda);
    if (f < best.objective) best = {h, f};
  }
  return best;
}

inline double relative_error(const Matrix& estimate, const Matrix& truth) {
  const double norm = truth.norm();
  return norm > 0.0 ? (estimate - truth).norm() / norm : (estimate - truth).norm();
}

// Scratch directory under the build tree, emptied on construction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("onmf-test-" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing
