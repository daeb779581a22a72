#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <string>
#include <vector>

namespace onmf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Date = std::chrono::sys_days;

// Dense d x k x m tensor.
//
// Storage is the mode-3 unfolding itself: a (d*k) x m column-major matrix
// where entry (i, a, b) lives at row i*k + a, column b. Entity index i is
// outer, lag index a is inner. Every module shares this convention, so
// unfolding and folding are plain copies.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index d, Index k, Index m);

  Index dim1() const { return d_; }
  Index dim2() const { return k_; }
  Index dim3() const { return unfolded_.cols(); }

  double operator()(Index i, Index a, Index b) const { return unfolded_(i * k_ + a, b); }
  double& operator()(Index i, Index a, Index b) { return unfolded_(i * k_ + a, b); }

  // (d*k) x m view of the storage.
  const Matrix& unfolded() const { return unfolded_; }
  Matrix& unfolded() { return unfolded_; }

  // d x k slab at mode-3 index b.
  Matrix slab(Index b) const;

  bool operator==(const Tensor3& other) const;

 private:
  Index d_ = 0;
  Index k_ = 0;
  Matrix unfolded_;
};

Matrix mode3_unfold(const Tensor3& tensor);

// Inverse of mode3_unfold. Throws DimensionError unless rows == d*k.
Tensor3 fold_mode3(const Matrix& matrix, Index d, Index k);

// Sliding-window embedding of a d x n segment: result(i, a, b) =
// segment(i, b + a), shape d x k x (n - k + 1).
Tensor3 hankel_embed(const Matrix& segment, Index k);

struct RowLabel {
  std::string entity;
  std::string case_type;

  bool operator==(const RowLabel&) const = default;
};

// Labeled d x T matrix of nonnegative observations; column t is day t0 + t.
class TimeSeriesPanel {
 public:
  TimeSeriesPanel() = default;
  // Throws DomainError on negative/non-finite values and DimensionError on
  // label count mismatch or duplicate labels.
  TimeSeriesPanel(Matrix values, std::vector<RowLabel> labels, Date t0);

  const Matrix& values() const { return values_; }
  const std::vector<RowLabel>& labels() const { return labels_; }
  Date t0() const { return t0_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  // Same labels and start date, new values (validated).
  TimeSeriesPanel with_values(Matrix values) const;

 private:
  Matrix values_;
  std::vector<RowLabel> labels_;
  Date t0_{};
};

// Nonnegative d x k x r atoms plus the per-atom accumulated code mass.
struct DictionaryTensor {
  Tensor3 atoms;
  Vector importance;

  DictionaryTensor() = default;
  DictionaryTensor(Tensor3 atoms_, Vector importance_);
  static DictionaryTensor zeros(Index d, Index k, Index r);

  Index entities() const { return atoms.dim1(); }
  Index window() const { return atoms.dim2(); }
  Index rank() const { return atoms.dim3(); }
};

}  // namespace onmf
