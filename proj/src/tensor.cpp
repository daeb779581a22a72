#include "onmf/tensor.hpp"

#include "onmf/errors.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace onmf {

Tensor3::Tensor3(Index d, Index k, Index m) : d_(d), k_(k), unfolded_(Matrix::Zero(d * k, m)) {
  if (d < 0 || k < 0 || m < 0) throw DimensionError("negative tensor dimension");
}

Matrix Tensor3::slab(Index b) const {
  Matrix out(d_, k_);
  for (Index i = 0; i < d_; ++i)
    for (Index a = 0; a < k_; ++a) out(i, a) = (*this)(i, a, b);
  return out;
}

bool Tensor3::operator==(const Tensor3& other) const {
  return d_ == other.d_ && k_ == other.k_ && unfolded_.cols() == other.unfolded_.cols() &&
         unfolded_ == other.unfolded_;
}

Matrix mode3_unfold(const Tensor3& tensor) { return tensor.unfolded(); }

Tensor3 fold_mode3(const Matrix& matrix, Index d, Index k) {
  if (d <= 0 || k <= 0 || matrix.rows() != d * k)
    throw DimensionError("fold_mode3: matrix has " + std::to_string(matrix.rows()) +
                         " rows, expected d*k = " + std::to_string(d * k));
  Tensor3 out(d, k, matrix.cols());
  out.unfolded() = matrix;
  return out;
}

Tensor3 hankel_embed(const Matrix& segment, Index k) {
  if (k <= 0) throw DimensionError("hankel_embed: window must be positive");
  const Index n = segment.cols();
  if (k > n) throw WindowTooLongError(static_cast<std::size_t>(k), static_cast<std::size_t>(n));
  if ((segment.array() < 0.0).any()) throw DomainError("hankel_embed: segment has negative entries");

  const Index d = segment.rows();
  Tensor3 out(d, k, n - k + 1);
  Matrix& x = out.unfolded();
  for (Index b = 0; b < x.cols(); ++b)
    for (Index i = 0; i < d; ++i)
      x.block(i * k, b, k, 1) = segment.row(i).segment(b, k).transpose();
  return out;
}

TimeSeriesPanel::TimeSeriesPanel(Matrix values, std::vector<RowLabel> labels, Date t0)
    : values_(std::move(values)), labels_(std::move(labels)), t0_(t0) {
  if (static_cast<Index>(labels_.size()) != values_.rows())
    throw DimensionError("panel has " + std::to_string(values_.rows()) + " rows but " +
                         std::to_string(labels_.size()) + " labels");
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& label : labels_)
    if (!seen.emplace(label.entity, label.case_type).second)
      throw DimensionError("duplicate panel label " + label.entity + "/" + label.case_type);
  if (!values_.allFinite()) throw DomainError("panel has non-finite entries");
  if ((values_.array() < 0.0).any()) throw DomainError("panel has negative entries");
}

TimeSeriesPanel TimeSeriesPanel::with_values(Matrix values) const {
  return TimeSeriesPanel(std::move(values), labels_, t0_);
}

DictionaryTensor::DictionaryTensor(Tensor3 atoms_, Vector importance_)
    : atoms(std::move(atoms_)), importance(std::move(importance_)) {
  if (importance.size() != atoms.dim3())
    throw DimensionError("importance length does not match atom count");
}

DictionaryTensor DictionaryTensor::zeros(Index d, Index k, Index r) {
  return DictionaryTensor(Tensor3(d, k, r), Vector::Zero(r));
}

}  // namespace onmf
