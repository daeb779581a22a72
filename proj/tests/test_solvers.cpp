#include "onmf/errors.hpp"
#include "onmf/solvers.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace onmf;
using testing::random_matrix;

namespace {

SolverOptions tight() {
  SolverOptions o;
  o.tolerance = 1e-15;
  o.max_iterations = 100000;
  return o;
}

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("nonneg_lasso exact representations") {
  const Matrix I = Matrix::Identity(2, 2);
  CHECK(nonneg_lasso(I, I, 0.0, SolverOptions{}).codes.isApprox(I));

  Matrix W(2, 1), X(2, 1);
  W << 1, 0;
  X << 2, 0;
  const auto res = nonneg_lasso(X, W, 0.0, SolverOptions{});
  CHECK(res.codes(0, 0) == doctest::Approx(2.0));
  CHECK(res.status.converged);
}

TEST_CASE("nonneg_lasso one-dimensional soft threshold") {
  // max(0, (w x - lambda/2) / w^2)
  CHECK(nonneg_lasso(one(4), one(1), 2.0, SolverOptions{}).codes(0, 0) == doctest::Approx(3.0));
  CHECK(nonneg_lasso(one(1), one(1), 4.0, SolverOptions{}).codes(0, 0) == 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const double w = testing::random_matrix(rng, 1, 1, 0.1, 3.0)(0, 0);
    const double x = testing::random_matrix(rng, 1, 1, 0.0, 5.0)(0, 0);
    const double lambda = testing::random_matrix(rng, 1, 1, 0.0, 4.0)(0, 0);
    const double expected = std::max(0.0, (w * x - lambda / 2) / (w * w));
    CHECK(nonneg_lasso(one(x), one(w), lambda, SolverOptions{}).codes(0, 0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("nonneg_lasso matches support enumeration on tiny instances") {
  std::mt19937_64 rng(2024);
  const double lambdas[] = {0.0, 0.5, 2.0};
  for (int trial = 0; trial < 200; ++trial) {
    const Index rows = 1 + static_cast<Index>(rng() % 4);
    const Index r = 1 + static_cast<Index>(rng() % 2);
    const Index m = 1 + static_cast<Index>(rng() % 3);
    const double lambda = lambdas[trial % 3];
    const Matrix W = random_matrix(rng, rows, r);
    const Matrix X = random_matrix(rng, rows, m, 0.0, 2.0);
    const LassoResult res = nonneg_lasso(X, W, lambda, tight());
    REQUIRE((res.codes.array() >= 0.0).all());
    for (Index c = 0; c < m; ++c) {
      const auto oracle = testing::enumerate_nonneg_lasso(X.col(c), W, lambda);
      const double f = testing::column_objective(X.col(c), W, res.codes.col(c), lambda);
      CHECK(f - oracle.objective <= 1e-9 * std::max(1.0, oracle.objective));
    }
  }
}

TEST_CASE("nonneg_lasso satisfies KKT conditions") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix W = random_matrix(rng, 8, 5);
    const Matrix X = random_matrix(rng, 8, 4, 0.0, 3.0);
    const double lambda = 0.3 * (trial % 4);
    const Matrix H = nonneg_lasso(X, W, lambda, tight()).codes;
    const Matrix grad = 2.0 * (W.transpose() * (W * H - X)).array() + lambda;
    for (Index i = 0; i < H.rows(); ++i)
      for (Index j = 0; j < H.cols(); ++j) {
        if (H(i, j) > 0.0)
          CHECK(std::abs(grad(i, j)) < 1e-6);
        else
          CHECK(grad(i, j) > -1e-6);
      }
  }
}

TEST_CASE("nonneg_lasso objective never increases across sweeps") {
  std::mt19937_64 rng(8);
  SolverOptions opts;
  opts.record_trace = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix W = random_matrix(rng, 12, 6);
    const Matrix X = random_matrix(rng, 12, 3);
    const LassoResult res = nonneg_lasso(X, W, 0.1 * (trial % 5), opts);
    REQUIRE(res.trace.size() == 3);
    for (const auto& column : res.trace)
      for (std::size_t s = 1; s < column.size(); ++s) CHECK(column[s] <= column[s - 1] + 1e-12);
  }
}

TEST_CASE("nonneg_lasso reports non-convergence without failing") {
  std::mt19937_64 rng(9);
  // one sweep from H = 0 always makes a large relative decrease
  const Matrix W = random_matrix(rng, 20, 8);
  const Matrix X = random_matrix(rng, 20, 1, 1.0, 2.0);
  SolverOptions opts;
  opts.max_iterations = 1;
  const LassoResult res = nonneg_lasso(X, W, 0.0, opts);
  CHECK_FALSE(res.status.converged);
  CHECK(res.status.iterations == 1);
  CHECK(res.status.last_decrease >= 0.0);
  CHECK((res.codes.array() >= 0.0).all());
}

TEST_CASE("nonneg_lasso handles zero atoms and checks inputs") {
  Matrix W = Matrix::Zero(2, 2);
  W(0, 1) = 1;
  Matrix X(2, 1);
  X << 3, 1;
  const auto res = nonneg_lasso(X, W, 0.0, SolverOptions{});
  CHECK(res.codes(0, 0) == 0.0);
  CHECK(res.codes(1, 0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(nonneg_lasso(Matrix::Zero(3, 1), W, 0.0, SolverOptions{}), DimensionError);
  CHECK_THROWS_AS(nonneg_lasso(X, W, -1.0, SolverOptions{}), DomainError);
  SolverOptions bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(nonneg_lasso(X, W, 0.0, bad), ConfigError);
}

TEST_CASE("solvers are bit-for-bit deterministic") {
  std::mt19937_64 rng(10);
  const Matrix W = random_matrix(rng, 10, 4);
  const Matrix X = random_matrix(rng, 10, 6);
  CHECK(nonneg_lasso(X, W, 0.7, SolverOptions{}).codes == nonneg_lasso(X, W, 0.7, SolverOptions{}).codes);

  const Matrix H = random_matrix(rng, 4, 6);
  const Matrix A = H * H.transpose();
  const Matrix B = H * X.transpose();
  const Tensor3 start = fold_mode3(W, 2, 5);
  CHECK(dictionary_update(start, A, B, SolverOptions::dictionary(5.0)).atoms ==
        dictionary_update(start, A, B, SolverOptions::dictionary(5.0)).atoms);
}

TEST_CASE("dictionary_update fixed point at A = I, B = W^T") {
  std::mt19937_64 rng(12);
  const Matrix W = random_matrix(rng, 6, 3);
  const auto res = dictionary_update(fold_mode3(W, 2, 3), Matrix::Identity(3, 3), W.transpose(),
                                     SolverOptions::dictionary(1.0));
  CHECK(res.atoms.unfolded().isApprox(W, 1e-14));
}

TEST_CASE("dictionary_update with A = I returns B^T") {
  std::mt19937_64 rng(13);
  const Matrix B = random_matrix(rng, 3, 6, 0.0, 2.0);
  const Matrix start = random_matrix(rng, 6, 3);
  const auto res =
      dictionary_update(fold_mode3(start, 3, 2), Matrix::Identity(3, 3), B, SolverOptions::dictionary(2.0));
  CHECK(res.atoms.unfolded().isApprox(B.transpose(), 1e-14));
}

TEST_CASE("dictionary_update one-dimensional projection") {
  Matrix B(1, 4);
  B << -1, 3, 3, -1;
  const Tensor3 start = fold_mode3(Matrix::Constant(4, 1, 0.5), 2, 2);
  const auto wide = dictionary_update(start, one(2.0), B, SolverOptions::dictionary(10.0));
  Vector expected(4);
  expected << 0, 1.5, 1.5, 0;
  CHECK(wide.atoms.unfolded().col(0).isApprox(expected));
  const auto capped = dictionary_update(start, one(2.0), B, SolverOptions::dictionary(1.0));
  expected << 0, 1, 1, 0;
  CHECK(capped.atoms.unfolded().col(0).isApprox(expected));
}

TEST_CASE("dictionary_update descends monotonically and meets KKT") {
  std::mt19937_64 rng(14);
  SolverOptions opts = SolverOptions::dictionary(0.8);
  opts.tolerance = 1e-15;
  opts.max_iterations = 20000;
  for (int trial = 0; trial < 30; ++trial) {
    const Index rows = 6, r = 4;
    const Matrix H = random_matrix(rng, r, 9);
    const Matrix X = random_matrix(rng, rows, 9);
    const Matrix A = H * H.transpose() / 9.0;
    const Matrix B = H * X.transpose() / 9.0;
    const Tensor3 start = fold_mode3(random_matrix(rng, rows, r, 0.0, 0.8), 3, 2);
    const auto res = dictionary_update(start, A, B, opts);
    for (std::size_t s = 1; s < res.sweep_objectives.size(); ++s)
      CHECK(res.sweep_objectives[s] <= res.sweep_objectives[s - 1] + 1e-12);
    const Matrix& W = res.atoms.unfolded();
    CHECK((W.array() >= 0.0).all());
    CHECK((W.array() <= 0.8).all());
    CHECK(surrogate_objective(W, A, B) <= surrogate_objective(start.unfolded(), A, B));
    const Matrix grad = 2.0 * (W * A - B.transpose());
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < r; ++j) {
        if (W(i, j) <= 0.0)
          CHECK(grad(i, j) > -1e-7);
        else if (W(i, j) >= 0.8)
          CHECK(grad(i, j) < 1e-7);
        else
          CHECK(std::abs(grad(i, j)) < 1e-7);
      }
  }
}

TEST_CASE("dictionary_update skips dead atoms") {
  std::mt19937_64 rng(15);
  Matrix A = Matrix::Identity(3, 3);
  A(1, 1) = 0.0;
  const Matrix B = random_matrix(rng, 3, 4);
  const Matrix start = random_matrix(rng, 4, 3);
  const auto res = dictionary_update(fold_mode3(start, 2, 2), A, B, SolverOptions::dictionary(5.0));
  CHECK(res.skipped_atoms == std::vector<Index>{1});
  CHECK(res.atoms.unfolded().col(1) == start.col(1));
  CHECK(res.atoms.unfolded().col(0).isApprox(B.row(0).transpose()));
}

TEST_CASE("dictionary_update shape checks") {
  const Tensor3 start(2, 2, 3);
  CHECK_THROWS_AS(dictionary_update(start, Matrix::Identity(2, 2), Matrix::Zero(3, 4), SolverOptions::dictionary(1)),
                  DimensionError);
  CHECK_THROWS_AS(dictionary_update(start, Matrix::Identity(3, 3), Matrix::Zero(3, 5), SolverOptions::dictionary(1)),
                  DimensionError);
  CHECK_THROWS_AS(dictionary_update(start, Matrix::Identity(3, 3), Matrix::Zero(3, 4), SolverOptions::dictionary(0)),
                  ConfigError);
}

TEST_CASE("surrogate objective formula") {
  std::mt19937_64 rng(16);
  const Matrix W = random_matrix(rng, 5, 3);
  const Matrix H = random_matrix(rng, 3, 4);
  const Matrix A = H * H.transpose();
  const Matrix B = random_matrix(rng, 3, 5);
  const double direct = (W * A * W.transpose()).trace() - 2.0 * (B * W).trace();
  CHECK(surrogate_objective(W, A, B) == doctest::Approx(direct).epsilon(1e-12));
}
