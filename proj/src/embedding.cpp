#include "latpos/embedding.hpp"

#include <cmath>

namespace latpos {

DissimilarityResult dissimilarity_from_posteriors(const Matrix &W, const Matrix &G,
                                                  Dissimilarity g) {
  require(G.rows() == W.cols() && G.cols() == W.cols(), "G", "must be K x K");
  const Matrix ip = W * G * W.transpose();
  const Eigen::Index n = W.rows();
  const double top = ip.maxCoeff();
  if (!(top > 0.0) || !std::isfinite(top))
    throw NumericalError("posterior inner products are not positive");
  DissimilarityResult out;
  out.omega = 1.0 / top;
  out.M = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::min(out.omega * ip(i, j), 1.0);
      double m = 0.0;
      if (g == Dissimilarity::neglog) {
        if (!(v > 0.0))
          throw NumericalError("non-positive posterior inner product; neglog undefined");
        m = -std::log(v);
      } else {
        if (v < -1e-12)
          throw NumericalError("negative posterior inner product");
        m = std::acos(std::max(v, 0.0));
      }
      out.M(i, j) = out.M(j, i) = m;
    }
  return out;
}

Matrix double_center(const Matrix &M) {
  require(M.rows() == M.cols(), "M", "must be square");
  const Matrix sq = M.array().square().matrix();
  // J sq J without forming J.
  const Vector rows = sq.rowwise().mean();
  const Vector cols = sq.colwise().mean().transpose();
  const double all = sq.mean();
  Matrix out = sq;
  out.colwise() -= rows;
  out.rowwise() -= cols.transpose();
  out.array() += all;
  return -0.5 * out;
}

Matrix cmds(const Matrix &M, int d) {
  require(d >= 1 && d <= M.rows(), "d", "must lie in [1, n]");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(double_center(M));
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed");
  const Eigen::Index n = M.rows();
  // Ascending order from Eigen; take the last d, largest first.
  Matrix X(n, d);
  for (int k = 0; k < d; ++k) {
    const double value = eig.eigenvalues()[n - 1 - k];
    if (!(value > 1e-10))
      throw NumericalError("double-centered matrix has rank below d");
    X.col(k) = eig.eigenvectors().col(n - 1 - k) * std::sqrt(value);
  }
  return X;
}

Matrix procrustes_select(const Matrix &B, const Matrix &Z) {
  require(B.rows() == Z.rows() && B.cols() == Z.cols(), "Z", "must match B in shape");
  Eigen::JacobiSVD<Matrix> zsvd(Z);
  const auto &sv = zsvd.singularValues();
  if (sv.size() == 0 || !(sv[sv.size() - 1] > 1e-12 * std::max(1.0, sv[0])) ||
      Z.rows() < Z.cols())
    throw ValidationError("Z", "reference must have full column rank");
  Eigen::JacobiSVD<Matrix> svd(Z.transpose() * B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return B * svd.matrixV() * svd.matrixU().transpose();
}

Matrix canonical_signs(Matrix X) {
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    Eigen::Index arg = 0;
    X.col(k).cwiseAbs().maxCoeff(&arg);
    if (X(arg, k) < 0.0)
      X.col(k) = -X.col(k);
  }
  return X;
}

EmbeddingResult continuous_embed(const Matrix &M, const Matrix &Z, int d) {
  require(Z.cols() == d && Z.rows() == M.rows(), "Z", "must be n x d");
  return {procrustes_select(cmds(M, d), Z), Z};
}

EmbeddingChain::EmbeddingChain(int d) : d_(d) {
  require(d >= 1, "d", "must be positive");
}

Matrix EmbeddingChain::next(const Matrix &M) {
  Matrix X = previous_ ? continuous_embed(M, *previous_, d_).X : canonical_signs(cmds(M, d_));
  previous_ = X;
  return X;
}

} // namespace latpos
