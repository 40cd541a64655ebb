#pragma once

#include "latpos/core.hpp"

#include <optional>

namespace latpos {

/// Strictly decreasing maps from (scaled) inner products to dissimilarities.
enum class Dissimilarity { arccos, neglog };

struct DissimilarityResult {
  Matrix M;           ///< symmetric, zero diagonal
  double omega = 1.0; ///< scale applied to the inner products
};

/// M_ij = g(omega * W_i^T G W_j) with omega = 1 / max_ij (W_i^T G W_j) so the
/// arguments land in (0, 1] (neglog) or [0, 1] (arccos). Inner products must
/// be positive for neglog, non-negative for arccos.
DissimilarityResult dissimilarity_from_posteriors(const Matrix &W, const Matrix &G,
                                                  Dissimilarity g);

/// -1/2 J M^(2) J with J = I - 11^T / n, M^(2) the elementwise square.
Matrix double_center(const Matrix &M);

/// Top-d spectral factor U sqrt(Sigma) of double_center(M). Throws
/// NumericalError when the d-th eigenvalue is not above 1e-10.
Matrix cmds(const Matrix &M, int d);

/// B V U^T where Z^T B = U D V^T: the orthogonal transform of B closest to Z
/// in Frobenius norm (reflections allowed). Z must have full column rank.
Matrix procrustes_select(const Matrix &B, const Matrix &Z);

/// Flips each column so that its largest-magnitude entry is positive.
Matrix canonical_signs(Matrix X);

struct EmbeddingResult {
  Matrix X;
  Matrix reference;
};

/// cmds followed by procrustes_select against Z.
EmbeddingResult continuous_embed(const Matrix &M, const Matrix &Z, int d);

/// Embeds a sequence of dissimilarity matrices, each aligned to the previous
/// output. The first frame uses cmds with canonical_signs.
class EmbeddingChain {
public:
  explicit EmbeddingChain(int d);
  int dim() const noexcept { return d_; }
  Matrix next(const Matrix &M);
  const std::optional<Matrix> &reference() const noexcept { return previous_; }

private:
  int d_;
  std::optional<Matrix> previous_;
};

} // namespace latpos
