#pragma once

#include "latpos/core.hpp"

#include <memory>
#include <vector>

namespace latpos {

enum class BasisKind { gaussian, haar };

/// One non-negligible entry of a K x K x K tensor, value at (r, k, c).
struct TensorEntry {
  int r;
  int k;
  int c;
  double value;
};

/// Shared basis of densities phi_1..phi_K used to represent every actor's
/// posterior, with its Gram matrix P and a cached factorization of P.
///
/// Gaussian: phi_k = phi(.; theta_k, s) for arbitrary centers in R^d.
/// Haar: indicator densities of K cells of width h on the real line.
class BasisSet {
public:
  /// Gaussian basis with one center per row of `centers`.
  static BasisSet gaussian(Matrix centers, double scale);
  /// One-dimensional Gaussian basis on the grid lo, lo + spacing, ..., <= hi.
  static BasisSet gaussian_grid(double lo, double hi, double spacing, double scale);
  static BasisSet haar(double origin, double width, int cells);

  BasisKind kind() const noexcept { return kind_; }
  int size() const noexcept { return static_cast<int>(centers_.rows()); }
  int dim() const noexcept { return static_cast<int>(centers_.cols()); }

  /// Gaussian centers, or Haar cell midpoints, one per row.
  const Matrix &centers() const noexcept { return centers_; }
  double scale() const noexcept { return scale_; }   ///< Gaussian s
  double origin() const noexcept { return origin_; } ///< Haar left edge
  double width() const noexcept { return width_; }   ///< Haar h

  /// True for a one-dimensional Gaussian basis with equally spaced centers.
  bool uniform_grid() const noexcept { return grid_spacing_ > 0.0; }
  double grid_spacing() const noexcept { return grid_spacing_; }

  const Matrix &gram() const noexcept { return gram_; }
  double condition() const noexcept { return condition_; }

  /// P^{-1} b via the cached factorization.
  Vector solve(const Vector &b) const;
  Matrix solve(const Matrix &b) const;

  /// Largest |r - c| with a non-negligible Gram entry (K - 1 when the basis
  /// has no band structure, 0 for Haar).
  int bandwidth() const noexcept { return bandwidth_; }

  /// argmin_{w >= 0} (w - v)^T P (w - v): the closest nonnegative mixture to
  /// the signed density sum_k v_k phi_k in L2. Active-set method; `support`
  /// (indices with positive weight) warm-starts the search and is updated.
  /// For Haar bases this is plain clamping.
  Vector nonnegative_projection(const Vector &v, std::vector<int> *support = nullptr) const;

  /// Nonzero entries (relative cutoff `tol`) of S_{r,k,c} = <phi_r, phi_k phi_c>.
  std::vector<TensorEntry> triple(double tol = 1e-17) const;

  double eval(int k, const Eigen::Ref<const Vector> &x) const;
  double density(const Eigen::Ref<const Vector> &w, const Eigen::Ref<const Vector> &x) const;
  Vector mean(const Eigen::Ref<const Vector> &w) const;

  /// Probability that phi_k assigns to the interval [a, b] (one-dimensional).
  double interval_mass(int k, double a, double b) const;

private:
  BasisSet() = default;
  void finish();

  BasisKind kind_ = BasisKind::gaussian;
  Matrix centers_;
  double scale_ = 0.0;
  double origin_ = 0.0;
  double width_ = 0.0;
  double grid_spacing_ = 0.0;
  Matrix gram_;
  double condition_ = 1.0;
  int bandwidth_ = 0;
  std::shared_ptr<const Eigen::LLT<Matrix>> factor_;
};

/// Bilinear pairing and product projections defining how two posteriors
/// interact through a message.
///   pairing(wi, wj)          = wi^T G wj           (expected kernel value)
///   product_moments(wi, wj)_r = sum_kc wi_k wj_c U_rkc
/// Posterior mode uses G = P and U = S (<phi_r, phi_k phi_c>).
class Coupling {
public:
  /// Everything a message between i and j needs: the pairing and the product
  /// projections seen from each side.
  struct Interaction {
    double pairing = 0.0;
    Vector to_i; ///< product_moments(wi, wj)
    Vector to_j; ///< product_moments(wj, wi)
  };

  virtual ~Coupling() = default;
  virtual int size() const = 0;
  virtual const Matrix &pairing_matrix() const = 0;
  virtual double pairing(const Eigen::Ref<const Vector> &wi,
                         const Eigen::Ref<const Vector> &wj) const {
    return wi.dot(pairing_matrix() * wj);
  }
  virtual Vector product_moments(const Eigen::Ref<const Vector> &wi,
                                 const Eigen::Ref<const Vector> &wj) const = 0;
  /// U_rkc == U_rck, so both sides see the same projections.
  virtual bool symmetric() const { return false; }
  virtual Interaction interact(const Eigen::Ref<const Vector> &wi,
                               const Eigen::Ref<const Vector> &wj) const;
  /// True when interact_given() is cheaper than interact() once G w is known
  /// for every actor.
  virtual bool reuses_products() const { return false; }
  /// interact() with gwi = G wi and gwj = G wj precomputed.
  virtual Interaction interact_given(const Eigen::Ref<const Vector> &wi,
                                     const Eigen::Ref<const Vector> &wj,
                                     const Eigen::Ref<const Vector> &gwi,
                                     const Eigen::Ref<const Vector> &gwj) const {
    (void)gwi;
    (void)gwj;
    return interact(wi, wj);
  }
};

/// Explicit sparse tensor U.
class TensorCoupling final : public Coupling {
public:
  TensorCoupling(Matrix pairing, std::vector<TensorEntry> entries, bool symmetric);
  int size() const override { return static_cast<int>(pairing_.rows()); }
  const Matrix &pairing_matrix() const override { return pairing_; }
  Vector product_moments(const Eigen::Ref<const Vector> &wi,
                         const Eigen::Ref<const Vector> &wj) const override;
  bool symmetric() const override { return symmetric_; }

private:
  Matrix pairing_;
  std::vector<TensorEntry> entries_;
  bool symmetric_;
};

/// Posterior-mode coupling for an equally spaced 1-d Gaussian basis. Uses
/// S_{r,k,c} = P_kc N(theta_r; (theta_k + theta_c)/2, 3 s^2 / 2), which only
/// depends on k - c and k + c, so each evaluation is two banded sweeps.
class GaussianGridCoupling final : public Coupling {
public:
  explicit GaussianGridCoupling(const BasisSet &basis);
  int size() const override { return k_; }
  const Matrix &pairing_matrix() const override { return pairing_; }
  double pairing(const Eigen::Ref<const Vector> &wi,
                 const Eigen::Ref<const Vector> &wj) const override;
  Vector product_moments(const Eigen::Ref<const Vector> &wi,
                         const Eigen::Ref<const Vector> &wj) const override;
  bool symmetric() const override { return true; }
  Interaction interact(const Eigen::Ref<const Vector> &wi,
                       const Eigen::Ref<const Vector> &wj) const override;

private:
  /// A_q = sum_{k+c=q} wi_k wj_c P_kc, q = 0..2K-2.
  void diagonal_sums(const Eigen::Ref<const Vector> &wi,
                     const Eigen::Ref<const Vector> &wj, Vector &sums) const;

  int k_;
  Matrix pairing_;
  std::vector<double> gram_band_; ///< P at lag m, m = 0..band
  std::vector<double> mid_band_;  ///< N(m h / 2; 0, 3 s^2 / 2), m = 0..band
};

/// Kernel-mode coupling on a Haar basis: U_rkc = delta_rk Kmat_rc / h where
/// Kmat_rc = int int phi_r(x) phi_c(y) exp(-(x - y)^2) dx dy.
class HaarKernelCoupling final : public Coupling {
public:
  explicit HaarKernelCoupling(const BasisSet &basis);
  int size() const override { return static_cast<int>(pairing_.rows()); }
  const Matrix &pairing_matrix() const override { return pairing_; }
  Vector product_moments(const Eigen::Ref<const Vector> &wi,
                         const Eigen::Ref<const Vector> &wj) const override;
  bool reuses_products() const override { return true; }
  Interaction interact_given(const Eigen::Ref<const Vector> &wi,
                             const Eigen::Ref<const Vector> &wj,
                             const Eigen::Ref<const Vector> &gwi,
                             const Eigen::Ref<const Vector> &gwj) const override;

private:
  Matrix pairing_;
  double width_;
};

enum class IntensityMode { posterior, kernel };

/// Posterior mode: P and S. Kernel mode: the exp(-|x - y|^2) kernel.
std::unique_ptr<Coupling> make_coupling(const BasisSet &basis, IntensityMode mode);

} // namespace latpos
