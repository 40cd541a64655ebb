#include "latpos/basis.hpp"

#include "latpos/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace latpos {

namespace {

constexpr double max_condition = 1e12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// H'' = exp(-u^2); used for double integrals of the kernel over two cells.
double kernel_antiderivative(double u) {
  return 0.5 * std::sqrt(std::numbers::pi) * u * std::erf(u) + 0.5 * std::exp(-u * u);
}

} // namespace

BasisSet BasisSet::gaussian(Matrix centers, double scale) {
  require(centers.rows() >= 1 && centers.cols() >= 1, "centers", "need at least one center");
  require(scale > 0.0, "scale", "must be positive");
  require(centers.allFinite(), "centers", "must be finite");
  BasisSet b;
  b.kind_ = BasisKind::gaussian;
  b.centers_ = std::move(centers);
  b.scale_ = scale;

  if (b.dim() == 1 && b.size() >= 2) {
    const double h = b.centers_(1, 0) - b.centers_(0, 0);
    bool uniform = h > 0.0;
    for (int k = 1; uniform && k < b.size(); ++k)
      uniform = std::abs(b.centers_(k, 0) - b.centers_(0, 0) - k * h) <= 1e-9 * h * k;
    if (uniform)
      b.grid_spacing_ = h;
  }

  const int K = b.size();
  const int d = b.dim();
  b.gram_.resize(K, K);
  for (int r = 0; r < K; ++r)
    for (int c = r; c < K; ++c) {
      const double dist2 = (b.centers_.row(r) - b.centers_.row(c)).squaredNorm();
      b.gram_(r, c) = b.gram_(c, r) = isotropic_pdf(dist2, 2.0 * scale * scale, d);
    }
  b.finish();
  return b;
}

BasisSet BasisSet::gaussian_grid(double lo, double hi, double spacing, double scale) {
  require(spacing > 0.0, "spacing", "must be positive");
  require(hi >= lo, "hi", "must not be below lo");
  const auto count = static_cast<int>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
  Matrix centers(count, 1);
  for (int k = 0; k < count; ++k)
    centers(k, 0) = lo + k * spacing;
  return gaussian(std::move(centers), scale);
}

BasisSet BasisSet::haar(double origin, double width, int cells) {
  require(width > 0.0, "width", "must be positive");
  require(cells >= 1, "cells", "need at least one cell");
  BasisSet b;
  b.kind_ = BasisKind::haar;
  b.origin_ = origin;
  b.width_ = width;
  b.centers_.resize(cells, 1);
  for (int k = 0; k < cells; ++k)
    b.centers_(k, 0) = origin + (k + 0.5) * width;
  b.gram_ = Matrix::Identity(cells, cells) / width;
  b.finish();
  return b;
}

void BasisSet::finish() {
  bandwidth_ = 0;
  const double negligible = 1e-17 * gram_.diagonal().maxCoeff();
  for (int r = 0; r < size(); ++r)
    for (int c = r + bandwidth_ + 1; c < size(); ++c)
      if (std::abs(gram_(r, c)) > negligible)
        bandwidth_ = c - r;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    std::ostringstream msg;
    msg << "Gram matrix is singular or ill-conditioned (condition estimate "
        << condition_ << ", limit " << max_condition
        << "); check for coincident or overly dense centers";
    throw NumericalError(msg.str());
  }
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(gram_);
  if (llt->info() != Eigen::Success)
    throw NumericalError("Gram matrix factorization failed");
  factor_ = std::move(llt);
}

Vector BasisSet::solve(const Vector &b) const {
  require(b.size() == size(), "b", "length must match the basis size");
  if (kind_ == BasisKind::haar)
    return width_ * b;
  return factor_->solve(b);
}

Matrix BasisSet::solve(const Matrix &b) const {
  require(b.rows() == size(), "b", "rows must match the basis size");
  if (kind_ == BasisKind::haar)
    return width_ * b;
  return factor_->solve(b);
}

namespace {

// In-place lower Cholesky factor of a symmetric band matrix (half-width b).
bool band_cholesky(Matrix &A, int b) {
  const int m = static_cast<int>(A.rows());
  for (int j = 0; j < m; ++j) {
    const int lo = std::max(0, j - b);
    double d = A(j, j);
    for (int k = lo; k < j; ++k)
      d -= A(j, k) * A(j, k);
    if (!(d > 0.0))
      return false;
    d = std::sqrt(d);
    A(j, j) = d;
    const int hi = std::min(m - 1, j + b);
    for (int i = j + 1; i <= hi; ++i) {
      double v = A(i, j);
      for (int k = std::max(0, i - b); k < j; ++k)
        v -= A(i, k) * A(j, k);
      A(i, j) = v / d;
    }
  }
  return true;
}

void band_solve(const Matrix &L, int b, Vector &x) {
  const int m = static_cast<int>(L.rows());
  for (int i = 0; i < m; ++i) {
    double v = x[i];
    for (int k = std::max(0, i - b); k < i; ++k)
      v -= L(i, k) * x[k];
    x[i] = v / L(i, i);
  }
  for (int i = m - 1; i >= 0; --i) {
    double v = x[i];
    for (int k = i + 1; k <= std::min(m - 1, i + b); ++k)
      v -= L(k, i) * x[k];
    x[i] = v / L(i, i);
  }
}

} // namespace

Vector BasisSet::nonnegative_projection(const Vector &v, std::vector<int> *support) const {
  require(v.size() == size(), "w", "length must match the basis size");
  const int K = size();
  const auto record_support = [&](const Vector &w) {
    if (!support)
      return;
    support->clear();
    for (int k = 0; k < K; ++k)
      if (w[k] > 0.0)
        support->push_back(k);
  };
  if (kind_ == BasisKind::haar || v.minCoeff() >= 0.0) {
    Vector w = v.cwiseMax(0.0);
    record_support(w);
    return w;
  }

  const int band = bandwidth_;
  const auto gram_times = [&](const Vector &x) {
    Vector y = Vector::Zero(K);
    for (int r = 0; r < K; ++r)
      for (int c = std::max(0, r - band); c <= std::min(K - 1, r + band); ++c)
        y[r] += gram_(r, c) * x[c];
    return y;
  };
  const Vector rhs = gram_times(v);

  // Minimizer of the quadratic restricted to the free set F (others zero).
  std::vector<int> F;
  Matrix A;
  Vector z;
  const auto solve_free = [&]() {
    const int m = static_cast<int>(F.size());
    const int b = std::min(band, std::max(m - 1, 0));
    A.setZero(m, m);
    z.resize(m);
    for (int a = 0; a < m; ++a) {
      z[a] = rhs[F[a]];
      for (int c = std::max(0, a - b); c <= std::min(m - 1, a + b); ++c)
        if (std::abs(F[a] - F[c]) <= band)
          A(a, c) = gram_(F[a], F[c]);
    }
    if (!band_cholesky(A, b)) {
      Matrix dense(m, m);
      for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c)
          dense(a, c) = gram_(F[a], F[c]);
      z = dense.llt().solve(z).eval();
      return;
    }
    band_solve(A, b, z);
  };

  if (support && !support->empty())
    F = *support;
  else
    for (int k = 0; k < K; ++k)
      if (v[k] > 0.0)
        F.push_back(k);

  Vector w = Vector::Zero(K);
  // Shrink the warm start until its unconstrained minimizer is positive.
  while (!F.empty()) {
    solve_free();
    if (z.minCoeff() > 0.0)
      break;
    std::vector<int> keep;
    for (std::size_t a = 0; a < F.size(); ++a)
      if (z[static_cast<Eigen::Index>(a)] > 0.0)
        keep.push_back(F[a]);
    F.swap(keep);
  }
  for (std::size_t a = 0; a < F.size(); ++a)
    w[F[a]] = z[static_cast<Eigen::Index>(a)];

  const double tol = 1e-12 * rhs.cwiseAbs().maxCoeff();
  std::vector<char> free_flag(static_cast<std::size_t>(K), 0);
  for (int k : F)
    free_flag[static_cast<std::size_t>(k)] = 1;
  for (int outer = 0; outer < 4 * K; ++outer) {
    const Vector grad = rhs - gram_times(w);
    int best = -1;
    double top = tol;
    for (int k = 0; k < K; ++k)
      if (!free_flag[static_cast<std::size_t>(k)] && grad[k] > top) {
        top = grad[k];
        best = k;
      }
    if (best < 0)
      break;
    F.insert(std::upper_bound(F.begin(), F.end(), best), best);
    free_flag[static_cast<std::size_t>(best)] = 1;
    for (;;) {
      solve_free();
      if (z.minCoeff() > 0.0) {
        for (std::size_t a = 0; a < F.size(); ++a)
          w[F[a]] = z[static_cast<Eigen::Index>(a)];
        break;
      }
      // Move toward z until the first free weight reaches zero; drop it.
      double step = std::numeric_limits<double>::infinity();
      std::size_t hit = 0;
      for (std::size_t a = 0; a < F.size(); ++a) {
        const double za = z[static_cast<Eigen::Index>(a)];
        if (za <= 0.0 && w[F[a]] / (w[F[a]] - za) < step) {
          step = w[F[a]] / (w[F[a]] - za);
          hit = a;
        }
      }
      std::vector<int> keep;
      for (std::size_t a = 0; a < F.size(); ++a) {
        double &wa = w[F[a]];
        wa += step * (z[static_cast<Eigen::Index>(a)] - wa);
        if (a != hit && wa > 0.0) {
          keep.push_back(F[a]);
        } else {
          wa = 0.0;
          free_flag[static_cast<std::size_t>(F[a])] = 0;
        }
      }
      F.swap(keep);
      if (F.empty())
        break;
    }
  }
  record_support(w);
  return w;
}

std::vector<TensorEntry> BasisSet::triple(double tol) const {
  std::vector<TensorEntry> out;
  const int K = size();
  if (kind_ == BasisKind::haar) {
    for (int k = 0; k < K; ++k)
      out.push_back({k, k, k, 1.0 / (width_ * width_)});
    return out;
  }
  // phi_k phi_c = P_kc phi(.; mid, s/sqrt2); integrating against phi_r
  // leaves a normal density in theta_r with variance 3 s^2 / 2.
  const int d = dim();
  const double var = 1.5 * scale_ * scale_;
  const double peak = gram_(0, 0) * isotropic_pdf(0.0, var, d);
  const double cut = tol * peak;
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < K; ++c) {
      const double pkc = gram_(k, c);
      if (pkc * isotropic_pdf(0.0, var, d) < cut)
        continue;
      const Vector mid = 0.5 * (centers_.row(k) + centers_.row(c)).transpose();
      for (int r = 0; r < K; ++r) {
        const double v =
            pkc * isotropic_pdf((centers_.row(r).transpose() - mid).squaredNorm(), var, d);
        if (v >= cut)
          out.push_back({r, k, c, v});
      }
    }
  return out;
}

double BasisSet::eval(int k, const Eigen::Ref<const Vector> &x) const {
  require(k >= 0 && k < size(), "k", "basis index out of range");
  require(x.size() == dim(), "x", "dimension mismatch");
  if (kind_ == BasisKind::haar) {
    const double lo = origin_ + k * width_;
    return (x[0] >= lo && x[0] < lo + width_) ? 1.0 / width_ : 0.0;
  }
  return normal_pdf(x, centers_.row(k).transpose(), scale_);
}

double BasisSet::density(const Eigen::Ref<const Vector> &w,
                         const Eigen::Ref<const Vector> &x) const {
  require(w.size() == size(), "w", "length must match the basis size");
  require(x.size() == dim(), "x", "dimension mismatch");
  if (kind_ == BasisKind::haar) {
    const double pos = std::floor((x[0] - origin_) / width_);
    if (pos < 0.0 || pos >= size())
      return 0.0;
    return w[static_cast<Eigen::Index>(pos)] / width_;
  }
  double value = 0.0;
  for (int k = 0; k < size(); ++k)
    if (w[k] != 0.0)
      value += w[k] * normal_pdf(x, centers_.row(k).transpose(), scale_);
  return value;
}

Vector BasisSet::mean(const Eigen::Ref<const Vector> &w) const {
  require(w.size() == size(), "w", "length must match the basis size");
  return centers_.transpose() * w;
}

double BasisSet::interval_mass(int k, double a, double b) const {
  require(dim() == 1, "basis", "interval masses need a one-dimensional basis");
  require(k >= 0 && k < size(), "k", "basis index out of range");
  if (b <= a)
    return 0.0;
  if (kind_ == BasisKind::haar) {
    const double lo = origin_ + k * width_;
    const double overlap = std::min(b, lo + width_) - std::max(a, lo);
    return std::max(overlap, 0.0) / width_;
  }
  const double c = centers_(k, 0);
  return normal_cdf((b - c) / scale_) - normal_cdf((a - c) / scale_);
}

Coupling::Interaction Coupling::interact(const Eigen::Ref<const Vector> &wi,
                                         const Eigen::Ref<const Vector> &wj) const {
  Interaction out;
  out.pairing = pairing(wi, wj);
  out.to_i = product_moments(wi, wj);
  out.to_j = symmetric() ? out.to_i : product_moments(wj, wi);
  return out;
}

TensorCoupling::TensorCoupling(Matrix pairing, std::vector<TensorEntry> entries,
                               bool symmetric)
    : pairing_(std::move(pairing)), entries_(std::move(entries)), symmetric_(symmetric) {
  require(pairing_.rows() == pairing_.cols(), "pairing", "must be square");
  const int K = size();
  for (const auto &e : entries_)
    require(e.r >= 0 && e.r < K && e.k >= 0 && e.k < K && e.c >= 0 && e.c < K,
            "entries", "tensor index out of range");
}

Vector TensorCoupling::product_moments(const Eigen::Ref<const Vector> &wi,
                                       const Eigen::Ref<const Vector> &wj) const {
  require(wi.size() == size() && wj.size() == size(), "w",
          "length must match the basis size");
  Vector out = Vector::Zero(size());
  for (const auto &e : entries_)
    out[e.r] += e.value * wi[e.k] * wj[e.c];
  return out;
}

GaussianGridCoupling::GaussianGridCoupling(const BasisSet &basis)
    : k_(basis.size()), pairing_(basis.gram()) {
  require(basis.kind() == BasisKind::gaussian && basis.uniform_grid(), "basis",
          "needs an equally spaced one-dimensional Gaussian basis");
  const double h = basis.grid_spacing();
  const double s = basis.scale();
  const double cut = 1e-17;
  for (int m = 0; m < k_; ++m) {
    const double v = isotropic_pdf(m * m * h * h, 2.0 * s * s, 1);
    if (m > 0 && v < cut * gram_band_.front())
      break;
    gram_band_.push_back(v);
  }
  for (int m = 0; m < 2 * k_; ++m) {
    const double z = 0.5 * m * h;
    const double v = isotropic_pdf(z * z, 1.5 * s * s, 1);
    if (m > 0 && v < cut * mid_band_.front())
      break;
    mid_band_.push_back(v);
  }
}

void GaussianGridCoupling::diagonal_sums(const Eigen::Ref<const Vector> &wi,
                                         const Eigen::Ref<const Vector> &wj,
                                         Vector &sums) const {
  require(wi.size() == k_ && wj.size() == k_, "w", "length must match the basis size");
  const int band = static_cast<int>(gram_band_.size()) - 1;
  sums.setZero(2 * k_ - 1);
  for (int k = 0; k < k_; ++k) {
    const double a = wi[k];
    if (a == 0.0)
      continue;
    const int c_lo = std::max(0, k - band);
    const int c_hi = std::min(k_ - 1, k + band);
    for (int c = c_lo; c <= c_hi; ++c)
      sums[k + c] += a * wj[c] * gram_band_[static_cast<std::size_t>(std::abs(k - c))];
  }
}

double GaussianGridCoupling::pairing(const Eigen::Ref<const Vector> &wi,
                                     const Eigen::Ref<const Vector> &wj) const {
  Vector sums;
  diagonal_sums(wi, wj, sums);
  return sums.sum();
}

Vector GaussianGridCoupling::product_moments(const Eigen::Ref<const Vector> &wi,
                                             const Eigen::Ref<const Vector> &wj) const {
  return interact(wi, wj).to_i;
}

Coupling::Interaction
GaussianGridCoupling::interact(const Eigen::Ref<const Vector> &wi,
                               const Eigen::Ref<const Vector> &wj) const {
  Vector sums;
  diagonal_sums(wi, wj, sums);
  const int band = static_cast<int>(mid_band_.size()) - 1;
  const int last = 2 * k_ - 2;
  Interaction out;
  out.pairing = sums.sum();
  out.to_i.setZero(k_);
  for (int q = 0; q <= last; ++q) {
    const double a = sums[q];
    if (a == 0.0)
      continue;
    // |2r - q| <= band
    const int r_lo = std::max(0, (q - band + 1) / 2);
    const int r_hi = std::min(k_ - 1, (q + band) / 2);
    for (int r = r_lo; r <= r_hi; ++r)
      out.to_i[r] += a * mid_band_[static_cast<std::size_t>(std::abs(2 * r - q))];
  }
  out.to_j = out.to_i;
  return out;
}

HaarKernelCoupling::HaarKernelCoupling(const BasisSet &basis) : width_(basis.width()) {
  require(basis.kind() == BasisKind::haar, "basis", "needs a Haar basis");
  const int K = basis.size();
  const double h = width_;
  pairing_.resize(K, K);
  for (int r = 0; r < K; ++r)
    for (int c = r; c < K; ++c) {
      const double a1 = r * h, b1 = a1 + h, a2 = c * h, b2 = a2 + h;
      const double v = kernel_antiderivative(b1 - a2) - kernel_antiderivative(a1 - a2) -
                       kernel_antiderivative(b1 - b2) + kernel_antiderivative(a1 - b2);
      pairing_(r, c) = pairing_(c, r) = v / (h * h);
    }
}

Vector HaarKernelCoupling::product_moments(const Eigen::Ref<const Vector> &wi,
                                           const Eigen::Ref<const Vector> &wj) const {
  require(wi.size() == size() && wj.size() == size(), "w",
          "length must match the basis size");
  return wi.cwiseProduct(pairing_ * wj) / width_;
}

Coupling::Interaction HaarKernelCoupling::interact_given(const Eigen::Ref<const Vector> &wi,
                                                         const Eigen::Ref<const Vector> &wj,
                                                         const Eigen::Ref<const Vector> &gwi,
                                                         const Eigen::Ref<const Vector> &gwj) const {
  Interaction out;
  out.pairing = wi.dot(gwj);
  out.to_i = wi.cwiseProduct(gwj) / width_;
  out.to_j = wj.cwiseProduct(gwi) / width_;
  return out;
}

std::unique_ptr<Coupling> make_coupling(const BasisSet &basis, IntensityMode mode) {
  if (mode == IntensityMode::posterior) {
    if (basis.kind() == BasisKind::gaussian && basis.uniform_grid())
      return std::make_unique<GaussianGridCoupling>(basis);
    return std::make_unique<TensorCoupling>(basis.gram(), basis.triple(), true);
  }
  if (basis.kind() == BasisKind::haar)
    return std::make_unique<HaarKernelCoupling>(basis);

  // Gaussian basis, kernel exp(-|x-y|^2) = pi^{d/2} phi(x - y; 0, 1/sqrt2):
  //   K_rc  = pi^{d/2} phi(theta_r - theta_c; 0, sqrt(2 s^2 + 1/2))
  //   U_rkc = pi^{d/2} int phi_r phi_k phi(.; theta_c, sqrt(s^2 + 1/2))
  const int K = basis.size();
  const int d = basis.dim();
  const double s2 = basis.scale() * basis.scale();
  const double norm = std::pow(std::numbers::pi, 0.5 * d);
  const Matrix &th = basis.centers();
  Matrix kmat(K, K);
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c)
      kmat(r, c) = norm * isotropic_pdf((th.row(r) - th.row(c)).squaredNorm(), 2.0 * s2 + 0.5, d);
  std::vector<TensorEntry> entries;
  const double wide = std::sqrt(s2 + 0.5);
  double peak = 0.0;
  std::vector<GaussianFactor> factors(3);
  for (int r = 0; r < K; ++r)
    for (int k = 0; k < K; ++k) {
      if (basis.gram()(r, k) < 1e-17 * basis.gram()(0, 0))
        continue;
      for (int c = 0; c < K; ++c) {
        factors[0] = {th.row(r).transpose(), basis.scale()};
        factors[1] = {th.row(k).transpose(), basis.scale()};
        factors[2] = {th.row(c).transpose(), wide};
        const double v = norm * gaussian_product(factors).coefficient;
        peak = std::max(peak, v);
        entries.push_back({r, k, c, v});
      }
    }
  std::erase_if(entries, [&](const TensorEntry &e) { return e.value < 1e-17 * peak; });
  return std::make_unique<TensorCoupling>(std::move(kmat), std::move(entries), false);
}

} // namespace latpos
