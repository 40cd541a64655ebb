#include "latpos/generator.hpp"

#include "latpos/gaussian.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <numbers>

namespace latpos {

Matrix assemble_R(const BasisSet &basis, const ActorParams &params,
                  const MixtureComponent &component, FilterMode mode) {
  require(basis.kind() == BasisKind::gaussian, "basis",
          "closed-form R needs a Gaussian basis");
  require(component.center.size() == basis.dim(), "center", "dimension mismatch");
  params.validate();

  const int K = basis.size();
  const int d = basis.dim();
  const double dd = static_cast<double>(d);
  const double s2 = basis.scale() * basis.scale();
  const double sigma2 = params.visibility * params.visibility;
  const double alpha2 = component.scale * component.scale;
  const double spread2 = sigma2 + alpha2;
  const double shrink = sigma2 / spread2;
  const double residual_var = sigma2 * alpha2 / spread2;
  const double kernel_mass = std::pow(2.0 * std::numbers::pi * sigma2, 0.5 * dd);
  const double keep = 1.0 - params.confidence;
  const double drift_scale = 2.0 * keep * shrink * kernel_mass / s2;
  const double diff_scale = keep * keep * kernel_mass;

  const Matrix &theta = basis.centers();
  std::array<GaussianFactor, 3> factors{
      GaussianFactor{component.center, std::sqrt(spread2)},
      GaussianFactor{Vector(d), basis.scale()}, GaussianFactor{Vector(d), basis.scale()}};

  Matrix R(K, K);
  for (int r = 0; r < K; ++r) {
    factors[1].center = theta.row(r).transpose();
    for (int c = 0; c < K; ++c) {
      factors[2].center = theta.row(c).transpose();
      const auto prod = gaussian_product(factors);
      const double tau = prod.scale * prod.scale;
      const Vector e1 = prod.center - component.center; // mean of x - c
      const Vector e2 = prod.center - factors[1].center; // mean of x - theta_r

      double value = drift_scale * (dd * tau + e1.dot(e2));
      if (mode == FilterMode::full) {
        // E[(u.w)^2] with u = x - c, w = x - theta_r, x ~ N(m, tau I)
        double sum_m = 0.0, sum_m2 = 0.0, quartic = 0.0;
        for (int k = 0; k < d; ++k) {
          const double a = e1[k], b = e2[k];
          const double mk = tau + a * b;
          sum_m += mk;
          sum_m2 += mk * mk;
          quartic += a * a * b * b + tau * (a * a + b * b + 4.0 * a * b) + 3.0 * tau * tau;
        }
        const double uw2 = sum_m * sum_m - sum_m2 + quartic;
        const double u2 = dd * tau + e1.squaredNorm();
        const double w2 = dd * tau + e2.squaredNorm();
        value += diff_scale * (shrink * shrink * (uw2 / (s2 * s2) - u2 / s2) +
                               residual_var * (w2 / (s2 * s2) - dd / s2));
      }
      R(r, c) = prod.coefficient * value;
    }
  }
  return R;
}

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> gl_nodes{
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights{
    0.1012285362903763, 0.2223810344533745, 0.3137066553962639, 0.3626837833783620,
    0.3626837833783620, 0.3137066553962639, 0.2223810344533745, 0.1012285362903763};

Matrix gaussian_quadrature_R(const BasisSet &basis, const ActorParams &params,
                             const Population &pop, FilterMode mode) {
  require(basis.dim() == 1, "basis",
          "quadrature R is implemented for one-dimensional bases");
  const int K = basis.size();
  const double s = basis.scale();
  const double lo = basis.centers().minCoeff() - 12.0 * s;
  const double hi = basis.centers().maxCoeff() + 12.0 * s;
  const double panel = 0.25 * s;
  const auto panels = static_cast<int>(std::ceil((hi - lo) / panel));
  const double half = 0.5 * (hi - lo) / panels;

  Matrix R = Matrix::Zero(K, K);
  Vector phi(K), dphi(K), d2phi(K), x(1);
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (2 * p + 1) * half;
    for (std::size_t g = 0; g < gl_nodes.size(); ++g) {
      x[0] = mid + half * gl_nodes[g];
      const double wq = half * gl_weights[g];
      const auto coef = coefficients(x, params, pop);
      const double b = coef.drift[0];
      const double a = mode == FilterMode::full ? coef.diffusion(0, 0) : 0.0;
      for (int k = 0; k < K; ++k) {
        const double z = x[0] - basis.centers()(k, 0);
        phi[k] = normal_pdf(x, basis.centers().row(k).transpose(), s);
        dphi[k] = -z / (s * s) * phi[k];
        d2phi[k] = (z * z / (s * s * s * s) - 1.0 / (s * s)) * phi[k];
      }
      R.noalias() += wq * (b * dphi + a * d2phi) * phi.transpose();
    }
  }
  return R;
}

Matrix haar_R(const BasisSet &basis, const ActorParams &params, const Population &pop,
              FilterMode mode) {
  const int K = basis.size();
  const double h = basis.width();
  Vector x(1);
  Vector a_cell = Vector::Zero(K);
  if (mode == FilterMode::full)
    for (int k = 0; k < K; ++k) {
      x[0] = basis.centers()(k, 0);
      a_cell[k] = coefficients(x, params, pop).diffusion(0, 0);
    }
  // Flux through the face between cells k and k+1: alpha W_k + beta W_{k+1}.
  Matrix M = Matrix::Zero(K, K);
  for (int k = 0; k + 1 < K; ++k) {
    x[0] = basis.origin() + (k + 1) * h;
    const double b = coefficients(x, params, pop).drift[0];
    const double alpha = std::max(b, 0.0) / h + a_cell[k] / (h * h);
    const double beta = std::min(b, 0.0) / h - a_cell[k + 1] / (h * h);
    M(k, k) -= alpha;
    M(k, k + 1) -= beta;
    M(k + 1, k) += alpha;
    M(k + 1, k + 1) += beta;
  }
  return M / h;
}

} // namespace

Matrix assemble_R(const BasisSet &basis, const ActorParams &params,
                  const Population &pop, FilterMode mode) {
  require(population_dim(pop) == basis.dim(), "population", "dimension mismatch");
  params.validate();
  if (basis.kind() == BasisKind::haar)
    return haar_R(basis, params, pop, mode);
  if (const auto *mix = std::get_if<MixturePopulation>(&pop)) {
    Matrix R = Matrix::Zero(basis.size(), basis.size());
    for (const auto &comp : mix->components())
      R += comp.weight * assemble_R(basis, params, comp, mode);
    return R;
  }
  return gaussian_quadrature_R(basis, params, pop, mode);
}

Matrix drift_propagator(const BasisSet &basis, const Matrix &r_mix, double dt,
                        PdeScheme scheme) {
  require(r_mix.rows() == basis.size() && r_mix.cols() == basis.size(), "R",
          "must be K x K");
  require(dt > 0.0, "dt", "must be positive");
  const Matrix generator = basis.solve(r_mix) * dt;
  if (scheme == PdeScheme::euler)
    return Matrix::Identity(basis.size(), basis.size()) + generator;
  return generator.exp();
}

} // namespace latpos
