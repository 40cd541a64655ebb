#pragma once

#include "latpos/basis.hpp"
#include "latpos/latent_dynamics.hpp"
#include "latpos/population.hpp"

namespace latpos {

/// drift: first-order part of the generator only; full: drift plus diffusion.
enum class FilterMode { drift, full };

/// R_rc = <A phi_r, phi_c> for one Gaussian population component and a
/// Gaussian basis, in closed form (any dimension). The triple product
/// g phi_r phi_c collapses to one Gaussian, after which every term is a
/// low-order Gaussian moment.
Matrix assemble_R(const BasisSet &basis, const ActorParams &params,
                  const MixtureComponent &component, FilterMode mode);

/// Mixture-weighted R for a whole population. Gaussian bases use the closed
/// form for mixtures and quadrature against the exact coefficients for
/// histograms; Haar bases use an upwind finite-volume discretization of the
/// forward equation with zero-flux ends, expressed in the same P dW = R W dt
/// convention.
Matrix assemble_R(const BasisSet &basis, const ActorParams &params,
                  const Population &pop, FilterMode mode);

/// How the linear drift equation P dW = R W dt is advanced over one step.
/// euler: W + dt P^{-1} R W. exponential: exp(dt P^{-1} R) W, exact for the
/// frozen generator and stable for any step.
enum class PdeScheme { euler, exponential };

/// Matrix E with W(t + dt) = E W(t).
Matrix drift_propagator(const BasisSet &basis, const Matrix &r_mix, double dt,
                        PdeScheme scheme);

} // namespace latpos
