#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "corrmc/dense.hpp"
#include "corrmc/linalg.hpp"

namespace corrmc {

/// A correlation prior: the solver maximizes lambda * <phi, X> alongside the
/// nuclear-norm objective.  lambda must be non-negative.
struct Prior {
    Dense phi;
    double lambda = 0.0;
};

/// Orthonormal subspace estimates extracted from a perturbed copy of an
/// instance; phi = u * v^T is the induced correlation prior.
struct SubspaceEstimate {
    Dense u; ///< n x r, orthonormal columns
    Dense v; ///< n x r, orthonormal columns
};

/// Estimate the column/row spaces of x_star from the perturbed copy
/// x_star + sigma * G (G has i.i.d. standard normal entries, drawn
/// deterministically from seed, row-major order): the leading r singular
/// subspaces of the copy.  sigma == 0 returns the subspaces of x_star itself.
SubspaceEstimate noisy_copy_subspaces(const Dense& x_star, double sigma,
                                      std::size_t r, std::uint64_t seed);

/// Rank-r correlation prior u_tilde * v_tilde^T built from a perturbed copy;
/// equals subspace_prior(noisy_copy_subspaces(...)).
Dense noisy_copy_prior(const Dense& x_star, double sigma, std::size_t r,
                       std::uint64_t seed);

/// phi = u_tilde * v_tilde^T for orthonormal bases of the believed column
/// and row spaces.  The result is a partial isometry: its r singular values
/// all equal 1.
Dense subspace_prior(const Dense& u_tilde, const Dense& v_tilde);

/// The tradeoff weight minimizing the tangent misalignment alpha_1^2 and the
/// minimum it achieves.
struct LambdaStar {
    double lambda = 0.0;
    double alpha1_sq = 0.0;
};

/// Closed form for a symmetric instance with principal angles gamma between
/// the true and prior column spaces:
///   lambda* = sum cos^2(gamma) / (r - sum sin^4(gamma)),
///   alpha1^2(lambda) = lambda^2 (r - sum sin^4) - 2 lambda sum cos^2 + r.
/// Fully orthogonal priors (all angles pi/2) make the ratio 0/0; the weight
/// degenerates to 0 with alpha1_sq = r (the no-prior value).
LambdaStar lambda_star_symmetric(const std::vector<double>& gamma);

/// General (two-sided) form from the principal-angle blocks:
///   lambda* = tr(a_cc) / (||a_cc||_F^2 + ||a_cs||_F^2 + ||a_sc||_F^2);
/// alpha1_sq is the quadratic evaluated at the returned weight.  The
/// minimizer is returned unclipped (it can exceed 1 for unusual priors; a
/// note is logged when it leaves [0, 1]).  A vanishing denominator
/// degenerates to {0, r}.
LambdaStar lambda_star_general(const PrincipalAngleDecomposition& d);

/// Subspace-projection weight for the weighted completion baseline, derived
/// from the largest principal angle theta between true and prior subspaces:
///   w^2 = sqrt(tan^4(theta) + tan^2(theta)) - tan^2(theta),
/// clamped to [w_min, 1].  theta == pi/2 has no defined weight and throws
/// UndefinedTangentError.
double wmc_weight(double theta_max, double w_min = 1e-3);

/// Inputs of the weighted completion baseline: both projector weights and
/// the prior bases that define the projectors.
struct WmcWeights {
    double tau = 1.0; ///< column-space weight
    double rho = 1.0; ///< row-space weight
    Dense u_tilde;    ///< n x r orthonormal prior column basis
    Dense v_tilde;    ///< n x r orthonormal prior row basis
};

/// Row/column scaling weights for the diagonally weighted baseline:
///   R_diag[i] = sqrt(mu_tilde[i] * r / n + 1 / n),
///   C_diag[j] = sqrt(nu_tilde[j] * r / n + 1 / n),
/// from the leverage profile of the prior subspaces.
struct DwmcWeights {
    std::vector<double> r_diag;
    std::vector<double> c_diag;
};

DwmcWeights dwmc_weights(const LeverageProfile& prior_profile);

} // namespace corrmc
