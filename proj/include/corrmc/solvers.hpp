#pragma once

#include <cstddef>

#include "corrmc/dense.hpp"
#include "corrmc/priors.hpp"
#include "corrmc/sampling.hpp"

namespace corrmc {

/// Shared configuration for the augmented-Lagrangian completion solvers.
///
/// The defaults were chosen so that the equality-constrained solvers track
/// the nuclear-norm minimizer on instances up to a few hundred rows: the
/// penalty grows slowly (factor 1.05 per iteration) toward a moderate cap,
/// which keeps the shrinkage step active long enough for the spectrum to
/// settle.  Growing much faster, or toward a much larger cap, freezes the
/// singular-value threshold prematurely and visibly degrades the phase
/// transition of the plain solver.
struct SolverConfig {
    /// Initial penalty; a non-positive value selects 1e-2 / max|observed|.
    double rho0 = 0.0;
    double rho_growth = 1.05;
    double rho_cap = 1e6;
    int max_iters = 1500;
    /// Stop when the relative equality-constraint violation on the observed
    /// entries falls below tol_feas ...
    double tol_feas = 1e-7;
    /// ... and the relative change between consecutive iterates falls below
    /// tol_change (both must hold).
    double tol_change = 1e-9;
};

/// Result of a completion solve.  Solvers never throw on non-convergence;
/// they report it here.
struct Solution {
    Dense x_hat;
    int iters = 0;
    double final_feasibility = 0.0;
    bool converged = false;
};

/// Singular value thresholding: soft-threshold the singular values of x by
/// tau >= 0 and reconstruct.  The proximal operator of tau * ||.||_*.
Dense svt(const Dense& x, double tau);

/// Nuclear-norm completion:
///   min ||X||_*  s.t.  X agrees with `observed` on the mask.
/// `observed` must be zero off the mask.  A full mask returns the observed
/// matrix exactly; an empty mask returns the zero matrix (the minimizer).
Solution solve_mc(const Mask& mask, const Dense& observed,
                  const SolverConfig& cfg = {});

/// Correlation-guided completion:
///   min ||X||_* - lambda * <phi, X>  s.t.  X agrees with `observed` on the
/// mask.  With lambda == 0 this is exactly solve_mc (identical iterates).
/// The prior folds into the shrinkage step: each iterate thresholds
/// Z + (lambda / rho) * phi instead of Z, which tilts the solution toward
/// the prior direction without changing the constraint set.
/// An empty mask yields X = 0 when lambda * ||phi|| <= 1 (the objective is
/// then non-negative); otherwise the objective is unbounded below and
/// UnboundedObjectiveError is thrown.
Solution solve_corr_mc(const Mask& mask, const Dense& observed,
                       const Prior& prior, const SolverConfig& cfg = {});

/// Diagonally weighted completion:
///   min ||R X C||_*  s.t.  X agrees with `observed` on the mask,
/// with positive diagonal weights.  Solved exactly through the substitution
/// B = R X C, which reduces it to plain completion of the rescaled data.
/// Unit weights therefore reproduce solve_mc exactly.
Solution solve_dwmc(const Mask& mask, const Dense& observed,
                    const DwmcWeights& weights, const SolverConfig& cfg = {});

/// Subspace-weighted completion:
///   min ||Q_U X Q_V||_*  s.t.  X agrees with `observed` on the mask,
/// where Q_U = tau * P_U~ + P_U~perp and Q_V = rho * P_V~ + P_V~perp project
/// onto the prior subspaces with a reduced weight.  tau == rho == 1 makes
/// both projectors the identity and delegates to solve_mc.
Solution solve_wmc(const Mask& mask, const Dense& observed,
                   const WmcWeights& weights, const SolverConfig& cfg = {});

/// Noise-tolerant correlation-guided completion:
///   min ||X||_* - lambda * <phi, X>
///   s.t. || W o (X - observed) on mask ||_F <= epsilon,
/// where the weights W are 1 on the mask by default, or the inverse
/// observation probabilities 1/p(i, j) when a sampling plan is supplied.
/// epsilon == 0 reduces to the equality-constrained solver with identical
/// iterates.
Solution solve_noisy_corr_mc(const Mask& mask, const Dense& observed,
                             const Prior& prior, double epsilon,
                             const SolverConfig& cfg = {},
                             const SamplingPlan* plan = nullptr);

} // namespace corrmc
