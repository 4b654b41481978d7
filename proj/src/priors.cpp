#include "corrmc/priors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "corrmc/kernels.hpp"
#include "corrmc/rng.hpp"

namespace corrmc {

SubspaceEstimate noisy_copy_subspaces(const Dense& x_star, double sigma,
                                      std::size_t r, std::uint64_t seed) {
    if (sigma < 0.0) {
        throw InvariantViolationError("noisy_copy_subspaces: sigma must be non-negative");
    }
    Dense copy = x_star;
    if (sigma > 0.0) {
        Rng rng(seed);
        for (std::size_t i = 0; i < copy.rows(); ++i) {
            for (std::size_t j = 0; j < copy.cols(); ++j) {
                copy(i, j) += sigma * rng.normal();
            }
        }
    }
    ThinSvd f = thin_svd(copy, r);
    return SubspaceEstimate{std::move(f.u), std::move(f.v)};
}

Dense noisy_copy_prior(const Dense& x_star, double sigma, std::size_t r,
                       std::uint64_t seed) {
    const SubspaceEstimate est = noisy_copy_subspaces(x_star, sigma, r, seed);
    return subspace_prior(est.u, est.v);
}

Dense subspace_prior(const Dense& u_tilde, const Dense& v_tilde) {
    if (u_tilde.cols() != v_tilde.cols()) {
        throw DimensionError("subspace_prior: bases have different widths");
    }
    if (!has_orthonormal_columns(u_tilde) || !has_orthonormal_columns(v_tilde)) {
        throw InvariantViolationError("subspace_prior: columns are not orthonormal");
    }
    return kernels::matmul_nt(u_tilde, v_tilde);
}

LambdaStar lambda_star_symmetric(const std::vector<double>& gamma) {
    const double r = static_cast<double>(gamma.size());
    if (gamma.empty()) {
        throw DimensionError("lambda_star_symmetric: no angles given");
    }
    double num = 0.0;     // sum cos^2
    double sin4 = 0.0;    // sum sin^4
    for (double g : gamma) {
        if (g < 0.0 || g > 1.5707963267948967) {
            throw InvariantViolationError(
                "lambda_star_symmetric: angles must lie in [0, pi/2]");
        }
        const double c = std::cos(g);
        const double s = std::sin(g);
        num += c * c;
        sin4 += s * s * s * s;
    }
    const double den = r - sin4;
    LambdaStar out;
    if (den <= 0.0 || num <= 0.0) {
        out.lambda = 0.0;
        out.alpha1_sq = r;
        return out;
    }
    out.lambda = num / den;
    out.alpha1_sq = out.lambda * out.lambda * den - 2.0 * out.lambda * num + r;
    return out;
}

LambdaStar lambda_star_general(const PrincipalAngleDecomposition& d) {
    const double r = static_cast<double>(d.r);
    double num = 0.0;
    for (std::size_t k = 0; k < d.r; ++k) {
        num += d.a_cc(k, k);
    }
    const double fcc = kernels::frobenius_norm(d.a_cc);
    const double fcs = kernels::frobenius_norm(d.a_cs);
    const double fsc = kernels::frobenius_norm(d.a_sc);
    const double den = fcc * fcc + fcs * fcs + fsc * fsc;
    LambdaStar out;
    if (den <= 0.0 || num <= 0.0) {
        out.lambda = 0.0;
        out.alpha1_sq = r;
        return out;
    }
    out.lambda = num / den;
    out.alpha1_sq = out.lambda * out.lambda * den - 2.0 * out.lambda * num + r;
    if (out.lambda > 1.0) {
        std::clog << "lambda_star_general: unconstrained minimizer "
                  << out.lambda << " lies outside [0, 1]\n";
    }
    return out;
}

double wmc_weight(double theta_max, double w_min) {
    constexpr double kHalfPi = 1.5707963267948966;
    if (theta_max < 0.0 || theta_max >= kHalfPi) {
        throw UndefinedTangentError(
            "wmc_weight: angle must lie in [0, pi/2); the tangent diverges at pi/2");
    }
    if (!(w_min > 0.0) || w_min > 1.0) {
        throw InvariantViolationError("wmc_weight: w_min must lie in (0, 1]");
    }
    const double t = std::tan(theta_max);
    const double t2 = t * t;
    const double w_sq = std::sqrt(t2 * t2 + t2) - t2;
    const double w = std::sqrt(std::max(0.0, w_sq));
    return std::min(1.0, std::max(w_min, w));
}

DwmcWeights dwmc_weights(const LeverageProfile& prior_profile) {
    const double r = static_cast<double>(prior_profile.r);
    DwmcWeights out;
    const double m = static_cast<double>(prior_profile.mu.size());
    const double n = static_cast<double>(prior_profile.nu.size());
    out.r_diag.reserve(prior_profile.mu.size());
    for (double mu : prior_profile.mu) {
        out.r_diag.push_back(std::sqrt(mu * r / m + 1.0 / m));
    }
    out.c_diag.reserve(prior_profile.nu.size());
    for (double nu : prior_profile.nu) {
        out.c_diag.push_back(std::sqrt(nu * r / n + 1.0 / n));
    }
    return out;
}

} // namespace corrmc
