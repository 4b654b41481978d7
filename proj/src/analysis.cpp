#include "corrmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corrmc/kernels.hpp"
#include "corrmc/rng.hpp"

namespace corrmc {

namespace {

double residual_scale(std::size_t r, std::size_t n) {
    return std::sqrt(static_cast<double>(r) * std::log(static_cast<double>(n)) /
                     static_cast<double>(n));
}

// max(log2(alpha1^2 n / (r ln n)), 1); degenerates to 1 for alpha1 == 0.
double round_count_factor(double alpha1, std::size_t r, std::size_t n) {
    const double arg = alpha1 * alpha1 * static_cast<double>(n) /
                       (static_cast<double>(r) * std::log(static_cast<double>(n)));
    if (!(arg > 1.0)) {
        return 1.0;
    }
    return std::max(std::log2(arg), 1.0);
}

void require_report_inputs(std::size_t r, std::size_t n, const char* where) {
    if (r == 0) {
        throw DimensionError(std::string(where) + ": rank must be positive");
    }
    if (n < 2) {
        throw DimensionError(std::string(where) + ": dimension must be at least 2");
    }
}

// Fill p_lower either from the one-sided (mu only) or two-sided (mu + nu)
// base rate, with a flat profile when none is given.
Dense sample_bound(std::size_t n, std::size_t r, double f1, double f3,
                   const LeverageProfile* profile, bool two_sided,
                   const char* where) {
    if (profile != nullptr &&
        (profile->mu.size() != n || (two_sided && profile->nu.size() != n))) {
        throw DimensionError(std::string(where) + ": profile does not match n");
    }
    const double base = static_cast<double>(r) * std::log(static_cast<double>(n)) /
                        static_cast<double>(n);
    Dense out(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = profile ? profile->mu[i] : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double nu = profile ? profile->nu[j] : 1.0;
            const double weight = two_sided ? (mu + nu) : mu;
            out(i, j) = std::min(1.0, f1 * weight * base * f3);
        }
    }
    return out;
}

void finish_report(TheoryReport& rep, std::size_t r, std::size_t n) {
    rep.l = residual_scale(r, n);
    rep.k_rounds = golfing_iteration_count(rep.alpha1, rep.l);
    rep.recovery_condition_alpha2 = rep.alpha2 < 15.0 / 16.0;
    rep.noisy_condition_alpha2 = rep.alpha2 < 7.0 / 8.0;
}

Dense reconstruct(const ThinSvd& f) {
    Dense us = f.u;
    for (std::size_t i = 0; i < us.rows(); ++i) {
        for (std::size_t k = 0; k < us.cols(); ++k) {
            us(i, k) *= f.s[k];
        }
    }
    return kernels::matmul_nt(us, f.v);
}

} // namespace

TheoryReport theory_report_direct(const ThinSvd& f, const Dense& phi, double lambda) {
    if (lambda < 0.0) {
        throw InvariantViolationError("theory_report_direct: lambda must be non-negative");
    }
    if (f.u.rows() != phi.rows() || f.v.rows() != phi.cols()) {
        throw DimensionError("theory_report_direct: prior does not match factors");
    }
    if (f.u.rows() != f.v.rows()) {
        throw DimensionError("theory_report_direct: instance must be square");
    }
    const std::size_t n = f.u.rows();
    const std::size_t r = f.rank();
    require_report_inputs(r, n, "theory_report_direct");

    const TangentSpace t = TangentSpace::from_svd(f);
    const Dense pt_phi = project_tangent(t, phi);

    Dense w0 = kernels::matmul_nt(f.u, f.v);
    kernels::add_scaled(-lambda, pt_phi, w0);

    Dense leak = kernels::difference(phi, pt_phi);
    kernels::scale(lambda, leak);

    TheoryReport rep;
    rep.alpha1 = kernels::frobenius_norm(w0);
    rep.alpha2 = operator_norm(leak);

    const LeverageProfile profile = leverage_scores(f);
    rep.xi1 = mu_inf_norm(w0, profile);
    rep.xi2 = mu_inf2_norm(w0, profile);

    const double f1 = round_count_factor(rep.alpha1, r, n);
    const double combo = 2.0 * *rep.xi1 + *rep.xi2;
    const double f3 = std::max(combo * combo, 1.0);
    rep.p_lower = sample_bound(n, r, f1, f3, &profile, /*two_sided=*/true,
                               "theory_report_direct");
    finish_report(rep, r, n);
    return rep;
}

TheoryReport theory_report_angles_symmetric(const std::vector<double>& gamma,
                                            double lambda, double leverage_ratio,
                                            std::size_t n,
                                            const LeverageProfile* profile) {
    if (gamma.empty()) {
        throw DimensionError("theory_report_angles_symmetric: no angles given");
    }
    if (lambda < 0.0 || leverage_ratio < 0.0) {
        throw InvariantViolationError(
            "theory_report_angles_symmetric: lambda and leverage ratio must be non-negative");
    }
    const std::size_t r = gamma.size();
    require_report_inputs(r, n, "theory_report_angles_symmetric");

    double sum_cos2 = 0.0;
    double sum_sin4 = 0.0;
    double max_sin2 = 0.0;
    double max_one_minus = -std::numeric_limits<double>::infinity();
    double max_cos_sin = 0.0;
    for (double g : gamma) {
        const double c = std::cos(g);
        const double s = std::sin(g);
        sum_cos2 += c * c;
        sum_sin4 += s * s * s * s;
        max_sin2 = std::max(max_sin2, s * s);
        max_one_minus = std::max(max_one_minus, 1.0 - lambda * c * c);
        max_cos_sin = std::max(max_cos_sin, c * s);
    }

    TheoryReport rep;
    const double rr = static_cast<double>(r);
    const double a1_sq = lambda * lambda * (rr - sum_sin4) - 2.0 * lambda * sum_cos2 + rr;
    rep.alpha1 = std::sqrt(std::max(0.0, a1_sq));
    rep.alpha2 = lambda * max_sin2;
    rep.alpha3 = max_one_minus + 2.0 * lambda * max_cos_sin;
    rep.beta = std::max(1.0, std::sqrt(2.0 * leverage_ratio));

    const double f1 = round_count_factor(rep.alpha1, r, n);
    const double prod = *rep.alpha3 * *rep.beta;
    const double f3 = std::max(prod * prod, 1.0);
    rep.p_lower = sample_bound(n, r, f1, f3, profile, /*two_sided=*/false,
                               "theory_report_angles_symmetric");
    finish_report(rep, r, n);
    return rep;
}

TheoryReport theory_report_angles_general(const PrincipalAngleDecomposition& d,
                                          double lambda, double beta, std::size_t n,
                                          const LeverageProfile* profile) {
    if (lambda < 0.0 || beta < 1.0) {
        throw InvariantViolationError(
            "theory_report_angles_general: lambda must be non-negative and beta at least 1");
    }
    const std::size_t r = d.r;
    require_report_inputs(r, n, "theory_report_angles_general");

    Dense misalign = Dense::identity(r);
    kernels::add_scaled(-lambda, d.a_cc, misalign);
    const double fcs = lambda * kernels::frobenius_norm(d.a_cs);
    const double fsc = lambda * kernels::frobenius_norm(d.a_sc);
    const double fmm = kernels::frobenius_norm(misalign);

    TheoryReport rep;
    rep.alpha1 = std::sqrt(fmm * fmm + fcs * fcs + fsc * fsc);
    rep.alpha2 = lambda * operator_norm(d.a_ss);
    rep.alpha3 = operator_norm(misalign) + lambda * operator_norm(d.a_sc) +
                 lambda * operator_norm(d.a_cs);
    rep.beta = beta;

    const double f1 = round_count_factor(rep.alpha1, r, n);
    const double prod = *rep.alpha3 * beta;
    const double f3 = std::max(prod * prod, 1.0);
    rep.p_lower = sample_bound(n, r, f1, f3, profile, /*two_sided=*/true,
                               "theory_report_angles_general");
    finish_report(rep, r, n);
    return rep;
}

double leverage_ratio_max(const Dense& u, const Dense& u_tilde) {
    if (u.rows() != u_tilde.rows()) {
        throw DimensionError("leverage_ratio_max: ambient dimensions differ");
    }
    if (!has_orthonormal_columns(u) || !has_orthonormal_columns(u_tilde)) {
        throw InvariantViolationError("leverage_ratio_max: bases are not orthonormal");
    }
    const std::size_t n = u.rows();
    const std::size_t r = u.cols();

    // Orthonormal basis of the joint span via the SVD of the concatenation.
    Dense concat(n, r + u_tilde.cols());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
            concat(i, k) = u(i, k);
        }
        for (std::size_t k = 0; k < u_tilde.cols(); ++k) {
            concat(i, r + k) = u_tilde(i, k);
        }
    }
    SvdResult dec = svd(concat);
    std::size_t s = 0;
    const double cutoff = 1e-10 * (dec.s.empty() ? 0.0 : dec.s[0]);
    while (s < dec.s.size() && dec.s[s] > cutoff) {
        ++s;
    }
    if (s == 0) {
        throw InvariantViolationError("leverage_ratio_max: joint span is empty");
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double joint = 0.0;
        for (std::size_t k = 0; k < s; ++k) {
            joint += dec.u(i, k) * dec.u(i, k);
        }
        const double mu_joint =
            static_cast<double>(n) / static_cast<double>(s) * joint;
        double own = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            own += u(i, k) * u(i, k);
        }
        const double mu_own = static_cast<double>(n) / static_cast<double>(r) * own;
        if (mu_own <= 0.0) {
            if (mu_joint > 1e-20) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        worst = std::max(worst, mu_joint / mu_own);
    }
    return worst;
}

double combined_beta(const Dense& u, const Dense& u_tilde, const Dense& v,
                     const Dense& v_tilde) {
    const double ru = leverage_ratio_max(u, u_tilde);
    const double rv = leverage_ratio_max(v, v_tilde);
    return std::max({1.0, std::sqrt(2.0 * ru), std::sqrt(2.0 * rv)});
}

CertificateReport golfing_certificate(const ThinSvd& f, const Dense& phi,
                                      double lambda, const SamplingPlan& plan,
                                      std::uint64_t seed) {
    const std::size_t n = plan.n;
    if (f.u.rows() != n || f.v.rows() != n || phi.rows() != n || phi.cols() != n) {
        throw DimensionError("golfing_certificate: operands do not match the plan");
    }
    if (lambda < 0.0) {
        throw InvariantViolationError("golfing_certificate: lambda must be non-negative");
    }
    const std::size_t r = f.rank();
    require_report_inputs(r, n, "golfing_certificate");

    const TangentSpace t = TangentSpace::from_svd(f);
    const Dense pt_phi = project_tangent(t, phi);
    Dense w = kernels::matmul_nt(f.u, f.v);
    kernels::add_scaled(-lambda, pt_phi, w);

    CertificateReport rep;
    rep.union_mask = Mask(n, false, seed);
    const double alpha1 = kernels::frobenius_norm(w);
    const double l = residual_scale(r, n);
    rep.k_formula = golfing_iteration_count(alpha1, l);

    // Cap the round count so each round keeps q above the contraction
    // threshold: splitting a fixed p across too many rounds thins every
    // round past the regime where a correction round actually halves the
    // residual, and the certificate stops converging.
    double p_min = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p_min = std::min(p_min, plan.p(i, j));
        }
    }
    const double q_floor =
        std::min(1.0, 2.0 * static_cast<double>(r) * std::log(static_cast<double>(n)) /
                          static_cast<double>(n));
    int k_used = 1;
    for (int k = 1; k <= rep.k_formula; ++k) {
        if (golfing_split(p_min, k) >= q_floor) {
            k_used = k;
        }
    }
    rep.k_used = k_used;

    Dense q(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            q(i, j) = golfing_split(plan.p(i, j), k_used);
        }
    }
    SamplingPlan round_plan;
    round_plan.n = n;
    round_plan.p = std::move(q);
    round_plan.symmetric = plan.symmetric;

    rep.y = Dense(n, n, 0.0);
    rep.decay.clear();
    rep.decay.push_back(alpha1);
    for (int k = 1; k <= k_used; ++k) {
        const Mask round_mask = draw_mask(
            round_plan, derive_seed(seed, 0, static_cast<std::uint64_t>(k),
                                    StreamPurpose::mask));
        rep.union_mask.merge(round_mask);
        const Dense rw = apply_rp(w, round_plan, round_mask);
        kernels::add_scaled(1.0, rw, rep.y);
        w = kernels::difference(w, project_tangent(t, rw));
        rep.decay.push_back(kernels::frobenius_norm(w));
    }

    rep.residual_t = rep.decay.back();
    Dense leak = kernels::difference(phi, pt_phi); // P_Tperp(phi)
    kernels::scale(lambda, leak);
    rep.alpha2 = operator_norm(leak);
    kernels::add_scaled(1.0, project_tangent_perp(t, rep.y), leak);
    rep.spectral_t_perp = operator_norm(leak);

    rep.conditions_met = rep.residual_t <= l / (32.0 * std::sqrt(2.0)) &&
                         rep.spectral_t_perp < 1.0 / 32.0 + rep.alpha2;
    return rep;
}

double noisy_error_bound(std::size_t n, std::size_t r, double lambda,
                         const Dense& phi, double epsilon) {
    require_report_inputs(r, n, "noisy_error_bound");
    if (lambda < 0.0 || epsilon < 0.0) {
        throw InvariantViolationError(
            "noisy_error_bound: lambda and epsilon must be non-negative");
    }
    const double nn = static_cast<double>(n);
    const double rr = static_cast<double>(r);
    const double inner = 1.0 + 2.0 * nn / (rr * std::log(nn));
    const double prior_mass = lambda * kernels::frobenius_norm(phi);
    return (2.0 + 32.0 * std::sqrt(inner) * (std::sqrt(nn) + prior_mass)) * epsilon;
}

double recovery_margin(const ThinSvd& f, const Dense& phi, double lambda,
                       const Mask& mask, const CertificateReport& cert,
                       int trials, std::uint64_t seed) {
    const std::size_t n = mask.n();
    if (f.u.rows() != n || f.v.rows() != n || phi.rows() != n || phi.cols() != n) {
        throw DimensionError("recovery_margin: operands do not match the mask");
    }
    if (cert.y.rows() != n || cert.y.cols() != n) {
        throw DimensionError("recovery_margin: certificate does not match the mask");
    }
    if (trials < 1) {
        throw InvariantViolationError("recovery_margin: trials must be positive");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!mask(i, j) && cert.y(i, j) != 0.0) {
                throw InvariantViolationError(
                    "recovery_margin: certificate was built on a different observation set");
            }
        }
    }
    if (mask.full()) {
        return std::numeric_limits<double>::infinity();
    }

    const Dense x_star = reconstruct(f);
    const double base = nuclear_norm(x_star) - lambda * kernels::dot(phi, x_star);

    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        Dense z(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double g = rng.normal();
                if (!mask(i, j)) {
                    z(i, j) = g;
                }
            }
        }
        const double norm = kernels::frobenius_norm(z);
        if (norm == 0.0) {
            continue;
        }
        kernels::scale(1.0 / norm, z);
        const Dense probe = kernels::sum(x_star, z);
        const double val =
            nuclear_norm(probe) - lambda * kernels::dot(phi, probe) - base;
        worst = std::min(worst, val);
    }
    return worst;
}

} // namespace corrmc
