#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "corrmc/dense.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/sampling.hpp"

namespace corrmc {

/// Quality and sample-complexity summary for a (instance, prior, lambda)
/// triple.
///
/// alpha1 measures the tangent-space misalignment of the tilted subgradient,
/// alpha2 the prior's spectral leakage outside the tangent space; xi1/xi2
/// are the leverage-weighted entry and row/column norms of the misalignment
/// (computed exactly by the direct report and omitted by the angle-based
/// reports, which only bound them by alpha3 * beta).  l is the target
/// residual scale sqrt(r ln(n) / n), k_rounds the predicted number of
/// halving rounds needed to reach it, and p_lower the per-entry lower bound
/// on the observation probability suggested by the analysis (clipped at 1).
struct TheoryReport {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    std::optional<double> alpha3;
    std::optional<double> beta;
    std::optional<double> xi1;
    std::optional<double> xi2;
    double l = 0.0;
    int k_rounds = 1;
    Dense p_lower;
    /// alpha2 < 15/16, required for the exact-recovery guarantee.
    bool recovery_condition_alpha2 = false;
    /// alpha2 < 7/8, required for the noisy-recovery guarantee.
    bool noisy_condition_alpha2 = false;
};

/// Exact report from the instance's singular factors and the prior matrix:
/// computes alpha1, alpha2, xi1, xi2 directly (no alpha3/beta), and the
/// sample bound p_lower(i, j) ~ f1 * (mu_i + nu_j) r ln(n) / n * f3 with
/// f1 = max(log2(alpha1^2 n / (r ln n)), 1) and f3 = max((2 xi1 + xi2)^2, 1).
TheoryReport theory_report_direct(const ThinSvd& f, const Dense& phi, double lambda);

/// Closed-form report for a symmetric instance from the principal angles
/// between the true and prior column spaces:
///   alpha1^2 = lambda^2 (r - sum sin^4) - 2 lambda sum cos^2 + r,
///   alpha2   = lambda max sin^2,
///   alpha3   = max(1 - lambda cos^2) + 2 lambda max(cos sin),
///   beta     = max(1, sqrt(2 * leverage_ratio)).
/// The sample bound uses the one-sided base mu_i r ln(n) / n and
/// f3 = max(alpha3^2 beta^2, 1); a null profile means a flat (fully
/// incoherent) one.  xi1/xi2 are left unset (only bounded by alpha3 * beta).
TheoryReport theory_report_angles_symmetric(const std::vector<double>& gamma,
                                            double lambda, double leverage_ratio,
                                            std::size_t n,
                                            const LeverageProfile* profile = nullptr);

/// Closed-form report for a general (two-sided) instance from the
/// principal-angle blocks:
///   alpha1^2 = ||I - lambda a_cc||_F^2 + ||lambda a_cs||_F^2
///            + ||lambda a_sc||_F^2,
///   alpha2   = ||lambda a_ss||,
///   alpha3   = ||I - lambda a_cc|| + ||lambda a_sc|| + ||lambda a_cs||.
/// The sample bound uses the two-sided base (mu_i + nu_j) r ln(n) / n.
TheoryReport theory_report_angles_general(const PrincipalAngleDecomposition& d,
                                          double lambda, double beta, std::size_t n,
                                          const LeverageProfile* profile = nullptr);

/// max_i of the leverage ratio between the joint subspace span([u, u_tilde])
/// and span(u); the joint scores are normalized by the joint dimension.
/// Returns +infinity if the prior puts mass on a row where u has none.
double leverage_ratio_max(const Dense& u, const Dense& u_tilde);

/// beta = max(1, sqrt(2 * ratio_u), sqrt(2 * ratio_v)) combining both sides.
double combined_beta(const Dense& u, const Dense& u_tilde, const Dense& v,
                     const Dense& v_tilde);

/// Numerically constructed dual certificate for an (instance, prior, plan)
/// triple, built by iterative correction rounds on independent sub-masks
/// whose union is one draw from the plan.
///
/// decay[k] is the Frobenius norm of the tangent residual after k rounds
/// (decay[0] is exactly alpha1); conditions_met checks the two certificate
/// inequalities: residual_t <= l / (32 sqrt(2)) and
/// spectral_t_perp < 1/32 + alpha2.
struct CertificateReport {
    Dense y;                   ///< candidate dual certificate, supported on union_mask
    int k_used = 0;            ///< rounds actually run
    int k_formula = 0;         ///< rounds suggested by the halving analysis
    double residual_t = 0.0;   ///< ||tangent residual after k_used rounds||_F
    double spectral_t_perp = 0.0; ///< ||lambda P_Tperp(phi) + P_Tperp(y)||
    double alpha2 = 0.0;
    std::vector<double> decay; ///< length k_used + 1
    bool conditions_met = false;
    Mask union_mask;           ///< union of the round masks; one plan draw in law
};

/// Build the certificate.  The round count is the halving-analysis value
/// capped so that every round keeps a per-round probability of at least
/// min(1, 2 r ln(n) / n), the regime where each correction is an effective
/// contraction; fewer, denser rounds certify better at bench scale.
CertificateReport golfing_certificate(const ThinSvd& f, const Dense& phi,
                                      double lambda, const SamplingPlan& plan,
                                      std::uint64_t seed);

/// Error bound for the noise-tolerant solver at noise radius epsilon:
///   [2 + 32 sqrt(1 + 2 n / (r ln n)) (sqrt(n) + lambda ||phi||_F)] * epsilon.
double noisy_error_bound(std::size_t n, std::size_t r, double lambda,
                         const Dense& phi, double epsilon);

/// Monte-Carlo lower probe of the objective gap: the minimum, over random
/// unit-norm feasible directions z (zero on the mask), of
///   f(x_star + z) - f(x_star),  f(x) = ||x||_* - lambda <phi, x>.
/// Positive values corroborate that x_star is the unique optimum; a full
/// mask has no feasible direction and yields +infinity.  The certificate
/// must have been built on the same observation set (its y must vanish off
/// the given mask).
double recovery_margin(const ThinSvd& f, const Dense& phi, double lambda,
                       const Mask& mask, const CertificateReport& cert,
                       int trials, std::uint64_t seed = 12345);

} // namespace corrmc
