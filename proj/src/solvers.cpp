#include "corrmc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "corrmc/kernels.hpp"
#include "corrmc/linalg.hpp"

namespace corrmc {

namespace {

constexpr double kTiny = 1e-300;

void validate_config(const SolverConfig& cfg) {
    if (cfg.max_iters < 1) {
        throw ConfigError("solver config: max_iters must be at least 1");
    }
    if (!(cfg.rho_growth >= 1.0)) {
        throw ConfigError("solver config: rho_growth must be at least 1");
    }
    if (!(cfg.rho_cap > 0.0)) {
        throw ConfigError("solver config: rho_cap must be positive");
    }
    if (cfg.tol_feas < 0.0 || cfg.tol_change < 0.0) {
        throw ConfigError("solver config: tolerances must be non-negative");
    }
}

void require_observed(const Mask& mask, const Dense& observed, const char* where) {
    if (observed.rows() != mask.n() || observed.cols() != mask.n()) {
        throw DimensionError(std::string(where) + ": observed matrix does not match mask");
    }
    for (std::size_t i = 0; i < mask.n(); ++i) {
        for (std::size_t j = 0; j < mask.n(); ++j) {
            if (!mask(i, j) && observed(i, j) != 0.0) {
                throw InvariantViolationError(
                    std::string(where) + ": entries off the mask must be zero");
            }
        }
    }
}

double observed_norm(const Mask& mask, const Dense& d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mask.n(); ++i) {
        for (std::size_t j = 0; j < mask.n(); ++j) {
            if (mask(i, j)) {
                acc += d(i, j) * d(i, j);
            }
        }
    }
    return std::sqrt(acc);
}

double initial_rho(const SolverConfig& cfg, const Dense& d) {
    if (cfg.rho0 > 0.0) {
        return cfg.rho0;
    }
    return 1e-2 / std::max(kernels::max_abs(d), 1e-12);
}

Solution trivial_full_mask(const Dense& observed) {
    Solution sol;
    sol.x_hat = observed;
    sol.iters = 0;
    sol.final_feasibility = 0.0;
    sol.converged = true;
    return sol;
}

Solution trivial_empty_mask(std::size_t n, const Dense* phi, double lambda,
                            const char* where) {
    const double pull = (phi != nullptr && lambda > 0.0)
                            ? lambda * operator_norm(*phi)
                            : 0.0;
    if (pull > 1.0 + 1e-12) {
        throw UnboundedObjectiveError(
            std::string(where) +
            ": with no observations and a prior pull exceeding the nuclear norm "
            "the objective is unbounded below");
    }
    Solution sol;
    sol.x_hat = Dense(n, n, 0.0);
    sol.iters = 0;
    sol.final_feasibility = 0.0;
    sol.converged = true;
    return sol;
}

/// Augmented-Lagrangian loop for
///   min ||A||_* - lambda <phi, A>   s.t.  A = observed on the mask.
/// The equality constraint is handled through the split A + E = observed
/// with E free off the mask and pinned to zero on it; the prior enters only
/// by shifting the shrinkage target by (lambda / rho) * phi.
Solution alm_equality(const Mask& mask, const Dense& d, const Dense* phi,
                      double lambda, const SolverConfig& cfg) {
    validate_config(cfg);
    const std::size_t n = mask.n();
    const std::size_t observed_count = mask.count();
    if (observed_count == n * n) {
        return trivial_full_mask(d);
    }
    if (observed_count == 0) {
        return trivial_empty_mask(n, phi, lambda, "completion");
    }

    const bool use_prior = (phi != nullptr) && (lambda != 0.0);
    const double norm_obs = std::max(observed_norm(mask, d), kTiny);

    double rho = initial_rho(cfg, d);
    Dense a(n, n, 0.0);
    Dense e(n, n, 0.0);
    Dense dual(n, n, 0.0);

    Solution sol;
    for (int k = 0; k < cfg.max_iters; ++k) {
        // Shrinkage target: observed - e + dual / rho (+ prior tilt).
        Dense g = d;
        kernels::add_scaled(-1.0, e, g);
        kernels::add_scaled(1.0 / rho, dual, g);
        if (use_prior) {
            kernels::add_scaled(lambda / rho, *phi, g);
        }
        Dense a_new = svt(g, 1.0 / rho);

        // Slack and dual update.  Off the mask the slack absorbs the
        // residual exactly, so the dual stays identically zero there and
        // the feasibility norm only involves observed entries.
        double feas_sq = 0.0;
        double diff_sq = 0.0;
        double prev_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double updated = a_new(i, j);
                const double prev = a(i, j);
                const double delta = updated - prev;
                diff_sq += delta * delta;
                prev_sq += prev * prev;
                if (mask(i, j)) {
                    e(i, j) = 0.0;
                    const double resid = d(i, j) - updated;
                    dual(i, j) += rho * resid;
                    feas_sq += resid * resid;
                } else {
                    e(i, j) = d(i, j) - updated + dual(i, j) / rho;
                }
            }
        }
        a = std::move(a_new);

        const double feas = std::sqrt(feas_sq) / norm_obs;
        const double change = std::sqrt(diff_sq) / std::max(std::sqrt(prev_sq), kTiny);
        sol.iters = k + 1;
        sol.final_feasibility = feas;
        if (feas < cfg.tol_feas && change < cfg.tol_change) {
            sol.converged = true;
            break;
        }
        rho = std::min(rho * cfg.rho_growth, cfg.rho_cap);
    }
    sol.x_hat = std::move(a);
    return sol;
}

} // namespace

Dense svt(const Dense& x, double tau) {
    if (tau < 0.0) {
        throw InvariantViolationError("svt: threshold must be non-negative");
    }
    SvdResult f = svd(x);
    std::size_t keep = 0;
    while (keep < f.s.size() && f.s[keep] > tau) {
        ++keep;
    }
    if (keep == 0) {
        return Dense(x.rows(), x.cols(), 0.0);
    }
    Dense us(x.rows(), keep);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < keep; ++k) {
            us(i, k) = f.u(i, k) * (f.s[k] - tau);
        }
    }
    Dense vk(x.cols(), keep);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t k = 0; k < keep; ++k) {
            vk(j, k) = f.v(j, k);
        }
    }
    return kernels::matmul_nt(us, vk);
}

Solution solve_mc(const Mask& mask, const Dense& observed, const SolverConfig& cfg) {
    require_observed(mask, observed, "solve_mc");
    return alm_equality(mask, observed, nullptr, 0.0, cfg);
}

Solution solve_corr_mc(const Mask& mask, const Dense& observed, const Prior& prior,
                       const SolverConfig& cfg) {
    require_observed(mask, observed, "solve_corr_mc");
    if (prior.lambda < 0.0) {
        throw InvariantViolationError("solve_corr_mc: lambda must be non-negative");
    }
    if (prior.lambda != 0.0) {
        require_same_shape(prior.phi, observed, "solve_corr_mc");
    }
    return alm_equality(mask, observed, prior.lambda != 0.0 ? &prior.phi : nullptr,
                        prior.lambda, cfg);
}

Solution solve_dwmc(const Mask& mask, const Dense& observed, const DwmcWeights& weights,
                    const SolverConfig& cfg) {
    require_observed(mask, observed, "solve_dwmc");
    const std::size_t n = mask.n();
    if (weights.r_diag.size() != n || weights.c_diag.size() != n) {
        throw DimensionError("solve_dwmc: weight vectors do not match the mask size");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weights.r_diag[i] > 0.0) || !(weights.c_diag[i] > 0.0)) {
            throw InvariantViolationError("solve_dwmc: weights must be positive");
        }
    }
    // B = R X C turns the weighted objective into a plain nuclear norm with
    // rescaled data; unit weights leave every entry untouched.
    Dense scaled(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scaled(i, j) = weights.r_diag[i] * observed(i, j) * weights.c_diag[j];
        }
    }
    Solution inner = alm_equality(mask, scaled, nullptr, 0.0, cfg);
    Solution sol;
    sol.iters = inner.iters;
    sol.final_feasibility = inner.final_feasibility;
    sol.converged = inner.converged;
    sol.x_hat = Dense(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            sol.x_hat(i, j) = inner.x_hat(i, j) / (weights.r_diag[i] * weights.c_diag[j]);
        }
    }
    return sol;
}

namespace {

// y = (w diag(d) w^T) x (v diag(f) v^T) for orthogonal w, v.
Dense apply_projector_pair(const Dense& w, const std::vector<double>& dw,
                           const Dense& v, const std::vector<double>& dv,
                           const Dense& x) {
    Dense left = kernels::matmul_tn(w, x); // w^T x
    for (std::size_t i = 0; i < left.rows(); ++i) {
        for (std::size_t j = 0; j < left.cols(); ++j) {
            left(i, j) *= dw[i];
        }
    }
    Dense mid = kernels::matmul_nn(kernels::matmul_nn(w, left), v); // (w diag d w^T x) v
    for (std::size_t i = 0; i < mid.rows(); ++i) {
        for (std::size_t j = 0; j < mid.cols(); ++j) {
            mid(i, j) *= dv[j];
        }
    }
    return kernels::matmul_nt(mid, v);
}

} // namespace

Solution solve_wmc(const Mask& mask, const Dense& observed, const WmcWeights& weights,
                   const SolverConfig& cfg) {
    require_observed(mask, observed, "solve_wmc");
    validate_config(cfg);
    if (!(weights.tau > 0.0) || !(weights.rho > 0.0)) {
        throw InvariantViolationError("solve_wmc: projector weights must be positive");
    }
    if (weights.tau == 1.0 && weights.rho == 1.0) {
        // Both projectors are the identity; the weighted objective is the
        // plain nuclear norm.
        return solve_mc(mask, observed, cfg);
    }
    const std::size_t n = mask.n();
    if (weights.u_tilde.rows() != n || weights.v_tilde.rows() != n) {
        throw DimensionError("solve_wmc: prior bases do not match the mask size");
    }
    if (!has_orthonormal_columns(weights.u_tilde) ||
        !has_orthonormal_columns(weights.v_tilde)) {
        throw InvariantViolationError("solve_wmc: prior bases are not orthonormal");
    }
    const std::size_t observed_count = mask.count();
    if (observed_count == n * n) {
        return trivial_full_mask(observed);
    }
    if (observed_count == 0) {
        return trivial_empty_mask(n, nullptr, 0.0, "solve_wmc");
    }

    const std::size_t r = weights.u_tilde.cols();
    const Dense wu = complete_basis(weights.u_tilde);
    const Dense wv = complete_basis(weights.v_tilde);
    std::vector<double> du(n, 1.0);
    std::vector<double> dv(n, 1.0);
    for (std::size_t k = 0; k < r; ++k) {
        du[k] = weights.tau;
    }
    for (std::size_t k = 0; k < weights.v_tilde.cols(); ++k) {
        dv[k] = weights.rho;
    }
    std::vector<double> du_sq(n), dv_sq(n);
    for (std::size_t k = 0; k < n; ++k) {
        du_sq[k] = du[k] * du[k];
        dv_sq[k] = dv[k] * dv[k];
    }

    const double norm_obs = std::max(observed_norm(mask, observed), kTiny);
    double rho = initial_rho(cfg, observed);

    Dense x(n, n, 0.0);
    Dense b(n, n, 0.0);
    Dense e(n, n, 0.0);
    Dense dual_b(n, n, 0.0); // for Q_U X Q_V = B
    Dense dual_c(n, n, 0.0); // for X = observed on the mask

    Solution sol;
    for (int k = 0; k < cfg.max_iters; ++k) {
        // B step: shrink the weighted image of the current iterate.
        Dense qxq = apply_projector_pair(wu, du, wv, dv, x);
        Dense b_target = qxq;
        kernels::add_scaled(1.0 / rho, dual_b, b_target);
        b = svt(b_target, 1.0 / rho);

        // E step: absorb the data residual off the mask.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                e(i, j) = mask(i, j)
                              ? 0.0
                              : observed(i, j) - x(i, j) - dual_c(i, j) / rho;
            }
        }

        // X step: normal equations Q_U^2 X Q_V^2 + X = Q_U M1 Q_V + M2,
        // diagonal in the projector eigenbasis.
        Dense m1 = b;
        kernels::add_scaled(-1.0 / rho, dual_b, m1);
        Dense rhs = apply_projector_pair(wu, du, wv, dv, m1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                rhs(i, j) += observed(i, j) - e(i, j) - dual_c(i, j) / rho;
            }
        }
        Dense xt = kernels::matmul_nn(kernels::matmul_tn(wu, rhs), wv);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                xt(i, j) /= du_sq[i] * dv_sq[j] + 1.0;
            }
        }
        Dense x_new = kernels::matmul_nt(kernels::matmul_nn(wu, xt), wv);

        // Dual updates and residuals.
        qxq = apply_projector_pair(wu, du, wv, dv, x_new);
        double split_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double rb = qxq(i, j) - b(i, j);
                dual_b(i, j) += rho * rb;
                split_sq += rb * rb;
            }
        }
        double feas_sq = 0.0;
        double diff_sq = 0.0;
        double prev_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double delta = x_new(i, j) - x(i, j);
                diff_sq += delta * delta;
                prev_sq += x(i, j) * x(i, j);
                if (mask(i, j)) {
                    const double rc = x_new(i, j) + e(i, j) - observed(i, j);
                    dual_c(i, j) += rho * rc;
                    feas_sq += rc * rc;
                }
            }
        }
        x = std::move(x_new);

        const double feas = std::sqrt(feas_sq) / norm_obs;
        const double split = std::sqrt(split_sq) /
                             std::max(kernels::frobenius_norm(b), kTiny);
        const double change = std::sqrt(diff_sq) / std::max(std::sqrt(prev_sq), kTiny);
        sol.iters = k + 1;
        sol.final_feasibility = feas;
        if (feas < cfg.tol_feas && split < cfg.tol_feas && change < cfg.tol_change) {
            sol.converged = true;
            break;
        }
        rho = std::min(rho * cfg.rho_growth, cfg.rho_cap);
    }
    sol.x_hat = std::move(x);
    return sol;
}

namespace {

// Project t (restricted to the mask) onto { e : sum w^2 e^2 <= eps^2 }:
// e = t / (1 + nu w^2) with nu >= 0 chosen so the constraint is active.
void project_weighted_ball(const Mask& mask, const Dense& t, const Dense* wts,
                           double eps, Dense& e) {
    double norm_sq = 0.0;
    bool uniform = true;
    double w0 = -1.0;
    for (std::size_t i = 0; i < mask.n(); ++i) {
        for (std::size_t j = 0; j < mask.n(); ++j) {
            if (!mask(i, j)) {
                continue;
            }
            const double w = wts ? (*wts)(i, j) : 1.0;
            if (w0 < 0.0) {
                w0 = w;
            } else if (w != w0) {
                uniform = false;
            }
            norm_sq += w * w * t(i, j) * t(i, j);
        }
    }
    if (norm_sq <= eps * eps) {
        for (std::size_t i = 0; i < mask.n(); ++i) {
            for (std::size_t j = 0; j < mask.n(); ++j) {
                if (mask(i, j)) {
                    e(i, j) = t(i, j);
                }
            }
        }
        return;
    }
    if (uniform) {
        // || w0 e || <= eps is a plain rescale.
        const double factor = eps / std::sqrt(norm_sq);
        for (std::size_t i = 0; i < mask.n(); ++i) {
            for (std::size_t j = 0; j < mask.n(); ++j) {
                if (mask(i, j)) {
                    e(i, j) = factor * t(i, j);
                }
            }
        }
        return;
    }
    // General weights: bisection on the monotone constraint value.
    auto constraint = [&](double nu) {
        double acc = 0.0;
        for (std::size_t i = 0; i < mask.n(); ++i) {
            for (std::size_t j = 0; j < mask.n(); ++j) {
                if (!mask(i, j)) {
                    continue;
                }
                const double w = (*wts)(i, j);
                const double denom = 1.0 + nu * w * w;
                const double v = w * t(i, j) / denom;
                acc += v * v;
            }
        }
        return acc;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (constraint(hi) > eps * eps && hi < 1e300) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (constraint(mid) > eps * eps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (std::size_t i = 0; i < mask.n(); ++i) {
        for (std::size_t j = 0; j < mask.n(); ++j) {
            if (mask(i, j)) {
                const double w = (*wts)(i, j);
                e(i, j) = t(i, j) / (1.0 + hi * w * w);
            }
        }
    }
}

} // namespace

Solution solve_noisy_corr_mc(const Mask& mask, const Dense& observed, const Prior& prior,
                             double epsilon, const SolverConfig& cfg,
                             const SamplingPlan* plan) {
    if (epsilon < 0.0) {
        throw InvariantViolationError("solve_noisy_corr_mc: epsilon must be non-negative");
    }
    if (epsilon == 0.0) {
        // A zero-radius ball is the equality constraint.
        return solve_corr_mc(mask, observed, prior, cfg);
    }
    require_observed(mask, observed, "solve_noisy_corr_mc");
    if (prior.lambda < 0.0) {
        throw InvariantViolationError("solve_noisy_corr_mc: lambda must be non-negative");
    }
    if (prior.lambda != 0.0) {
        require_same_shape(prior.phi, observed, "solve_noisy_corr_mc");
    }
    validate_config(cfg);
    const std::size_t n = mask.n();
    if (plan != nullptr && plan->n != n) {
        throw DimensionError("solve_noisy_corr_mc: plan does not match the mask");
    }
    if (mask.count() == 0) {
        return trivial_empty_mask(n, prior.lambda != 0.0 ? &prior.phi : nullptr,
                                  prior.lambda, "solve_noisy_corr_mc");
    }

    // Observation weights: inverse probabilities when a plan is given.
    Dense weight_storage;
    const Dense* wts = nullptr;
    if (plan != nullptr) {
        weight_storage = Dense(n, n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                weight_storage(i, j) = 1.0 / plan->p(i, j);
            }
        }
        wts = &weight_storage;
    }

    const bool use_prior = prior.lambda != 0.0;
    const double norm_obs = std::max(observed_norm(mask, observed), kTiny);
    double rho = initial_rho(cfg, observed);

    Dense a(n, n, 0.0);
    Dense e(n, n, 0.0);
    Dense dual(n, n, 0.0);
    Dense t(n, n, 0.0);

    Solution sol;
    for (int k = 0; k < cfg.max_iters; ++k) {
        Dense g = observed;
        kernels::add_scaled(-1.0, e, g);
        kernels::add_scaled(1.0 / rho, dual, g);
        if (use_prior) {
            kernels::add_scaled(prior.lambda / rho, prior.phi, g);
        }
        Dense a_new = svt(g, 1.0 / rho);

        // Slack target; off the mask the slack is free, on the mask it is
        // confined to the weighted epsilon-ball.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                t(i, j) = observed(i, j) - a_new(i, j) + dual(i, j) / rho;
                if (!mask(i, j)) {
                    e(i, j) = t(i, j);
                }
            }
        }
        project_weighted_ball(mask, t, wts, epsilon, e);

        double feas_sq = 0.0;
        double diff_sq = 0.0;
        double prev_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double delta = a_new(i, j) - a(i, j);
                diff_sq += delta * delta;
                prev_sq += a(i, j) * a(i, j);
                if (mask(i, j)) {
                    const double resid = observed(i, j) - a_new(i, j) - e(i, j);
                    dual(i, j) += rho * resid;
                    feas_sq += resid * resid;
                }
            }
        }
        a = std::move(a_new);

        const double feas = std::sqrt(feas_sq) / norm_obs;
        const double change = std::sqrt(diff_sq) / std::max(std::sqrt(prev_sq), kTiny);
        sol.iters = k + 1;
        sol.final_feasibility = feas;
        if (feas < cfg.tol_feas && change < cfg.tol_change) {
            sol.converged = true;
            break;
        }
        rho = std::min(rho * cfg.rho_growth, cfg.rho_cap);
    }
    sol.x_hat = std::move(a);
    return sol;
}

} // namespace corrmc
