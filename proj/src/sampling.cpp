#include "corrmc/sampling.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "corrmc/kernels.hpp"

namespace corrmc {

namespace {

void validate_probability_matrix(const Dense& p) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double v = p(i, j);
            if (!(v > 0.0) || v > 1.0) {
                throw InvariantViolationError(
                    "sampling plan: probabilities must lie in (0, 1]");
            }
        }
    }
}

} // namespace

SamplingPlan uniform_plan(std::size_t n, double p, bool symmetric) {
    if (n == 0) {
        throw DimensionError("uniform_plan: n must be positive");
    }
    if (!(p > 0.0) || p > 1.0) {
        throw InvariantViolationError("uniform_plan: p must lie in (0, 1]");
    }
    SamplingPlan plan;
    plan.n = n;
    plan.p = Dense(n, n, p);
    plan.symmetric = symmetric;
    return plan;
}

SamplingPlan plan_from_matrix(Dense p, bool symmetric) {
    if (p.rows() == 0 || p.rows() != p.cols()) {
        throw DimensionError("plan_from_matrix: probability matrix must be square");
    }
    validate_probability_matrix(p);
    if (symmetric) {
        for (std::size_t i = 0; i < p.rows(); ++i) {
            for (std::size_t j = i + 1; j < p.cols(); ++j) {
                if (p(i, j) != p(j, i)) {
                    throw InvariantViolationError(
                        "plan_from_matrix: symmetric plan needs a symmetric probability matrix");
                }
            }
        }
    }
    SamplingPlan plan;
    plan.n = p.rows();
    plan.p = std::move(p);
    plan.symmetric = symmetric;
    return plan;
}

double expected_samples(const SamplingPlan& plan) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plan.n; ++i) {
        for (std::size_t j = 0; j < plan.n; ++j) {
            acc += plan.p(i, j);
        }
    }
    return acc;
}

std::size_t Mask::count() const noexcept {
    std::size_t acc = 0;
    for (std::uint8_t v : delta_) {
        acc += v;
    }
    return acc;
}

bool Mask::is_symmetric() const noexcept {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            if (delta_[i * n_ + j] != delta_[j * n_ + i]) {
                return false;
            }
        }
    }
    return true;
}

void Mask::merge(const Mask& other) {
    if (other.n_ != n_) {
        throw DimensionError("Mask::merge: sizes differ");
    }
    for (std::size_t t = 0; t < delta_.size(); ++t) {
        delta_[t] = (delta_[t] | other.delta_[t]);
    }
}

Mask draw_mask(const SamplingPlan& plan, std::uint64_t seed) {
    Mask mask(plan.n, false, seed);
    Rng rng(seed);
    if (plan.symmetric) {
        for (std::size_t i = 0; i < plan.n; ++i) {
            for (std::size_t j = i; j < plan.n; ++j) {
                const bool hit = rng.uniform01() < plan.p(i, j);
                mask.set(i, j, hit);
                mask.set(j, i, hit);
            }
        }
    } else {
        for (std::size_t i = 0; i < plan.n; ++i) {
            for (std::size_t j = 0; j < plan.n; ++j) {
                mask.set(i, j, rng.uniform01() < plan.p(i, j));
            }
        }
    }
    return mask;
}

Dense apply_rp(const Dense& x, const SamplingPlan& plan, const Mask& mask) {
    if (x.rows() != plan.n || x.cols() != plan.n || mask.n() != plan.n) {
        throw DimensionError("apply_rp: operand shapes disagree");
    }
    Dense out(plan.n, plan.n, 0.0);
    for (std::size_t i = 0; i < plan.n; ++i) {
        for (std::size_t j = 0; j < plan.n; ++j) {
            if (mask(i, j)) {
                out(i, j) = x(i, j) / plan.p(i, j);
            }
        }
    }
    return out;
}

double golfing_split(double p, int k) {
    if (!(p > 0.0) || p > 1.0) {
        throw InvariantViolationError("golfing_split: p must lie in (0, 1]");
    }
    if (k < 1) {
        throw InvariantViolationError("golfing_split: round count must be positive");
    }
    if (p == 1.0) {
        return 1.0;
    }
    // 1 - (1 - p)^(1/k), written to stay accurate for p near 0 and near 1.
    return -std::expm1(std::log1p(-p) / static_cast<double>(k));
}

int golfing_iteration_count(double alpha1, double l) {
    if (!(l > 0.0)) {
        throw InvariantViolationError("golfing_iteration_count: l must be positive");
    }
    if (!(alpha1 > 0.0)) {
        return 1;
    }
    const double ratio = 32.0 * std::sqrt(2.0) * alpha1 / l;
    if (ratio <= 1.0) {
        return 1;
    }
    const int k = static_cast<int>(std::ceil(std::log2(ratio)));
    return k < 1 ? 1 : k;
}

namespace {

double deviation_for_mask(const TangentSpace& t, const SamplingPlan& plan,
                          const Mask& mask, int trials, Rng& rng) {
    const std::size_t n = plan.n;
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Dense g(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                g(i, j) = rng.normal();
            }
        }
        Dense w = project_tangent(t, g);
        const double norm = kernels::frobenius_norm(w);
        if (norm == 0.0) {
            continue;
        }
        kernels::scale(1.0 / norm, w);
        const Dense rw = apply_rp(w, plan, mask);
        const Dense diff = kernels::difference(w, project_tangent(t, rw));
        worst = std::max(worst, kernels::frobenius_norm(diff));
    }
    return worst;
}

} // namespace

double near_isometry_deviation(const TangentSpace& t, const SamplingPlan& plan,
                               int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw InvariantViolationError("near_isometry_deviation: trials must be positive");
    }
    Rng rng(splitmix64(seed));
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Mask mask = draw_mask(plan, splitmix64(seed ^ (0x9e37u + static_cast<std::uint64_t>(trial))));
        worst = std::max(worst, deviation_for_mask(t, plan, mask, 1, rng));
    }
    return worst;
}

double near_isometry_deviation(const TangentSpace& t, const SamplingPlan& plan,
                               const Mask& mask, int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw InvariantViolationError("near_isometry_deviation: trials must be positive");
    }
    if (mask.n() != plan.n) {
        throw DimensionError("near_isometry_deviation: mask does not match plan");
    }
    Rng rng(splitmix64(seed));
    return deviation_for_mask(t, plan, mask, trials, rng);
}

} // namespace corrmc
