#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "corrmc/dense.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/rng.hpp"

namespace corrmc {

/// Entrywise Bernoulli observation plan for an n x n matrix: entry (i, j) is
/// observed independently with probability p(i, j) in (0, 1].  When symmetric
/// is set, the draws for (i, j) and (j, i) are coupled so the realized mask
/// is symmetric (used for symmetric instances such as similarity matrices).
struct SamplingPlan {
    std::size_t n = 0;
    Dense p;
    bool symmetric = false;
};

/// Plan with a single probability p for every entry.
SamplingPlan uniform_plan(std::size_t n, double p, bool symmetric = false);

/// Plan with per-entry probabilities; validates that all lie in (0, 1].
SamplingPlan plan_from_matrix(Dense p, bool symmetric = false);

/// Expected number of observed entries, sum of p(i, j).
double expected_samples(const SamplingPlan& plan);

/// A realized observation set: delta(i, j) == true means entry (i, j) was
/// observed.  Remembers the seed it was drawn from.
class Mask {
public:
    Mask() = default;
    Mask(std::size_t n, bool fill, std::uint64_t seed = 0)
        : n_(n), delta_(n * n, fill ? 1 : 0), seed_(seed) {}

    std::size_t n() const noexcept { return n_; }
    std::uint64_t seed() const noexcept { return seed_; }

    bool operator()(std::size_t i, std::size_t j) const noexcept {
        return delta_[i * n_ + j] != 0;
    }
    void set(std::size_t i, std::size_t j, bool value) noexcept {
        delta_[i * n_ + j] = value ? 1 : 0;
    }

    /// Number of observed entries.
    std::size_t count() const noexcept;
    bool full() const noexcept { return count() == n_ * n_; }
    bool is_symmetric() const noexcept;

    /// Entry-wise union (both masks must have the same size).
    void merge(const Mask& other);

    friend bool operator==(const Mask& a, const Mask& b) {
        return a.n_ == b.n_ && a.delta_ == b.delta_;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> delta_;
    std::uint64_t seed_ = 0;
};

/// Draw a mask from the plan.  Deterministic in (plan, seed): entries are
/// visited in row-major order (upper triangle including the diagonal when
/// the plan is symmetric) and one uniform variate is spent per visited entry.
Mask draw_mask(const SamplingPlan& plan, std::uint64_t seed);

/// Inverse-probability-weighted restriction:
///   out(i, j) = delta(i, j) * x(i, j) / p(i, j),
/// the unbiased estimator of x from the observed entries.
Dense apply_rp(const Dense& x, const SamplingPlan& plan, const Mask& mask);

/// Per-round probability q such that the union of k independent
/// Bernoulli(q) rounds equals one Bernoulli(p) draw: 1 - (1 - q)^k = p.
/// Returns 1 when p == 1.
double golfing_split(double p, int k);

/// Number of correction rounds needed to push a starting residual of
/// alpha1 below l / (32 sqrt(2)) when each round halves it:
///   max(ceil(log2(32 sqrt(2) alpha1 / l)), 1).
int golfing_iteration_count(double alpha1, double l);

/// Monte-Carlo estimate of the operator deviation of the inverse-weighted
/// sampling restricted to a tangent space:
///   max over sampled unit w in T of || P_T(w) - P_T(R_p(w)) ||_F.
/// The first overload draws a fresh mask per trial; the second evaluates a
/// fixed realization.
double near_isometry_deviation(const TangentSpace& t, const SamplingPlan& plan,
                               int trials, std::uint64_t seed);
double near_isometry_deviation(const TangentSpace& t, const SamplingPlan& plan,
                               const Mask& mask, int trials, std::uint64_t seed);

} // namespace corrmc
