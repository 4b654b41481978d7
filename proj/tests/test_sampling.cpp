#include <cmath>
#include <cstdint>

#include "doctest.h"

#include "corrmc/errors.hpp"
#include "corrmc/sampling.hpp"
#include "oracles.hpp"

using corrmc::Dense;
using corrmc::Mask;
using corrmc::SamplingPlan;

TEST_SUITE("sampling") {

TEST_CASE("plan validation") {
    CHECK_THROWS_AS(corrmc::uniform_plan(8, 0.0), corrmc::InvariantViolationError);
    CHECK_THROWS_AS(corrmc::uniform_plan(8, 1.2), corrmc::InvariantViolationError);
    const SamplingPlan plan = corrmc::uniform_plan(8, 0.25);
    CHECK(corrmc::expected_samples(plan) == doctest::Approx(16.0));

    Dense p(3, 3, 0.5);
    p(1, 2) = 0.0;
    CHECK_THROWS_AS(corrmc::plan_from_matrix(p), corrmc::InvariantViolationError);
    p(1, 2) = 0.7;
    CHECK_THROWS_AS(corrmc::plan_from_matrix(p, /*symmetric=*/true),
                    corrmc::InvariantViolationError); // p(1,2) != p(2,1)
    p(2, 1) = 0.7;
    const SamplingPlan custom = corrmc::plan_from_matrix(p, true);
    CHECK(corrmc::expected_samples(custom) == doctest::Approx(4.9));
}

TEST_CASE("mask drawing is deterministic in (plan, seed)") {
    const SamplingPlan plan = corrmc::uniform_plan(16, 0.4);
    const Mask a = corrmc::draw_mask(plan, 123);
    const Mask b = corrmc::draw_mask(plan, 123);
    const Mask c = corrmc::draw_mask(plan, 124);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.seed() == 123);
}

TEST_CASE("probability one observes everything") {
    const Mask m = corrmc::draw_mask(corrmc::uniform_plan(9, 1.0), 5);
    CHECK(m.full());
    CHECK(m.count() == 81);
}

TEST_CASE("symmetric plans produce symmetric masks") {
    const Mask m = corrmc::draw_mask(corrmc::uniform_plan(20, 0.3, true), 7);
    CHECK(m.is_symmetric());
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) CHECK(m(i, j) == m(j, i));
}

TEST_CASE("observed fraction concentrates near p") {
    const std::size_t n = 200;
    const double p = 0.35;
    const Mask m = corrmc::draw_mask(corrmc::uniform_plan(n, p), 99);
    const double frac =
        static_cast<double>(m.count()) / static_cast<double>(n * n);
    // Five standard deviations of Binomial(n^2, p) / n^2.
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n * n));
    CHECK(std::abs(frac - p) < 5 * sd);
}

TEST_CASE("inverse-probability restriction rescales observed entries") {
    const SamplingPlan plan = corrmc::uniform_plan(6, 0.5);
    const Mask m = corrmc::draw_mask(plan, 3);
    const Dense x = oracles::random_matrix(6, 6, 4);
    const Dense rp = corrmc::apply_rp(x, plan, m);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            if (m(i, j))
                CHECK(rp(i, j) == doctest::Approx(x(i, j) / 0.5).epsilon(1e-15));
            else
                CHECK(rp(i, j) == 0.0);
        }
}

TEST_CASE("mask merge is entrywise union") {
    Mask a(4, false);
    Mask b(4, false);
    a.set(0, 1, true);
    b.set(2, 3, true);
    b.set(0, 1, true);
    a.merge(b);
    CHECK(a.count() == 2);
    CHECK(a(0, 1));
    CHECK(a(2, 3));
    CHECK_FALSE(a(1, 0));
}

TEST_CASE("round-splitting inverts the union of independent rounds") {
    CHECK(corrmc::golfing_split(0.75, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(corrmc::golfing_split(1.0, 5) == 1.0);
    for (const double p : {0.1, 0.5, 0.9, 0.99}) {
        for (const int k : {1, 2, 3, 8}) {
            const double q = corrmc::golfing_split(p, k);
            CHECK(1.0 - std::pow(1.0 - q, k) == doctest::Approx(p).epsilon(1e-12));
        }
    }
}

TEST_CASE("round count for the halving analysis") {
    // Residual sqrt(2) must drop below l / (32 sqrt(2)) by halving:
    // ceil(log2(32 sqrt(2) alpha1 / l)) rounds.
    const double l = std::sqrt(2.0 * std::log(32.0) / 32.0);
    CHECK(corrmc::golfing_iteration_count(std::sqrt(2.0), l) == 8);
    CHECK(corrmc::golfing_iteration_count(0.0, l) == 1);
    CHECK(corrmc::golfing_iteration_count(1e-12, 1.0) == 1);
}

TEST_CASE("full sampling is an exact isometry on the tangent space") {
    const Dense u = oracles::random_basis(12, 2, 11);
    const Dense v = oracles::random_basis(12, 2, 12);
    const corrmc::TangentSpace t{u, v};
    const double dev_full = corrmc::near_isometry_deviation(
        t, corrmc::uniform_plan(12, 1.0), 5, 77);
    CHECK(dev_full < 1e-12);
    const double dev_half = corrmc::near_isometry_deviation(
        t, corrmc::uniform_plan(12, 0.5), 5, 77);
    CHECK(dev_half > dev_full);
}

} // TEST_SUITE
