#include <cmath>
#include <limits>

#include "doctest.h"

#include "corrmc/analysis.hpp"
#include "corrmc/errors.hpp"
#include "corrmc/experiments.hpp"
#include "corrmc/kernels.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/priors.hpp"
#include "corrmc/sampling.hpp"
#include "corrmc/solvers.hpp"
#include "oracles.hpp"

using corrmc::Dense;
namespace k = corrmc::kernels;

TEST_SUITE("analysis") {

TEST_CASE("no prior: the residual is the bare sign matrix") {
    const auto [x, f] = corrmc::gen_instance(16, 3, 201);
    const Dense phi = k::matmul_nt(f.u, f.v);
    const corrmc::TheoryReport rep = corrmc::theory_report_direct(f, phi, 0.0);

    CHECK(rep.alpha1 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(rep.alpha2 == 0.0);
    REQUIRE(rep.xi1.has_value());
    REQUIRE(rep.xi2.has_value());
    CHECK(*rep.xi2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(*rep.xi1 <= 1.0 + 1e-10);
    CHECK(rep.recovery_condition_alpha2);
    CHECK(rep.noisy_condition_alpha2);
    CHECK(rep.p_lower.rows() == 16);
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) {
            CHECK(rep.p_lower(i, j) > 0.0);
            CHECK(rep.p_lower(i, j) <= 1.0);
        }
}

TEST_CASE("a perfect prior at weight one cancels the tangent residual") {
    const auto [x, f] = corrmc::gen_instance(12, 2, 211);
    const Dense phi = k::matmul_nt(f.u, f.v);
    const corrmc::TheoryReport rep = corrmc::theory_report_direct(f, phi, 1.0);
    CHECK(rep.alpha1 < 1e-10);
    CHECK(rep.alpha2 < 1e-10);
}

TEST_CASE("angle-based closed forms match the direct computation exactly") {
    const std::size_t n = 16;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const std::size_t r = 1 + seed % 3;
        const Dense u = oracles::random_basis(n, r, 221 + 10 * seed);
        const Dense ut = oracles::random_basis(n, r, 222 + 10 * seed);
        const Dense v = oracles::random_basis(n, r, 223 + 10 * seed);
        const Dense vt = oracles::random_basis(n, r, 224 + 10 * seed);
        corrmc::ThinSvd f;
        f.u = u;
        f.v = v;
        f.s.assign(r, 1.0);
        const Dense phi = corrmc::subspace_prior(ut, vt);

        for (const double lambda : {0.0, 0.5, 1.0}) {
            const corrmc::TheoryReport direct =
                corrmc::theory_report_direct(f, phi, lambda);
            const corrmc::PrincipalAngleDecomposition d =
                corrmc::principal_angles(u, ut, v, vt);
            const double beta = corrmc::combined_beta(u, ut, v, vt);
            const corrmc::TheoryReport closed =
                corrmc::theory_report_angles_general(d, lambda, beta, n);

            CHECK(std::abs(direct.alpha1 - closed.alpha1) <= 1e-9);
            const double a_ss_norm =
                lambda * oracles::operator_norm(d.a_ss);
            CHECK(std::abs(direct.alpha2 - a_ss_norm) <= 1e-9);
            CHECK(std::abs(closed.alpha2 - a_ss_norm) <= 1e-12);

            // Lemma bounds: the entrywise norms never exceed alpha3 * beta.
            REQUIRE(closed.alpha3.has_value());
            const double cap = *closed.alpha3 * beta;
            CHECK(*direct.xi1 <= cap + 1e-9);
            CHECK(*direct.xi2 <= cap + 1e-9);
        }
    }
}

TEST_CASE("symmetric closed form by hand: r=1, angle pi/3, weight one half") {
    const double gamma = std::acos(0.5);
    const corrmc::TheoryReport rep =
        corrmc::theory_report_angles_symmetric({gamma}, 0.5, 1.0, 32);
    CHECK(rep.alpha1 * rep.alpha1 == doctest::Approx(0.859375).epsilon(1e-12));
    CHECK(rep.alpha2 == doctest::Approx(0.375).epsilon(1e-12));
    REQUIRE(rep.alpha3.has_value());
    const double want_alpha3 =
        (1.0 - 0.5 * 0.25) + 2.0 * 0.5 * (0.5 * std::sqrt(3.0) / 2.0);
    CHECK(*rep.alpha3 == doctest::Approx(want_alpha3).epsilon(1e-12));
    REQUIRE(rep.beta.has_value());
    CHECK(*rep.beta == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.recovery_condition_alpha2); // 0.375 < 15/16
    CHECK(rep.noisy_condition_alpha2);    // 0.375 < 7/8
}

TEST_CASE("alpha2 conditions flip at their thresholds") {
    // A single right-angle-ish gamma with lambda = 1: alpha2 = sin^2(gamma).
    const double near_one = std::asin(std::sqrt(0.95));
    const corrmc::TheoryReport hot =
        corrmc::theory_report_angles_symmetric({near_one}, 1.0, 1.0, 32);
    CHECK_FALSE(hot.recovery_condition_alpha2); // 0.95 > 15/16
    CHECK_FALSE(hot.noisy_condition_alpha2);    // 0.95 > 7/8

    const double moderate = std::asin(std::sqrt(0.9));
    const corrmc::TheoryReport warm =
        corrmc::theory_report_angles_symmetric({moderate}, 1.0, 1.0, 32);
    CHECK(warm.recovery_condition_alpha2);  // 0.9 < 15/16
    CHECK_FALSE(warm.noisy_condition_alpha2); // 0.9 > 7/8
}

TEST_CASE("leverage ratio of a span with itself stays near one") {
    const Dense u = oracles::random_basis(14, 3, 231);
    const double ratio = corrmc::leverage_ratio_max(u, u);
    CHECK(ratio >= 0.9);
    CHECK(ratio < 3.0); // joint span equals span(u); scores stay bounded

    const double beta = corrmc::combined_beta(u, u, u, u);
    CHECK(beta >= 1.0);
}

TEST_CASE("full observation certifies in one round") {
    const auto [x, f] = corrmc::gen_instance(12, 2, 241);
    const Dense phi = k::matmul_nt(f.u, f.v);
    const corrmc::CertificateReport cert = corrmc::golfing_certificate(
        f, phi, 0.0, corrmc::uniform_plan(12, 1.0), 99);

    CHECK(cert.residual_t < 1e-12);
    CHECK(cert.union_mask.full());
    CHECK(cert.decay[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cert.conditions_met);
}

TEST_CASE("certificate support and decay bookkeeping") {
    const auto [x, f] = corrmc::gen_instance(32, 2, 251);
    const Dense phi = k::matmul_nt(f.u, f.v);
    const corrmc::TheoryReport rep = corrmc::theory_report_direct(f, phi, 0.0);
    const corrmc::CertificateReport cert = corrmc::golfing_certificate(
        f, phi, 0.0, corrmc::uniform_plan(32, 0.8), 77);

    // decay[0] is alpha1, bit for bit.
    CHECK(cert.decay[0] == rep.alpha1);
    CHECK(cert.k_used >= 1);
    CHECK(cert.k_used <= cert.k_formula);
    CHECK(static_cast<int>(cert.decay.size()) == cert.k_used + 1);

    // The certificate lives exactly on the union of the round masks.
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j)
            if (!cert.union_mask(i, j)) CHECK(cert.y(i, j) == 0.0);

    // Residuals shrink monotonically at bench scale.
    for (std::size_t kk = 0; kk + 1 < cert.decay.size(); ++kk)
        CHECK(cert.decay[kk + 1] < cert.decay[kk]);
}

TEST_CASE("error bound arithmetic") {
    const Dense phi = corrmc::subspace_prior(oracles::random_basis(16, 2, 261),
                                             oracles::random_basis(16, 2, 262));
    CHECK(corrmc::noisy_error_bound(16, 2, 0.5, phi, 0.0) == 0.0);
    const double at_one = corrmc::noisy_error_bound(16, 2, 0.5, phi, 1.0);
    const double at_two = corrmc::noisy_error_bound(16, 2, 0.5, phi, 2.0);
    CHECK(at_two == doctest::Approx(2.0 * at_one).epsilon(1e-12));

    const double n = 16.0, r = 2.0;
    const double expected =
        (2.0 + 32.0 * std::sqrt(1.0 + 2.0 * n / (r * std::log(n))) *
                   (std::sqrt(n) + 0.5 * k::frobenius_norm(phi)));
    CHECK(at_one == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("recovery margin: positive when sampling suffices, infinite at p = 1") {
    const auto [x, f] = corrmc::gen_instance(12, 1, 271);
    const Dense phi = k::matmul_nt(f.u, f.v);

    const corrmc::SamplingPlan plan = corrmc::uniform_plan(12, 0.9);
    const corrmc::Mask mask = corrmc::draw_mask(plan, 5);
    corrmc::CertificateReport cert =
        corrmc::golfing_certificate(f, phi, 0.0, plan, 5);

    // Margin probes need the certificate support inside the observed set:
    // reuse the certificate's own union mask as the observation set.
    const double margin =
        corrmc::recovery_margin(f, phi, 0.0, cert.union_mask, cert, 50);
    CHECK(margin > 0.0);

    const corrmc::Mask full(12, true);
    corrmc::CertificateReport full_cert = corrmc::golfing_certificate(
        f, phi, 0.0, corrmc::uniform_plan(12, 1.0), 6);
    CHECK(corrmc::recovery_margin(f, phi, 0.0, full, full_cert, 3) ==
          std::numeric_limits<double>::infinity());

    // A certificate leaking off the observed set is rejected.
    corrmc::Mask tiny(12, false);
    tiny.set(0, 0, true);
    CHECK_THROWS_AS(corrmc::recovery_margin(f, phi, 0.0, tiny, cert, 3),
                    corrmc::InvariantViolationError);
}

} // TEST_SUITE
