#include <cmath>
#include <vector>

#include "doctest.h"

#include "corrmc/errors.hpp"
#include "corrmc/experiments.hpp"
#include "corrmc/kernels.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/priors.hpp"
#include "oracles.hpp"

using corrmc::Dense;
namespace k = corrmc::kernels;

namespace {

/// Brute-force minimizer of the symmetric tangent-misalignment quadratic
///   alpha1^2(lambda) = lambda^2 (r - sum sin^4) - 2 lambda sum cos^2 + r
/// over lambda in [0, 2] with step 1e-4.
double grid_lambda_symmetric(const std::vector<double>& gamma) {
    const double r = static_cast<double>(gamma.size());
    double s4 = 0.0, c2 = 0.0;
    for (const double g : gamma) {
        s4 += std::pow(std::sin(g), 4);
        c2 += std::pow(std::cos(g), 2);
    }
    double best_lambda = 0.0;
    double best_value = r; // lambda = 0
    for (int i = 0; i <= 20000; ++i) {
        const double lambda = i * 1e-4;
        const double value = lambda * lambda * (r - s4) - 2.0 * lambda * c2 + r;
        if (value < best_value) {
            best_value = value;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

/// Same search for the general objective, evaluated from the blocks.
double grid_lambda_general(const corrmc::PrincipalAngleDecomposition& d) {
    const std::size_t r = d.r;
    double best_lambda = 0.0;
    double best_value = 1e300;
    for (int i = 0; i <= 20000; ++i) {
        const double lambda = i * 1e-4;
        double value = 0.0;
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b) {
                const double eye = a == b ? 1.0 : 0.0;
                value += std::pow(eye - lambda * d.a_cc(a, b), 2);
                value += std::pow(lambda * d.a_cs(a, b), 2);
                value += std::pow(lambda * d.a_sc(a, b), 2);
            }
        if (value < best_value) {
            best_value = value;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

} // namespace

TEST_SUITE("priors") {

TEST_CASE("noiseless copy reproduces the instance's own factors") {
    const Dense u = oracles::random_basis(10, 2, 301);
    const Dense v = oracles::random_basis(10, 2, 302);
    Dense us = u;
    for (std::size_t i = 0; i < 10; ++i) {
        us(i, 0) *= 2.0;
        us(i, 1) *= 1.0;
    }
    const Dense x = k::matmul_nt(us, v);

    const Dense phi = corrmc::noisy_copy_prior(x, 0.0, 2, 999);
    const corrmc::ThinSvd f = corrmc::thin_svd(x, 2);
    CHECK(oracles::rel_frob_diff(phi, k::matmul_nt(f.u, f.v)) < 1e-12);
}

TEST_CASE("noisy copies drift but stay deterministic per seed") {
    const Dense x = k::matmul_nt(oracles::random_basis(12, 2, 303),
                                 oracles::random_basis(12, 2, 304));
    const corrmc::SubspaceEstimate a = corrmc::noisy_copy_subspaces(x, 0.05, 2, 7);
    const corrmc::SubspaceEstimate b = corrmc::noisy_copy_subspaces(x, 0.05, 2, 7);
    const corrmc::SubspaceEstimate c = corrmc::noisy_copy_subspaces(x, 0.05, 2, 8);
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    CHECK_FALSE(a.u == c.u);
    CHECK(corrmc::has_orthonormal_columns(a.u));
    CHECK(corrmc::has_orthonormal_columns(a.v));
}

TEST_CASE("subspace prior is a partial isometry") {
    const Dense ut = oracles::random_basis(11, 3, 305);
    const Dense vt = oracles::random_basis(11, 3, 306);
    const Dense phi = corrmc::subspace_prior(ut, vt);
    CHECK(oracles::operator_norm(phi) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(k::frobenius_norm(phi) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

    Dense skewed = ut;
    k::scale(2.0, skewed);
    CHECK_THROWS_AS(corrmc::subspace_prior(skewed, vt),
                    corrmc::InvariantViolationError);
}

TEST_CASE("optimal weight, symmetric closed form by hand") {
    SUBCASE("perfect prior") {
        const corrmc::LambdaStar ls = corrmc::lambda_star_symmetric({0.0, 0.0});
        CHECK(ls.lambda == doctest::Approx(1.0));
        CHECK(ls.alpha1_sq == doctest::Approx(0.0));
    }
    SUBCASE("orthogonal prior degenerates to no weight") {
        const double half_pi = std::acos(0.0);
        const corrmc::LambdaStar ls =
            corrmc::lambda_star_symmetric({half_pi, half_pi});
        CHECK(ls.lambda == 0.0);
        CHECK(ls.alpha1_sq == doctest::Approx(2.0));
    }
    SUBCASE("single angle pi/3") {
        const double g = std::acos(0.5);
        const corrmc::LambdaStar ls = corrmc::lambda_star_symmetric({g});
        CHECK(ls.lambda == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
        CHECK(ls.alpha1_sq == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
    }
    SUBCASE("invalid angles rejected") {
        CHECK_THROWS_AS(corrmc::lambda_star_symmetric({-0.1}),
                        corrmc::InvariantViolationError);
        CHECK_THROWS_AS(corrmc::lambda_star_symmetric({2.0}),
                        corrmc::InvariantViolationError);
    }
}

TEST_CASE("closed-form weight matches grid search") {
    const std::vector<std::vector<double>> angle_sets = {
        {0.1, 0.3, 0.5},
        {0.9, 1.1},
        {0.01, 0.02, 0.03, 0.04},
    };
    for (const auto& gamma : angle_sets) {
        const corrmc::LambdaStar ls = corrmc::lambda_star_symmetric(gamma);
        CHECK(std::abs(ls.lambda - grid_lambda_symmetric(gamma)) <= 1e-3);
    }
}

TEST_CASE("general form reduces to the symmetric form one-sided") {
    const Dense u = oracles::random_basis(14, 3, 307);
    const Dense ut = oracles::random_basis(14, 3, 308);
    const corrmc::PrincipalAngleDecomposition d = corrmc::principal_angles(u, ut);
    const corrmc::LambdaStar general = corrmc::lambda_star_general(d);
    const corrmc::LambdaStar symmetric = corrmc::lambda_star_symmetric(d.gamma);
    CHECK(general.lambda == doctest::Approx(symmetric.lambda).epsilon(1e-10));
    CHECK(general.alpha1_sq ==
          doctest::Approx(symmetric.alpha1_sq).epsilon(1e-10));
}

TEST_CASE("general closed form matches grid search on two-sided priors") {
    const Dense u = oracles::random_basis(12, 2, 309);
    const Dense ut = oracles::random_basis(12, 2, 310);
    const Dense v = oracles::random_basis(12, 2, 311);
    const Dense vt = oracles::random_basis(12, 2, 312);
    const corrmc::PrincipalAngleDecomposition d =
        corrmc::principal_angles(u, ut, v, vt);
    const corrmc::LambdaStar ls = corrmc::lambda_star_general(d);
    CHECK(std::abs(ls.lambda - grid_lambda_general(d)) <= 1e-3);
}

TEST_CASE("near-copy priors put the optimal weight close to one") {
    // Ten small-noise subspace estimates around a fixed instance.
    double mean = 0.0;
    const int draws = 10;
    for (int i = 0; i < draws; ++i) {
        const auto [x, f] = corrmc::gen_instance(32, 4, 400 + i);
        const corrmc::SubspaceEstimate est =
            corrmc::noisy_copy_subspaces(x, 0.01, 4, 500 + i);
        const corrmc::PrincipalAngleDecomposition d =
            corrmc::principal_angles(f.u, est.u);
        mean += corrmc::lambda_star_symmetric(d.gamma).lambda;
    }
    mean /= draws;
    CHECK(mean > 0.97);
    CHECK(mean < 1.0);
}

TEST_CASE("projector weight from the largest principal angle") {
    // theta = pi/4: w^2 = sqrt(tan^4 + tan^2) - tan^2 = sqrt(2) - 1.
    CHECK(corrmc::wmc_weight(std::atan(1.0)) ==
          doctest::Approx(std::sqrt(std::sqrt(2.0) - 1.0)).epsilon(1e-12));
    // Perfect prior: fully down-weighted, held at the positivity floor.
    CHECK(corrmc::wmc_weight(0.0) == doctest::Approx(1e-3));
    CHECK(corrmc::wmc_weight(0.0, 0.05) == doctest::Approx(0.05));
    // Right angle has no tangent.
    CHECK_THROWS_AS(corrmc::wmc_weight(std::acos(0.0)),
                    corrmc::UndefinedTangentError);
    // Nondecreasing in the angle.
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double theta = i * (std::acos(0.0) * 0.999) / 100.0;
        const double w = corrmc::wmc_weight(theta);
        CHECK(w >= prev - 1e-15);
        prev = w;
    }
}

TEST_CASE("diagonal weights follow the prior leverage profile") {
    corrmc::LeverageProfile flat;
    flat.mu.assign(8, 1.0);
    flat.nu.assign(8, 1.0);
    flat.r = 2;
    const corrmc::DwmcWeights w = corrmc::dwmc_weights(flat);
    for (const double ri : w.r_diag)
        CHECK(ri == doctest::Approx(std::sqrt(2.0 / 8.0 + 1.0 / 8.0)));
    for (const double cj : w.c_diag)
        CHECK(cj == doctest::Approx(std::sqrt(2.0 / 8.0 + 1.0 / 8.0)));

    corrmc::LeverageProfile spiky = flat;
    spiky.mu[0] = 4.0; // n / r
    const corrmc::DwmcWeights ws = corrmc::dwmc_weights(spiky);
    CHECK(ws.r_diag[0] == doctest::Approx(std::sqrt(1.0 + 1.0 / 8.0)));
    for (const double ri : ws.r_diag) CHECK(ri > 0.0);
    CHECK(ws.r_diag[0] > ws.r_diag[1]);
}

} // TEST_SUITE
