#include <cmath>

#include "doctest.h"

#include "corrmc/errors.hpp"
#include "corrmc/experiments.hpp"
#include "corrmc/kernels.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/priors.hpp"
#include "corrmc/sampling.hpp"
#include "corrmc/solvers.hpp"
#include "oracles.hpp"

using corrmc::Dense;
using corrmc::Mask;
namespace k = corrmc::kernels;

namespace {

struct Problem {
    Dense x_star;
    corrmc::ThinSvd factors;
    Mask mask;
    Dense observed;
};

Problem make_problem(std::size_t n, std::size_t r, double p,
                     std::uint64_t seed) {
    Problem out;
    auto instance = corrmc::gen_instance(n, r, seed);
    out.x_star = instance.first;
    out.factors = instance.second;
    out.mask = corrmc::draw_mask(corrmc::uniform_plan(n, p), seed + 1);
    out.observed = Dense(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (out.mask(i, j)) out.observed(i, j) = out.x_star(i, j);
    return out;
}

} // namespace

TEST_SUITE("solvers") {

TEST_CASE("singular value thresholding by hand and against an oracle") {
    Dense d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 0.2;
    const Dense shrunk = corrmc::svt(d, 0.5);
    CHECK(shrunk(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(shrunk(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(shrunk(2, 2) == doctest::Approx(0.0));
    CHECK(corrmc::svt(d, 5.0) == Dense(3, 3, 0.0));
    CHECK_THROWS_AS(corrmc::svt(d, -1.0), corrmc::InvariantViolationError);

    // Random matrix vs an independent SVD shrinkage.
    const Dense x = oracles::random_matrix(8, 8, 21);
    const double tau = 0.9;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        oracles::to_eigen(x), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i)
        s(i) = std::max(s(i) - tau, 0.0);
    const Dense want = oracles::from_eigen(svd.matrixU() * s.asDiagonal() *
                                           svd.matrixV().transpose());
    CHECK(oracles::rel_frob_diff(corrmc::svt(x, tau), want) < 1e-12);
}

TEST_CASE("full and empty masks short-circuit") {
    const Dense x = oracles::random_matrix(7, 7, 31);
    const Mask full(7, true);
    const corrmc::Solution sol = corrmc::solve_mc(full, x);
    CHECK(sol.converged);
    CHECK(sol.x_hat == x); // exact, not approximate

    const Mask empty(7, false);
    const corrmc::Solution zero = corrmc::solve_mc(empty, Dense(7, 7));
    CHECK(zero.converged);
    CHECK(zero.x_hat == Dense(7, 7, 0.0));
}

TEST_CASE("empty mask with a strong prior is unbounded") {
    const Dense ut = oracles::random_basis(6, 2, 41);
    const Dense vt = oracles::random_basis(6, 2, 42);
    const Dense phi = corrmc::subspace_prior(ut, vt);
    const Mask empty(6, false);
    // lambda * ||phi|| = 1 stays bounded; above 1 the objective diverges.
    const corrmc::Solution ok =
        corrmc::solve_corr_mc(empty, Dense(6, 6), corrmc::Prior{phi, 1.0});
    CHECK(ok.x_hat == Dense(6, 6, 0.0));
    CHECK_THROWS_AS(
        corrmc::solve_corr_mc(empty, Dense(6, 6), corrmc::Prior{phi, 1.5}),
        corrmc::UnboundedObjectiveError);
}

TEST_CASE("observed entries off the mask are rejected") {
    Mask m(4, false);
    m.set(0, 0, true);
    Dense d(4, 4);
    d(0, 0) = 1.0;
    d(2, 2) = 0.5; // not observed
    CHECK_THROWS_AS(corrmc::solve_mc(m, d), corrmc::InvariantViolationError);
}

TEST_CASE("solver configuration is validated") {
    const Problem prob = make_problem(6, 1, 0.9, 51);
    corrmc::SolverConfig bad;
    bad.rho_growth = 0.9;
    CHECK_THROWS_AS(corrmc::solve_mc(prob.mask, prob.observed, bad),
                    corrmc::ConfigError);
    bad = corrmc::SolverConfig{};
    bad.max_iters = 0;
    CHECK_THROWS_AS(corrmc::solve_mc(prob.mask, prob.observed, bad),
                    corrmc::ConfigError);
}

TEST_CASE("plain completion recovers a well-sampled low-rank matrix") {
    const Problem prob = make_problem(12, 2, 0.85, 61);
    const corrmc::Solution sol = corrmc::solve_mc(prob.mask, prob.observed);
    CHECK(sol.converged);
    CHECK(oracles::rel_frob_diff(sol.x_hat, prob.x_star) < 1e-6);
}

TEST_CASE("the prior pulls recovery below the plain threshold") {
    const Problem prob = make_problem(16, 3, 0.45, 71);
    const corrmc::Solution plain = corrmc::solve_mc(prob.mask, prob.observed);
    const double plain_err = oracles::rel_frob_diff(plain.x_hat, prob.x_star);

    const Dense phi = k::matmul_nt(prob.factors.u, prob.factors.v);
    const corrmc::Solution guided =
        corrmc::solve_corr_mc(prob.mask, prob.observed, corrmc::Prior{phi, 1.0});
    const double guided_err = oracles::rel_frob_diff(guided.x_hat, prob.x_star);
    CHECK(guided_err < 1e-4);
    CHECK(guided_err < plain_err);
}

TEST_CASE("reduction identities are bitwise") {
    const Problem prob = make_problem(10, 2, 0.8, 81);
    const corrmc::Solution base = corrmc::solve_mc(prob.mask, prob.observed);

    SUBCASE("zero-weight prior") {
        const Dense phi = oracles::random_matrix(10, 10, 82);
        const corrmc::Solution same = corrmc::solve_corr_mc(
            prob.mask, prob.observed, corrmc::Prior{phi, 0.0});
        CHECK(same.x_hat == base.x_hat);
        CHECK(same.iters == base.iters);
    }
    SUBCASE("unit diagonal weights") {
        corrmc::DwmcWeights unit;
        unit.r_diag.assign(10, 1.0);
        unit.c_diag.assign(10, 1.0);
        const corrmc::Solution same =
            corrmc::solve_dwmc(prob.mask, prob.observed, unit);
        CHECK(same.x_hat == base.x_hat);
    }
    SUBCASE("identity projector weights") {
        corrmc::WmcWeights unit;
        unit.tau = 1.0;
        unit.rho = 1.0;
        unit.u_tilde = oracles::random_basis(10, 2, 83);
        unit.v_tilde = oracles::random_basis(10, 2, 84);
        const corrmc::Solution same =
            corrmc::solve_wmc(prob.mask, prob.observed, unit);
        CHECK(same.x_hat == base.x_hat);
    }
    SUBCASE("zero noise budget") {
        const Dense phi = k::matmul_nt(prob.factors.u, prob.factors.v);
        const corrmc::Prior prior{phi, 0.5};
        const corrmc::Solution eq =
            corrmc::solve_corr_mc(prob.mask, prob.observed, prior);
        const corrmc::Solution noisy =
            corrmc::solve_noisy_corr_mc(prob.mask, prob.observed, prior, 0.0);
        CHECK(noisy.x_hat == eq.x_hat);
    }
}

TEST_CASE("diagonal weighting solves the rescaled program") {
    const Problem prob = make_problem(12, 2, 0.9, 91);
    const corrmc::SubspaceEstimate est =
        corrmc::noisy_copy_subspaces(prob.x_star, 0.01, 2, 92);
    const corrmc::DwmcWeights w =
        corrmc::dwmc_weights(corrmc::leverage_scores(est.u, est.v));
    const corrmc::Solution sol = corrmc::solve_dwmc(prob.mask, prob.observed, w);
    CHECK(sol.converged);
    CHECK(oracles::rel_frob_diff(sol.x_hat, prob.x_star) < 1e-5);
}

TEST_CASE("projector weighting recovers with a faithful prior") {
    const Problem prob = make_problem(12, 2, 0.9, 101);
    corrmc::WmcWeights w;
    w.tau = 0.5;
    w.rho = 0.5;
    w.u_tilde = prob.factors.u;
    w.v_tilde = prob.factors.v;
    const corrmc::Solution sol = corrmc::solve_wmc(prob.mask, prob.observed, w);
    CHECK(oracles::rel_frob_diff(sol.x_hat, prob.x_star) < 1e-3);
}

TEST_CASE("noisy solver honors its residual budget") {
    const std::size_t n = 16;
    const Problem prob = make_problem(n, 2, 0.7, 111);
    corrmc::Rng rng(112);
    Dense noisy_obs(n, n);
    const corrmc::SamplingPlan plan = corrmc::uniform_plan(n, 0.7);
    double eps_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (prob.mask(i, j)) {
                const double noise = 2e-3 * (rng.uniform01() - 0.5);
                noisy_obs(i, j) = prob.x_star(i, j) + noise;
                const double weighted = noise / 0.7;
                eps_sq += weighted * weighted;
            }
    const double eps = std::sqrt(eps_sq);
    const Dense phi = k::matmul_nt(prob.factors.u, prob.factors.v);
    const corrmc::Solution sol = corrmc::solve_noisy_corr_mc(
        prob.mask, noisy_obs, corrmc::Prior{phi, 0.5}, eps, {}, &plan);

    // The weighted residual of the solution stays within the budget.
    double res_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (prob.mask(i, j)) {
                const double d = (sol.x_hat(i, j) - noisy_obs(i, j)) / 0.7;
                res_sq += d * d;
            }
    CHECK(std::sqrt(res_sq) <= eps * (1.0 + 1e-6) + 1e-12);
    // And the truth is feasible, so the error is comparable to the noise.
    CHECK(oracles::rel_frob_diff(sol.x_hat, prob.x_star) < 0.05);

    CHECK_THROWS_AS(corrmc::solve_noisy_corr_mc(prob.mask, noisy_obs,
                                                corrmc::Prior{phi, 0.5}, -1.0),
                    corrmc::InvariantViolationError);
}

TEST_CASE("solves are deterministic and backend-independent") {
    const Problem prob = make_problem(11, 2, 0.6, 121);
    const Dense phi = k::matmul_nt(prob.factors.u, prob.factors.v);
    const corrmc::Prior prior{phi, 0.8};

    const corrmc::Solution a =
        corrmc::solve_corr_mc(prob.mask, prob.observed, prior);
    const corrmc::Solution b =
        corrmc::solve_corr_mc(prob.mask, prob.observed, prior);
    CHECK(a.x_hat == b.x_hat);
    CHECK(a.iters == b.iters);

    const corrmc::kernels::Backend before = corrmc::kernels::default_backend();
    corrmc::kernels::set_default_backend(corrmc::kernels::Backend::serial);
    const corrmc::Solution c =
        corrmc::solve_corr_mc(prob.mask, prob.observed, prior);
    corrmc::kernels::set_default_backend(before);
    CHECK(c.x_hat == a.x_hat);
    CHECK(c.iters == a.iters);
}

TEST_CASE("library solver tracks a subgradient oracle on tiny instances") {
    const Problem prob = make_problem(6, 1, 0.8, 131);
    const Dense phi = k::matmul_nt(prob.factors.u, prob.factors.v);
    const double lambda = 0.5;

    corrmc::SolverConfig tight;
    tight.max_iters = 2000;
    tight.rho_cap = 1e8;
    tight.tol_feas = 1e-9;
    tight.tol_change = 1e-11;
    const corrmc::Solution sol =
        corrmc::solve_corr_mc(prob.mask, prob.observed, corrmc::Prior{phi, lambda}, tight);

    const Dense oracle = oracles::polyak_subgradient_solve(
        prob.mask, prob.observed, phi, lambda, 12000);
    CHECK(oracles::rel_frob_diff(sol.x_hat, oracle) < 5e-4);
}

} // TEST_SUITE
