#include "example_setup.hpp"

#include "pialab/errors.hpp"
#include "pialab/hjb_ref.hpp"
#include "pialab/linpde.hpp"
#include "pialab/montecarlo.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace pialab;
using pialab::testing::example_setup;

TEST(SolveBellman, SingletonControlSetIsPolicyEvaluation) {
    auto problem = make_named_problem("example_s1k1", 1.0);
    problem.control_set = {0.0, 0.0};
    const GridSpec grid;
    const auto reference = solve_bellman(problem, grid, LinearExtrapolation{});
    const LinearPdeCoefficients zero_control{
        [](const GridPoint&) { return 0.0; }, [](const GridPoint&) { return 1.0; },
        [](const GridPoint&) { return 1.0; }, [](double x) { return std::atan(x); }};
    const auto linear = solve_backward(zero_control, grid, LinearExtrapolation{});
    EXPECT_LE(sup_norm_diff(reference.value, linear), 1e-12);
    for (const double a : reference.policy.values()) {
        EXPECT_EQ(a, 0.0);
    }
}

TEST(SolveBellman, NoDriftAndNoTerminalRewardGivesRemainingTime) {
    ExampleParams params;
    params.s = [](double) { return 0.0; };
    auto problem = make_example(params, 1.0);
    problem.terminal_reward = [](double) { return 0.0; };
    const GridSpec grid;
    const auto reference = solve_bellman(problem, grid, LinearExtrapolation{});
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            ASSERT_NEAR(reference.value(i, j), grid.T - grid.t(i), 1e-12);
            ASSERT_EQ(reference.policy(i, j), 0.0);
        }
    }
}

TEST(SolveBellman, ExampleAgreesWithRefinedGrid) {
    const auto& setup = example_setup();
    const GridSpec fine{-6.0, 6.0, 1199, 1.0, 1600};
    const auto refined = solve_bellman(setup.problem, fine, LinearExtrapolation{});
    const double coarse_origin = setup.reference.value(0, 300);
    const double fine_origin = refined.value(0, 600);
    ASSERT_NEAR(setup.grid.x(300), 0.0, 1e-12);
    ASSERT_NEAR(fine.x(600), 0.0, 1e-12);
    EXPECT_LE(std::abs(coarse_origin - fine_origin), 2e-3);
}

TEST(SolveBellman, ExampleAgreesWithMonteCarloOfReferencePolicy) {
    const auto& setup = example_setup();
    McConfig mc;
    mc.n_paths = 100000;
    mc.antithetic = true;
    mc.seed = 3;
    const auto estimate = simulate_policy_value(setup.problem, setup.reference.policy, 0.0, 0.0, mc);
    EXPECT_LE(std::abs(estimate.mean - setup.reference.value(0, 300)), 3.0 * estimate.std_error)
        << "mc " << estimate.mean << " +- " << estimate.std_error;
}

TEST(SolveBellman, HowardNeedsFewSweeps) {
    const auto& setup = example_setup();
    for (std::size_t i = 0; i < setup.grid.nt; ++i) {
        EXPECT_GE(setup.reference.inner_iterations[i], 1u);
        EXPECT_LE(setup.reference.inner_iterations[i], 10u);
    }
}

TEST(SolveBellman, PolicyIsAFixedPointOfTheArgmax) {
    const auto& setup = example_setup();
    const auto& g = setup.grid;
    std::vector<double> row(g.space_nodes());
    for (std::size_t i = 0; i < g.time_levels(); ++i) {
        greedy_row(setup.problem, g, i, setup.reference.value.row(i), row);
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            ASSERT_EQ(row[j], setup.reference.policy(i, j));
        }
    }
}

TEST(SolveBellman, PolicyIsArctanOfGradient) {
    const auto& setup = example_setup();
    const auto& g = setup.grid;
    for (std::size_t i = 0; i < g.time_levels(); i += 7) {
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            ASSERT_NEAR(setup.reference.policy(i, j), std::atan(gradient(setup.reference.value, i, j)), 1e-12);
        }
    }
}

TEST(SolveBellman, DominatesEveryPolicyImprovementIterate) {
    const auto& setup = example_setup();
    for (std::size_t n = 0; n < setup.pia.iterations(); ++n) {
        const auto& v = setup.pia.value(n);
        double worst = 0.0;
        for (std::size_t k = 0; k < v.values().size(); ++k) {
            worst = std::min(worst, setup.reference.value.values()[k] - v.values()[k]);
        }
        EXPECT_GE(worst, -1e-9) << "iterate " << n;
    }
}

TEST(SolveBellman, InnerBudgetExhaustionIsConvergenceError) {
    const auto problem = make_named_problem("example_s1k1", 1.0);
    BellmanOptions options;
    options.inner_max = 1;
    try {
        (void)solve_bellman(problem, GridSpec{-6.0, 6.0, 59, 1.0, 10}, LinearExtrapolation{}, options);
        FAIL() << "expected a ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual(), options.inner_tol);
        EXPECT_EQ(e.module(), "hjb_ref");
    }
}

TEST(SolveBellman, InvalidOptionsAreRejected) {
    const auto problem = make_named_problem("example_s1k1", 1.0);
    BellmanOptions options;
    options.inner_tol = 0.0;
    EXPECT_THROW((void)solve_bellman(problem, GridSpec{}, LinearExtrapolation{}, options), UsageError);
}

} // namespace
