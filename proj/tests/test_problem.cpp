#include "pialab/errors.hpp"
#include "pialab/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace {

using namespace pialab;

constexpr double kTolH = 1e-10;
constexpr double kPi = std::numbers::pi;

ControlProblem example() { return make_named_problem("example_s1k1", 1.0); }

TEST(Hamiltonian, ZeroGradientIsRunningReward) {
    EXPECT_DOUBLE_EQ(hamiltonian(example(), 0.0, 0.0, 0.0, 0.0), 1.0);
}

TEST(Hamiltonian, QuarterTurnWithUnitGradient) {
    EXPECT_NEAR(hamiltonian(example(), kPi / 4.0, 0.0, 0.0, 1.0), std::numbers::sqrt2, 1e-15);
}

TEST(Hamiltonian, DirectEvaluation) {
    // 2 sin 1 + cos 1
    EXPECT_NEAR(hamiltonian(example(), 1.0, 0.3, -0.7, 2.0), 2.2232442754839328, 1e-14);
}

TEST(Argmax, ClosedFormValues) {
    const auto p = example();
    EXPECT_DOUBLE_EQ(argmax_control(p, 0.0, 0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(argmax_control(p, 0.0, 0.0, 1.0), kPi / 4.0);
}

TEST(Argmax, GridSearchFindsArctanTwoWithinOneStep) {
    auto p = example();
    p.argmax_oracle = GridSearch{10001};
    const double step = kPi / 10000.0;
    EXPECT_NEAR(argmax_control(p, 0.0, 0.0, 2.0), 1.1071487177940904, step);
}

// The Hamiltonian is flat to second order at its peak, so a comparison-based
// search pins the control only to about the square root of machine precision.
constexpr double kSearchResolution = 1e-7;

TEST(Argmax, GoldenSectionMatchesClosedForm) {
    auto p = example();
    p.argmax_oracle = GoldenSection{1e-10};
    for (const double grad : {-5.0, -1.0, 0.0, 0.3, 2.0, 40.0}) {
        const double a = argmax_control(p, 0.0, 0.0, grad);
        EXPECT_NEAR(a, std::atan(grad), kSearchResolution) << "p=" << grad;
        EXPECT_NEAR(hamiltonian(p, a, 0.0, 0.0, grad), std::sqrt(1.0 + grad * grad), kTolH) << "p=" << grad;
    }
}

TEST(Argmax, GridSearchTiesGoToLeftmostControl) {
    ControlProblem p = example();
    p.running_reward = [](double, double, double) { return 1.0; };
    p.drift = [](double, double, double) { return 0.0; };
    p.argmax_oracle = GridSearch{11};
    EXPECT_DOUBLE_EQ(argmax_control(p, 0.0, 0.0, 3.0), p.control_set.lo);
}

TEST(Argmax, ClosedFormOutsideControlSetIsConfigError) {
    auto p = example();
    p.argmax_oracle = ClosedForm{[](double, double, double) { return 2.0; }};
    EXPECT_THROW((void)argmax_control(p, 0.0, 0.0, 1.0), ConfigError);
}

TEST(Argmax, SingletonControlSetReturnsItsElement) {
    auto p = example();
    p.control_set = {0.25, 0.25};
    EXPECT_DOUBLE_EQ(argmax_control(p, 0.0, 0.0, 5.0), 0.25);
}

TEST(Example, CoefficientValues) {
    const auto p = example();
    EXPECT_DOUBLE_EQ(p.drift(kPi / 2.0, 0.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(p.terminal_reward(0.0), 0.0);
    EXPECT_DOUBLE_EQ(p.terminal_reward(1.0), kPi / 4.0);
    EXPECT_DOUBLE_EQ(p.diffusion(0.5, 3.0), std::numbers::sqrt2);
    EXPECT_DOUBLE_EQ(p.control_set.lo, -kPi / 2.0);
    EXPECT_DOUBLE_EQ(p.control_set.hi, kPi / 2.0);
}

TEST(Example, TimeDependentWeights) {
    ExampleParams params;
    params.s = [](double t) { return 2.0 + t; };
    params.k = [](double t) { return 1.0 + t * t; };
    const auto p = make_example(params, 2.0);
    EXPECT_DOUBLE_EQ(p.drift(kPi / 2.0, 1.0, 0.0), 3.0);
    EXPECT_DOUBLE_EQ(p.running_reward(0.0, 1.0, 0.0), 2.0);
    EXPECT_NEAR(argmax_control(p, 1.0, 0.0, 0.5), std::atan(3.0 * 0.5 / 2.0), 1e-15);
}

TEST(Example, NonPositiveWeightIsRejected) {
    ExampleParams params;
    params.k = [](double t) { return 0.5 - t; };
    EXPECT_THROW((void)make_example(params, 1.0), ConfigError);
}

TEST(Registry, UnknownNameIsConfigError) {
    EXPECT_THROW((void)make_named_problem("nope", 1.0), ConfigError);
    ASSERT_EQ(named_problems().size(), 1u);
    EXPECT_EQ(named_problems().front(), "example_s1k1");
}

TEST(Validate, RejectsNonPositiveDiffusion) {
    auto p = example();
    p.diffusion = [](double, double x) { return x > 1.0 ? 0.0 : 1.0; };
    EXPECT_THROW(p.validate(GridSpec{}), ConfigError);
}

TEST(Validate, RejectsNonFiniteTerminalReward) {
    auto p = example();
    p.terminal_reward = [](double x) { return 1.0 / (x - 6.0); };
    EXPECT_THROW(p.validate(GridSpec{}), ConfigError);
}

TEST(Validate, RejectsTooFewGridSearchSamples) {
    auto p = example();
    p.argmax_oracle = GridSearch{1};
    EXPECT_THROW(p.validate(GridSpec{}), ConfigError);
}

TEST(Properties, ClosedFormAndGridSearchAgree) {
    const auto closed = example();
    auto search = example();
    const std::size_t n_a = 2001;
    search.argmax_oracle = GridSearch{n_a};
    const double step = closed.control_set.width() / static_cast<double>(n_a - 1);
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> t_dist(0.0, 1.0);
    std::uniform_real_distribution<double> x_dist(-6.0, 6.0);
    std::uniform_real_distribution<double> p_dist(-10.0, 10.0);
    for (int k = 0; k < 500; ++k) {
        const double t = t_dist(rng);
        const double x = x_dist(rng);
        const double p = p_dist(rng);
        const double a_closed = argmax_control(closed, t, x, p);
        const double a_grid = argmax_control(search, t, x, p);
        EXPECT_LE(std::abs(a_closed - a_grid), step) << "p=" << p;
        EXPECT_GE(hamiltonian(closed, a_closed, t, x, p), hamiltonian(closed, a_grid, t, x, p) - kTolH);
    }
}

TEST(Properties, ClosedFormBeatsEverySampledControl) {
    const auto p = example();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> p_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> a_dist(p.control_set.lo, p.control_set.hi);
    for (int k = 0; k < 200; ++k) {
        const double grad = p_dist(rng);
        const double best = hamiltonian(p, argmax_control(p, 0.0, 0.0, grad), 0.0, 0.0, grad);
        for (int m = 0; m < 20; ++m) {
            EXPECT_GE(best, hamiltonian(p, a_dist(rng), 0.0, 0.0, grad) - kTolH);
        }
    }
}

TEST(Properties, MaximizedHamiltonianIsEnvelope) {
    const auto p = example();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> p_dist(-20.0, 20.0);
    for (int k = 0; k < 500; ++k) {
        const double grad = p_dist(rng);
        const double a = argmax_control(p, 0.0, 0.0, grad);
        EXPECT_NEAR(hamiltonian(p, a, 0.0, 0.0, grad), std::sqrt(1.0 + grad * grad), kTolH);
    }
}

TEST(Properties, ArgmaxInvariantUnderConstantShiftOfRunningReward) {
    // Rounding of the shifted sums may flip a near-tie, so agreement is to oracle resolution.
    const std::pair<ArgmaxOracle, double> cases[] = {{GridSearch{2001}, kPi / 2000.0}, {GoldenSection{1e-10}, kSearchResolution}};
    for (const auto& [oracle, resolution] : cases) {
        auto base = example();
        base.argmax_oracle = oracle;
        auto shifted = base;
        shifted.running_reward = [f = base.running_reward](double a, double t, double x) { return f(a, t, x) + 0.375; };
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> p_dist(-5.0, 5.0);
        for (int k = 0; k < 100; ++k) {
            const double grad = p_dist(rng);
            EXPECT_NEAR(argmax_control(base, 0.0, 0.0, grad), argmax_control(shifted, 0.0, 0.0, grad), resolution);
        }
    }
}

} // namespace
