#include "pialab/errors.hpp"
#include "pialab/linpde.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace {

using namespace pialab;

constexpr double kExact = 1e-12;
constexpr double kPi = std::numbers::pi;

NodeCoefficient constant(double c) {
    return [c](const GridPoint&) { return c; };
}

LinearPdeCoefficients coefficients(NodeCoefficient advection, NodeCoefficient source, std::function<double(double)> g) {
    return {std::move(advection), std::move(source), constant(1.0), std::move(g)};
}

// Smooth random-looking profile in x and t built from a few sines.
NodeCoefficient wiggle(std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> c(6);
    for (double& v : c) {
        v = dist(rng);
    }
    return [c, amplitude](const GridPoint& p) {
        return amplitude * (c[0] * std::sin(1.3 * p.x + c[1]) + c[2] * std::cos(0.7 * p.x * (1.0 + p.t)) +
                            c[3] * std::sin(3.0 * p.t + c[4] * p.x) + c[5]) /
               4.0;
    };
}

std::function<double(double)> random_terminal(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const double a = dist(rng);
    const double b = dist(rng);
    const double c = dist(rng);
    return [a, b, c](double x) { return a * std::tanh(x) + b * std::sin(2.0 * x) + c; };
}

double min_of(const ValueField& v) { return *std::ranges::min_element(v.values()); }
double max_of(const ValueField& v) { return *std::ranges::max_element(v.values()); }

const GridSpec kSmall{-3.0, 3.0, 59, 1.0, 40};

TEST(SolveBackward, ConstantsArePreserved) {
    const auto v = solve_backward(coefficients(constant(0.0), constant(0.0), [](double) { return 1.0; }), GridSpec{},
                                  LinearExtrapolation{});
    for (const double value : v.values()) {
        EXPECT_NEAR(value, 1.0, kExact);
    }
}

TEST(SolveBackward, UnitSourceGivesRemainingTime) {
    const GridSpec g;
    const auto v = solve_backward(coefficients(constant(0.0), constant(1.0), [](double) { return 0.0; }), g,
                                  LinearExtrapolation{});
    for (std::size_t i = 0; i < g.time_levels(); ++i) {
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            ASSERT_NEAR(v(i, j), g.T - g.t(i), kExact) << i << ',' << j;
        }
    }
}

TEST(SolveBackward, UnitAdvectionOfLinearData) {
    const GridSpec g;
    const auto v = solve_backward(coefficients(constant(1.0), constant(0.0), [](double x) { return x; }), g,
                                  LinearExtrapolation{});
    for (std::size_t i = 0; i < g.time_levels(); ++i) {
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            ASSERT_NEAR(v(i, j), g.x(j) + (g.T - g.t(i)), kExact) << i << ',' << j;
        }
    }
}

TEST(SolveBackward, StrongAdvectionOfLinearDataIsStillExact) {
    // |mu| dx > 2D on this grid, so interior rows are upwinded.
    const GridSpec g{-3.0, 3.0, 29, 1.0, 50};
    const auto v = solve_backward(coefficients(constant(-15.0), constant(0.0), [](double x) { return 2.0 * x; }), g,
                                  LinearExtrapolation{});
    for (std::size_t i = 0; i < g.time_levels(); ++i) {
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            ASSERT_NEAR(v(i, j), 2.0 * g.x(j) - 30.0 * (g.T - g.t(i)), 1e-11);
        }
    }
}

TEST(SolveBackward, TerminalLevelIsTerminalData) {
    const auto v = solve_backward(coefficients(wiggle(1, 1.0), wiggle(2, 1.0), [](double x) { return std::atan(x); }),
                                  kSmall, LinearExtrapolation{});
    for (std::size_t j = 0; j < kSmall.space_nodes(); ++j) {
        EXPECT_EQ(v(kSmall.nt, j), std::atan(kSmall.x(j)));
    }
}

TEST(SolveBackward, DirichletDataIsImposed) {
    Dirichlet bc{[](double t) { return 1.0 + t; }, [](double t) { return -t; }};
    const auto v = solve_backward(coefficients(constant(0.3), constant(0.5), [](double) { return 0.0; }), kSmall, bc);
    for (std::size_t i = 0; i < kSmall.nt; ++i) {
        EXPECT_DOUBLE_EQ(v(i, 0), 1.0 + kSmall.t(i));
        EXPECT_DOUBLE_EQ(v(i, kSmall.nx + 1), -kSmall.t(i));
    }
}

TEST(SolveBackward, NonFiniteCoefficientReportsLocation) {
    NodeCoefficient bad = [](const GridPoint& p) { return p.x > 1.0 && p.t < 0.5 ? std::nan("") : 0.0; };
    try {
        (void)solve_backward(coefficients(constant(0.0), bad, [](double) { return 0.0; }), kSmall,
                             LinearExtrapolation{});
        FAIL() << "expected a CoefficientError";
    } catch (const CoefficientError& e) {
        EXPECT_GT(e.x(), 1.0);
        EXPECT_LT(e.t(), 0.5);
        EXPECT_EQ(e.module(), "linpde");
    }
}

TEST(Properties, MaximumPrinciple) {
    // Drift vanishes at the truncation boundary, so every row is an M-matrix row.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto mu = wiggle(seed, 6.0);
        NodeCoefficient advection = [mu](const GridPoint& p) {
            const double taper = 1.0 - (p.x / 3.0) * (p.x / 3.0);
            return mu(p) * taper;
        };
        const auto g = random_terminal(seed + 100);
        const auto v = solve_backward(coefficients(advection, constant(0.0), g), kSmall, LinearExtrapolation{});
        double g_min = g(kSmall.x(0));
        double g_max = g_min;
        for (std::size_t j = 0; j < kSmall.space_nodes(); ++j) {
            g_min = std::min(g_min, g(kSmall.x(j)));
            g_max = std::max(g_max, g(kSmall.x(j)));
        }
        EXPECT_GE(min_of(v), g_min - kExact) << "seed " << seed;
        EXPECT_LE(max_of(v), g_max + kExact) << "seed " << seed;
    }
}

TEST(Properties, Comparison) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto mu = wiggle(seed, 4.0);
        NodeCoefficient advection = [mu](const GridPoint& p) { return mu(p) * (1.0 - (p.x / 3.0) * (p.x / 3.0)); };
        const auto rho1 = wiggle(seed + 50, 2.0);
        const auto bump = wiggle(seed + 60, 1.0);
        NodeCoefficient rho2 = [rho1, bump](const GridPoint& p) { return rho1(p) + std::abs(bump(p)); };
        const auto g1 = random_terminal(seed + 200);
        const auto g2 = [g1](double x) { return g1(x) + 0.1 * (1.0 + std::sin(x)); };
        const auto v1 = solve_backward(coefficients(advection, rho1, g1), kSmall, LinearExtrapolation{});
        const auto v2 = solve_backward(coefficients(advection, rho2, g2), kSmall, LinearExtrapolation{});
        for (std::size_t k = 0; k < v1.values().size(); ++k) {
            ASSERT_LE(v1.values()[k], v2.values()[k] + kExact) << "seed " << seed << " node " << k;
        }
    }
}

TEST(Properties, Linearity) {
    const double alpha = 1.7;
    const double beta = -0.6;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto mu = wiggle(seed, 5.0);
        const auto rho1 = wiggle(seed + 10, 2.0);
        const auto rho2 = wiggle(seed + 20, 2.0);
        const auto g1 = random_terminal(seed + 30);
        const auto g2 = random_terminal(seed + 40);
        NodeCoefficient rho = [=](const GridPoint& p) { return alpha * rho1(p) + beta * rho2(p); };
        const auto g = [=](double x) { return alpha * g1(x) + beta * g2(x); };
        const auto v1 = solve_backward(coefficients(mu, rho1, g1), kSmall, LinearExtrapolation{});
        const auto v2 = solve_backward(coefficients(mu, rho2, g2), kSmall, LinearExtrapolation{});
        const auto v = solve_backward(coefficients(mu, rho, g), kSmall, LinearExtrapolation{});
        double worst = 0.0;
        for (std::size_t k = 0; k < v.values().size(); ++k) {
            worst = std::max(worst, std::abs(v.values()[k] - (alpha * v1.values()[k] + beta * v2.values()[k])));
        }
        EXPECT_LE(worst, kExact) << "seed " << seed;
    }
}

std::vector<GridSpec> time_refinement() {
    std::vector<GridSpec> grids;
    for (const std::size_t nt : {10u, 20u, 40u, 80u}) {
        grids.push_back(GridSpec{-kPi, kPi, 999, 1.0, nt});
    }
    return grids;
}

std::vector<GridSpec> space_refinement() {
    std::vector<GridSpec> grids;
    for (const std::size_t cells : {8u, 16u, 32u, 64u}) {
        grids.push_back(GridSpec{-kPi, kPi, cells - 1, 1.0, 20000});
    }
    return grids;
}

TEST(VerifyOrder, FirstOrderInTime) {
    const auto grids = time_refinement();
    const auto study = verify_order(manufactured_sine(), grids);
    EXPECT_TRUE(study.refined_in_time);
    ASSERT_EQ(study.orders.size(), 3u);
    for (const double order : study.orders) {
        EXPECT_NEAR(order, 1.0, 0.2);
    }
}

TEST(VerifyOrder, SecondOrderInSpace) {
    const auto grids = space_refinement();
    const auto study = verify_order(manufactured_sine(), grids);
    EXPECT_FALSE(study.refined_in_time);
    ASSERT_EQ(study.orders.size(), 3u);
    for (const double order : study.orders) {
        EXPECT_NEAR(order, 2.0, 0.3);
    }
}

TEST(VerifyOrder, SpatialOrderWithModerateAdvection) {
    const auto grids = space_refinement();
    const auto study = verify_order(manufactured_sine(0.5), grids);
    for (const double order : study.orders) {
        EXPECT_GE(order, 1.0 - 0.2);
        EXPECT_LE(order, 2.0 + 0.3);
    }
}

TEST(VerifyOrder, ZeroSolutionHasZeroError) {
    const auto zero = [](double, double) { return 0.0; };
    const ManufacturedSolution trivial{zero, zero, zero, zero, zero, [](double, double) { return 1.0; }};
    const auto study = verify_order(trivial, time_refinement());
    for (const double e : study.errors) {
        EXPECT_EQ(e, 0.0);
    }
}

TEST(VerifyOrder, NeedsThreeGrids) {
    auto grids = time_refinement();
    grids.resize(2);
    EXPECT_THROW((void)verify_order(manufactured_sine(), grids), UsageError);
}

TEST(VerifyOrder, RejectsMixedRefinement) {
    auto grids = time_refinement();
    grids[2].nx = 499;
    EXPECT_THROW((void)verify_order(manufactured_sine(), grids), UsageError);
}

} // namespace
