#include "pialab/errors.hpp"
#include "pialab/grid.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

namespace {

using namespace pialab;

ValueField fill_with(const GridSpec& grid, auto&& fn) {
    ValueField f(grid);
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            f(i, j) = fn(grid.t(i), grid.x(j));
        }
    }
    return f;
}

ValueField random_field(const GridSpec& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    ValueField f(grid);
    for (double& v : f.values()) {
        v = dist(rng);
    }
    return f;
}

TEST(GridSpec, DefaultsAndSpacing) {
    const GridSpec g;
    EXPECT_NO_THROW(g.validate());
    EXPECT_DOUBLE_EQ(g.dx(), 0.02);
    EXPECT_DOUBLE_EQ(g.dt(), 0.0025);
    EXPECT_EQ(g.space_nodes(), 601u);
    EXPECT_EQ(g.time_levels(), 401u);
    EXPECT_DOUBLE_EQ(g.x(0), -6.0);
    EXPECT_NEAR(g.x(600), 6.0, 1e-12);
}

TEST(GridSpec, InvalidSpecsAreConfigErrors) {
    EXPECT_THROW((GridSpec{1.0, 1.0, 10, 1.0, 10}.validate()), ConfigError);
    EXPECT_THROW((GridSpec{-1.0, 1.0, 2, 1.0, 10}.validate()), ConfigError);
    EXPECT_THROW((GridSpec{-1.0, 1.0, 10, 0.0, 10}.validate()), ConfigError);
    EXPECT_THROW((GridSpec{-1.0, 1.0, 10, 1.0, 0}.validate()), ConfigError);
}

TEST(ReportingWindow, CentralHalfOfDefaultDomain) {
    const GridSpec g;
    const auto win = reporting_window(g);
    EXPECT_NEAR(g.x(win.begin), -3.0, 1e-12);
    EXPECT_NEAR(g.x(win.end - 1), 3.0, 1e-12);
    EXPECT_TRUE(win.contains_x(g, 0.0));
    EXPECT_TRUE(win.contains_x(g, 3.0 - 1e-12));
    EXPECT_FALSE(win.contains_x(g, 3.1));
}

TEST(ReportingWindow, AsymmetricDomainIsCentred) {
    const GridSpec g{0.0, 4.0, 399, 1.0, 4};
    const auto win = reporting_window(g);
    EXPECT_NEAR(g.x(win.begin), 1.0, 1e-12);
    EXPECT_NEAR(g.x(win.end - 1), 3.0, 1e-12);
}

TEST(Gradient, ConstantFieldIsFlat) {
    const GridSpec g{-1.0, 1.0, 9, 1.0, 2};
    const auto f = fill_with(g, [](double, double) { return 4.2; });
    for (std::size_t j = 0; j < g.space_nodes(); ++j) {
        EXPECT_EQ(gradient(f, 1, j), 0.0);
    }
}

TEST(Gradient, LinearFieldHasUnitSlope) {
    const GridSpec g{-2.0, 3.0, 17, 1.0, 2};
    const auto f = fill_with(g, [](double, double x) { return x; });
    for (std::size_t j = 1; j <= g.nx; ++j) {
        EXPECT_NEAR(gradient(f, 0, j), 1.0, 1e-13);
    }
}

TEST(Gradient, QuadraticAtOneWithTenthSpacing) {
    const GridSpec g{0.0, 2.0, 19, 1.0, 1};
    ASSERT_NEAR(g.dx(), 0.1, 1e-15);
    const auto f = fill_with(g, [](double, double x) { return x * x; });
    ASSERT_NEAR(g.x(10), 1.0, 1e-15);
    EXPECT_NEAR(gradient(f, 0, 10), 2.0, 1e-12);
}

TEST(Gradient, BoundaryUsesOneSidedDifferences) {
    const GridSpec g{0.0, 2.0, 19, 1.0, 1};
    const auto f = fill_with(g, [](double, double x) { return x * x; });
    EXPECT_NEAR(gradient(f, 0, 0), 0.1, 1e-12);
    EXPECT_NEAR(gradient(f, 0, 20), 3.9, 1e-12);
}

TEST(Gradient, AffineFieldsAtMachinePrecision) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    const GridSpec g{-3.0, 5.0, 63, 1.0, 3};
    for (int k = 0; k < 20; ++k) {
        const double slope = dist(rng);
        const double shift = dist(rng);
        const auto f = fill_with(g, [&](double, double x) { return slope * x + shift; });
        for (std::size_t j = 1; j <= g.nx; ++j) {
            EXPECT_NEAR(gradient(f, 2, j), slope, 1e-12);
        }
    }
}

TEST(SupNorm, Examples) {
    const GridSpec g{-1.0, 1.0, 7, 1.0, 3};
    std::mt19937_64 rng(1);
    const auto u = random_field(g, rng);
    EXPECT_EQ(sup_norm_diff(u, u), 0.0);
    auto w = u;
    for (double& v : w.values()) {
        v += 0.5;
    }
    EXPECT_NEAR(sup_norm_diff(u, w), 0.5, 1e-15);
    auto single = u;
    single(2, 3) += 1e-3;
    EXPECT_NEAR(sup_norm_diff(u, single), 1e-3, 1e-15);
}

TEST(SupNorm, MismatchedGridsAreDimensionErrors) {
    const ValueField a(GridSpec{-1.0, 1.0, 7, 1.0, 3});
    const ValueField b(GridSpec{-1.0, 1.0, 9, 1.0, 3});
    EXPECT_THROW((void)sup_norm_diff(a, b), DimensionError);
    EXPECT_THROW((void)window_sup_diff(a, b), DimensionError);
}

TEST(SupNorm, IsAMetric) {
    const GridSpec g{-1.0, 1.0, 11, 1.0, 4};
    std::mt19937_64 rng(99);
    for (int k = 0; k < 50; ++k) {
        const auto u = random_field(g, rng);
        const auto v = random_field(g, rng);
        const auto w = random_field(g, rng);
        EXPECT_EQ(sup_norm_diff(u, v), sup_norm_diff(v, u));
        EXPECT_EQ(sup_norm_diff(u, u), 0.0);
        EXPECT_GT(sup_norm_diff(u, v), 0.0);
        EXPECT_LE(sup_norm_diff(u, w), sup_norm_diff(u, v) + sup_norm_diff(v, w));
    }
}

TEST(SupNorm, WindowIgnoresBoundaryNodes) {
    const GridSpec g;
    const ValueField u(g);
    auto w = u;
    w(0, 0) = 10.0;
    w(5, 300) = 0.25;
    EXPECT_EQ(sup_norm_diff(u, w), 10.0);
    EXPECT_EQ(window_sup_diff(u, w), 0.25);
}

TEST(FieldCsv, HeaderAndRoundTripDigits) {
    const GridSpec g{0.0, 1.0, 3, 1.0, 1};
    auto f = fill_with(g, [](double t, double x) { return t + x / 3.0; });
    std::ostringstream os;
    write_field_csv(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,x,value");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        const auto last_comma = line.rfind(',');
        const double parsed = std::stod(line.substr(last_comma + 1));
        EXPECT_EQ(parsed, f.values()[rows]);
        ++rows;
    }
    EXPECT_EQ(rows, g.time_levels() * g.space_nodes());
}

TEST(FormatReal, SeventeenSignificantDigits) {
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(1.0), "1");
}

} // namespace
