#include "pialab/linpde.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pialab {

namespace {

struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> rhs;

    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
};

// Thomas algorithm; the system is overwritten.
void solve_tridiagonal(Tridiagonal& sys, std::span<double> out) {
    const std::size_t n = sys.diag.size();
    for (std::size_t k = 1; k < n; ++k) {
        const double pivot = sys.diag[k - 1];
        if (std::abs(pivot) < 1e-300) {
            throw SolverError("linpde", fmt::format("zero pivot in tridiagonal sweep at row {}", k - 1));
        }
        const double m = sys.lower[k] / pivot;
        sys.diag[k] -= m * sys.upper[k - 1];
        sys.rhs[k] -= m * sys.rhs[k - 1];
    }
    if (std::abs(sys.diag[n - 1]) < 1e-300) {
        throw SolverError("linpde", "zero pivot in last tridiagonal row");
    }
    out[n - 1] = sys.rhs[n - 1] / sys.diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        out[k] = (sys.rhs[k] - sys.upper[k] * out[k + 1]) / sys.diag[k];
    }
}

void require_finite(double value, const char* what, double t, double x) {
    if (!std::isfinite(value)) {
        throw CoefficientError("linpde", fmt::format("{} is not finite at t={}, x={}", what, t, x), t, x);
    }
}

} // namespace

void implicit_step(const GridSpec& grid, const BoundaryCondition& bc, std::size_t i, const StepCoefficients& coeffs,
                   std::span<const double> next, std::span<double> out) {
    const std::size_t n = grid.space_nodes();
    const std::size_t last = n - 1;
    const double dx = grid.dx();
    const double dt = grid.dt();
    const double t = grid.t(i);

    // Solved for the increment out - next, which keeps round-off at the
    // level of the increment rather than of the solution.
    Tridiagonal sys(n);
    for (std::size_t j = 1; j < last; ++j) {
        const double mu = coeffs.advection[j];
        const double diff = coeffs.half_diffusion_sq[j] / (dx * dx);
        double to_left = 0.0;
        double to_right = 0.0;
        if (std::abs(mu) * dx <= 2.0 * coeffs.half_diffusion_sq[j]) {
            to_left = diff - mu / (2.0 * dx);
            to_right = diff + mu / (2.0 * dx);
        } else {
            to_left = diff + std::max(-mu, 0.0) / dx;
            to_right = diff + std::max(mu, 0.0) / dx;
        }
        sys.lower[j] = -dt * to_left;
        sys.upper[j] = -dt * to_right;
        sys.diag[j] = 1.0 + dt * (to_left + to_right);
        sys.rhs[j] = dt * (to_left * (next[j - 1] - next[j]) + to_right * (next[j + 1] - next[j]) + coeffs.source[j]);
    }

    if (const auto* dirichlet = std::get_if<Dirichlet>(&bc)) {
        const double left = dirichlet->left(t);
        const double right = dirichlet->right(t);
        require_finite(left, "left Dirichlet value", t, grid.x(0));
        require_finite(right, "right Dirichlet value", t, grid.x(last));
        sys.diag[0] = 1.0;
        sys.rhs[0] = left - next[0];
        sys.diag[last] = 1.0;
        sys.rhs[last] = right - next[last];
    } else {
        // v_t + mu * (inward one-sided slope) + rho = 0 on the boundary rows.
        const double left = dt * coeffs.advection[0] / dx;
        sys.diag[0] = 1.0 + left;
        sys.upper[0] = -left;
        sys.rhs[0] = dt * coeffs.source[0] + left * (next[1] - next[0]);
        const double right = dt * coeffs.advection[last] / dx;
        sys.diag[last] = 1.0 - right;
        sys.lower[last] = right;
        sys.rhs[last] = dt * coeffs.source[last] + right * (next[last] - next[last - 1]);
    }

    solve_tridiagonal(sys, out);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] += next[j];
    }
    if (const auto* dirichlet = std::get_if<Dirichlet>(&bc)) {
        out[0] = dirichlet->left(t);
        out[last] = dirichlet->right(t);
    }
}

ValueField solve_backward(const LinearPdeCoefficients& coeffs, const GridSpec& grid, const BoundaryCondition& bc) {
    grid.validate();
    const std::size_t n = grid.space_nodes();
    ValueField v(grid);
    auto terminal = v.row(grid.nt);
    for (std::size_t j = 0; j < n; ++j) {
        terminal[j] = coeffs.terminal(grid.x(j));
        require_finite(terminal[j], "terminal condition", grid.T, grid.x(j));
    }

    std::vector<double> mu(n);
    std::vector<double> rho(n);
    std::vector<double> half_sig2(n);
    for (std::size_t i = grid.nt; i-- > 0;) {
        const double t = grid.t(i);
        for (std::size_t j = 0; j < n; ++j) {
            const GridPoint node{i, j, t, grid.x(j)};
            mu[j] = coeffs.advection(node);
            rho[j] = coeffs.source(node);
            half_sig2[j] = coeffs.half_diffusion_sq(node);
            require_finite(mu[j], "advection", t, node.x);
            require_finite(rho[j], "source", t, node.x);
            require_finite(half_sig2[j], "diffusion", t, node.x);
        }
        implicit_step(grid, bc, i, StepCoefficients{mu, rho, half_sig2}, v.row(i + 1), v.row(i));
    }
    return v;
}

ManufacturedSolution manufactured_sine(double advection) {
    ManufacturedSolution m;
    m.value = [](double t, double x) { return std::exp(-t) * std::sin(x); };
    m.dt = [](double t, double x) { return -std::exp(-t) * std::sin(x); };
    m.dx = [](double t, double x) { return std::exp(-t) * std::cos(x); };
    m.dxx = [](double t, double x) { return -std::exp(-t) * std::sin(x); };
    m.advection = [advection](double, double) { return advection; };
    m.half_diffusion_sq = [](double, double) { return 1.0; };
    return m;
}

namespace {

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

double manufactured_error(const ManufacturedSolution& m, const GridSpec& grid) {
    LinearPdeCoefficients coeffs;
    coeffs.advection = [&](const GridPoint& p) { return m.advection(p.t, p.x); };
    coeffs.half_diffusion_sq = [&](const GridPoint& p) { return m.half_diffusion_sq(p.t, p.x); };
    coeffs.source = [&](const GridPoint& p) {
        return -(m.dt(p.t, p.x) + m.half_diffusion_sq(p.t, p.x) * m.dxx(p.t, p.x) +
                 m.advection(p.t, p.x) * m.dx(p.t, p.x));
    };
    coeffs.terminal = [&](double x) { return m.value(grid.T, x); };
    const Dirichlet bc{[&](double t) { return m.value(t, grid.x_min); },
                       [&](double t) { return m.value(t, grid.x_max); }};
    const ValueField v = solve_backward(coeffs, grid, bc);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            worst = std::max(worst, std::abs(v(i, j) - m.value(grid.t(i), grid.x(j))));
        }
    }
    return worst;
}

} // namespace

OrderStudy verify_order(const ManufacturedSolution& solution, std::span<const GridSpec> grids) {
    if (grids.size() < 3) {
        throw UsageError("linpde", fmt::format("order study needs at least 3 grids, got {}", grids.size()));
    }
    OrderStudy study;
    bool axis_known = false;
    for (std::size_t k = 1; k < grids.size(); ++k) {
        const bool dx_same = same_step(grids[k - 1].dx(), grids[k].dx());
        const bool dt_same = same_step(grids[k - 1].dt(), grids[k].dt());
        if (dx_same == dt_same) {
            throw UsageError("linpde", "each refinement must change exactly one of dx, dt");
        }
        const bool in_time = dx_same;
        if (axis_known && in_time != study.refined_in_time) {
            throw UsageError("linpde", "refinement axis changes within the grid sequence");
        }
        study.refined_in_time = in_time;
        axis_known = true;
    }
    for (const auto& grid : grids) {
        study.errors.push_back(manufactured_error(solution, grid));
    }
    for (std::size_t k = 1; k < grids.size(); ++k) {
        const double h0 = study.refined_in_time ? grids[k - 1].dt() : grids[k - 1].dx();
        const double h1 = study.refined_in_time ? grids[k].dt() : grids[k].dx();
        const double e0 = study.errors[k - 1];
        const double e1 = study.errors[k];
        study.orders.push_back((e0 > 0.0 && e1 > 0.0) ? std::log(e0 / e1) / std::log(h0 / h1)
                                                      : std::numeric_limits<double>::quiet_NaN());
    }
    return study;
}

} // namespace pialab
