#include "pialab/hjb_ref.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pialab {

void greedy_row(const ControlProblem& problem, const GridSpec& grid, std::size_t i, std::span<const double> value,
                std::span<double> policy) {
    const double t = grid.t(i);
    for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
        policy[j] = argmax_control(problem, t, grid.x(j), row_gradient(grid, value, j));
    }
}

BellmanSolution solve_bellman(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                              const BellmanOptions& options) {
    grid.validate();
    problem.validate(grid);
    if (!(options.inner_tol > 0.0) || options.inner_max < 1) {
        throw UsageError("hjb_ref", "inner_tol must be positive and inner_max at least 1");
    }

    const std::size_t n = grid.space_nodes();
    BellmanSolution out{ValueField(grid), PolicyField(grid), std::vector<std::size_t>(grid.time_levels(), 0)};
    auto terminal = out.value.row(grid.nt);
    for (std::size_t j = 0; j < n; ++j) {
        terminal[j] = problem.terminal_reward(grid.x(j));
    }
    greedy_row(problem, grid, grid.nt, terminal, out.policy.row(grid.nt));

    std::vector<double> control(n);
    std::vector<double> mu(n);
    std::vector<double> rho(n);
    std::vector<double> half_sig2(n);
    std::vector<double> trial(n);
    for (std::size_t i = grid.nt; i-- > 0;) {
        const double t = grid.t(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double sigma = problem.diffusion(t, grid.x(j));
            half_sig2[j] = 0.5 * sigma * sigma;
        }
        auto current = out.value.row(i);
        const auto next = out.value.row(i + 1);
        std::copy(next.begin(), next.end(), current.begin());

        double update = std::numeric_limits<double>::infinity();
        std::size_t sweeps = 0;
        while (update >= options.inner_tol) {
            if (sweeps == options.inner_max) {
                throw ConvergenceError("hjb_ref",
                                       fmt::format("Howard sub-iteration at t={} did not reach {} within {} sweeps "
                                                   "(last update {})",
                                                   t, options.inner_tol, options.inner_max, update),
                                       update);
            }
            greedy_row(problem, grid, i, current, control);
            for (std::size_t j = 0; j < n; ++j) {
                const double x = grid.x(j);
                mu[j] = problem.drift(control[j], t, x);
                rho[j] = problem.running_reward(control[j], t, x);
            }
            implicit_step(grid, bc, i, StepCoefficients{mu, rho, half_sig2}, next, trial);
            update = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                update = std::max(update, std::abs(trial[j] - current[j]));
            }
            std::copy(trial.begin(), trial.end(), current.begin());
            ++sweeps;
        }
        out.inner_iterations[i] = sweeps;
        greedy_row(problem, grid, i, current, out.policy.row(i));
    }
    return out;
}

} // namespace pialab
