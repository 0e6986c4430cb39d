#pragma once

#include "pialab/grid.hpp"
#include "pialab/linpde.hpp"
#include "pialab/problem.hpp"

#include <cstddef>
#include <vector>

namespace pialab {

struct BellmanOptions {
    double inner_tol = 1e-12;
    std::size_t inner_max = 50;
};

struct BellmanSolution {
    ValueField value;
    PolicyField policy;
    /// Howard sub-iterations spent at each time level (index nt is 0).
    std::vector<std::size_t> inner_iterations;
};

/// Reference solution of the discrete Bellman equation.
///
/// Marches backward one level at a time. Within a level, freezes the
/// maximizing control at every node from the current gradient, solves the
/// resulting implicit linear step, and repeats until the update drops below
/// `inner_tol`. The returned policy is the argmax of the final gradient, so
/// it is an exact fixed point of `argmax_control`.
///
/// Throws ConvergenceError (carrying the last update size) when a level
/// needs more than `inner_max` sub-iterations.
[[nodiscard]] BellmanSolution solve_bellman(const ControlProblem& problem, const GridSpec& grid,
                                            const BoundaryCondition& bc, const BellmanOptions& options = {});

/// Argmax of the Hamiltonian at every node of a single level of `value`.
void greedy_row(const ControlProblem& problem, const GridSpec& grid, std::size_t i, std::span<const double> value,
                std::span<double> policy);

} // namespace pialab
