#pragma once

#include "pialab/grid.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace pialab {

using NodeCoefficient = std::function<double(const GridPoint&)>;

/// Coefficients of the backward linear problem
///   v_t + D v_xx + mu v_x + rho = 0,  v(T, .) = g,
/// where D = sigma^2 / 2. Handles are evaluated at lattice nodes, so both
/// analytic functions and frozen policy fields can be plugged in.
struct LinearPdeCoefficients {
    NodeCoefficient advection;
    NodeCoefficient source;
    NodeCoefficient half_diffusion_sq;
    std::function<double(double x)> terminal;
};

/// Second derivative forced to zero on the boundary rows; the advection
/// term there uses the inward one-sided difference.
struct LinearExtrapolation {};

struct Dirichlet {
    std::function<double(double t)> left;
    std::function<double(double t)> right;
};

using BoundaryCondition = std::variant<LinearExtrapolation, Dirichlet>;

/// Coefficients of one time level, already sampled at every space node.
struct StepCoefficients {
    std::span<const double> advection;
    std::span<const double> source;
    std::span<const double> half_diffusion_sq;
};

/// One fully implicit step from level i+1 (`next`) to level i (`out`).
///
/// Advection is centred wherever that keeps the row an M-matrix row
/// (|mu| dx <= 2 D) and upwinded otherwise. The source is taken at t_i.
void implicit_step(const GridSpec& grid, const BoundaryCondition& bc, std::size_t i, const StepCoefficients& coeffs,
                   std::span<const double> next, std::span<double> out);

/// Marches backward from v(T) = g down to t = 0.
/// Throws CoefficientError if a handle is not finite at some node.
[[nodiscard]] ValueField solve_backward(const LinearPdeCoefficients& coeffs, const GridSpec& grid,
                                        const BoundaryCondition& bc);

/// Smooth exact solution with the matching forcing, for order studies.
struct ManufacturedSolution {
    std::function<double(double t, double x)> value;
    std::function<double(double t, double x)> dt;
    std::function<double(double t, double x)> dx;
    std::function<double(double t, double x)> dxx;
    std::function<double(double t, double x)> advection;
    std::function<double(double t, double x)> half_diffusion_sq;
};

/// e^{-t} sin x with D = 1 and the given constant advection.
[[nodiscard]] ManufacturedSolution manufactured_sine(double advection = 0.0);

struct OrderStudy {
    std::vector<double> errors; ///< sup error over the whole lattice, per grid
    std::vector<double> orders; ///< log(e_k / e_{k+1}) / log(h_k / h_{k+1})
    bool refined_in_time = false;
};

/// Solves the manufactured problem (Dirichlet data from the exact solution)
/// on each grid. Grids must refine exactly one of dx, dt. Needs >= 3 grids.
[[nodiscard]] OrderStudy verify_order(const ManufacturedSolution& solution, std::span<const GridSpec> grids);

} // namespace pialab
