#pragma once

#include "pialab/iterate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pialab {

struct ExactSolve {};

/// Per-node uniform noise in [-amplitude, amplitude] added to every solve.
struct AdditiveNoise {
    double amplitude = 0.0;
};

/// Solve on every `factor`-th space node and time level, then interpolate
/// bilinearly back onto the full lattice.
struct CoarseSolve {
    std::size_t factor = 2;
};

using PdePerturbation = std::variant<ExactSolve, AdditiveNoise, CoarseSolve>;

struct ExactArgmax {};

/// Adds a fixed offset to every maximizer, clamped to the control set.
struct ConstantOffset {
    double epsilon = 0.0;
};

/// Adds a per-node uniform offset in [-amplitude, amplitude], clamped.
struct StateNoise {
    double amplitude = 0.0;
};

using ArgmaxPerturbation = std::variant<ExactArgmax, ConstantOffset, StateNoise>;

struct PerturbationSpec {
    PdePerturbation pde = ExactSolve{};
    ArgmaxPerturbation argmax = ExactArgmax{};
    std::uint64_t seed = 0;

    void validate(const GridSpec& grid) const;
    [[nodiscard]] bool is_identity() const;
    [[nodiscard]] std::string describe() const;
};

struct PerturbedTrace {
    IterationTrace trace;
    /// Sup distance to the clean iterate of the same index (the clean final
    /// iterate once the clean run has stopped), on the reporting window.
    std::vector<double> gaps;
    std::vector<double> errors_vs_reference;

    /// Mean of the last `tail` gaps.
    [[nodiscard]] double plateau_gap(std::size_t tail = 3) const;
};

/// Hooks realizing a spec; empty when the spec is the identity.
[[nodiscard]] IterationHooks make_hooks(const ControlProblem& problem, const PerturbationSpec& spec);

/// Policy improvement where every solve goes through the PDE perturbation
/// and every argmax through the argmax perturbation. `clean` must be an
/// unperturbed run with recorded fields and the same config.
[[nodiscard]] PerturbedTrace run_pia_perturbed(const ControlProblem& problem, const GridSpec& grid,
                                               const BoundaryCondition& bc, const IterationConfig& config,
                                               const PerturbationSpec& spec, const IterationTrace& clean,
                                               const ValueField& reference);

/// Gradient iteration counterpart. The initial iterate is left unperturbed.
[[nodiscard]] PerturbedTrace run_gia_perturbed(const ControlProblem& problem, const GridSpec& grid,
                                               const BoundaryCondition& bc, const IterationConfig& config,
                                               const PerturbationSpec& spec, const IterationTrace& clean,
                                               const ValueField& reference);

/// `iter,gap_sup,error_vs_reference`.
void write_perturbed_trace_csv(std::ostream& os, const PerturbedTrace& trace);

/// `epsilon,plateau_gap`.
void write_sweep_csv(std::ostream& os, const std::vector<std::pair<double, double>>& sweep);

} // namespace pialab
