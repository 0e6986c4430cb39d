#pragma once

#include "pialab/grid.hpp"
#include "pialab/linpde.hpp"
#include "pialab/problem.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

namespace pialab {

enum class Algorithm { PolicyImprovement, GradientIteration };
enum class StopReason { Tolerance, MaxIters };

[[nodiscard]] const char* to_string(Algorithm algorithm);
[[nodiscard]] const char* to_string(StopReason reason);

struct IterationConfig {
    /// Largest iterate index computed; the trace holds at most max_iters + 1 records.
    std::size_t max_iters = 12;
    /// Stop once the sup-norm distance between consecutive value iterates drops below this.
    double stop_tol = 1e-10;
    /// The tolerance rule is not applied before this iterate index.
    std::size_t min_iters = 0;
    /// a^0 for policy improvement, and for the default gradient-iteration start.
    std::variant<double, PolicyField> initial_policy = 0.0;
    /// v^0 for gradient iteration. Defaults to the value of a^0.
    std::optional<ValueField> initial_value;
    bool record_fields = true;

    void validate(const ControlProblem& problem, const GridSpec& grid) const;
};

struct IterationRecord {
    std::optional<ValueField> value;
    std::optional<PolicyField> policy;
    double sup_error = 0.0;   ///< vs the reference, reporting window, all levels
    double consec_diff = 0.0; ///< vs the previous iterate, whole lattice; NaN at n = 0
    double wall_ms = 0.0;
};

struct IterationTrace {
    Algorithm algorithm = Algorithm::PolicyImprovement;
    GridSpec grid;
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIters;

    [[nodiscard]] std::size_t iterations() const { return records.size(); }
    [[nodiscard]] std::vector<double> errors() const;
    [[nodiscard]] bool has_fields() const;
    [[nodiscard]] const ValueField& value(std::size_t n) const;
    [[nodiscard]] const PolicyField& policy(std::size_t n) const;
};

/// Customization points used to inject inexact sub-steps. Empty members
/// mean the exact operation.
struct IterationHooks {
    /// Replaces the linear solve producing iterate `n`.
    std::function<ValueField(std::size_t n, const LinearPdeCoefficients&, const GridSpec&, const BoundaryCondition&)>
        solve;
    /// Post-processes the argmax output that will drive iterate `n`.
    std::function<void(std::size_t n, PolicyField&)> adjust_policy;
};

/// Value of a Markov policy: the linear problem with mu = b^a, rho = f^a.
[[nodiscard]] ValueField evaluate_policy(const ControlProblem& problem, const BoundaryCondition& bc,
                                         const PolicyField& policy);

/// Nodewise argmax of the Hamiltonian on the gradient of `value`.
[[nodiscard]] PolicyField greedy_policy(const ControlProblem& problem, const ValueField& value);

/// Policy improvement: evaluate a^n by a linear solve, then set a^{n+1} to
/// the argmax on the gradient of v^n.
[[nodiscard]] IterationTrace run_pia(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                                     const IterationConfig& config, const ValueField& reference,
                                     const IterationHooks& hooks = {});

/// Gradient iteration: a^n is the argmax on the gradient of v^{n-1}; v^n
/// solves the pure-source problem with rho = b^{a^n} D_x v^{n-1} + f^{a^n}.
[[nodiscard]] IterationTrace run_gia(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                                     const IterationConfig& config, const ValueField& reference,
                                     const IterationHooks& hooks = {});

struct MonotoneCheck {
    /// margins[n] = min over reporting-window nodes of v^{n+1} - v^n.
    std::vector<double> margins;
    std::vector<bool> pass;

    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] double worst_margin() const;
};

/// Throws UsageError if the trace did not record value fields.
[[nodiscard]] MonotoneCheck check_monotone(const IterationTrace& trace, double tol);

/// `iter,sup_error,consec_diff,wall_ms`. With `timings` off the last column is 0
/// so that repeated runs produce identical bytes.
void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool timings);

} // namespace pialab
