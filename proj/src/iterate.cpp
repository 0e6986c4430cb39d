#include "pialab/iterate.hpp"

#include "pialab/errors.hpp"
#include "pialab/hjb_ref.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace pialab {

const char* to_string(Algorithm algorithm) {
    return algorithm == Algorithm::PolicyImprovement ? "pia" : "gia";
}

const char* to_string(StopReason reason) { return reason == StopReason::Tolerance ? "tolerance" : "max_iters"; }

void IterationConfig::validate(const ControlProblem& problem, const GridSpec& grid) const {
    if (max_iters < 1) {
        throw ConfigError("iterate", "max_iters must be at least 1");
    }
    if (!(stop_tol > 0.0)) {
        throw ConfigError("iterate", fmt::format("stop_tol must be positive, got {}", stop_tol));
    }
    if (min_iters > max_iters) {
        throw ConfigError("iterate", fmt::format("min_iters ({}) exceeds max_iters ({})", min_iters, max_iters));
    }
    if (const auto* a0 = std::get_if<double>(&initial_policy)) {
        if (!problem.control_set.contains(*a0)) {
            throw ConfigError("iterate", fmt::format("initial control {} is outside the control set", *a0));
        }
    } else {
        const auto& field = std::get<PolicyField>(initial_policy);
        if (!(field.grid() == grid)) {
            throw DimensionError("iterate", "initial policy lives on a different grid");
        }
        for (const double a : field.values()) {
            if (!problem.control_set.contains(a)) {
                throw ConfigError("iterate", fmt::format("initial policy takes value {} outside the control set", a));
            }
        }
    }
    if (initial_value && !(initial_value->grid() == grid)) {
        throw DimensionError("iterate", "initial value lives on a different grid");
    }
}

std::vector<double> IterationTrace::errors() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.sup_error);
    }
    return out;
}

bool IterationTrace::has_fields() const {
    return !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.value.has_value(); });
}

const ValueField& IterationTrace::value(std::size_t n) const {
    if (n >= records.size() || !records[n].value) {
        throw UsageError("iterate", fmt::format("value field {} was not recorded", n));
    }
    return *records[n].value;
}

const PolicyField& IterationTrace::policy(std::size_t n) const {
    if (n >= records.size() || !records[n].policy) {
        throw UsageError("iterate", fmt::format("policy field {} was not recorded", n));
    }
    return *records[n].policy;
}

PolicyField greedy_policy(const ControlProblem& problem, const ValueField& value) {
    const auto& grid = value.grid();
    PolicyField policy(grid);
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        greedy_row(problem, grid, i, value.row(i), policy.row(i));
    }
    return policy;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

PolicyField initial_policy_field(const IterationConfig& config, const GridSpec& grid) {
    if (const auto* a0 = std::get_if<double>(&config.initial_policy)) {
        return PolicyField(grid, *a0);
    }
    return std::get<PolicyField>(config.initial_policy);
}

LinearPdeCoefficients pia_coefficients(const ControlProblem& problem, const PolicyField& policy) {
    LinearPdeCoefficients coeffs;
    coeffs.advection = [&](const GridPoint& p) { return problem.drift(policy(p.i, p.j), p.t, p.x); };
    coeffs.source = [&](const GridPoint& p) { return problem.running_reward(policy(p.i, p.j), p.t, p.x); };
    coeffs.half_diffusion_sq = [&](const GridPoint& p) {
        const double sigma = problem.diffusion(p.t, p.x);
        return 0.5 * sigma * sigma;
    };
    coeffs.terminal = problem.terminal_reward;
    return coeffs;
}

// Gradient of every level, precomputed so the source handle is a lookup.
ValueField gradient_field(const ValueField& value) {
    const auto& grid = value.grid();
    ValueField grad(grid);
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            grad(i, j) = gradient(value, i, j);
        }
    }
    return grad;
}

LinearPdeCoefficients gia_coefficients(const ControlProblem& problem, const PolicyField& policy,
                                       const ValueField& frozen_gradient) {
    LinearPdeCoefficients coeffs;
    coeffs.advection = [](const GridPoint&) { return 0.0; };
    coeffs.source = [&](const GridPoint& p) {
        const double a = policy(p.i, p.j);
        return problem.drift(a, p.t, p.x) * frozen_gradient(p.i, p.j) + problem.running_reward(a, p.t, p.x);
    };
    coeffs.half_diffusion_sq = [&](const GridPoint& p) {
        const double sigma = problem.diffusion(p.t, p.x);
        return 0.5 * sigma * sigma;
    };
    coeffs.terminal = problem.terminal_reward;
    return coeffs;
}

ValueField run_solve(const IterationHooks& hooks, std::size_t n, const LinearPdeCoefficients& coeffs,
                     const GridSpec& grid, const BoundaryCondition& bc) {
    return hooks.solve ? hooks.solve(n, coeffs, grid, bc) : solve_backward(coeffs, grid, bc);
}

// Re-raises library errors with the iteration index in the message.
template <class Body>
auto with_iteration(std::size_t n, Body&& body) -> decltype(body()) {
    const auto tag = [n](const Error& e) { return fmt::format("iteration {}: {}", n, e.what()); };
    try {
        return body();
    } catch (const CoefficientError& e) {
        throw CoefficientError(e.module(), tag(e), e.t(), e.x());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.module(), tag(e), e.residual());
    } catch (const SolverError& e) {
        throw SolverError(e.module(), tag(e));
    } catch (const ConfigError& e) {
        throw ConfigError(e.module(), tag(e));
    }
}

class TraceBuilder {
public:
    TraceBuilder(Algorithm algorithm, const GridSpec& grid, const ValueField& reference, bool record_fields)
        : reference_(reference), record_fields_(record_fields) {
        trace_.algorithm = algorithm;
        trace_.grid = grid;
    }

    // Returns the consecutive sup-norm difference (NaN for the first record).
    double add(const ValueField& value, const PolicyField* policy, double wall_ms) {
        IterationRecord rec;
        rec.sup_error = window_sup_diff(reference_, value);
        rec.consec_diff = previous_ ? sup_norm_diff(value, *previous_) : std::numeric_limits<double>::quiet_NaN();
        rec.wall_ms = wall_ms;
        if (record_fields_) {
            rec.value = value;
            if (policy != nullptr) {
                rec.policy = *policy;
            }
        }
        previous_ = value;
        trace_.records.push_back(std::move(rec));
        return trace_.records.back().consec_diff;
    }

    [[nodiscard]] const ValueField& previous() const { return *previous_; }

    IterationTrace finish(StopReason reason) {
        trace_.stop_reason = reason;
        return std::move(trace_);
    }

private:
    const ValueField& reference_;
    bool record_fields_;
    std::optional<ValueField> previous_;
    IterationTrace trace_;
};

void check_inputs(const ControlProblem& problem, const GridSpec& grid, const IterationConfig& config,
                  const ValueField& reference) {
    grid.validate();
    problem.validate(grid);
    config.validate(problem, grid);
    if (!(reference.grid() == grid)) {
        throw DimensionError("iterate", "reference lives on a different grid");
    }
}

} // namespace

ValueField evaluate_policy(const ControlProblem& problem, const BoundaryCondition& bc, const PolicyField& policy) {
    return solve_backward(pia_coefficients(problem, policy), policy.grid(), bc);
}

IterationTrace run_pia(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                       const IterationConfig& config, const ValueField& reference, const IterationHooks& hooks) {
    check_inputs(problem, grid, config, reference);
    TraceBuilder builder(Algorithm::PolicyImprovement, grid, reference, config.record_fields);
    PolicyField policy = initial_policy_field(config, grid);

    for (std::size_t n = 0;; ++n) {
        const auto start = Clock::now();
        const ValueField value = with_iteration(n, [&] {
            const auto coeffs = pia_coefficients(problem, policy);
            return run_solve(hooks, n, coeffs, grid, bc);
        });
        const double consec = builder.add(value, &policy, elapsed_ms(start));
        if (n > 0 && n >= config.min_iters && consec < config.stop_tol) {
            return builder.finish(StopReason::Tolerance);
        }
        if (n == config.max_iters) {
            return builder.finish(StopReason::MaxIters);
        }
        policy = with_iteration(n + 1, [&] { return greedy_policy(problem, value); });
        if (hooks.adjust_policy) {
            hooks.adjust_policy(n + 1, policy);
        }
    }
}

IterationTrace run_gia(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                       const IterationConfig& config, const ValueField& reference, const IterationHooks& hooks) {
    check_inputs(problem, grid, config, reference);
    TraceBuilder builder(Algorithm::GradientIteration, grid, reference, config.record_fields);

    {
        const auto start = Clock::now();
        if (config.initial_value) {
            builder.add(*config.initial_value, nullptr, elapsed_ms(start));
        } else {
            const PolicyField a0 = initial_policy_field(config, grid);
            const ValueField v0 = with_iteration(0, [&] { return evaluate_policy(problem, bc, a0); });
            builder.add(v0, &a0, elapsed_ms(start));
        }
    }

    for (std::size_t n = 1; n <= config.max_iters; ++n) {
        const auto start = Clock::now();
        const ValueField& previous = builder.previous();
        PolicyField policy = with_iteration(n, [&] { return greedy_policy(problem, previous); });
        if (hooks.adjust_policy) {
            hooks.adjust_policy(n, policy);
        }
        const ValueField frozen = gradient_field(previous);
        const ValueField value = with_iteration(n, [&] {
            const auto coeffs = gia_coefficients(problem, policy, frozen);
            return run_solve(hooks, n, coeffs, grid, bc);
        });
        if (builder.add(value, &policy, elapsed_ms(start)) < config.stop_tol && n >= config.min_iters) {
            return builder.finish(StopReason::Tolerance);
        }
    }
    return builder.finish(StopReason::MaxIters);
}

bool MonotoneCheck::all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool p) { return p; }); }

double MonotoneCheck::worst_margin() const {
    return margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
}

MonotoneCheck check_monotone(const IterationTrace& trace, double tol) {
    if (!trace.has_fields()) {
        throw UsageError("iterate", "monotonicity check needs recorded value fields");
    }
    MonotoneCheck out;
    const auto& grid = trace.grid;
    const auto win = reporting_window(grid);
    for (std::size_t n = 0; n + 1 < trace.records.size(); ++n) {
        const auto& lo = *trace.records[n].value;
        const auto& hi = *trace.records[n + 1].value;
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.time_levels(); ++i) {
            for (std::size_t j = win.begin; j < win.end; ++j) {
                margin = std::min(margin, hi(i, j) - lo(i, j));
            }
        }
        out.margins.push_back(margin);
        out.pass.push_back(margin >= -tol);
    }
    return out;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool timings) {
    os << "iter,sup_error,consec_diff,wall_ms\n";
    for (std::size_t n = 0; n < trace.records.size(); ++n) {
        const auto& r = trace.records[n];
        os << n << ',' << format_real(r.sup_error) << ',' << format_real(r.consec_diff) << ','
           << format_real(timings ? r.wall_ms : 0.0) << '\n';
    }
}

} // namespace pialab
