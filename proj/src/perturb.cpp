#include "pialab/perturb.hpp"

#include "pialab/errors.hpp"
#include "pialab/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pialab {

namespace {

constexpr std::uint64_t kPdeNoiseStream = 1;
constexpr std::uint64_t kArgmaxNoiseStream = 2;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

GridSpec coarse_grid(const GridSpec& fine, std::size_t c) {
    GridSpec g = fine;
    g.nx = (fine.nx + 1) / c - 1;
    g.nt = fine.nt / c;
    return g;
}

ValueField coarse_solve(std::size_t c, const LinearPdeCoefficients& fine, const GridSpec& grid,
                        const BoundaryCondition& bc) {
    const GridSpec coarse = coarse_grid(grid, c);
    // Coarse nodes coincide with fine nodes, so handles keyed by fine
    // indices are evaluated at the matching fine node.
    const auto remap = [c](const NodeCoefficient& h) {
        return [h, c](const GridPoint& p) { return h(GridPoint{p.i * c, p.j * c, p.t, p.x}); };
    };
    LinearPdeCoefficients coeffs;
    coeffs.advection = remap(fine.advection);
    coeffs.source = remap(fine.source);
    coeffs.half_diffusion_sq = remap(fine.half_diffusion_sq);
    coeffs.terminal = fine.terminal;
    const ValueField v = solve_backward(coeffs, coarse, bc);

    ValueField out(grid);
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        const std::size_t i0 = std::min(i / c, coarse.nt);
        const std::size_t i1 = std::min(i0 + 1, coarse.nt);
        const double wi = static_cast<double>(i - i0 * c) / static_cast<double>(c);
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            const std::size_t j0 = std::min(j / c, coarse.nx + 1);
            const std::size_t j1 = std::min(j0 + 1, coarse.nx + 1);
            const double wj = static_cast<double>(j - j0 * c) / static_cast<double>(c);
            const double lo = (1.0 - wj) * v(i0, j0) + wj * v(i0, j1);
            const double hi = (1.0 - wj) * v(i1, j0) + wj * v(i1, j1);
            out(i, j) = (1.0 - wi) * lo + wi * hi;
        }
    }
    return out;
}

PerturbedTrace finish(IterationTrace trace, const IterationTrace& clean, const ValueField& reference) {
    PerturbedTrace out;
    const std::size_t clean_last = clean.records.size() - 1;
    for (std::size_t n = 0; n < trace.records.size(); ++n) {
        const auto& v = trace.value(n);
        out.gaps.push_back(window_sup_diff(clean.value(std::min(n, clean_last)), v));
        out.errors_vs_reference.push_back(window_sup_diff(reference, v));
    }
    out.trace = std::move(trace);
    return out;
}

void check_clean(const IterationTrace& clean, Algorithm expected, const GridSpec& grid) {
    if (!clean.has_fields()) {
        throw UsageError("perturb", "clean trace must record value fields");
    }
    if (clean.algorithm != expected) {
        throw UsageError("perturb", "clean trace comes from the other algorithm");
    }
    if (!(clean.grid == grid)) {
        throw DimensionError("perturb", "clean trace lives on a different grid");
    }
}

} // namespace

void PerturbationSpec::validate(const GridSpec& grid) const {
    std::visit(Overloaded{[](const ExactSolve&) {},
                          [](const AdditiveNoise& m) {
                              if (!(m.amplitude >= 0.0)) {
                                  throw ConfigError("perturb", "noise amplitude must be non-negative");
                              }
                          },
                          [&](const CoarseSolve& m) {
                              if (m.factor < 2) {
                                  throw ConfigError("perturb", "coarsening factor must be at least 2");
                              }
                              if ((grid.nx + 1) % m.factor != 0 || grid.nt % m.factor != 0) {
                                  throw ConfigError("perturb",
                                                    fmt::format("coarsening factor {} must divide nx+1={} and nt={}",
                                                                m.factor, grid.nx + 1, grid.nt));
                              }
                              if ((grid.nx + 1) / m.factor < 4) {
                                  throw ConfigError("perturb", "coarse grid would have fewer than 3 interior nodes");
                              }
                          }},
               pde);
    std::visit(Overloaded{[](const ExactArgmax&) {},
                          [](const ConstantOffset& m) {
                              if (!(m.epsilon >= 0.0)) {
                                  throw ConfigError("perturb", "argmax offset must be non-negative");
                              }
                          },
                          [](const StateNoise& m) {
                              if (!(m.amplitude >= 0.0)) {
                                  throw ConfigError("perturb", "argmax noise amplitude must be non-negative");
                              }
                          }},
               argmax);
}

bool PerturbationSpec::is_identity() const {
    return std::holds_alternative<ExactSolve>(pde) && std::holds_alternative<ExactArgmax>(argmax);
}

std::string PerturbationSpec::describe() const {
    const std::string p = std::visit(Overloaded{[](const ExactSolve&) { return std::string("exact"); },
                                                [](const AdditiveNoise& m) {
                                                    return fmt::format("additive_noise({:.17g})", m.amplitude);
                                                },
                                                [](const CoarseSolve& m) { return fmt::format("coarse({})", m.factor); }},
                                     pde);
    const std::string a = std::visit(Overloaded{[](const ExactArgmax&) { return std::string("exact"); },
                                                [](const ConstantOffset& m) {
                                                    return fmt::format("constant_offset({:.17g})", m.epsilon);
                                                },
                                                [](const StateNoise& m) {
                                                    return fmt::format("state_noise({:.17g})", m.amplitude);
                                                }},
                                     argmax);
    return fmt::format("pde={},argmax={}", p, a);
}

double PerturbedTrace::plateau_gap(std::size_t tail) const {
    if (gaps.empty()) {
        return 0.0;
    }
    const std::size_t k = std::min(std::max<std::size_t>(tail, 1), gaps.size());
    double sum = 0.0;
    for (std::size_t n = gaps.size() - k; n < gaps.size(); ++n) {
        sum += gaps[n];
    }
    return sum / static_cast<double>(k);
}

IterationHooks make_hooks(const ControlProblem& problem, const PerturbationSpec& spec) {
    IterationHooks hooks;
    const std::uint64_t seed = spec.seed;
    if (const auto* noise = std::get_if<AdditiveNoise>(&spec.pde)) {
        const double eta = noise->amplitude;
        hooks.solve = [eta, seed](std::size_t n, const LinearPdeCoefficients& coeffs, const GridSpec& grid,
                                  const BoundaryCondition& bc) {
            ValueField v = solve_backward(coeffs, grid, bc);
            const CounterRng rng(seed, kPdeNoiseStream);
            for (std::size_t i = 0; i < grid.time_levels(); ++i) {
                for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
                    v(i, j) += eta * rng.symmetric(n, i, j);
                }
            }
            return v;
        };
    } else if (const auto* coarse = std::get_if<CoarseSolve>(&spec.pde)) {
        const std::size_t c = coarse->factor;
        hooks.solve = [c](std::size_t, const LinearPdeCoefficients& coeffs, const GridSpec& grid,
                          const BoundaryCondition& bc) { return coarse_solve(c, coeffs, grid, bc); };
    }

    const ControlSet set = problem.control_set;
    if (const auto* offset = std::get_if<ConstantOffset>(&spec.argmax)) {
        const double eps = offset->epsilon;
        hooks.adjust_policy = [eps, set](std::size_t, PolicyField& policy) {
            for (double& a : policy.values()) {
                a = set.clamp(a + eps);
            }
        };
    } else if (const auto* noise = std::get_if<StateNoise>(&spec.argmax)) {
        const double amp = noise->amplitude;
        hooks.adjust_policy = [amp, set, seed](std::size_t n, PolicyField& policy) {
            const CounterRng rng(seed, kArgmaxNoiseStream);
            const auto& grid = policy.grid();
            for (std::size_t i = 0; i < grid.time_levels(); ++i) {
                for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
                    policy(i, j) = set.clamp(policy(i, j) + amp * rng.symmetric(n, i, j));
                }
            }
        };
    }
    return hooks;
}

PerturbedTrace run_pia_perturbed(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                                 const IterationConfig& config, const PerturbationSpec& spec,
                                 const IterationTrace& clean, const ValueField& reference) {
    spec.validate(grid);
    check_clean(clean, Algorithm::PolicyImprovement, grid);
    IterationConfig cfg = config;
    cfg.record_fields = true;
    auto trace = run_pia(problem, grid, bc, cfg, reference, make_hooks(problem, spec));
    return finish(std::move(trace), clean, reference);
}

PerturbedTrace run_gia_perturbed(const ControlProblem& problem, const GridSpec& grid, const BoundaryCondition& bc,
                                 const IterationConfig& config, const PerturbationSpec& spec,
                                 const IterationTrace& clean, const ValueField& reference) {
    spec.validate(grid);
    check_clean(clean, Algorithm::GradientIteration, grid);
    IterationConfig cfg = config;
    cfg.record_fields = true;
    auto trace = run_gia(problem, grid, bc, cfg, reference, make_hooks(problem, spec));
    return finish(std::move(trace), clean, reference);
}

void write_perturbed_trace_csv(std::ostream& os, const PerturbedTrace& trace) {
    os << "iter,gap_sup,error_vs_reference\n";
    for (std::size_t n = 0; n < trace.gaps.size(); ++n) {
        os << n << ',' << format_real(trace.gaps[n]) << ',' << format_real(trace.errors_vs_reference[n]) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<std::pair<double, double>>& sweep) {
    os << "epsilon,plateau_gap\n";
    for (const auto& [eps, gap] : sweep) {
        os << format_real(eps) << ',' << format_real(gap) << '\n';
    }
}

} // namespace pialab
