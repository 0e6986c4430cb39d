#include "pialab/problem.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pialab {

double ControlSet::clamp(double a) const { return std::clamp(a, lo, hi); }

void ControlProblem::validate(const GridSpec& grid) const {
    if (!drift || !diffusion || !running_reward || !terminal_reward) {
        throw ConfigError("problem", "every coefficient handle must be set");
    }
    if (!(control_set.lo <= control_set.hi) || !std::isfinite(control_set.lo) || !std::isfinite(control_set.hi)) {
        throw ConfigError("problem",
                          fmt::format("control set [{}, {}] is not a bounded interval", control_set.lo, control_set.hi));
    }
    if (!(horizon > 0.0)) {
        throw ConfigError("problem", fmt::format("horizon must be positive, got {}", horizon));
    }
    if (const auto* gs = std::get_if<GridSearch>(&argmax_oracle); gs && gs->n_a < 2) {
        throw ConfigError("problem", fmt::format("grid-search oracle needs n_a >= 2, got {}", gs->n_a));
    }
    if (const auto* gold = std::get_if<GoldenSection>(&argmax_oracle); gold && !(gold->tol_a > 0.0)) {
        throw ConfigError("problem", "golden-section tolerance must be positive");
    }
    if (const auto* cf = std::get_if<ClosedForm>(&argmax_oracle); cf && !cf->control) {
        throw ConfigError("problem", "closed-form oracle has no handle");
    }
    for (std::size_t i = 0; i < grid.time_levels(); ++i) {
        const double t = grid.t(i);
        for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
            const double sigma = diffusion(t, grid.x(j));
            if (!(sigma > 0.0) || !std::isfinite(sigma)) {
                throw ConfigError("problem",
                                  fmt::format("diffusion must be positive, got {} at t={}, x={}", sigma, t, grid.x(j)));
            }
        }
    }
    for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
        if (!std::isfinite(terminal_reward(grid.x(j)))) {
            throw ConfigError("problem", fmt::format("terminal reward is not finite at x={}", grid.x(j)));
        }
    }
}

double hamiltonian(const ControlProblem& problem, double a, double t, double x, double p) {
    return problem.drift(a, t, x) * p + problem.running_reward(a, t, x);
}

namespace {

double grid_search(const ControlProblem& problem, std::size_t n_a, double t, double x, double p) {
    const auto& set = problem.control_set;
    double best_a = set.lo;
    double best_h = hamiltonian(problem, best_a, t, x, p);
    const double step = set.width() / static_cast<double>(n_a - 1);
    for (std::size_t k = 1; k < n_a; ++k) {
        const double a = (k + 1 == n_a) ? set.hi : set.lo + static_cast<double>(k) * step;
        const double h = hamiltonian(problem, a, t, x, p);
        if (h > best_h) {
            best_h = h;
            best_a = a;
        }
    }
    return best_a;
}

double golden_section(const ControlProblem& problem, double tol, double t, double x, double p) {
    const auto& set = problem.control_set;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = set.lo;
    double hi = set.hi;
    auto h = [&](double a) { return hamiltonian(problem, a, t, x, p); };
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double hc = h(c);
    double hd = h(d);
    while (hi - lo > tol) {
        if (hc >= hd) {
            hi = d;
            d = c;
            hd = hc;
            c = hi - inv_phi * (hi - lo);
            hc = h(c);
        } else {
            lo = c;
            c = d;
            hc = hd;
            d = lo + inv_phi * (hi - lo);
            hd = h(d);
        }
    }
    // Endpoints guard against maxima sitting on the boundary of A.
    double best = set.clamp(0.5 * (lo + hi));
    double best_h = h(best);
    for (const double edge : {set.lo, set.hi}) {
        if (const double he = h(edge); he > best_h) {
            best = edge;
            best_h = he;
        }
    }
    return best;
}

} // namespace

double argmax_control(const ControlProblem& problem, double t, double x, double p) {
    const auto& set = problem.control_set;
    if (set.lo == set.hi) {
        return set.lo;
    }
    return std::visit(
        [&](const auto& oracle) -> double {
            using T = std::decay_t<decltype(oracle)>;
            if constexpr (std::is_same_v<T, ClosedForm>) {
                const double a = oracle.control(t, x, p);
                if (!set.contains(a)) {
                    throw ConfigError("problem", fmt::format("closed-form oracle returned {} outside [{}, {}] at "
                                                             "t={}, x={}, p={}",
                                                             a, set.lo, set.hi, t, x, p));
                }
                return a;
            } else if constexpr (std::is_same_v<T, GridSearch>) {
                return grid_search(problem, oracle.n_a, t, x, p);
            } else {
                return golden_section(problem, oracle.tol_a, t, x, p);
            }
        },
        problem.argmax_oracle);
}

ControlProblem make_example(const ExampleParams& params, double T) {
    if (!params.s || !params.k) {
        throw ConfigError("problem", "example needs both s(t) and k(t)");
    }
    for (int q = 0; q <= 100; ++q) {
        const double t = T * q / 100.0;
        if (!(params.k(t) > 0.0)) {
            throw ConfigError("problem", fmt::format("k(t) must be positive, got {} at t={}", params.k(t), t));
        }
    }
    const auto s = params.s;
    const auto k = params.k;
    ControlProblem problem;
    problem.drift = [s](double a, double t, double) { return s(t) * std::sin(a); };
    problem.diffusion = [](double, double) { return std::numbers::sqrt2; };
    problem.running_reward = [k](double a, double t, double) { return k(t) * std::cos(a); };
    problem.terminal_reward = [](double x) { return std::atan(x); };
    problem.control_set = {-std::numbers::pi / 2.0, std::numbers::pi / 2.0};
    problem.horizon = T;
    problem.argmax_oracle = ClosedForm{[s, k](double t, double, double p) { return std::atan(s(t) * p / k(t)); }};
    return problem;
}

ControlProblem make_named_problem(std::string_view name, double T) {
    if (name == "example_s1k1") {
        return make_example(ExampleParams{}, T);
    }
    throw ConfigError("problem", fmt::format("unknown problem '{}'", name));
}

std::vector<std::string> named_problems() { return {"example_s1k1"}; }

} // namespace pialab
