#include "pialab/montecarlo.hpp"

#include "pialab/errors.hpp"
#include "pialab/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

namespace pialab {

namespace {

constexpr std::uint64_t kPathStream = 7;

// Cell index and weight of `s` on a uniform axis of `cells` intervals of width `h`.
std::pair<std::size_t, double> locate(double s, double origin, double h, std::size_t cells) {
    const double u = std::clamp((s - origin) / h, 0.0, static_cast<double>(cells));
    const std::size_t k = std::min(static_cast<std::size_t>(u), cells - 1);
    return {k, u - static_cast<double>(k)};
}

double pairwise_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            s += v[k];
        }
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_range(v, lo, mid) + pairwise_range(v, mid, hi);
}

} // namespace

void McConfig::validate() const {
    if (n_paths < 2) {
        throw ConfigError("montecarlo", fmt::format("n_paths must be at least 2, got {}", n_paths));
    }
    if (n_steps < 1) {
        throw ConfigError("montecarlo", "n_steps must be at least 1");
    }
    if (antithetic && n_paths % 2 != 0) {
        throw ConfigError("montecarlo", "antithetic sampling needs an even n_paths");
    }
}

double pairwise_sum(const std::vector<double>& values) { return pairwise_range(values, 0, values.size()); }

double interpolate_policy(const PolicyField& policy, const ControlSet& set, double t, double x) {
    const auto& g = policy.grid();
    const auto [i, wi] = locate(t, 0.0, g.dt(), g.nt);
    const auto [j, wj] = locate(x, g.x_min, g.dx(), g.nx + 1);
    const double lo = (1.0 - wj) * policy(i, j) + wj * policy(i, j + 1);
    const double hi = (1.0 - wj) * policy(i + 1, j) + wj * policy(i + 1, j + 1);
    return set.clamp((1.0 - wi) * lo + wi * hi);
}

double interpolate_value(const ValueField& value, std::size_t i, double x) {
    const auto& g = value.grid();
    const auto [j, w] = locate(x, g.x_min, g.dx(), g.nx + 1);
    return (1.0 - w) * value(i, j) + w * value(i, j + 1);
}

McEstimate simulate_policy_value(const ControlProblem& problem, const PolicyField& policy, double t, double x,
                                 const McConfig& config) {
    config.validate();
    const auto& grid = policy.grid();
    if (!(t >= 0.0 && t < problem.horizon)) {
        throw UsageError("montecarlo", fmt::format("start time {} outside [0, T)", t));
    }
    if (!reporting_window(grid).contains_x(grid, x)) {
        throw UsageError("montecarlo", fmt::format("start state {} outside the reporting window", x));
    }

    const double T = problem.horizon;
    const double h = (T - t) / static_cast<double>(config.n_steps);
    const double sqrt_h = std::sqrt(h);
    const double box = 10.0 * std::max(std::abs(grid.x_min), std::abs(grid.x_max));
    const CounterRng rng(config.seed, kPathStream);

    const std::size_t n_samples = config.antithetic ? config.n_paths / 2 : config.n_paths;
    std::vector<double> samples(n_samples);
    std::vector<unsigned char> escaped(config.n_paths, 0);

    const auto run_path = [&](std::size_t path) {
        const std::uint64_t key = config.antithetic ? path / 2 : path;
        const double sign = (config.antithetic && path % 2 == 1) ? -1.0 : 1.0;
        double X = x;
        double gain = 0.0;
        bool out_of_box = false;
        for (std::size_t k = 0; k < config.n_steps; ++k) {
            const double s = t + static_cast<double>(k) * h;
            const double a = interpolate_policy(policy, problem.control_set, s, X);
            gain += problem.running_reward(a, s, X) * h;
            X += problem.drift(a, s, X) * h + problem.diffusion(s, X) * sqrt_h * sign * rng.normal(key, k);
            out_of_box = out_of_box || std::abs(X) > box;
        }
        escaped[path] = out_of_box ? 1 : 0;
        return gain + problem.terminal_reward(X);
    };

    const auto run_sample = [&](std::size_t k) {
        if (config.antithetic) {
            samples[k] = 0.5 * (run_path(2 * k) + run_path(2 * k + 1));
        } else {
            samples[k] = run_path(k);
        }
    };

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_samples));
    if (threads <= 1) {
        for (std::size_t k = 0; k < n_samples; ++k) {
            run_sample(k);
        }
    } else {
        std::vector<std::jthread> workers;
        const std::size_t chunk = (n_samples + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n_samples, lo + chunk);
            workers.emplace_back([&, lo, hi] {
                for (std::size_t k = lo; k < hi; ++k) {
                    run_sample(k);
                }
            });
        }
    }

    McEstimate est;
    est.n_paths = config.n_paths;
    const double n = static_cast<double>(n_samples);
    est.mean = pairwise_sum(samples) / n;
    std::vector<double> sq(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double d = samples[k] - est.mean;
        sq[k] = d * d;
    }
    const double variance = n_samples > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    est.std_error = std::sqrt(variance / n);
    est.escaped_paths = static_cast<std::size_t>(std::count(escaped.begin(), escaped.end(), 1));
    est.escape_warning = static_cast<double>(est.escaped_paths) > 0.01 * static_cast<double>(config.n_paths);
    return est;
}

double McCrossCheckRow::abs_gap() const { return std::abs(estimate.mean - pde_value); }

void write_mc_csv(std::ostream& os, const std::vector<McCrossCheckRow>& rows) {
    os << "t,x,policy_iter,mc_mean,mc_stderr,pde_value,abs_gap\n";
    for (const auto& r : rows) {
        os << format_real(r.t) << ',' << format_real(r.x) << ',' << r.policy_iter << ',' << format_real(r.estimate.mean)
           << ',' << format_real(r.estimate.std_error) << ',' << format_real(r.pde_value) << ','
           << format_real(r.abs_gap()) << '\n';
    }
}

} // namespace pialab
