#pragma once

#include "pialab/grid.hpp"
#include "pialab/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace pialab {

struct McConfig {
    std::size_t n_paths = 200000;
    std::size_t n_steps = 400;
    std::uint64_t seed = 1;
    bool antithetic = false;
    /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    /// Paths that left the sanity box |x| > 10 max(|x_min|, |x_max|).
    std::size_t escaped_paths = 0;
    /// Set when more than 1% of paths escaped.
    bool escape_warning = false;
};

/// Policy value at a point off the lattice: bilinear in (t, x), clamped to
/// the lattice and then to the control set.
[[nodiscard]] double interpolate_policy(const PolicyField& policy, const ControlSet& set, double t, double x);

/// Euler-Maruyama estimate of the gain of a Markov policy started at (t, x):
/// E[ sum f(a, s, X_s) ds + g(X_T) ]. Normal increments are keyed by
/// (seed, path, step); antithetic pairs share noise with flipped sign and
/// count as one sample for the standard error. (t, x) must lie in the
/// reporting window.
[[nodiscard]] McEstimate simulate_policy_value(const ControlProblem& problem, const PolicyField& policy, double t,
                                               double x, const McConfig& config);

/// Sum in a fixed pairwise tree order.
[[nodiscard]] double pairwise_sum(const std::vector<double>& values);

struct McCrossCheckRow {
    double t = 0.0;
    double x = 0.0;
    std::size_t policy_iter = 0;
    McEstimate estimate;
    double pde_value = 0.0;

    [[nodiscard]] double abs_gap() const;
};

/// `t,x,policy_iter,mc_mean,mc_stderr,pde_value,abs_gap`.
void write_mc_csv(std::ostream& os, const std::vector<McCrossCheckRow>& rows);

/// Linear interpolation of a value field at level `i` and arbitrary x.
[[nodiscard]] double interpolate_value(const ValueField& value, std::size_t i, double x);

} // namespace pialab
