#pragma once

#include "pialab/grid.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pialab {

/// Closed interval of admissible controls. A singleton (lo == hi) is allowed.
struct ControlSet {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double a) const { return a >= lo && a <= hi; }
    [[nodiscard]] double clamp(double a) const;
    [[nodiscard]] double width() const { return hi - lo; }
};

/// Maximizer given in closed form as a function of (t, x, p) with p = D_x v.
struct ClosedForm {
    std::function<double(double t, double x, double p)> control;
};

/// Exhaustive search over n_a equally spaced controls, leftmost wins ties.
struct GridSearch {
    std::size_t n_a = 2001;
};

/// Golden-section search; assumes the Hamiltonian is unimodal in the control.
struct GoldenSection {
    double tol_a = 1e-10;
};

using ArgmaxOracle = std::variant<ClosedForm, GridSearch, GoldenSection>;

using ControlledCoefficient = std::function<double(double a, double t, double x)>;

/// One instance of the controlled diffusion
///   dX = b(a, t, X) dt + sigma(t, X) dW,
/// with gain E[ int f(a, s, X_s) ds + g(X_T) ] to be maximized over a in A.
///
/// Coefficient handles must be pure so that repeated evaluation is
/// reproducible; instances are safe to share across threads.
struct ControlProblem {
    ControlledCoefficient drift;
    std::function<double(double t, double x)> diffusion;
    ControlledCoefficient running_reward;
    std::function<double(double x)> terminal_reward;
    ControlSet control_set;
    double horizon = 1.0;
    ArgmaxOracle argmax_oracle = GridSearch{};

    /// Samples sigma and g on the grid and checks the oracle settings.
    /// Throws ConfigError on violation.
    void validate(const GridSpec& grid) const;
};

/// b(a,t,x) p + f(a,t,x).
[[nodiscard]] double hamiltonian(const ControlProblem& problem, double a, double t, double x, double p);

/// Maximizer of the Hamiltonian over the control set. Throws ConfigError
/// when a closed-form oracle returns a control outside the set.
[[nodiscard]] double argmax_control(const ControlProblem& problem, double t, double x, double p);

/// Time-dependent weights of the built-in example: drift s(t) sin a and
/// running reward k(t) cos a.
struct ExampleParams {
    std::function<double(double t)> s = [](double) { return 1.0; };
    std::function<double(double t)> k = [](double) { return 1.0; };
};

/// dX = s(t) sin(a) dt + sqrt(2) dW, f = k(t) cos a, g = arctan,
/// A = [-pi/2, pi/2], with the closed-form maximizer arctan(s p / k).
[[nodiscard]] ControlProblem make_example(const ExampleParams& params, double T);

/// Built-in problems by name ("example_s1k1").
[[nodiscard]] ControlProblem make_named_problem(std::string_view name, double T);
[[nodiscard]] std::vector<std::string> named_problems();

} // namespace pialab
