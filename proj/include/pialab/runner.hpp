#pragma once

#include "pialab/config.hpp"
#include "pialab/grid.hpp"
#include "pialab/hjb_ref.hpp"
#include "pialab/iterate.hpp"
#include "pialab/linpde.hpp"
#include "pialab/montecarlo.hpp"
#include "pialab/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pialab {

/// Everything an experiment needs, read from a Config. Defaults reproduce
/// the built-in example on the default grid.
struct RunSettings {
    std::string experiment;
    std::uint64_t seed = 1;

    std::string problem_name = "example_s1k1";
    double horizon = 1.0;
    std::string oracle = "closed_form";
    std::size_t n_a = 2001;
    double tol_a = 1e-10;
    std::optional<double> control_min;
    std::optional<double> control_max;

    GridSpec grid;
    std::string bc = "linear_extrapolation";
    double dirichlet_left = 0.0;
    double dirichlet_right = 0.0;

    BellmanOptions reference;

    IterationConfig iterate;
    double floor_ratio = 0.9;
    double monotone_tol = 1e-8;

    std::vector<std::string> algorithms{"pia", "gia"};
    std::string pde_mode = "additive_noise";
    std::vector<double> pde_levels{1e-2, 1e-3};
    std::string argmax_mode = "constant_offset";
    std::vector<double> argmax_levels{0.2, 0.1, 0.05};
    std::size_t plateau_tail = 3;

    McConfig mc;
    std::string mc_algorithm = "pia";
    std::size_t policy_iter = 5;
    std::vector<std::pair<double, double>> points{{0.0, 0.0}, {0.0, -2.0}, {0.0, 2.0}, {0.5, -1.0}, {0.5, 1.5}};

    bool timings = false;
    bool write_fields = false;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"pia",          "gia",           "reference_only",
                                                "stability_pde", "stability_argmax", "mc_crosscheck",
                                                "figures"};
    return names;
}

/// Reads and checks every key; unknown keys and out-of-range values throw
/// ConfigError with the config location.
[[nodiscard]] RunSettings load_settings(const Config& config);

/// Builds the problem and boundary condition described by the settings.
[[nodiscard]] ControlProblem make_problem(const RunSettings& settings);
[[nodiscard]] BoundaryCondition make_boundary(const RunSettings& settings);

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Loads the config, runs the experiment and writes its artifacts into
/// `options.out`. Returns an exit status; messages go to `log` (progress,
/// suppressed by `quiet`) and `err`. Files written by a failed run are removed.
int run(const RunOptions& options, std::ostream& log, std::ostream& err);

} // namespace pialab
