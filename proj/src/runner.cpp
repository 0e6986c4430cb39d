#include "pialab/runner.hpp"

#include "pialab/diagnostics.hpp"
#include "pialab/errors.hpp"
#include "pialab/perturb.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <locale>
#include <ostream>
#include <sstream>

namespace pialab {

namespace fs = std::filesystem;

namespace {

void check_choice(const Config& cfg, const std::string& section, const std::string& key, const std::string& value,
                  const std::vector<std::string>& options) {
    if (std::find(options.begin(), options.end(), value) == options.end()) {
        std::string joined;
        for (const auto& o : options) {
            joined += (joined.empty() ? "" : ", ") + o;
        }
        const std::string name = section.empty() ? key : section + "." + key;
        throw ConfigError("cli", fmt::format("{}: {}: '{}' is not one of {}", cfg.where(section, key), name, value,
                                             joined));
    }
}

std::vector<std::pair<double, double>> parse_points(const Config& cfg, const std::vector<std::string>& words) {
    std::vector<std::pair<double, double>> points;
    for (const auto& w : words) {
        const auto colon = w.find(':');
        double t = 0.0;
        double x = 0.0;
        bool ok = colon != std::string::npos;
        if (ok) {
            std::istringstream ts(w.substr(0, colon));
            std::istringstream xs(w.substr(colon + 1));
            ts.imbue(std::locale::classic());
            xs.imbue(std::locale::classic());
            ok = static_cast<bool>(ts >> t) && ts.eof() && static_cast<bool>(xs >> x) && xs.eof();
        }
        if (!ok) {
            throw ConfigError("cli", fmt::format("{}: montecarlo.points: expected 't:x' pairs, got '{}'",
                                                 cfg.where("montecarlo", "points"), w));
        }
        points.emplace_back(t, x);
    }
    return points;
}

// Collects written files so that a failed run can take them back.
class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_ = true;
        } else if (!fs::is_directory(dir_)) {
            throw UsageError("cli", fmt::format("output path '{}' is not a directory", dir_.string()));
        }
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw UsageError("cli", fmt::format("cannot write '{}'", path.string()));
        }
        // Only paths this run opened are candidates for removal.
        written_.push_back(path);
        os.imbue(std::locale::classic());
        body(os);
        os.flush();
        if (!os) {
            throw UsageError("cli", fmt::format("failed while writing '{}'", path.string()));
        }
    }

    [[nodiscard]] std::size_t count() const { return written_.size(); }

    void discard() noexcept {
        std::error_code ec;
        for (const auto& p : written_) {
            fs::remove(p, ec);
        }
        if (created_ && fs::is_empty(dir_, ec)) {
            fs::remove(dir_, ec);
        }
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_ = false;
};

std::string log10_text(double e) {
    return e > 0.0 ? format_real(std::log10(e)) : std::string("-inf");
}

class Experiment {
public:
    Experiment(const RunSettings& settings, OutputDir& out, std::ostream& log, bool quiet)
        : s_(settings), out_(out), log_(log), quiet_(quiet), problem_(make_problem(settings)),
          bc_(make_boundary(settings)) {}

    // Every configuration check that does not need a solve.
    void validate() const {
        s_.grid.validate();
        problem_.validate(s_.grid);
        s_.iterate.validate(problem_, s_.grid);
        s_.mc.validate();
        if (!(s_.reference.inner_tol > 0.0) || s_.reference.inner_max < 1) {
            throw ConfigError("reference", "inner_tol must be positive and inner_max at least 1");
        }
        if (s_.experiment == "stability_pde") {
            for (const double level : s_.pde_levels) {
                pde_spec(level).validate(s_.grid);
            }
        }
        if (s_.experiment == "stability_argmax") {
            for (const double level : s_.argmax_levels) {
                argmax_spec(level).validate(s_.grid);
            }
        }
        if (s_.experiment == "mc_crosscheck") {
            for (const auto& [t, x] : s_.points) {
                (void)time_level(t);
                if (!reporting_window(s_.grid).contains_x(s_.grid, x)) {
                    throw ConfigError("montecarlo",
                                      fmt::format("point x={} lies outside the reporting window", format_real(x)));
                }
            }
            if (s_.policy_iter > s_.iterate.max_iters) {
                throw ConfigError("montecarlo", fmt::format("policy_iter {} exceeds iterate.max_iters {}",
                                                            s_.policy_iter, s_.iterate.max_iters));
            }
        }
    }

    void run() {
        const auto& e = s_.experiment;
        if (e == "reference_only") {
            reference_only();
        } else if (e == "pia" || e == "gia") {
            single(e == "pia" ? Algorithm::PolicyImprovement : Algorithm::GradientIteration);
        } else if (e == "stability_pde" || e == "stability_argmax") {
            stability(e == "stability_pde");
        } else if (e == "mc_crosscheck") {
            mc_crosscheck();
        } else {
            figures();
        }
    }

private:
    void note(const std::string& msg) const {
        if (!quiet_) {
            log_ << msg << '\n';
        }
    }

    const BellmanSolution& reference() {
        if (!reference_) {
            reference_ = solve_bellman(problem_, s_.grid, bc_, s_.reference);
            note(fmt::format("reference solved ({} time levels)", s_.grid.time_levels()));
        }
        return *reference_;
    }

    IterationTrace iterate(Algorithm algorithm, const IterationConfig& config) {
        auto trace = algorithm == Algorithm::PolicyImprovement
                         ? run_pia(problem_, s_.grid, bc_, config, reference().value)
                         : run_gia(problem_, s_.grid, bc_, config, reference().value);
        note(fmt::format("{}: {} iterates, stop reason {}", to_string(algorithm), trace.iterations(),
                         to_string(trace.stop_reason)));
        return trace;
    }

    ReportOptions report_options() const { return ReportOptions{s_.floor_ratio, s_.monotone_tol}; }

    void write_report(const std::string& body) {
        out_.write("report.txt", [&](std::ostream& os) { os << "experiment = " << s_.experiment << '\n' << body; });
    }

    void write_fields(const IterationTrace& trace, const std::string& prefix) {
        if (!s_.write_fields) {
            return;
        }
        for (std::size_t n = 0; n < trace.iterations(); ++n) {
            out_.write(fmt::format("{}v_{}.csv", prefix, n), [&](std::ostream& os) { write_field_csv(os, trace.value(n)); });
            if (trace.records[n].policy) {
                out_.write(fmt::format("{}a_{}.csv", prefix, n),
                           [&](std::ostream& os) { write_field_csv(os, trace.policy(n)); });
            }
        }
    }

    std::size_t time_level(double t) const {
        const double u = t / s_.grid.dt();
        const double level = std::round(u);
        if (!(t >= 0.0 && t < s_.grid.T) || std::abs(u - level) > 1e-9 * std::max(1.0, u)) {
            throw ConfigError("montecarlo",
                              fmt::format("point time {} is not a time level in [0, T)", format_real(t)));
        }
        return static_cast<std::size_t>(level);
    }

    PerturbationSpec pde_spec(double level) const {
        PerturbationSpec spec;
        spec.seed = s_.seed;
        if (s_.pde_mode == "additive_noise") {
            spec.pde = AdditiveNoise{level};
        } else {
            if (!(level >= 2.0) || level != std::floor(level)) {
                throw ConfigError("perturb", fmt::format("coarse_solve levels must be integers >= 2, got {}",
                                                         format_real(level)));
            }
            spec.pde = CoarseSolve{static_cast<std::size_t>(level)};
        }
        return spec;
    }

    PerturbationSpec argmax_spec(double level) const {
        PerturbationSpec spec;
        spec.seed = s_.seed;
        if (s_.argmax_mode == "constant_offset") {
            spec.argmax = ConstantOffset{level};
        } else {
            spec.argmax = StateNoise{level};
        }
        return spec;
    }

    void reference_only() {
        const auto& ref = reference();
        out_.write("v_star.csv", [&](std::ostream& os) { write_field_csv(os, ref.value); });
        out_.write("a_star.csv", [&](std::ostream& os) { write_field_csv(os, ref.policy); });
        const std::size_t centre = s_.grid.space_nodes() / 2;
        const auto max_inner = *std::max_element(ref.inner_iterations.begin(), ref.inner_iterations.end());
        write_report(fmt::format("centre_x = {}\nv_star_at_centre = {}\na_star_at_centre = {}\nmax_inner_iterations = {}\n",
                                 format_real(s_.grid.x(centre)), format_real(ref.value(0, centre)),
                                 format_real(ref.policy(0, centre)), max_inner));
    }

    void single(Algorithm algorithm) {
        const auto trace = iterate(algorithm, s_.iterate);
        out_.write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace, s_.timings); });
        write_fields(trace, "");
        write_report(to_text(build_report(trace, {}, {}, report_options())));
    }

    void stability(bool pde) {
        const auto& levels = pde ? s_.pde_levels : s_.argmax_levels;
        const std::string mode = pde ? s_.pde_mode : s_.argmax_mode;
        std::vector<StabilitySweep> sweeps;
        std::optional<IterationTrace> first_clean;
        std::string extra;
        for (const auto& name : s_.algorithms) {
            const Algorithm algorithm = name == "pia" ? Algorithm::PolicyImprovement : Algorithm::GradientIteration;
            IterationTrace clean = iterate(algorithm, s_.iterate);
            out_.write(fmt::format("trace_{}.csv", name),
                       [&](std::ostream& os) { write_trace_csv(os, clean, s_.timings); });
            StabilitySweep sweep{fmt::format("{}.{}", name, mode), s_.grid, {}};
            for (std::size_t k = 0; k < levels.size(); ++k) {
                const auto spec = pde ? pde_spec(levels[k]) : argmax_spec(levels[k]);
                const auto perturbed =
                    algorithm == Algorithm::PolicyImprovement
                        ? run_pia_perturbed(problem_, s_.grid, bc_, s_.iterate, spec, clean, reference().value)
                        : run_gia_perturbed(problem_, s_.grid, bc_, s_.iterate, spec, clean, reference().value);
                out_.write(fmt::format("perturbed_{}_{}_{}.csv", name, mode, k),
                           [&](std::ostream& os) { write_perturbed_trace_csv(os, perturbed); });
                const double plateau = perturbed.plateau_gap(s_.plateau_tail);
                sweep.points.emplace_back(levels[k], plateau);
                extra += fmt::format("plateau.{}.{} = level={} plateau_gap={} final_error={}\n", name, k,
                                     format_real(levels[k]), format_real(plateau),
                                     format_real(perturbed.errors_vs_reference.back()));
                note(fmt::format("{} {} level {}: plateau gap {}", name, mode, format_real(levels[k]),
                                 format_real(plateau)));
            }
            out_.write(fmt::format("sweep_{}_{}.csv", name, mode),
                       [&](std::ostream& os) { write_sweep_csv(os, sweep.points); });
            sweeps.push_back(std::move(sweep));
            if (!first_clean) {
                first_clean = std::move(clean);
            }
        }
        // A slope needs three positive points; other sweeps are reported point by point only.
        std::vector<StabilitySweep> fitted;
        for (const auto& sw : sweeps) {
            const bool usable = sw.points.size() >= 3 &&
                                std::all_of(sw.points.begin(), sw.points.end(),
                                            [](const auto& p) { return p.first > 0.0 && p.second > 0.0; });
            if (usable) {
                fitted.push_back(sw);
            }
        }
        write_report(to_text(build_report(*first_clean, fitted, {}, report_options())) + extra);
    }

    void mc_crosscheck() {
        const Algorithm algorithm =
            s_.mc_algorithm == "pia" ? Algorithm::PolicyImprovement : Algorithm::GradientIteration;
        IterationConfig config = s_.iterate;
        config.min_iters = std::max(config.min_iters, s_.policy_iter);
        const auto trace = iterate(algorithm, config);
        out_.write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace, s_.timings); });
        write_fields(trace, "");
        std::vector<McCrossCheck> checks;
        std::vector<McCrossCheckRow> rows;
        for (const auto& [t, x] : s_.points) {
            const std::size_t i = time_level(t);
            McCrossCheckRow row;
            row.t = t;
            row.x = x;
            row.policy_iter = s_.policy_iter;
            row.estimate = simulate_policy_value(problem_, trace.policy(s_.policy_iter), t, x, s_.mc);
            row.pde_value = interpolate_value(trace.value(s_.policy_iter), i, x);
            note(fmt::format("mc at t={} x={}: gap {} (stderr {})", format_real(t), format_real(x),
                             format_real(row.abs_gap()), format_real(row.estimate.std_error)));
            checks.push_back({s_.grid, row});
            rows.push_back(row);
        }
        out_.write("mc.csv", [&](std::ostream& os) { write_mc_csv(os, rows); });
        write_report(to_text(build_report(trace, {}, checks, report_options())));
    }

    void figures() {
        IterationConfig config = s_.iterate;
        config.min_iters = config.max_iters;
        if (config.max_iters < 5) {
            throw ConfigError("iterate", "figures need max_iters >= 5 for the step-5 policy");
        }
        const auto pia = iterate(Algorithm::PolicyImprovement, config);
        const auto gia = iterate(Algorithm::GradientIteration, config);
        const auto& ref = reference();
        const auto& g = s_.grid;

        const auto log_error = [](const IterationTrace& trace) {
            return [&trace](std::ostream& os) {
                os << "iter,log10_error\n";
                for (std::size_t n = 0; n < trace.iterations(); ++n) {
                    os << n << ',' << log10_text(trace.records[n].sup_error) << '\n';
                }
            };
        };
        out_.write("fig1_pia_log_error.csv", log_error(pia));
        out_.write("fig1_gia_log_error.csv", log_error(gia));
        out_.write("fig2_policies.csv", [&](std::ostream& os) {
            os << "x,a_init,a_step1,a_step5,a_reference\n";
            for (std::size_t j = 0; j < g.space_nodes(); ++j) {
                os << format_real(g.x(j)) << ',' << format_real(pia.policy(0)(0, j)) << ','
                   << format_real(pia.policy(1)(0, j)) << ',' << format_real(pia.policy(5)(0, j)) << ','
                   << format_real(ref.policy(0, j)) << '\n';
            }
        });
        out_.write("fig3_value_policy.csv", [&](std::ostream& os) {
            os << "t,x,v_star,a_star\n";
            for (std::size_t i = 0; i < g.time_levels(); ++i) {
                for (std::size_t j = 0; j < g.space_nodes(); ++j) {
                    os << format_real(g.t(i)) << ',' << format_real(g.x(j)) << ',' << format_real(ref.value(i, j))
                       << ',' << format_real(ref.policy(i, j)) << '\n';
                }
            }
        });
        write_report(to_text(build_report(pia, {}, {}, report_options())));
    }

    const RunSettings& s_;
    OutputDir& out_;
    std::ostream& log_;
    bool quiet_;
    ControlProblem problem_;
    BoundaryCondition bc_;
    std::optional<BellmanSolution> reference_;
};

} // namespace

RunSettings load_settings(const Config& cfg) {
    RunSettings s;
    s.experiment = cfg.require_string("", "experiment");
    check_choice(cfg, "", "experiment", s.experiment, experiment_names());
    s.seed = cfg.get_u64("", "seed", s.seed);

    s.problem_name = cfg.get_string("problem", "name", s.problem_name);
    s.horizon = cfg.get_double("problem", "T", s.horizon);
    s.oracle = cfg.get_string("problem", "oracle", s.oracle);
    check_choice(cfg, "problem", "oracle", s.oracle, {"closed_form", "grid_search", "golden_section"});
    s.n_a = cfg.get_count("problem", "n_a", s.n_a);
    s.tol_a = cfg.get_double("problem", "tol_a", s.tol_a);
    if (cfg.has("problem", "control_min")) {
        s.control_min = cfg.get_double("problem", "control_min", 0.0);
    }
    if (cfg.has("problem", "control_max")) {
        s.control_max = cfg.get_double("problem", "control_max", 0.0);
    }

    s.grid.x_min = cfg.get_double("grid", "x_min", s.grid.x_min);
    s.grid.x_max = cfg.get_double("grid", "x_max", s.grid.x_max);
    s.grid.nx = cfg.get_count("grid", "nx", s.grid.nx);
    s.grid.nt = cfg.get_count("grid", "nt", s.grid.nt);
    s.grid.T = s.horizon;
    s.bc = cfg.get_string("grid", "bc", s.bc);
    check_choice(cfg, "grid", "bc", s.bc, {"linear_extrapolation", "dirichlet"});
    s.dirichlet_left = cfg.get_double("grid", "dirichlet_left", s.dirichlet_left);
    s.dirichlet_right = cfg.get_double("grid", "dirichlet_right", s.dirichlet_right);

    s.reference.inner_tol = cfg.get_double("reference", "inner_tol", s.reference.inner_tol);
    s.reference.inner_max = cfg.get_count("reference", "inner_max", s.reference.inner_max);

    s.iterate.max_iters = cfg.get_count("iterate", "max_iters", s.iterate.max_iters);
    s.iterate.min_iters = cfg.get_count("iterate", "min_iters", s.iterate.min_iters);
    s.iterate.stop_tol = cfg.get_double("iterate", "stop_tol", s.iterate.stop_tol);
    s.iterate.initial_policy = cfg.get_double("iterate", "a0", 0.0);
    s.floor_ratio = cfg.get_double("iterate", "floor_ratio", s.floor_ratio);
    s.monotone_tol = cfg.get_double("iterate", "monotone_tol", s.monotone_tol);
    if (!(s.floor_ratio > 0.0 && s.floor_ratio < 1.0)) {
        throw ConfigError("cli", fmt::format("{}: iterate.floor_ratio must lie in (0, 1)",
                                             cfg.where("iterate", "floor_ratio")));
    }
    if (!(s.monotone_tol >= 0.0)) {
        throw ConfigError("cli", fmt::format("{}: iterate.monotone_tol must be non-negative",
                                             cfg.where("iterate", "monotone_tol")));
    }

    s.algorithms = cfg.get_words("perturb", "algorithms", s.algorithms);
    for (const auto& a : s.algorithms) {
        check_choice(cfg, "perturb", "algorithms", a, {"pia", "gia"});
    }
    s.pde_mode = cfg.get_string("perturb", "pde_mode", s.pde_mode);
    check_choice(cfg, "perturb", "pde_mode", s.pde_mode, {"additive_noise", "coarse_solve"});
    s.pde_levels = cfg.get_doubles("perturb", "pde_levels", s.pde_levels);
    s.argmax_mode = cfg.get_string("perturb", "argmax_mode", s.argmax_mode);
    check_choice(cfg, "perturb", "argmax_mode", s.argmax_mode, {"constant_offset", "state_noise"});
    s.argmax_levels = cfg.get_doubles("perturb", "argmax_levels", s.argmax_levels);
    s.plateau_tail = cfg.get_count("perturb", "plateau_tail", s.plateau_tail);
    if (s.plateau_tail < 1) {
        throw ConfigError("cli", fmt::format("{}: perturb.plateau_tail must be at least 1",
                                             cfg.where("perturb", "plateau_tail")));
    }

    s.mc.n_paths = cfg.get_count("montecarlo", "n_paths", s.mc.n_paths);
    s.mc.n_steps = cfg.get_count("montecarlo", "n_steps", s.mc.n_steps);
    s.mc.antithetic = cfg.get_bool("montecarlo", "antithetic", s.mc.antithetic);
    s.mc.threads = static_cast<unsigned>(cfg.get_count("montecarlo", "threads", s.mc.threads));
    s.mc_algorithm = cfg.get_string("montecarlo", "algorithm", s.mc_algorithm);
    check_choice(cfg, "montecarlo", "algorithm", s.mc_algorithm, {"pia", "gia"});
    s.policy_iter = cfg.get_count("montecarlo", "policy_iter", s.policy_iter);
    if (cfg.has("montecarlo", "points")) {
        s.points = parse_points(cfg, cfg.get_words("montecarlo", "points", {}));
    }

    s.timings = cfg.get_bool("output", "timings", s.timings);
    s.write_fields = cfg.get_bool("output", "write_fields", s.write_fields);

    cfg.reject_unread();
    return s;
}

ControlProblem make_problem(const RunSettings& s) {
    ControlProblem problem = make_named_problem(s.problem_name, s.horizon);
    if (s.control_min || s.control_max) {
        problem.control_set.lo = s.control_min.value_or(problem.control_set.lo);
        problem.control_set.hi = s.control_max.value_or(problem.control_set.hi);
    }
    if (s.oracle == "grid_search") {
        problem.argmax_oracle = GridSearch{s.n_a};
    } else if (s.oracle == "golden_section") {
        problem.argmax_oracle = GoldenSection{s.tol_a};
    }
    return problem;
}

BoundaryCondition make_boundary(const RunSettings& s) {
    if (s.bc == "dirichlet") {
        const double left = s.dirichlet_left;
        const double right = s.dirichlet_right;
        return Dirichlet{[left](double) { return left; }, [right](double) { return right; }};
    }
    return LinearExtrapolation{};
}

int run(const RunOptions& options, std::ostream& log, std::ostream& err) {
    RunSettings settings;
    try {
        settings = load_settings(Config::load(options.config));
        if (options.seed) {
            settings.seed = *options.seed;
        }
        settings.mc.seed = settings.seed;
    } catch (const Error& e) {
        err << "pialab: config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::optional<OutputDir> out;
    try {
        out.emplace(options.out);
        Experiment experiment(settings, *out, log, options.quiet);
        experiment.validate();
        experiment.run();
        if (!options.quiet) {
            log << fmt::format("wrote {} files to {}\n", out->count(), options.out.string());
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        if (out) {
            out->discard();
        }
        err << "pialab: config error [" << e.module() << "]: " << e.what() << " (in " << options.config.string()
            << ")\n";
        return kExitConfig;
    } catch (const Error& e) {
        if (out) {
            out->discard();
        }
        err << "pialab: error [" << e.module() << "]: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        if (out) {
            out->discard();
        }
        err << "pialab: error [cli]: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace pialab
