#include "pialab/diagnostics.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace pialab {

RateEstimate estimate_rate(std::span<const double> errors, double floor_ratio) {
    for (const double e : errors) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw UsageError("diagnostics", fmt::format("errors must be positive and finite, got {}", e));
        }
    }
    std::size_t ratios = 0;
    while (ratios + 1 < errors.size() && errors[ratios + 1] / errors[ratios] <= floor_ratio) {
        ++ratios;
    }
    if (ratios < 2) {
        throw NoPreFloorRegime("diagnostics", "no pre-floor regime: fewer than two contracting steps");
    }
    RateEstimate est;
    est.window_end = ratios + 1;
    est.q = std::pow(errors[ratios] / errors[0], 1.0 / static_cast<double>(ratios));
    if (est.window_end < errors.size()) {
        est.floor_iter = ratios;
        double level = errors[ratios];
        for (std::size_t n = ratios; n < errors.size(); ++n) {
            level = std::min(level, errors[n]);
        }
        est.floor_level = level;
    } else {
        est.floor_level = errors.back();
    }
    return est;
}

double fit_stability_slope(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 3) {
        throw UsageError("diagnostics", fmt::format("slope fit needs at least 3 pairs, got {}", pairs.size()));
    }
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [eps, gap] : pairs) {
        if (!(eps > 0.0) || !(gap > 0.0)) {
            throw UsageError("diagnostics", fmt::format("slope fit needs positive entries, got ({}, {})", eps, gap));
        }
        sx += std::log(eps);
        sy += std::log(gap);
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [eps, gap] : pairs) {
        const double dx = std::log(eps) - mx;
        sxy += dx * (std::log(gap) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) {
        throw UsageError("diagnostics", "slope fit needs at least two distinct epsilons");
    }
    return sxy / sxx;
}

ConvergenceReport build_report(const IterationTrace& trace, std::span<const StabilitySweep> sweeps,
                               std::span<const McCrossCheck> mc, const ReportOptions& options) {
    for (const auto& s : sweeps) {
        if (!(s.grid == trace.grid)) {
            throw UsageError("diagnostics", fmt::format("sweep '{}' was run on a different grid", s.mode));
        }
    }
    for (const auto& m : mc) {
        if (!(m.grid == trace.grid)) {
            throw UsageError("diagnostics", "Monte-Carlo cross-check was run on a different grid");
        }
    }

    ConvergenceReport report;
    report.algorithm = to_string(trace.algorithm);
    report.iterations = trace.iterations();
    report.stop_reason = to_string(trace.stop_reason);

    // Exact zeros (iterate equal to the reference) end the usable sequence.
    std::vector<double> errors;
    for (const double e : trace.errors()) {
        if (!(e > 0.0)) {
            break;
        }
        errors.push_back(e);
    }
    try {
        report.rate = estimate_rate(errors, options.floor_ratio);
    } catch (const NoPreFloorRegime& e) {
        report.rate_diagnostic = e.what();
    } catch (const UsageError& e) {
        report.rate_diagnostic = e.what();
    }

    if (trace.algorithm == Algorithm::PolicyImprovement && trace.has_fields()) {
        const auto check = check_monotone(trace, options.monotone_tol);
        report.monotone = MonotoneVerdict{check.all_pass(), check.worst_margin(), options.monotone_tol};
    }

    for (const auto& m : mc) {
        report.mc_crosscheck.push_back(m.row);
    }
    for (const auto& s : sweeps) {
        report.stability_slopes.emplace_back(s.mode, fit_stability_slope(s.points));
    }
    return report;
}

std::string to_text(const ConvergenceReport& report) {
    std::string out;
    const auto line = [&out](std::string_view key, const std::string& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    line("algorithm", report.algorithm);
    line("iterations", std::to_string(report.iterations));
    line("stop_reason", report.stop_reason);
    if (report.rate) {
        line("fitted_q", format_real(report.rate->q));
        line("fit_window", fmt::format("0..{}", report.rate->window_end - 1));
        line("floor_level", format_real(report.rate->floor_level));
        line("floor_iter", report.rate->floor_iter ? std::to_string(*report.rate->floor_iter) : "none");
    } else {
        line("rate_diagnostic", report.rate_diagnostic);
    }
    if (report.monotone) {
        line("monotone_verdict", report.monotone->pass ? "PASS" : "FAIL");
        line("monotone_worst_margin", format_real(report.monotone->worst_margin));
        line("monotone_tol", format_real(report.monotone->tol));
    }
    line("mc_crosscheck_count", std::to_string(report.mc_crosscheck.size()));
    for (std::size_t k = 0; k < report.mc_crosscheck.size(); ++k) {
        const auto& r = report.mc_crosscheck[k];
        line(fmt::format("mc_crosscheck.{}", k),
             fmt::format("t={} x={} policy_iter={} gap={} stderr={}", format_real(r.t), format_real(r.x),
                         r.policy_iter, format_real(r.abs_gap()), format_real(r.estimate.std_error)));
    }
    for (const auto& [mode, slope] : report.stability_slopes) {
        line(fmt::format("stability_slope.{}", mode), format_real(slope));
    }
    return out;
}

} // namespace pialab
