#pragma once

#include "pialab/grid.hpp"
#include "pialab/iterate.hpp"
#include "pialab/montecarlo.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pialab {

/// Geometric contraction fitted to an error sequence.
///
/// The window is the longest prefix whose consecutive ratios stay at or
/// below `floor_ratio`; `q` is the geometric mean of those ratios. The
/// convergence theorems bound the squared error by C q^n, so the ratio
/// reported here is the value-error ratio, i.e. the square root of the
/// theorems' q.
struct RateEstimate {
    double q = 1.0;
    std::size_t window_end = 0; ///< errors[0, window_end) form the fit window
    std::optional<std::size_t> floor_iter;
    double floor_level = 0.0;
};

inline constexpr double kDefaultFloorRatio = 0.9;

/// Throws UsageError on non-positive entries and NoPreFloorRegime when the
/// window holds fewer than two ratios.
[[nodiscard]] RateEstimate estimate_rate(std::span<const double> errors, double floor_ratio = kDefaultFloorRatio);

/// Least-squares slope of log(gap) against log(epsilon). Needs >= 3 pairs,
/// all positive.
[[nodiscard]] double fit_stability_slope(std::span<const std::pair<double, double>> pairs);

struct StabilitySweep {
    std::string mode; ///< e.g. "pia.constant_offset"
    GridSpec grid;
    std::vector<std::pair<double, double>> points; ///< (epsilon, plateau gap)
};

struct McCrossCheck {
    GridSpec grid;
    McCrossCheckRow row;
};

struct MonotoneVerdict {
    bool pass = false;
    double worst_margin = 0.0;
    double tol = 0.0;
};

struct ConvergenceReport {
    std::string algorithm;
    std::size_t iterations = 0;
    std::string stop_reason;
    std::optional<RateEstimate> rate;
    std::string rate_diagnostic; ///< set when no rate could be fitted
    std::optional<MonotoneVerdict> monotone;
    std::vector<McCrossCheckRow> mc_crosscheck;
    std::vector<std::pair<std::string, double>> stability_slopes;
};

struct ReportOptions {
    double floor_ratio = kDefaultFloorRatio;
    double monotone_tol = 1e-8;
};

/// Pure function of its inputs. Monotonicity is assessed only for policy
/// improvement traces with recorded fields. Throws UsageError when an input
/// lives on a different grid than the trace.
[[nodiscard]] ConvergenceReport build_report(const IterationTrace& trace, std::span<const StabilitySweep> sweeps,
                                             std::span<const McCrossCheck> mc, const ReportOptions& options = {});

/// Key-value text, one `key = value` per line, keys in a fixed order.
[[nodiscard]] std::string to_text(const ConvergenceReport& report);

} // namespace pialab
