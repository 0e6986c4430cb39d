#include "pialab/grid.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pialab {

void GridSpec::validate() const {
    if (!(x_min < x_max)) {
        throw ConfigError("grid", fmt::format("x_min ({}) must be below x_max ({})", x_min, x_max));
    }
    if (nx < 3) {
        throw ConfigError("grid", fmt::format("nx must be at least 3, got {}", nx));
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ConfigError("grid", fmt::format("horizon T must be positive, got {}", T));
    }
    if (nt < 1) {
        throw ConfigError("grid", "nt must be at least 1");
    }
}

bool ReportingWindow::contains_x(const GridSpec& grid, double x) const {
    return x >= grid.x(begin) && x <= grid.x(end - 1);
}

ReportingWindow reporting_window(const GridSpec& grid) {
    const double centre = 0.5 * (grid.x_min + grid.x_max);
    const double half_width = 0.25 * (grid.x_max - grid.x_min);
    const double lo = centre - half_width;
    const double hi = centre + half_width;
    // Small slack so that nodes sitting exactly on the window edge count.
    const double slack = 1e-9 * grid.dx();
    std::size_t begin = grid.space_nodes();
    std::size_t end = 0;
    for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
        const double x = grid.x(j);
        if (x >= lo - slack && x <= hi + slack) {
            begin = std::min(begin, j);
            end = j + 1;
        }
    }
    if (begin >= end) {
        // Extremely coarse grids: fall back to the interior.
        return {1, grid.nx + 1};
    }
    return {begin, end};
}

double row_gradient(const GridSpec& grid, std::span<const double> row, std::size_t j) {
    const double dx = grid.dx();
    const std::size_t last = grid.nx + 1;
    if (j == 0) {
        return (row[1] - row[0]) / dx;
    }
    if (j == last) {
        return (row[last] - row[last - 1]) / dx;
    }
    return (row[j + 1] - row[j - 1]) / (2.0 * dx);
}

double gradient(const ValueField& field, std::size_t i, std::size_t j) {
    return row_gradient(field.grid(), field.row(i), j);
}

namespace {

template <class Field>
void require_same_grid(const Field& u, const Field& w) {
    if (!(u.grid() == w.grid()) || u.values().size() != w.values().size()) {
        throw DimensionError("grid", "fields live on different grids");
    }
}

template <class Field>
double sup_diff_all(const Field& u, const Field& w) {
    require_same_grid(u, w);
    double worst = 0.0;
    const auto a = u.values();
    const auto b = w.values();
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return worst;
}

template <class Field>
double sup_diff_window_level(const Field& u, const Field& w, std::size_t i, const ReportingWindow& win) {
    double worst = 0.0;
    const auto a = u.row(i);
    const auto b = w.row(i);
    for (std::size_t j = win.begin; j < win.end; ++j) {
        worst = std::max(worst, std::abs(a[j] - b[j]));
    }
    return worst;
}

template <class Field>
double sup_diff_window(const Field& u, const Field& w) {
    require_same_grid(u, w);
    const auto win = reporting_window(u.grid());
    double worst = 0.0;
    for (std::size_t i = 0; i < u.grid().time_levels(); ++i) {
        worst = std::max(worst, sup_diff_window_level(u, w, i, win));
    }
    return worst;
}

template <class Field>
void write_csv(std::ostream& os, const Field& field) {
    const auto& g = field.grid();
    os << "t,x,value\n";
    for (std::size_t i = 0; i < g.time_levels(); ++i) {
        const double t = g.t(i);
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            os << format_real(t) << ',' << format_real(g.x(j)) << ',' << format_real(field(i, j)) << '\n';
        }
    }
}

} // namespace

double sup_norm_diff(const ValueField& u, const ValueField& w) { return sup_diff_all(u, w); }
double sup_norm_diff(const PolicyField& u, const PolicyField& w) { return sup_diff_all(u, w); }
double window_sup_diff(const ValueField& u, const ValueField& w) { return sup_diff_window(u, w); }
double window_sup_diff(const PolicyField& u, const PolicyField& w) { return sup_diff_window(u, w); }

double window_sup_diff_at(const PolicyField& u, const PolicyField& w, std::size_t i) {
    require_same_grid(u, w);
    return sup_diff_window_level(u, w, i, reporting_window(u.grid()));
}

void write_field_csv(std::ostream& os, const ValueField& field) { write_csv(os, field); }
void write_field_csv(std::ostream& os, const PolicyField& field) { write_csv(os, field); }

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

} // namespace pialab
