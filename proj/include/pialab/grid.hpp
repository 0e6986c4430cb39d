#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pialab {

/// Uniform space-time lattice on [0, T] x [x_min, x_max].
///
/// Space nodes are j = 0..nx+1, where 0 and nx+1 sit on the truncation
/// boundary and the nx nodes in between are interior. Time levels are
/// i = 0..nt with t_i = i * dt.
struct GridSpec {
    double x_min = -6.0;
    double x_max = 6.0;
    std::size_t nx = 599;
    double T = 1.0;
    std::size_t nt = 400;

    /// Throws ConfigError unless the invariants hold.
    void validate() const;

    [[nodiscard]] double dx() const { return (x_max - x_min) / static_cast<double>(nx + 1); }
    [[nodiscard]] double dt() const { return T / static_cast<double>(nt); }
    [[nodiscard]] std::size_t space_nodes() const { return nx + 2; }
    [[nodiscard]] std::size_t time_levels() const { return nt + 1; }
    [[nodiscard]] double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx(); }
    [[nodiscard]] double t(std::size_t i) const { return static_cast<double>(i) * dt(); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A lattice node with both its indices and its coordinates.
struct GridPoint {
    std::size_t i;
    std::size_t j;
    double t;
    double x;
};

/// Index range [begin, end) of space nodes used for error reporting: the
/// central half of the domain, away from the artificial boundary.
struct ReportingWindow {
    std::size_t begin;
    std::size_t end;

    [[nodiscard]] bool contains_x(const GridSpec& grid, double x) const;
};

[[nodiscard]] ReportingWindow reporting_window(const GridSpec& grid);

/// Scalar field over every node of a grid, stored time-level major.
/// The tag only distinguishes value fields from policy fields.
template <class Tag>
class GridField {
public:
    GridField() = default;
    explicit GridField(const GridSpec& grid, double fill = 0.0)
        : grid_(grid), data_(grid.time_levels() * grid.space_nodes(), fill) {}

    [[nodiscard]] const GridSpec& grid() const { return grid_; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * grid_.space_nodes() + j]; }
    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) { return data_[i * grid_.space_nodes() + j]; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * grid_.space_nodes(), grid_.space_nodes()};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) {
        return {data_.data() + i * grid_.space_nodes(), grid_.space_nodes()};
    }

    [[nodiscard]] std::span<const double> values() const { return data_; }
    [[nodiscard]] std::span<double> values() { return data_; }

    friend bool operator==(const GridField&, const GridField&) = default;

private:
    GridSpec grid_{};
    std::vector<double> data_;
};

using ValueField = GridField<struct ValueTag>;
using PolicyField = GridField<struct PolicyTag>;

/// Central difference inside, one-sided first order at j = 0 and j = nx+1.
[[nodiscard]] double row_gradient(const GridSpec& grid, std::span<const double> row, std::size_t j);

[[nodiscard]] double gradient(const ValueField& field, std::size_t i, std::size_t j);

/// max |u - w| over every node. Throws DimensionError on mismatched grids.
[[nodiscard]] double sup_norm_diff(const ValueField& u, const ValueField& w);
[[nodiscard]] double sup_norm_diff(const PolicyField& u, const PolicyField& w);

/// max |u - w| over the reporting window at every time level.
[[nodiscard]] double window_sup_diff(const ValueField& u, const ValueField& w);
[[nodiscard]] double window_sup_diff(const PolicyField& u, const PolicyField& w);

/// Same, restricted to a single time level.
[[nodiscard]] double window_sup_diff_at(const PolicyField& u, const PolicyField& w, std::size_t i);

/// Writes `t,x,value`, one row per node, 17 significant digits.
void write_field_csv(std::ostream& os, const ValueField& field);
void write_field_csv(std::ostream& os, const PolicyField& field);

/// Round-trip-exact decimal rendering used by every CSV writer.
[[nodiscard]] std::string format_real(double v);

} // namespace pialab
