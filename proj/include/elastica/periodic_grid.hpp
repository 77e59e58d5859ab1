/**
 * Uniform periodic partitions of (0,1) and polygonal curves on them.
 *
 * A PolygonalCurve stores the nodal heights v_0..v_{N-1}; every index is
 * read modulo N, so v_N aliases v_0 and v_{-1} aliases v_{N-1}. All the
 * finite-difference quantities used by the energies live here:
 *
 *   d_j = (v_j - v_{j-1}) / h                 slope of segment I_j
 *   D_j = (v_{j+1} - 2 v_j + v_{j-1}) / h^2   second difference
 *   l_j = (h/2) sqrt(1 + d_j^2)               half the length of I_j
 *   theta_j                                   turning angle at x_j
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace elastica {

using Index = std::ptrdiff_t;

/// Wraps any integer index into [0, n).
[[nodiscard]] constexpr Index wrap_index(Index j, Index n) noexcept {
    Index r = j % n;
    return r < 0 ? r + n : r;
}

class PeriodicGrid {
public:
    static constexpr Index min_segments = 3;

    explicit PeriodicGrid(Index segments) : n_(segments) {
        if (segments < min_segments) {
            throw std::invalid_argument("PeriodicGrid: need at least 3 segments, got " +
                                        std::to_string(segments));
        }
        h_ = 1.0 / static_cast<double>(segments);
    }

    [[nodiscard]] Index segments() const noexcept { return n_; }
    [[nodiscard]] double width() const noexcept { return h_; }
    /// x_j = j h (not wrapped: node(N) == 1).
    [[nodiscard]] double node(Index j) const noexcept { return static_cast<double>(j) * h_; }
    /// Midpoint x_{j-1/2} of segment I_j = (x_{j-1}, x_j).
    [[nodiscard]] double midpoint(Index j) const noexcept {
        return (static_cast<double>(j) - 0.5) * h_;
    }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

private:
    Index n_;
    double h_;
};

class PolygonalCurve {
public:
    PolygonalCurve(PeriodicGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (static_cast<Index>(values_.size()) != grid_.segments()) {
            throw std::invalid_argument("PolygonalCurve: expected " +
                                        std::to_string(grid_.segments()) + " nodal values, got " +
                                        std::to_string(values_.size()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw std::invalid_argument("PolygonalCurve: non-finite value");
        }
    }

    static PolygonalCurve constant(PeriodicGrid grid, double c) {
        return {grid, std::vector<double>(static_cast<std::size_t>(grid.segments()), c)};
    }

    [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] Index size() const noexcept { return grid_.segments(); }
    [[nodiscard]] double h() const noexcept { return grid_.width(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Periodic read: any integer index is accepted.
    [[nodiscard]] double operator[](Index j) const noexcept {
        return values_[static_cast<std::size_t>(wrap_index(j, size()))];
    }

    friend bool operator==(const PolygonalCurve&, const PolygonalCurve&) = default;

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

[[nodiscard]] inline double forward_difference(const PolygonalCurve& v, Index j) noexcept {
    return (v[j] - v[j - 1]) / v.h();
}

[[nodiscard]] inline double second_difference(const PolygonalCurve& v, Index j) noexcept {
    const double h = v.h();
    return (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
}

[[nodiscard]] inline double half_length_from_slope(double slope, double h) noexcept {
    return 0.5 * h * std::hypot(1.0, slope);
}

[[nodiscard]] inline double half_length(const PolygonalCurve& v, Index j) noexcept {
    return half_length_from_slope(forward_difference(v, j), v.h());
}

/// Signed angle from direction (1, d) to (1, d_next), in (-pi, pi).
/// Equals arctan(d_next) - arctan(d) without the cancellation of that form.
[[nodiscard]] inline double signed_turn(double d, double d_next) noexcept {
    return std::atan2(d_next - d, 1.0 + d * d_next);
}

[[nodiscard]] inline double turning_angle_from_slopes(double d, double d_next) noexcept {
    return std::atan2(std::abs(d_next - d), 1.0 + d * d_next);
}

/// Textbook arccos form of the turning angle; argument clamped to [-1, 1].
[[nodiscard]] inline double turning_angle_arccos(double d, double d_next) noexcept {
    const double c = (1.0 + d * d_next) / (std::hypot(1.0, d) * std::hypot(1.0, d_next));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

/// theta_j: angle between segments I_j and I_{j+1}, in [0, pi].
[[nodiscard]] inline double turning_angle(const PolygonalCurve& v, Index j) noexcept {
    return turning_angle_from_slopes(forward_difference(v, j), forward_difference(v, j + 1));
}

/// All slopes d_1..d_N, stored at position j-1 (so slopes()[0] = d_1, slopes()[N-1] = d_N = d_0).
[[nodiscard]] inline std::vector<double> slopes(const PolygonalCurve& v) {
    std::vector<double> d(static_cast<std::size_t>(v.size()));
    for (Index j = 1; j <= v.size(); ++j) d[static_cast<std::size_t>(j - 1)] = forward_difference(v, j);
    return d;
}

/// Nodal interpolation Pi_h f. Throws when f(0) and f(1) disagree.
inline PolygonalCurve interpolate(PeriodicGrid grid, const std::function<double(double)>& f,
                                  double periodicity_tol = 1e-12) {
    const double f0 = f(0.0);
    const double f1 = f(1.0);
    if (!(std::abs(f0 - f1) <= periodicity_tol)) {
        throw std::invalid_argument("interpolate: function is not periodic on [0,1]");
    }
    std::vector<double> vals(static_cast<std::size_t>(grid.segments()));
    for (Index j = 0; j < grid.segments(); ++j) vals[static_cast<std::size_t>(j)] = f(grid.node(j));
    return {grid, std::move(vals)};
}

enum class NormKind { value, second_difference };

/// ||v||_{h,0,p} or |v|_{h,2,p}.
[[nodiscard]] inline double discrete_norm(const PolygonalCurve& v, double p, NormKind kind) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("discrete_norm: need finite p >= 1");
    double sum = 0.0;
    for (Index j = 1; j <= v.size(); ++j) {
        const double q = kind == NormKind::value ? v[j] : second_difference(v, j);
        sum += std::pow(std::abs(q), p) * v.h();
    }
    return std::pow(sum, 1.0 / p);
}

/// |v|_{W^{1,inf}} = max_j |d_j|.
[[nodiscard]] inline double lipschitz_seminorm(const PolygonalCurve& v) noexcept {
    double m = 0.0;
    for (Index j = 1; j <= v.size(); ++j) m = std::max(m, std::abs(forward_difference(v, j)));
    return m;
}

/// Continuous, periodic, piecewise-linear reconstruction of v'_h. It takes the
/// value d_j at the midpoint x_{j-1/2} of I_j and is linear between midpoints.
class SlopeReconstruction {
public:
    explicit SlopeReconstruction(const PolygonalCurve& v) : grid_(v.grid()), d_(slopes(v)) {}

    [[nodiscard]] double operator()(double x) const noexcept {
        const double h = grid_.width();
        const Index n = grid_.segments();
        // Shift so that midpoint x_{j-1/2} maps to integer j-1.
        const double s = x / h - 0.5;
        const double base = std::floor(s);
        const double t = s - base;
        const auto j = static_cast<Index>(base);
        return (1.0 - t) * slope(j + 1, n) + t * slope(j + 2, n);
    }

    [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }

private:
    [[nodiscard]] double slope(Index j, Index n) const noexcept {
        return d_[static_cast<std::size_t>(wrap_index(j - 1, n))];
    }

    PeriodicGrid grid_;
    std::vector<double> d_;
};

[[nodiscard]] inline SlopeReconstruction derivative_reconstruction(const PolygonalCurve& v) {
    return SlopeReconstruction(v);
}

}  // namespace elastica
