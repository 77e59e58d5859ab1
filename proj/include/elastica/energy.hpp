/**
 * Discrete and continuous energies of a graph curve over an obstacle.
 *
 * Discrete energy on periodic polygonal curves:
 *
 *   E = B_h + T - A_{h,delta} + P_{h,rho}
 *
 *   B_h     = (C/2) sum_j theta_j^2 (l_j^3 + l_{j+1}^3) / (l_j l_{j+1} (l_j + l_{j+1})^2)
 *   T       = sigma sum_j 2 l_j
 *   A       = gamma sum_j zeta_{delta,j-1} zeta_{delta,j} 2 l_j
 *   P       = (1/rho) sum_j max(0, psi_j - v_j)^2 h
 *
 * and the continuous reference functionals used for convergence studies
 * (bending (C/2) int f''^2 (1+f'^2)^{-5/2} dx, tension, adhesion on the
 * detected contact set).
 */
#pragma once

#include "elastica/obstacles.hpp"
#include "elastica/params.hpp"
#include "elastica/periodic_grid.hpp"
#include "elastica/quadrature.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace elastica {

struct EnergyBreakdown {
    double bending = 0.0;
    double tension = 0.0;
    double adhesion = 0.0;
    double penalty = 0.0;
    double total = 0.0;

    static EnergyBreakdown compose(double bending, double tension, double adhesion, double penalty) {
        return {bending, tension, adhesion, penalty, bending + tension - adhesion + penalty};
    }

    friend bool operator==(const EnergyBreakdown&, const EnergyBreakdown&) = default;
};

/// Bit mask selecting energy terms; lets tests and the gradient check probe terms one at a time.
enum class Term : std::uint8_t {
    none = 0,
    bending = 1,
    tension = 2,
    adhesion = 4,
    penalty = 8,
    all = 15,
};

constexpr Term operator|(Term a, Term b) {
    return static_cast<Term>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}
constexpr bool has(Term set, Term t) {
    return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(t)) != 0;
}

inline std::string term_name(Term t) {
    switch (t) {
        case Term::bending: return "bending";
        case Term::tension: return "tension";
        case Term::adhesion: return "adhesion";
        case Term::penalty: return "penalty";
        case Term::all: return "total";
        default: return "mixed";
    }
}

/// (l_a^3 + l_b^3) / (l_a l_b (l_a + l_b)^2), written as (a^2 - ab + b^2) / (ab(a+b)).
[[nodiscard]] inline double bending_weight(double a, double b) noexcept {
    return (a * a - a * b + b * b) / (a * b * (a + b));
}

// ---------------------------------------------------------------------------
// Discrete terms on curves

[[nodiscard]] inline double bending_discrete(const PolygonalCurve& v, const PhysicalParams& params) {
    const double h = v.h();
    const auto d = slopes(v);
    const auto n = d.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = (j + 1) % n;
        const double theta = turning_angle_from_slopes(d[j], d[k]);
        sum += theta * theta *
               bending_weight(half_length_from_slope(d[j], h), half_length_from_slope(d[k], h));
    }
    return 0.5 * params.C * sum;
}

/// (C/2) sum_j |D_j|^2 (1 + d_j^2)^{-5/2} h.
[[nodiscard]] inline double bending_auxiliary(const PolygonalCurve& v, const PhysicalParams& params) {
    double sum = 0.0;
    for (Index j = 1; j <= v.size(); ++j) {
        const double dd = second_difference(v, j);
        const double d = forward_difference(v, j);
        sum += dd * dd * std::pow(1.0 + d * d, -2.5) * v.h();
    }
    return 0.5 * params.C * sum;
}

[[nodiscard]] inline double tension_discrete(const PolygonalCurve& v, const PhysicalParams& params) {
    double len = 0.0;
    for (Index j = 1; j <= v.size(); ++j) len += 2.0 * half_length(v, j);
    return params.sigma * len;
}

[[nodiscard]] inline std::vector<double> nodal_obstacle(const PeriodicGrid& grid, const Obstacle& psi) {
    std::vector<double> out(static_cast<std::size_t>(grid.segments()));
    for (Index j = 0; j < grid.segments(); ++j) out[static_cast<std::size_t>(j)] = psi(grid.node(j));
    return out;
}

[[nodiscard]] inline double adhesion_discrete(const PolygonalCurve& v, const Obstacle& psi,
                                              const PhysicalParams& params, const RegularizationParams& reg,
                                              const AdhesionProfile& zeta) {
    const auto obst = nodal_obstacle(v.grid(), psi);
    const Index n = v.size();
    auto z = [&](Index j) {
        const auto i = static_cast<std::size_t>(wrap_index(j, n));
        return zeta.scaled(v[j] - obst[i], reg.delta);
    };
    double sum = 0.0;
    for (Index j = 1; j <= n; ++j) sum += z(j - 1) * z(j) * 2.0 * half_length(v, j);
    return params.gamma * sum;
}

[[nodiscard]] inline double penalty(const PolygonalCurve& v, const Obstacle& psi,
                                    const RegularizationParams& reg) {
    double sum = 0.0;
    for (Index j = 0; j < v.size(); ++j) {
        const double viol = std::max(0.0, psi(v.grid().node(j)) - v[j]);
        sum += viol * viol * v.h();
    }
    return sum / reg.rho;
}

/// Everything needed to evaluate E_{h,delta,rho} on one grid, with the obstacle
/// sampled once at the nodes.
class DiscreteProblem {
public:
    DiscreteProblem(PeriodicGrid grid, const Obstacle& psi, PhysicalParams params, RegularizationParams reg,
                    AdhesionProfile zeta = quartic_profile())
        : grid_(grid),
          psi_(nodal_obstacle(grid, psi)),
          params_(params),
          reg_(reg),
          zeta_(std::move(zeta)) {
        params_.validate();
        reg_.validate();
    }

    [[nodiscard]] const PeriodicGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] Index size() const noexcept { return grid_.segments(); }
    [[nodiscard]] std::span<const double> obstacle_values() const noexcept { return psi_; }
    [[nodiscard]] const PhysicalParams& params() const noexcept { return params_; }
    [[nodiscard]] const RegularizationParams& regularization() const noexcept { return reg_; }
    [[nodiscard]] const AdhesionProfile& profile() const noexcept { return zeta_; }

    /// All four terms at nodal values v (size N).
    [[nodiscard]] EnergyBreakdown breakdown(std::span<const double> v) const {
        const std::size_t n = v.size();
        const double h = grid_.width();
        const double inv_h = 1.0 / h;
        double bend = 0.0, len = 0.0, adh = 0.0, pen = 0.0;
        // slope of segment ending at node j is (v_j - v_{j-1}) / h
        auto slope = [&](std::size_t j) { return (v[j] - v[(j + n - 1) % n]) * inv_h; };
        double d = slope(0);
        double l = half_length_from_slope(d, h);
        double z_prev = zeta(v, n - 1);
        double z = zeta(v, 0);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = (j + 1) % n;
            const double d_next = slope(k);
            const double l_next = half_length_from_slope(d_next, h);
            const double theta = turning_angle_from_slopes(d, d_next);
            bend += theta * theta * bending_weight(l, l_next);
            len += 2.0 * l;
            adh += z_prev * z * 2.0 * l;
            const double viol = std::max(0.0, psi_[j] - v[j]);
            pen += viol * viol * h;
            d = d_next;
            l = l_next;
            z_prev = z;
            z = zeta(v, k);
        }
        return EnergyBreakdown::compose(0.5 * params_.C * bend, params_.sigma * len, params_.gamma * adh,
                                        pen / reg_.rho);
    }

    /// Sum of the selected terms, with the adhesion sign applied.
    [[nodiscard]] double energy(std::span<const double> v, Term terms = Term::all) const {
        const auto e = breakdown(v);
        if (terms == Term::all) return e.total;
        double s = 0.0;
        if (has(terms, Term::bending)) s += e.bending;
        if (has(terms, Term::tension)) s += e.tension;
        if (has(terms, Term::adhesion)) s -= e.adhesion;
        if (has(terms, Term::penalty)) s += e.penalty;
        return s;
    }

    [[nodiscard]] double zeta(std::span<const double> v, std::size_t j) const {
        return zeta_.scaled(v[j] - psi_[j], reg_.delta);
    }
    [[nodiscard]] double zeta_derivative(std::span<const double> v, std::size_t j) const {
        return zeta_.scaled_derivative(v[j] - psi_[j], reg_.delta);
    }

private:
    PeriodicGrid grid_;
    std::vector<double> psi_;
    PhysicalParams params_;
    RegularizationParams reg_;
    AdhesionProfile zeta_;
};

[[nodiscard]] inline EnergyBreakdown total_energy(const PolygonalCurve& v, const Obstacle& psi,
                                                  const PhysicalParams& params, const RegularizationParams& reg,
                                                  const AdhesionProfile& zeta = quartic_profile()) {
    return DiscreteProblem(v.grid(), psi, params, reg, zeta).breakdown(v.values());
}

// ---------------------------------------------------------------------------
// Continuous reference functionals

/// A periodic C^2 test function with its first two derivatives.
struct SmoothPeriodicFunction {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
};

inline SmoothPeriodicFunction sine_function(double amplitude, int frequency) {
    const double w = 2.0 * std::numbers::pi * frequency;
    return {std::to_string(amplitude) + "*sin(2pi*" + std::to_string(frequency) + "x)",
            [=](double x) { return amplitude * std::sin(w * x); },
            [=](double x) { return amplitude * w * std::cos(w * x); },
            [=](double x) { return -amplitude * w * w * std::sin(w * x); }};
}

inline SmoothPeriodicFunction cosine_function(double amplitude, int frequency) {
    const double w = 2.0 * std::numbers::pi * frequency;
    return {std::to_string(amplitude) + "*cos(2pi*" + std::to_string(frequency) + "x)",
            [=](double x) { return amplitude * std::cos(w * x); },
            [=](double x) { return -amplitude * w * std::sin(w * x); },
            [=](double x) { return -amplitude * w * w * std::cos(w * x); }};
}

inline SmoothPeriodicFunction constant_function(double c) {
    return {"const", [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

/// B[f] = (C/2) int_0^1 f''^2 (1 + f'^2)^{-5/2} dx.
inline QuadratureResult bending_continuous(const SmoothPeriodicFunction& fn, const PhysicalParams& params,
                                           const QuadratureOptions& opt = {}) {
    auto r = integrate(
        [&](double x) {
            const double d1 = fn.df(x);
            const double d2 = fn.d2f(x);
            return d2 * d2 * std::pow(1.0 + d1 * d1, -2.5);
        },
        0.0, 1.0, opt);
    r.value *= 0.5 * params.C;
    r.error_estimate *= 0.5 * params.C;
    return r;
}

inline QuadratureResult tension_continuous(const SmoothPeriodicFunction& fn, const PhysicalParams& params,
                                           const QuadratureOptions& opt = {}) {
    auto r = integrate([&](double x) { return std::hypot(1.0, fn.df(x)); }, 0.0, 1.0, opt);
    r.value *= params.sigma;
    r.error_estimate *= params.sigma;
    return r;
}

/// gamma * length of the graph of f over {x : |f(x) - psi(x)| <= contact_tol}.
/// The tolerance is scaled by max(1, sup|psi|).
inline QuadratureResult adhesion_continuous(const SmoothPeriodicFunction& fn, const Obstacle& psi,
                                            const PhysicalParams& params, double contact_tol = 1e-9) {
    double scale = 1.0;
    for (int k = 0; k < 1000; ++k) scale = std::max(scale, std::abs(psi(k / 1000.0)));
    const double tol = contact_tol * scale;
    auto integrand = [&](double x) {
        return std::abs(fn.f(x) - psi(x)) <= tol ? std::hypot(1.0, fn.df(x)) : 0.0;
    };
    auto r = integrate(integrand, 0.0, 1.0);
    r.value *= params.gamma;
    r.error_estimate *= params.gamma;
    return r;
}

}  // namespace elastica
