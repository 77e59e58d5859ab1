/**
 * Gradient of the discrete energy with respect to the nodal values.
 *
 * Bending and tension depend on v only through the slopes d_j, so their
 * gradients are assembled as dE/dv_i = (G_i - G_{i+1}) / h with G_j = dE/dd_j;
 * the assembled components therefore sum to zero. The squared turning angle
 * is differentiated through the signed angle s = atan2(d' - d, 1 + d d'),
 * whose partials are -1/(1+d^2) and 1/(1+d'^2); theta^2 = s^2 is smooth at
 * theta = 0, unlike theta itself.
 */
#pragma once

#include "elastica/energy.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace elastica {

using GradientVector = std::vector<double>;

/// Partials of bending_weight(a, b) with respect to a and b.
struct WeightPartials {
    double value;
    double da;
    double db;
};

[[nodiscard]] inline WeightPartials bending_weight_partials(double a, double b) noexcept {
    const double q = a * a - a * b + b * b;
    const double w = q / (a * b * (a + b));
    const double common = 1.0 / (a + b);
    return {w, w * ((2.0 * a - b) / q - 1.0 / a - common), w * ((2.0 * b - a) / q - 1.0 / b - common)};
}

/// Gradient of the selected terms of E_{h,delta,rho} at nodal values v.
inline GradientVector analytic_gradient(const DiscreteProblem& problem, std::span<const double> v,
                                        Term terms = Term::all) {
    const std::size_t n = v.size();
    const double h = problem.grid().width();
    const auto& par = problem.params();
    const auto& reg = problem.regularization();
    const auto psi = problem.obstacle_values();

    std::vector<double> d(n), len(n), dlen(n), z(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = (v[j] - v[(j + n - 1) % n]) / h;
        const double root = std::hypot(1.0, d[j]);
        len[j] = 0.5 * h * root;
        dlen[j] = 0.5 * h * d[j] / root;  // dl_j / dd_j
    }
    const bool with_adhesion = has(terms, Term::adhesion);
    if (with_adhesion) {
        for (std::size_t j = 0; j < n; ++j) z[j] = problem.zeta(v, j);
    }

    // slope_grad[j] = dE/dd_j for slope-only contributions
    std::vector<double> slope_grad(n, 0.0);
    GradientVector g(n, 0.0);

    if (has(terms, Term::bending)) {
        const double half_c = 0.5 * par.C;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = (j + 1) % n;
            const double s = signed_turn(d[j], d[k]);
            const auto w = bending_weight_partials(len[j], len[k]);
            slope_grad[j] += half_c * (-2.0 * s / (1.0 + d[j] * d[j]) * w.value + s * s * w.da * dlen[j]);
            slope_grad[k] += half_c * (2.0 * s / (1.0 + d[k] * d[k]) * w.value + s * s * w.db * dlen[k]);
        }
    }
    if (has(terms, Term::tension)) {
        for (std::size_t j = 0; j < n; ++j) slope_grad[j] += par.sigma * 2.0 * dlen[j];
    }
    if (with_adhesion) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t jm = (j + n - 1) % n;
            const std::size_t jp = (j + 1) % n;
            slope_grad[j] -= par.gamma * z[jm] * z[j] * 2.0 * dlen[j];
            const double dz = problem.zeta_derivative(v, j);
            if (dz != 0.0) g[j] -= par.gamma * dz * (z[jm] * 2.0 * len[j] + z[jp] * 2.0 * len[jp]);
        }
    }
    if (has(terms, Term::penalty)) {
        for (std::size_t j = 0; j < n; ++j) {
            const double viol = std::max(0.0, psi[j] - v[j]);
            g[j] -= 2.0 * h / reg.rho * viol;
        }
    }
    for (std::size_t i = 0; i < n; ++i) g[i] += (slope_grad[i] - slope_grad[(i + 1) % n]) / h;
    return g;
}

inline GradientVector analytic_gradient(const PolygonalCurve& v, const Obstacle& psi, const PhysicalParams& params,
                                        const RegularizationParams& reg,
                                        const AdhesionProfile& zeta = quartic_profile(), Term terms = Term::all) {
    return analytic_gradient(DiscreteProblem(v.grid(), psi, params, reg, zeta), v.values(), terms);
}

/// Central differences with per-component step rel_step * max(1, |v_j|).
inline GradientVector finite_difference_gradient(const DiscreteProblem& problem, std::span<const double> v,
                                                 Term terms = Term::all, double rel_step = 1e-6) {
    std::vector<double> work(v.begin(), v.end());
    GradientVector g(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double step = rel_step * std::max(1.0, std::abs(v[j]));
        const double saved = work[j];
        work[j] = saved + step;
        const double up = problem.energy(work, terms);
        work[j] = saved - step;
        const double down = problem.energy(work, terms);
        work[j] = saved;
        g[j] = (up - down) / (2.0 * step);
    }
    return g;
}

inline GradientVector finite_difference_gradient(const PolygonalCurve& v, const Obstacle& psi,
                                                 const PhysicalParams& params, const RegularizationParams& reg,
                                                 const AdhesionProfile& zeta = quartic_profile(),
                                                 double rel_step = 1e-6, Term terms = Term::all) {
    return finite_difference_gradient(DiscreteProblem(v.grid(), psi, params, reg, zeta), v.values(), terms,
                                      rel_step);
}

/// ||a - b||_inf / max(1, ||a||_inf).
[[nodiscard]] inline double relative_inf_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0, scale = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        diff = std::max(diff, std::abs(a[j] - b[j]));
        scale = std::max(scale, std::abs(a[j]));
    }
    return diff / scale;
}

}  // namespace elastica
