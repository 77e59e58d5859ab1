/**
 * BFGS quasi-Newton minimization with a strong Wolfe line search.
 *
 * The iteration stops when ||grad E||_inf / max(|E|, energy_floor) <= tolerance.
 * The inverse Hessian starts as the identity, is rescaled by y's/y'y after the
 * first accepted step, and is left untouched when the curvature pair fails
 * y's > 0. A failed line search restarts from steepest descent once; a second
 * consecutive failure ends the run with converged = false.
 */
#pragma once

#include "elastica/energy.hpp"
#include "elastica/gradient.hpp"
#include "elastica/periodic_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastica {

struct MinimizeOptions {
    double tolerance = 1e-5;
    int max_iterations = 10000;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double energy_floor = 1e-12;
    int max_line_search_evaluations = 60;
    bool record_trace = false;

    void validate() const {
        if (!(tolerance > 0.0)) throw std::invalid_argument("MinimizeOptions: tolerance must be positive");
        if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
            throw std::invalid_argument("MinimizeOptions: need 0 < c1 < c2 < 1");
        }
        if (max_iterations < 0) throw std::invalid_argument("MinimizeOptions: negative max_iterations");
    }
};

struct TraceEntry {
    int iteration = 0;
    double energy = 0.0;
    double criterion = 0.0;
    double step_length = 0.0;
};

/// ||g||_inf / max(|E|, energy_floor).
[[nodiscard]] inline double stopping_criterion(std::span<const double> gradient, double energy,
                                               const MinimizeOptions& options = {}) {
    double gmax = 0.0;
    for (double g : gradient) gmax = std::max(gmax, std::abs(g));
    return gmax / std::max(std::abs(energy), options.energy_floor);
}

/// Result of a generic BFGS run on R^n.
struct BfgsOutcome {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> gradient;
    int iterations = 0;   ///< accepted steps
    int evaluations = 0;  ///< objective+gradient evaluations
    double criterion = 0.0;
    bool converged = false;
    std::string message;
    std::vector<TraceEntry> trace;
};

/// Objective signature: writes the gradient into `grad` and returns the value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

namespace detail {

struct LinePoint {
    double alpha = 0.0;
    double value = 0.0;
    double slope = 0.0;  ///< directional derivative at alpha
};

/// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb); falls back
/// to bisection when the cubic has no real minimizer inside the interval.
inline double cubic_minimizer(const LinePoint& a, const LinePoint& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    const double mid = 0.5 * (a.alpha + b.alpha);
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0) return mid;
    const double t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(t) || t < lo + margin || t > hi - margin) return mid;
    return t;
}

}  // namespace detail

class BfgsMinimizer {
public:
    BfgsMinimizer(Objective objective, MinimizeOptions options)
        : f_(std::move(objective)), opt_(options) {
        opt_.validate();
    }

    BfgsOutcome run(std::vector<double> x0) {
        const auto n = static_cast<Eigen::Index>(x0.size());
        BfgsOutcome out;
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
        Eigen::VectorXd g(n);
        double fx = evaluate(x, g, out);
        Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
        bool identity = true;
        bool scaled = false;
        bool restarted = false;

        auto criterion = [&](double value, const Eigen::VectorXd& grad) {
            return grad.lpNorm<Eigen::Infinity>() / std::max(std::abs(value), opt_.energy_floor);
        };
        out.criterion = criterion(fx, g);
        if (opt_.record_trace) out.trace.push_back({0, fx, out.criterion, 0.0});

        while (out.criterion > opt_.tolerance) {
            if (out.iterations >= opt_.max_iterations) {
                out.message = "maximum number of iterations reached";
                break;
            }
            Eigen::VectorXd p = -(hinv * g);
            double slope0 = g.dot(p);
            if (!(slope0 < 0.0)) {
                hinv.setIdentity();
                identity = true;
                p = -g;
                slope0 = g.dot(p);
            }
            Eigen::VectorXd x_new(n), g_new(n);
            const auto step = line_search(x, fx, g, p, slope0, x_new, g_new, out);
            if (!step) {
                if (identity || restarted) {
                    out.message = "line search failed along steepest descent";
                    break;
                }
                hinv.setIdentity();
                identity = true;
                restarted = true;
                continue;
            }
            restarted = false;
            const Eigen::VectorXd s = x_new - x;
            const Eigen::VectorXd y = g_new - g;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
                if (!scaled) {
                    hinv *= sy / y.squaredNorm();
                    scaled = true;
                }
                const double rho = 1.0 / sy;
                const Eigen::VectorXd hy = hinv * y;
                const double yhy = y.dot(hy);
                hinv.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
                hinv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
                identity = false;
            }
            x = x_new;
            g = g_new;
            fx = step->value;
            ++out.iterations;
            out.criterion = criterion(fx, g);
            if (opt_.record_trace) out.trace.push_back({out.iterations, fx, out.criterion, step->alpha});
        }
        out.converged = out.criterion <= opt_.tolerance;
        if (out.converged) out.message = "converged";
        out.x.assign(x.data(), x.data() + n);
        out.gradient.assign(g.data(), g.data() + n);
        out.value = fx;
        return out;
    }

private:
    // Absolute rounding level of an energy value near f.
    static double rounding_level(double f) {
        return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
    }

    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& g, BfgsOutcome& out) {
        ++out.evaluations;
        return f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                  std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
    }

    // Strong Wolfe search (bracketing + zoom with cubic interpolation). Energy
    // differences below `noise` carry no information; there the sufficient
    // decrease test switches to its derivative form phi'(a) <= 0.8 |phi'(0)|
    // and comparisons of f fall back on the sign of the slope.
    std::optional<detail::LinePoint> line_search(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0,
                                                 const Eigen::VectorXd& p, double slope0, Eigen::VectorXd& x_new,
                                                 Eigen::VectorXd& g_new, BfgsOutcome& out) {
        const double c1 = opt_.wolfe_c1;
        const double c2 = opt_.wolfe_c2;
        const double noise = rounding_level(f0);
        int budget = opt_.max_line_search_evaluations;
        (void)g0;

        auto probe = [&](double alpha) {
            x_new = x + alpha * p;
            detail::LinePoint pt;
            pt.alpha = alpha;
            pt.value = evaluate(x_new, g_new, out);
            pt.slope = g_new.dot(p);
            --budget;
            return pt;
        };
        auto sufficient = [&](const detail::LinePoint& pt) {
            if (pt.value <= f0 + c1 * pt.alpha * slope0) return true;
            return std::abs(pt.value - f0) <= noise && pt.slope <= -0.8 * slope0;
        };
        auto curvature = [&](const detail::LinePoint& pt) { return std::abs(pt.slope) <= -c2 * slope0; };
        auto too_far = [&](const detail::LinePoint& pt, const detail::LinePoint& ref) {
            return !std::isfinite(pt.value) || !sufficient(pt) || (ref.alpha > 0.0 && pt.value - ref.value > noise);
        };

        const detail::LinePoint origin{0.0, f0, slope0};
        detail::LinePoint prev = origin;
        double alpha = 1.0;
        std::optional<detail::LinePoint> lo, hi;
        while (budget > 0) {
            const auto pt = probe(alpha);
            if (too_far(pt, prev)) {
                lo = prev;
                hi = pt;
                break;
            }
            if (curvature(pt)) return pt;
            if (pt.slope >= 0.0) {
                lo = pt;
                hi = prev;
                break;
            }
            prev = pt;
            alpha *= 4.0;
        }
        if (!lo) return std::nullopt;

        while (budget > 0) {
            double trial;
            if (std::isfinite(hi->value)) {
                trial = detail::cubic_minimizer(*lo, *hi);
            } else {
                trial = 0.5 * (lo->alpha + hi->alpha);
            }
            if (std::abs(hi->alpha - lo->alpha) <= 1e-16 * std::max(1.0, std::abs(lo->alpha))) break;
            const auto pt = probe(trial);
            if (too_far(pt, *lo) || (lo->alpha == 0.0 && pt.value - lo->value > noise)) {
                hi = pt;
            } else {
                if (curvature(pt)) return pt;
                if (pt.slope * (hi->alpha - lo->alpha) >= 0.0) hi = lo;
                lo = pt;
            }
        }
        // Out of budget: accept the best Armijo point found if it made progress.
        if (lo->alpha > 0.0 && lo->value < f0) {
            x_new = x + lo->alpha * p;
            evaluate(x_new, g_new, out);
            return lo;
        }
        return std::nullopt;
    }

    Objective f_;
    MinimizeOptions opt_;
};

struct MinimizeResult {
    PolygonalCurve curve;
    EnergyBreakdown breakdown;
    int iterations = 0;
    int evaluations = 0;
    double final_criterion = 0.0;
    bool converged = false;
    std::string message;
    std::vector<TraceEntry> trace;
};

inline MinimizeResult minimize_bfgs(const DiscreteProblem& problem, const PolygonalCurve& initial,
                                    const MinimizeOptions& options = {}) {
    if (!(initial.grid() == problem.grid())) {
        throw std::invalid_argument("minimize_bfgs: initial curve lives on a different grid");
    }
    Objective objective = [&problem](std::span<const double> v, std::span<double> grad) {
        const auto g = analytic_gradient(problem, v);
        std::copy(g.begin(), g.end(), grad.begin());
        return problem.energy(v);
    };
    BfgsMinimizer bfgs(objective, options);
    auto out = bfgs.run(std::vector<double>(initial.values().begin(), initial.values().end()));
    PolygonalCurve curve(problem.grid(), std::move(out.x));
    const auto breakdown = problem.breakdown(curve.values());
    return {std::move(curve), breakdown, out.iterations, out.evaluations, out.criterion, out.converged,
            std::move(out.message), std::move(out.trace)};
}

inline MinimizeResult minimize_bfgs(const PolygonalCurve& initial, const Obstacle& psi, const PhysicalParams& params,
                                    const RegularizationParams& reg, const AdhesionProfile& zeta = quartic_profile(),
                                    const MinimizeOptions& options = {}) {
    return minimize_bfgs(DiscreteProblem(initial.grid(), psi, params, reg, zeta), initial, options);
}

}  // namespace elastica
