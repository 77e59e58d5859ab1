/**
 * Obstacle catalog and obstacle-derived constants.
 *
 * An Obstacle is an immutable pair (psi, psi') on [0, 1]. The two built-in
 * obstacles are the sinusoidal ripple 0.03 sin(24 pi x) and the sharply
 * peaked eps^2 x^2 (1-x)^2 / (eps^2 + (2x-1)^2). Custom obstacles are read
 * from (x, psi) samples and interpolated by a periodic cubic spline.
 */
#pragma once

#include "elastica/params.hpp"
#include "elastica/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastica {

class Obstacle {
public:
    using Fn = std::function<double(double)>;

    Obstacle(std::string name, Fn value, Fn derivative)
        : name_(std::move(name)), value_(std::move(value)), derivative_(std::move(derivative)) {
        periodic_ = std::abs(value_(0.0) - value_(1.0)) <= 1e-12;
        check_derivative();
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] bool periodic() const noexcept { return periodic_; }
    [[nodiscard]] double operator()(double x) const { return value_(x); }
    [[nodiscard]] double derivative(double x) const { return derivative_(x); }
    [[nodiscard]] const Fn& value_fn() const noexcept { return value_; }

private:
    void check_derivative() const {
        constexpr int samples = 97;
        for (int k = 0; k < samples; ++k) {
            const double x = (k + 0.5) / samples;
            const double step = 1e-6;
            const double fd = (value_(x + step) - value_(x - step)) / (2.0 * step);
            const double exact = derivative_(x);
            if (std::abs(fd - exact) > 1e-6 * std::max(1.0, std::abs(exact))) {
                throw std::invalid_argument("Obstacle '" + name_ +
                                            "': derivative inconsistent with values at x=" +
                                            std::to_string(x));
            }
        }
    }

    std::string name_;
    Fn value_;
    Fn derivative_;
    bool periodic_ = false;
};

inline Obstacle flat_obstacle(double height = 0.0) {
    return {"flat", [height](double) { return height; }, [](double) { return 0.0; }};
}

/// psi_1(x) = 0.03 sin(24 pi x).
inline Obstacle sinusoidal_obstacle(double amplitude = 0.03, int frequency = 12) {
    const double w = 2.0 * std::numbers::pi * frequency;
    return {"sin24", [=](double x) { return amplitude * std::sin(w * x); },
            [=](double x) { return amplitude * w * std::cos(w * x); }};
}

/// psi_2(x) = eps^2 x^2 (1-x)^2 / (eps^2 + (2x-1)^2); peak value 1/16 at x = 1/2.
inline Obstacle near_singular_obstacle(double epsilon = 0.01) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("near_singular_obstacle: epsilon must be positive");
    const double e2 = epsilon * epsilon;
    auto value = [e2](double x) {
        const double q = x * (1.0 - x);
        const double s = 2.0 * x - 1.0;
        return e2 * q * q / (e2 + s * s);
    };
    auto derivative = [e2](double x) {
        const double q = x * (1.0 - x);
        const double s = 2.0 * x - 1.0;
        const double den = e2 + s * s;
        // d/dx [q^2] = 2 q (1 - 2x) = -2 q s ;  d/dx [den] = 4 s
        return e2 * (-2.0 * q * s * den - q * q * 4.0 * s) / (den * den);
    };
    std::ostringstream nm;
    nm << "peak(eps=" << epsilon << ")";
    return {nm.str(), value, derivative};
}

/// Periodic cubic spline through (x_i, y_i), x_i strictly increasing in [0, 1).
class PeriodicSpline {
public:
    PeriodicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw std::invalid_argument("PeriodicSpline: need >= 3 samples");
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("PeriodicSpline: x must increase");
        }
        if (x_.front() < 0.0 || x_.back() >= 1.0) {
            throw std::invalid_argument("PeriodicSpline: samples must lie in [0, 1)");
        }
        solve_moments();
    }

    [[nodiscard]] double value(double x) const {
        const auto [i, t, w] = locate(x);
        const std::size_t k = (i + 1) % x_.size();
        const double a = 1.0 - t;
        return a * y_[i] + t * y_[k] + w * w / 6.0 * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[k]);
    }

    [[nodiscard]] double derivative(double x) const {
        const auto [i, t, w] = locate(x);
        const std::size_t k = (i + 1) % x_.size();
        const double a = 1.0 - t;
        return (y_[k] - y_[i]) / w + w / 6.0 * (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * t * t - 1.0) * m_[k]);
    }

private:
    struct Cell {
        std::size_t index;
        double t;
        double width;
    };

    [[nodiscard]] double gap(std::size_t i) const {
        return i + 1 < x_.size() ? x_[i + 1] - x_[i] : 1.0 + x_.front() - x_.back();
    }

    [[nodiscard]] Cell locate(double x) const {
        double u = x - std::floor(x);
        if (u < x_.front()) u += 1.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), u);
        const auto i = static_cast<std::size_t>(std::distance(x_.begin(), it)) - 1;
        const double w = gap(i);
        return {i, (u - x_[i]) / w, w};
    }

    // Cyclic tridiagonal system for the second derivatives, solved with the
    // Sherman-Morrison correction on top of the Thomas algorithm.
    void solve_moments() {
        const std::size_t n = x_.size();
        std::vector<double> sub(n), diag(n), sup(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + n - 1) % n;
            const std::size_t in = (i + 1) % n;
            const double hl = gap(ip);
            const double hr = gap(i);
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (y_[in] - y_[i]) / hr - (y_[i] - y_[ip]) / hl;
        }
        const double alpha = sup[n - 1];  // A[n-1][0]
        const double beta = sub[0];       // A[0][n-1]
        const double gamma = -diag[0];
        std::vector<double> b = diag;
        b[0] -= gamma;
        b[n - 1] -= alpha * beta / gamma;
        auto thomas = [&](std::vector<double> r) {
            std::vector<double> c(n), d(n);
            c[0] = sup[0] / b[0];
            d[0] = r[0] / b[0];
            for (std::size_t i = 1; i < n; ++i) {
                const double m = b[i] - sub[i] * c[i - 1];
                c[i] = sup[i] / m;
                d[i] = (r[i] - sub[i] * d[i - 1]) / m;
            }
            for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
            return d;
        };
        const std::vector<double> xs = thomas(rhs);
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = alpha;
        const std::vector<double> z = thomas(u);
        const double fact = (xs[0] + beta * xs[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
        m_.resize(n);
        for (std::size_t i = 0; i < n; ++i) m_[i] = xs[i] - fact * z[i];
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

/// Reads "x,psi" CSV samples (header optional). A trailing sample at x = 1 must
/// repeat the value at x = 0 and is dropped.
inline Obstacle obstacle_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open obstacle file '" + path + "'");
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0, y = 0.0;
        if (!(row >> x >> y)) continue;  // header or comment
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() >= 2 && std::abs(xs.back() - 1.0) < 1e-12) {
        if (std::abs(ys.back() - ys.front()) > 1e-12) {
            throw std::invalid_argument("obstacle file '" + path + "' is not periodic");
        }
        xs.pop_back();
        ys.pop_back();
    }
    auto spline = std::make_shared<const PeriodicSpline>(std::move(xs), std::move(ys));
    return {"csv:" + path, [spline](double x) { return spline->value(x); },
            [spline](double x) { return spline->derivative(x); }};
}

/// Resolves "sin24", "peak", "peak(eps=0.02)", "flat", "flat(h=0.1)" or "csv:<path>".
inline Obstacle obstacle_by_name(const std::string& spec) {
    static const std::regex peak(R"(peak(?:\(eps=([-+0-9.eE]+)\))?)");
    static const std::regex flat(R"(flat(?:\(h=([-+0-9.eE]+)\))?)");
    std::smatch m;
    if (spec == "sin24") return sinusoidal_obstacle();
    if (std::regex_match(spec, m, peak)) {
        return near_singular_obstacle(m[1].matched ? std::stod(m[1].str()) : 0.01);
    }
    if (std::regex_match(spec, m, flat)) return flat_obstacle(m[1].matched ? std::stod(m[1].str()) : 0.0);
    if (spec.rfind("csv:", 0) == 0) return obstacle_from_csv(spec.substr(4));
    throw std::invalid_argument("unknown obstacle '" + spec + "'");
}

struct ObstacleConstants {
    double tension_of_psi = 0.0;    ///< T[psi] = sigma * length of the graph of psi
    double lipschitz_of_psi = 0.0;  ///< max |psi'|
    double sup_norm_of_psi = 0.0;   ///< max |psi|
};

namespace detail {

/// max of g over [0,1]: dense sampling followed by golden-section refinement
/// around the best sample.
inline double sampled_max(const std::function<double(double)>& g, int samples = 100000) {
    double best_x = 0.0;
    double best = g(0.0);
    for (int k = 1; k < samples; ++k) {
        const double x = static_cast<double>(k) / samples;
        const double v = g(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double span = 1.0 / samples;
    double a = best_x - span;
    double b = best_x + span;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double gc = g(c);
    double gd = g(d);
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return std::max({best, gc, gd});
}

}  // namespace detail

inline ObstacleConstants obstacle_constants(const Obstacle& psi, const PhysicalParams& params) {
    ObstacleConstants k;
    const auto length = integrate([&](double x) { return std::hypot(1.0, psi.derivative(x)); }, 0.0, 1.0);
    k.tension_of_psi = params.sigma * length.value;
    k.lipschitz_of_psi = detail::sampled_max([&](double x) { return std::abs(psi.derivative(x)); });
    k.sup_norm_of_psi = detail::sampled_max([&](double x) { return std::abs(psi(x)); });
    return k;
}

struct SufficientConditionReport {
    double lhs = 0.0;
    bool holds = false;
    double margin = 0.0;  ///< pi/2 - lhs
};

/// Global-optimization test for the bounded-slope problem:
///   (1/sqrt(2 C sigma)) [sigma + 4 gamma (T[psi]/sigma + c0)] + arctan(|psi|_{W1,inf} + 2 c0) < pi/2
inline SufficientConditionReport sufficient_condition(const PhysicalParams& params,
                                                      const ObstacleConstants& k, double c0 = 1.0) {
    if (!(c0 > 0.0)) throw std::invalid_argument("sufficient_condition: c0 must be positive");
    SufficientConditionReport r;
    const double energy_bound = params.sigma + 4.0 * params.gamma * (k.tension_of_psi / params.sigma + c0);
    r.lhs = energy_bound / std::sqrt(2.0 * params.C * params.sigma) + std::atan(k.lipschitz_of_psi + 2.0 * c0);
    r.margin = std::numbers::pi / 2.0 - r.lhs;
    r.holds = r.margin > 0.0;
    return r;
}

inline SufficientConditionReport sufficient_condition(const PhysicalParams& params, const Obstacle& psi,
                                                      double c0 = 1.0) {
    return sufficient_condition(params, obstacle_constants(psi, params), c0);
}

/// Smallest bending modulus C for which the sufficient condition holds with the
/// given margin, found by bisection in log C (lhs is strictly decreasing in C).
inline double sufficient_bending_threshold(double sigma, double gamma, const ObstacleConstants& k,
                                           double c0 = 1.0, double margin = 1e-9) {
    const double target = std::numbers::pi / 2.0 - margin;
    auto lhs = [&](double log_c) {
        return sufficient_condition({std::exp(log_c), sigma, gamma}, k, c0).lhs - target;
    };
    double lo = -60.0;
    double hi = 60.0;
    if (lhs(lo) <= 0.0 || lhs(hi) >= 0.0) {
        throw std::domain_error("sufficient_bending_threshold: no sign change in bracket");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace elastica
