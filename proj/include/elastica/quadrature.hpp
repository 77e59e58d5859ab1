// Adaptive quadrature on finite intervals with an absolute error target.
#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace elastica {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    bool used_fallback = false;
};

struct QuadratureOptions {
    double absolute_tolerance = 1e-10;
    /// Accepted as well when |value| is large enough that the absolute target is below rounding.
    double relative_tolerance = 1e-12;
    unsigned max_depth = 15;
    int fallback_panels = 10000;
};

/// Composite 7-point Gauss-Legendre on equal panels.
inline double composite_gauss(const std::function<double(double)>& f, double a, double b,
                              int panels) {
    using Rule = boost::math::quadrature::gauss<double, 7>;
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * w;
        sum += Rule::integrate(f, lo, lo + w);
    }
    return sum;
}

/// Adaptive Gauss-Kronrod (15/31) on [a, b]. When the adaptive error estimate
/// misses the tolerance the composite rule is used instead and the difference
/// between the two is reported as the error estimate.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opt = {}) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto within = [&](double value, double err) {
        return std::isfinite(value) &&
               err <= std::max(opt.absolute_tolerance, opt.relative_tolerance * std::abs(value));
    };
    QuadratureResult r;
    double err = 0.0;
    r.value = GK::integrate(f, a, b, opt.max_depth, opt.relative_tolerance, &err);
    r.error_estimate = err;
    if (within(r.value, err)) {
        r.converged = true;
        return r;
    }
    const double composite = composite_gauss(f, a, b, opt.fallback_panels);
    r.used_fallback = true;
    r.error_estimate = std::abs(composite - r.value);
    r.value = composite;
    r.converged = within(composite, r.error_estimate);
    return r;
}

}  // namespace elastica
