#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace elastica {

/// Bending modulus C, tension sigma and adhesion gamma. Note the published
/// parameter tables list C/2, not C.
struct PhysicalParams {
    double C = 1.0;
    double sigma = 1.0;
    double gamma = 1.0;

    static PhysicalParams from_half_bending(double half_C, double sigma, double gamma) {
        return {2.0 * half_C, sigma, gamma};
    }

    void validate() const {
        if (!(C > 0.0) || !(sigma > 0.0) || !(gamma > 0.0)) {
            throw std::invalid_argument("PhysicalParams: C, sigma and gamma must be positive");
        }
    }
};

/// Adhesion range delta and penalty parameter rho.
struct RegularizationParams {
    double delta = 0.01;
    double rho = 1e-4;

    void validate() const {
        if (!(delta > 0.0) || !(rho > 0.0)) {
            throw std::invalid_argument("RegularizationParams: delta and rho must be positive");
        }
    }
};

/// Even cutoff zeta with zeta(0) = 1 and support [-1, 1]; zeta_delta(t) = zeta(t / delta).
struct AdhesionProfile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    [[nodiscard]] double scaled(double t, double delta) const { return value(t / delta); }
    [[nodiscard]] double scaled_derivative(double t, double delta) const {
        return derivative(t / delta) / delta;
    }
};

/// zeta(t) = (1 - t^2)^2 on |t| <= 1, zero outside. C^1.
inline AdhesionProfile quartic_profile() {
    return {"quartic",
            [](double t) {
                const double s = 1.0 - t * t;
                return std::abs(t) < 1.0 ? s * s : 0.0;
            },
            [](double t) { return std::abs(t) < 1.0 ? -4.0 * t * (1.0 - t * t) : 0.0; }};
}

/// zeta(t) = (1 - t^2)^3 on |t| <= 1. C^2 alternative for sensitivity runs.
inline AdhesionProfile sextic_profile() {
    return {"sextic",
            [](double t) {
                const double s = 1.0 - t * t;
                return std::abs(t) < 1.0 ? s * s * s : 0.0;
            },
            [](double t) {
                const double s = 1.0 - t * t;
                return std::abs(t) < 1.0 ? -6.0 * t * s * s : 0.0;
            }};
}

inline AdhesionProfile profile_by_name(const std::string& name) {
    if (name == "quartic") return quartic_profile();
    if (name == "sextic") return sextic_profile();
    throw std::invalid_argument("unknown adhesion profile '" + name + "'");
}

}  // namespace elastica
