#include "elastica/gradient.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace elastica;

namespace {

const Term single_terms[] = {Term::bending, Term::tension, Term::adhesion, Term::penalty, Term::all};

double inf_norm(const std::vector<double>& g) {
    double m = 0.0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
}

/// Energy of the selected terms through the definition oracle.
double oracle_energy(const DiscreteProblem& p, const std::vector<double>& v, Term t,
                     const std::function<double(double)>& zeta) {
    const std::vector<double> obst(p.obstacle_values().begin(), p.obstacle_values().end());
    const auto e = oracle::energy(v, obst, p.params().C, p.params().sigma, p.params().gamma, p.regularization().delta,
                                  p.regularization().rho, zeta);
    double s = 0.0;
    if (has(t, Term::bending)) s += e.bending;
    if (has(t, Term::tension)) s += e.tension;
    if (has(t, Term::adhesion)) s -= e.adhesion;
    if (has(t, Term::penalty)) s += e.penalty;
    return s;
}

}  // namespace

TEST(Gradient, ConstantCurveWithClearanceIsStationary) {
    const PeriodicGrid g(32);
    const auto psi = sinusoidal_obstacle();
    const RegularizationParams reg{g.width(), g.width() / 100};
    const DiscreteProblem p(g, psi, {1e-3, 0.01, 1.0}, reg);
    const std::vector<double> v(32, 0.03 + 2 * reg.delta);
    for (Term t : single_terms) {
        for (double x : analytic_gradient(p, v, t)) EXPECT_EQ(x, 0.0) << term_name(t);
    }
}

TEST(Gradient, MatchesCentralDifferencesOnRandomCurves) {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (Index n : {16, 50, 128}) {
        const PeriodicGrid g(n);
        const auto psi = sinusoidal_obstacle();
        const RegularizationParams reg{g.width(), g.width() / 100};
        const DiscreteProblem p(g, psi, PhysicalParams::from_half_bending(0.0005, 0.01, 1.0), reg);
        const auto obst = nodal_obstacle(g, psi);
        for (int seed = 0; seed < 20; ++seed) {
            const auto v = oracle::perturbed_off_kinks(obst, 1.2 * reg.delta, reg.delta, 1e-4 * reg.delta, rng);
            for (Term t : single_terms) {
                const auto an = analytic_gradient(p, v, t);
                const auto fd = finite_difference_gradient(p, v, t);
                const double err = relative_inf_error(an, fd);
                worst = std::max(worst, err);
                EXPECT_LE(err, 1e-6) << "N=" << n << " seed=" << seed << " term=" << term_name(t);
            }
        }
    }
    RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Gradient, MatchesDefinitionOracleDifferences) {
    // differentiate the independent energy oracle rather than the library energy
    std::mt19937_64 rng(77);
    const PeriodicGrid g(24);
    const auto psi = near_singular_obstacle(0.01);
    const RegularizationParams reg{g.width(), g.width() / 1000};
    const DiscreteProblem p(g, psi, PhysicalParams::from_half_bending(0.1, 1.0, 1.0), reg);
    const auto obst = nodal_obstacle(g, psi);
    for (int k = 0; k < 5; ++k) {
        const auto v = oracle::perturbed(obst, 1.2 * reg.delta, rng);
        const auto an = analytic_gradient(p, v);
        auto f = [&](const std::vector<double>& x) { return oracle_energy(p, x, Term::all, oracle::quartic); };
        double scale = std::max(1.0, inf_norm(an));
        for (std::size_t j = 0; j < v.size(); ++j) {
            EXPECT_NEAR(an[j], oracle::partial(f, v, j, 1e-6), 1e-6 * scale) << "j=" << j;
        }
    }
}

TEST(Gradient, SexticProfile) {
    std::mt19937_64 rng(5);
    const PeriodicGrid g(50);
    const auto psi = sinusoidal_obstacle();
    const RegularizationParams reg{g.width(), g.width() / 100};
    const DiscreteProblem p(g, psi, {1e-3, 0.01, 2.0}, reg, sextic_profile());
    for (int k = 0; k < 5; ++k) {
        const auto v = oracle::perturbed(nodal_obstacle(g, psi), reg.delta, rng);
        EXPECT_LE(relative_inf_error(analytic_gradient(p, v, Term::adhesion), finite_difference_gradient(p, v, Term::adhesion)), 1e-6);
    }
}

TEST(Gradient, TranslationInvariantTermsSumToZero) {
    std::mt19937_64 rng(6);
    const PeriodicGrid g(64);
    const auto psi = sinusoidal_obstacle();
    const DiscreteProblem p(g, psi, {1e-3, 0.01, 1.0}, {g.width(), g.width() / 100});
    for (int k = 0; k < 10; ++k) {
        const auto v = oracle::perturbed(nodal_obstacle(g, psi), 0.02, rng);
        for (Term t : {Term::bending, Term::tension}) {
            const auto an = analytic_gradient(p, v, t);
            double sum = 0.0;
            for (double x : an) sum += x;
            EXPECT_NEAR(sum, 0.0, 1e-10 * std::max(1.0, inf_norm(an))) << term_name(t);
        }
    }
}

TEST(Gradient, SmoothAcrossStraightConfigurations) {
    // nodes 3..7 collinear: theta = 0 at the interior joints
    std::vector<double> v{0.0, 0.05, -0.02, 0.0, 0.01, 0.02, 0.03, 0.04, -0.03, 0.01, 0.02, -0.01};
    const PeriodicGrid g(12);
    const DiscreteProblem p(g, flat_obstacle(-1.0), {0.01, 0.1, 1.0}, {0.01, 1e-3});
    const auto at = analytic_gradient(p, v, Term::bending);
    for (double x : at) EXPECT_TRUE(std::isfinite(x));
    for (std::size_t j : {4u, 5u, 6u}) {
        // the gap between one-sided differences vanishes linearly in the step: no kink
        auto w = v;
        const double e0 = p.energy(w, Term::bending);
        auto one_sided = [&](double s) {
            w[j] = v[j] + s;
            const double ep = p.energy(w, Term::bending);
            w[j] = v[j] - s;
            const double em = p.energy(w, Term::bending);
            w[j] = v[j];
            return std::pair{(ep - e0) / s, (e0 - em) / s};
        };
        const auto [r1, l1] = one_sided(1e-3);
        const auto [r2, l2] = one_sided(1e-4);
        const double scale = std::max(1.0, inf_norm(at));
        EXPECT_NEAR(std::abs(r2 - l2) / std::abs(r1 - l1), 0.1, 0.01);
        EXPECT_NEAR(0.5 * (r2 + l2), at[j], 1e-6 * scale);
        // nearby configurations give nearby gradients
        w[j] = v[j] + 1e-9;
        EXPECT_NEAR(analytic_gradient(p, w, Term::bending)[j], at[j], 1e-5 * scale);
    }
}

TEST(FiniteDifferenceGradient, Examples) {
    const PeriodicGrid g(4);
    const DiscreteProblem p(g, flat_obstacle(0.0), {1, 1, 1}, {0.01, 0.01});
    for (double x : finite_difference_gradient(p, std::vector<double>(4, 0.3), Term::tension)) EXPECT_NEAR(x, 0.0, 1e-9);

    // P = 0.1^2 h / rho, so dP/dv_1 = -2 * 0.1 * 0.25 / 0.01
    const std::vector<double> v{0.0, -0.1, 0.0, 0.0};
    const auto fd = finite_difference_gradient(p, v, Term::penalty);
    EXPECT_NEAR(fd[1], -5.0, 1e-8);
    EXPECT_NEAR(fd[0], 0.0, 1e-4);
    EXPECT_NEAR(fd[2], 0.0, 1e-4);
    const auto an = analytic_gradient(p, v, Term::penalty);
    EXPECT_DOUBLE_EQ(an[1], -5.0);
    EXPECT_EQ(an[0], 0.0);
}

TEST(Gradient, CurveOverloadsAgree) {
    std::mt19937_64 rng(17);
    const PeriodicGrid g(20);
    const auto psi = sinusoidal_obstacle();
    const RegularizationParams reg{g.width(), g.width() / 100};
    const PhysicalParams par{1e-3, 0.01, 1.0};
    const PolygonalCurve c(g, oracle::perturbed(nodal_obstacle(g, psi), reg.delta, rng));
    const DiscreteProblem p(g, psi, par, reg);
    EXPECT_EQ(analytic_gradient(c, psi, par, reg), analytic_gradient(p, c.values()));
    EXPECT_EQ(finite_difference_gradient(c, psi, par, reg), finite_difference_gradient(p, c.values()));
}

TEST(BendingWeightPartials, MatchCentralDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng);
        const auto w = bending_weight_partials(a, b);
        const double s = 1e-7 * a;
        EXPECT_NEAR(w.da, (bending_weight(a + s, b) - bending_weight(a - s, b)) / (2 * s), 1e-6 * std::abs(w.da) + 1e-6);
        EXPECT_NEAR(w.db, (bending_weight(a, b + s) - bending_weight(a, b - s)) / (2 * s), 1e-6 * std::abs(w.db) + 1e-6);
    }
}
