#include "elastica/experiments.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace elastica;

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

ExperimentConfig small_config() {
    auto c = ripple_preset(1, {48, 96});
    c.name = "small";
    c.guesses = {{"F", "full-adhesion"}, {"B", "arcs(n=6,rise=0.2)"}, {"A", "constant(offset=0)"}};
    return c;
}

const RunRecord& small_record() {
    static const RunRecord r = run_experiment(small_config());
    return r;
}

}  // namespace

TEST(ScaleRule, Parse) {
    EXPECT_DOUBLE_EQ(ScaleRule::parse("h").apply(0.01), 0.01);
    EXPECT_DOUBLE_EQ(ScaleRule::parse("h/100").apply(0.01), 1e-4);
    EXPECT_DOUBLE_EQ(ScaleRule::parse(" h / 1000 ").apply(0.5), 5e-4);
    EXPECT_DOUBLE_EQ(ScaleRule::parse("0.5h").apply(0.01), 0.005);
    EXPECT_DOUBLE_EQ(ScaleRule::parse("2*h").apply(0.01), 0.02);
    EXPECT_DOUBLE_EQ(ScaleRule::parse("0.003").apply(0.01), 0.003);
    EXPECT_THROW(ScaleRule::parse("h^2"), std::invalid_argument);
    for (const char* s : {"h", "h/100", "0.25*h", "0.003"}) {
        const auto r = ScaleRule::parse(s);
        EXPECT_DOUBLE_EQ(ScaleRule::parse(r.str()).apply(0.02), r.apply(0.02)) << s;
    }
}

TEST(GuessSpec, ParseAndFormat) {
    const auto g = GuessSpec::parse("arcs(n=6, rise=0.2)");
    EXPECT_EQ(g.kind, GuessKind::raised_arcs);
    EXPECT_EQ(g.arg("n", 0), 6.0);
    EXPECT_EQ(g.arg("rise", 0), 0.2);
    EXPECT_EQ(g.arg("missing", 7.0), 7.0);
    EXPECT_EQ(GuessSpec::parse(g.str()).args, g.args);
    EXPECT_EQ(GuessSpec::parse("full-adhesion").kind, GuessKind::full_adhesion);
    EXPECT_THROW(GuessSpec::parse("zigzag(n=2)"), std::invalid_argument);
    EXPECT_THROW(GuessSpec::parse("arcs(6)"), std::invalid_argument);
}

TEST(InitialGuess, Examples) {
    const RegularizationParams reg{0.01, 1e-4};
    const auto c = initial_guess(GuessSpec::parse("constant(offset=0.1)"), PeriodicGrid(10), flat_obstacle(), reg);
    for (Index j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(c[j], 0.1);

    const auto full = initial_guess(GuessSpec::parse("full-adhesion"), PeriodicGrid(100), sinusoidal_obstacle(), reg);
    for (Index j = 0; j < 100; ++j) EXPECT_EQ(full[j], 0.03 * std::sin(24 * std::numbers::pi * (j * 0.01)));

    const auto spike = initial_guess(GuessSpec::parse("center-spike(height=1)"), PeriodicGrid(4), flat_obstacle(), reg);
    EXPECT_EQ(spike, PolygonalCurve(PeriodicGrid(4), {0.0, 0.0, 1.0, 0.0}));

    const auto top = initial_guess(GuessSpec::parse("constant(offset_delta=10)"), PeriodicGrid(100),
                                   near_singular_obstacle(0.01), reg);
    EXPECT_DOUBLE_EQ(top[3], 1.0 / 16 + 0.1);
}

TEST(InitialGuess, RandomIsSeeded) {
    const RegularizationParams reg{0.01, 1e-4};
    const auto psi = sinusoidal_obstacle();
    const auto a = initial_guess(GuessSpec::parse("random(seed=4,amplitude=0.01)"), PeriodicGrid(30), psi, reg);
    const auto b = initial_guess(GuessSpec::parse("random(seed=4,amplitude=0.01)"), PeriodicGrid(30), psi, reg);
    const auto c = initial_guess(GuessSpec::parse("random(seed=5,amplitude=0.01)"), PeriodicGrid(30), psi, reg);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    const auto obst = nodal_obstacle(PeriodicGrid(30), psi);
    for (Index j = 0; j < 30; ++j) {
        EXPECT_GE(a[j], obst[static_cast<std::size_t>(j)]);
        EXPECT_LE(a[j], obst[static_cast<std::size_t>(j)] + 0.01);
    }
}

TEST(InitialGuess, ArcsMustDivideCrests) {
    const RegularizationParams reg{0.01, 1e-4};
    EXPECT_THROW(initial_guess(GuessSpec::parse("arcs(n=5)"), PeriodicGrid(100), sinusoidal_obstacle(), reg),
                 std::invalid_argument);
    EXPECT_THROW(initial_guess(GuessSpec::parse("arcs(n=12)"), PeriodicGrid(100), sinusoidal_obstacle(), reg),
                 std::invalid_argument);
}

TEST(Classify, Examples) {
    const PeriodicGrid g(100);
    const auto psi = sinusoidal_obstacle();
    const RegularizationParams reg{g.width(), g.width() / 100};

    const auto full = classify(interpolate(g, psi.value_fn()), psi, reg);
    EXPECT_EQ(full.fraction, 1.0);
    EXPECT_EQ(full.runs, 1);

    const auto above = classify(PolygonalCurve::constant(g, 0.03 + reg.delta), psi, reg);
    EXPECT_EQ(above.fraction, 0.0);
    EXPECT_EQ(above.runs, 0);

    const auto arc = classify(initial_guess(GuessSpec::parse("arcs(n=1,rise=0.2)"), g, psi, reg), psi, reg);
    EXPECT_EQ(arc.runs, 1);
    EXPECT_LT(arc.fraction, 1.0);
    EXPECT_GT(arc.fraction, 0.0);
}

TEST(Classify, MonotoneInDelta) {
    std::mt19937_64 rng(31);
    const PeriodicGrid g(80);
    const auto psi = sinusoidal_obstacle();
    for (int k = 0; k < 20; ++k) {
        const PolygonalCurve v(g, oracle::perturbed(nodal_obstacle(g, psi), 0.02, rng));
        double prev = -1.0;
        for (double delta : {1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1}) {
            const double f = classify(v, psi, {delta, 1e-4}).fraction;
            EXPECT_GE(f, prev);
            EXPECT_GE(f, 0.0);
            EXPECT_LE(f, 1.0);
            prev = f;
        }
    }
}

TEST(IdentifyType, RippleGuessesCarryTheirIntendedType) {
    for (Index n : {100, 200, 400}) {
        const PeriodicGrid g(n);
        const auto psi = sinusoidal_obstacle();
        const RegularizationParams reg{g.width(), g.width() / 100};
        const auto obst = nodal_obstacle(g, psi);
        for (const auto& t : ripple_types()) {
            const auto v = initial_guess(GuessSpec::parse(t.guess), g, psi, reg);
            EXPECT_EQ(identify_type(TypeScheme::ripple, classify(v, obst, reg.delta), obst), t.label) << n << t.guess;
        }
        // one arc over eleven periods is not a symmetric Type
        const auto one = initial_guess(GuessSpec::parse("arcs(n=1)"), g, psi, reg);
        EXPECT_EQ(identify_type(TypeScheme::ripple, classify(one, obst, reg.delta), obst), "arcs(1)");
    }
}

TEST(IdentifyType, PeakGuessesCarryTheirIntendedType) {
    const PeriodicGrid g(200);
    const auto psi = near_singular_obstacle(0.01);
    const RegularizationParams reg{g.width(), g.width() / 1000};
    const auto obst = nodal_obstacle(g, psi);
    for (const auto& t : peak_types()) {
        const auto v = initial_guess(GuessSpec::parse(t.guess), g, psi, reg);
        EXPECT_EQ(identify_type(TypeScheme::peak, classify(v, obst, reg.delta), obst), t.label) << t.guess;
    }
    // a straight curve touching only the peak is the detached Type
    const auto graze = PolygonalCurve::constant(g, 1.0 / 16);
    EXPECT_EQ(identify_type(TypeScheme::peak, classify(graze, obst, reg.delta), obst), "A");
}

TEST(Presets, Parameters) {
    EXPECT_DOUBLE_EQ(ripple_parameters(1).C, 0.001);
    EXPECT_DOUBLE_EQ(ripple_parameters(2).gamma, 2.0);
    EXPECT_DOUBLE_EQ(peak_parameters(3).C, 0.002);
    EXPECT_DOUBLE_EQ(peak_parameters(2).gamma, 0.01);
    EXPECT_THROW(ripple_parameters(3), std::invalid_argument);
    EXPECT_THROW(peak_parameters(0), std::invalid_argument);
    const auto r = ripple_preset(1);
    EXPECT_DOUBLE_EQ(r.rho_rule.apply(0.01), 1e-4);
    EXPECT_DOUBLE_EQ(r.delta_rule.apply(0.01), 0.01);
    EXPECT_DOUBLE_EQ(peak_preset(1).rho_rule.apply(0.01), 1e-5);
    EXPECT_NO_THROW(r.validate());
}

TEST(ExperimentConfig, Validation) {
    auto c = small_config();
    c.grid_sizes = {200, 100};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.guesses.clear();
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.rho_rule = {0.0, true};
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ExperimentConfig, JsonRoundTripAndOverrides) {
    auto c = ripple_preset(2);
    c.options.tolerance = 3e-6;
    c.threads = 3;
    const auto j = to_json(c);
    EXPECT_EQ(to_json(config_from_json(j)).dump(), j.dump());

    const auto partial = json::parse(R"({"params": {"half_C": 0.25}, "grid_sizes": [8, 16], "rho_rule": "h/10"})");
    const auto d = config_from_json(partial, c);
    EXPECT_DOUBLE_EQ(d.params.C, 0.5);
    EXPECT_DOUBLE_EQ(d.params.sigma, c.params.sigma);
    EXPECT_EQ(d.grid_sizes, (std::vector<Index>{8, 16}));
    EXPECT_DOUBLE_EQ(d.rho_rule.apply(1.0), 0.1);
    EXPECT_EQ(d.guesses.size(), c.guesses.size());
}

TEST(RunExperiment, CellsFollowConfiguredOrder) {
    const auto& r = small_record();
    ASSERT_EQ(r.cells.size(), 6u);
    const char* labels[] = {"F", "B", "A"};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(r.cells[i].N, i < 3 ? 48 : 96);
        EXPECT_EQ(r.cells[i].label, labels[i % 3]);
    }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
    auto c = small_config();
    c.threads = 1;
    auto serial = run_experiment(c);
    c.threads = 6;
    auto parallel = run_experiment(c);
    ASSERT_EQ(serial.cells.size(), parallel.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        serial.cells[i].wall_time_s = parallel.cells[i].wall_time_s = 0.0;
        EXPECT_EQ(serial.cells[i], parallel.cells[i]) << i;
    }
}

TEST(RunExperiment, ConvergedRunsSatisfyContractsPostHoc) {
    const auto& r = small_record();
    const auto psi = obstacle_by_name(r.config.obstacle);
    const auto k = obstacle_constants(psi, r.config.params);
    for (const auto& c : r.cells) {
        ASSERT_TRUE(c.converged) << c.label << " N=" << c.N << " " << c.message;
        const PeriodicGrid g(c.N);
        const RegularizationParams reg{r.config.delta_rule.apply(g.width()), r.config.rho_rule.apply(g.width())};
        const DiscreteProblem p(g, psi, r.config.params, reg);
        const auto e = p.breakdown(c.curve);
        EXPECT_LE(stopping_criterion(analytic_gradient(p, c.curve), e.total), 1e-5);
        EXPECT_EQ(e, c.energy);
        // a priori bounds on minimizers with delta <= h
        double sup = 0.0;
        for (double v : c.curve) sup = std::max(sup, std::abs(v));
        const double slack = 4.0 * r.config.params.gamma * (k.tension_of_psi / r.config.params.sigma + 1.0);
        EXPECT_LE(sup, 1.0 + r.config.params.sigma + k.sup_norm_of_psi + reg.delta + slack);
        EXPECT_LE(e.adhesion, slack);
    }
}

TEST(Emit, CsvMatchesRecordAndJsonRoundTrips) {
    const auto& r = small_record();
    std::istringstream csv(record_csv(r));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, record_csv_header);
    const auto header = split(line);
    for (const auto& c : r.cells) {
        ASSERT_TRUE(std::getline(csv, line));
        const auto f = split(line);
        ASSERT_EQ(f.size(), header.size());
        EXPECT_EQ(f[0], r.config.name);
        EXPECT_EQ(std::stol(f[1]), c.N);
        EXPECT_EQ(f[2], c.label);
        EXPECT_EQ(f[3], c.guess);
        EXPECT_EQ(std::stod(f[8]), c.energy.total);
        EXPECT_EQ(std::stod(f[4]), c.energy.bending);
        EXPECT_EQ(std::stoi(f[9]), c.iterations);
        EXPECT_EQ(std::stod(f[11]), c.criterion);
        EXPECT_EQ(f[12], c.converged ? "1" : "0");
        EXPECT_EQ(std::stod(f[13]), c.lipschitz);
        EXPECT_EQ(f[17], c.identified);
    }
    EXPECT_FALSE(std::getline(csv, line));

    const auto back = record_from_json(json::parse(to_json(r).dump()));
    EXPECT_EQ(back.cells, r.cells);
    EXPECT_EQ(to_json(back.config).dump(), to_json(r.config).dump());
}

TEST(Emit, EmptyRecordIsHeaderOnly) {
    RunRecord empty{small_config(), {}};
    EXPECT_EQ(record_csv(empty), std::string(record_csv_header) + "\n");
}

TEST(Emit, WritesFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "elastica_emit_test";
    std::filesystem::remove_all(dir);
    emit(small_record(), dir.string());
    EXPECT_TRUE(std::filesystem::exists(dir / "small.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "small.json"));
    std::ifstream curve(dir / "small_N48_B_curve.csv");
    std::string header;
    std::getline(curve, header);
    EXPECT_EQ(header, "x,v,psi");
    std::ifstream in(dir / "small_N48_B_curve.csv");
    const auto back = read_curve_csv(in);
    EXPECT_EQ(std::vector<double>(back.values().begin(), back.values().end()), small_record().cells[1].curve);
    std::filesystem::remove_all(dir);
}

TEST(Io, CurveAndBreakdownSerialization) {
    const PolygonalCurve v(PeriodicGrid(5), {0.1, 1.0 / 3, -2.5e-7, 4.0, 0.0});
    EXPECT_EQ(curve_from_json(json::parse(to_json(v).dump())), v);
    std::stringstream s;
    write_curve_csv(s, v);
    EXPECT_EQ(read_curve_csv(s), v);
    const auto e = EnergyBreakdown::compose(0.1, 1.0, 0.3, 1.0 / 7);
    EXPECT_EQ(breakdown_from_json(json::parse(to_json(e).dump())), e);
    std::stringstream bad("a,b\n1,2\n");
    EXPECT_THROW(read_curve_csv(bad), std::runtime_error);
}

TEST(GammaStudy, ConstantFunctionHasNoBending) {
    for (const auto& row : gamma_convergence_study(constant_function(0.2), {50, 100}, {1, 1, 1})) {
        EXPECT_EQ(row.auxiliary, 0.0);
        EXPECT_EQ(row.discrete, 0.0);
        EXPECT_EQ(row.continuous, 0.0);
    }
}

TEST(GammaStudy, SineConvergesWithinOnePercent) {
    const auto rows = gamma_convergence_study(sine_function(0.1, 1), {50, 100, 200, 400}, {0.2, 1, 1});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LT(rows[i].auxiliary_error, rows[i - 1].auxiliary_error);
        EXPECT_LT(rows[i].discrete_error, rows[i - 1].discrete_error);
        EXPECT_LT(std::abs(rows[i].discrete - rows[i].auxiliary), std::abs(rows[i - 1].discrete - rows[i - 1].auxiliary));
    }
    EXPECT_LT(rows.back().auxiliary_error, 0.01 * rows.back().continuous);
    EXPECT_LT(rows.back().discrete_error, 0.01 * rows.back().continuous);
}

TEST(GammaStudy, OtherProfiles) {
    const std::vector<Index> sizes{50, 100, 200, 400, 800};
    for (const auto& fn : {sine_function(0.03, 12), cosine_function(0.05, 2)}) {
        const auto rows = gamma_convergence_study(fn, sizes, {1, 1, 1});
        for (std::size_t i = 1; i < rows.size(); ++i) {
            EXPECT_LT(rows[i].auxiliary_error, rows[i - 1].auxiliary_error) << fn.name << " N=" << rows[i].N;
            EXPECT_LT(rows[i].discrete_error, rows[i - 1].discrete_error) << fn.name << " N=" << rows[i].N;
        }
        // second order once the profile is resolved
        EXPECT_NEAR(rows[3].discrete_error / rows[4].discrete_error, 4.0, 0.2) << fn.name;
        EXPECT_LT(rows[4].auxiliary_error, 0.01 * rows[4].continuous) << fn.name;
        EXPECT_LT(rows[4].discrete_error, 0.01 * rows[4].continuous) << fn.name;
    }
    // twelve ripples leave only ~33 nodes per period at N = 400: about 1.1% off there
    const auto cosine = gamma_convergence_study(cosine_function(0.05, 2), {400}, {1, 1, 1});
    EXPECT_LT(cosine[0].discrete_error, 0.01 * cosine[0].continuous);
    EXPECT_LT(cosine[0].auxiliary_error, 0.01 * cosine[0].continuous);
}

TEST(GammaStudy, CsvAndFunctionNames) {
    const auto rows = gamma_convergence_study(test_function_by_name("sin(a=0.1,k=1)"), {50}, {1, 1, 1});
    const auto text = gamma_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), "N,auxiliary,discrete,continuous,auxiliary_error,discrete_error");
    EXPECT_DOUBLE_EQ(test_function_by_name("cos(a=0.5,k=3)").f(0.0), 0.5);
    EXPECT_DOUBLE_EQ(test_function_by_name("const(c=2)").f(0.4), 2.0);
    EXPECT_THROW(test_function_by_name("tan(a=1)"), std::invalid_argument);
}

TEST(Tables, EnergyTableMarksMissingTypes) {
    RunRecord r{small_config(), {}};
    CellRecord a;
    a.N = 100;
    a.label = "A";
    a.exists = true;
    a.energy.total = 1.0;
    CellRecord b = a;
    b.label = "B";
    b.energy.total = 0.5;
    b.exists = false;
    CellRecord c = a;
    c.label = "C";
    c.energy.total = 0.75;
    r.cells = {a, b, c};
    const auto t = build_energy_table({{2, &r}}, {"A", "B", "C", "D"});
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].global, "C");
    EXPECT_EQ(energy_table_csv(t), "parameter,N,Type A,Type B,Type C,Type D,global\n2,100,1,x,0.75,,C\n");

    CellRecord d = a;
    d.label = "D";
    d.lipschitz = 67.99121;
    r.cells.push_back(d);
    EXPECT_EQ(seminorm_table_csv({{1, &r}}, "D"), "parameter,N,Type D seminorm\n1,100,67.99121\n");
}
