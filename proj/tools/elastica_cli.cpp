// Command line front end: single runs, preset sweeps, table reproduction and
// the numerical checks. Exit status is 0 only if every minimization converged.
#include "elastica/elastica.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

using namespace elastica;

namespace {

struct Overrides {
    std::string config;
    std::string obstacle;
    std::vector<Index> sizes;
    std::optional<double> C, half_C, sigma, gamma, tol;
    std::optional<int> max_iter, threads;
    std::string delta_rule, rho_rule, profile, out;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "ExperimentConfig JSON file; flags override its fields")
            ->check(CLI::ExistingFile);
        app->add_option("--obstacle", obstacle, "sin24 | peak | peak(eps=..) | flat(h=..) | csv:<path>");
        app->add_option("--N", sizes, "grid sizes")->delimiter(',');
        app->add_option("--C", C, "bending modulus");
        app->add_option("--half-C", half_C, "C/2, as listed in the parameter tables");
        app->add_option("--sigma", sigma, "tension");
        app->add_option("--gamma", gamma, "adhesion strength");
        app->add_option("--delta-rule", delta_rule, "adhesion range, e.g. h or 0.01");
        app->add_option("--rho-rule", rho_rule, "penalty parameter, e.g. h/100");
        app->add_option("--profile", profile, "quartic | sextic");
        app->add_option("--tol", tol, "stopping tolerance");
        app->add_option("--max-iter", max_iter, "iteration cap");
        app->add_option("--threads", threads, "worker threads (0: all cores)");
        app->add_option("--out", out, "output directory");
    }

    ExperimentConfig apply(ExperimentConfig c) const {
        if (!config.empty()) {
            std::ifstream in(config);
            c = config_from_json(json::parse(in), std::move(c));
        }
        if (!obstacle.empty()) c.obstacle = obstacle;
        if (!sizes.empty()) c.grid_sizes = sizes;
        if (half_C) c.params.C = 2.0 * *half_C;
        if (C) c.params.C = *C;
        if (sigma) c.params.sigma = *sigma;
        if (gamma) c.params.gamma = *gamma;
        if (!delta_rule.empty()) c.delta_rule = ScaleRule::parse(delta_rule);
        if (!rho_rule.empty()) c.rho_rule = ScaleRule::parse(rho_rule);
        if (!profile.empty()) c.profile = profile;
        if (tol) c.options.tolerance = *tol;
        if (max_iter) c.options.max_iterations = *max_iter;
        if (threads) c.threads = *threads;
        if (!out.empty()) c.output_dir = out;
        return c;
    }
};

void print_cells(const RunRecord& r) {
    std::printf("%-22s %5s %-6s %-12s %16s %6s %10s %9s %s\n", "experiment", "N", "label", "identified", "energy",
                "iters", "criterion", "slope", "status");
    for (const auto& c : r.cells) {
        std::printf("%-22s %5td %-6s %-12s %16.9f %6d %10.3e %9.4f %s\n", r.config.name.c_str(), c.N,
                    c.label.c_str(), c.identified.c_str(), c.energy.total, c.iterations, c.criterion, c.lipschitz,
                    c.converged ? "converged" : c.message.c_str());
    }
}

bool all_converged(const RunRecord& r) {
    return std::all_of(r.cells.begin(), r.cells.end(), [](const CellRecord& c) { return c.converged; });
}

ExperimentConfig preset_by_name(const std::string& name) {
    static const std::map<std::string, std::function<ExperimentConfig()>> presets{
        {"sin24-1", [] { return ripple_preset(1); }}, {"sin24-2", [] { return ripple_preset(2); }},
        {"peak-1", [] { return peak_preset(1); }},    {"peak-2", [] { return peak_preset(2); }},
        {"peak-3", [] { return peak_preset(3); }}};
    auto it = presets.find(name);
    if (it == presets.end()) throw std::invalid_argument("unknown preset '" + name + "'");
    return it->second();
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete elastica with adhesion over a periodic obstacle"};
    app.require_subcommand(1);

    // minimize
    auto* minimize = app.add_subcommand("minimize", "one BFGS run per grid size from a single guess");
    Overrides mo;
    mo.attach(minimize);
    std::string guess = "full-adhesion", label = "run", trace_path;
    minimize->add_option("--guess", guess, "constant(offset=..) | full-adhesion | arcs(n=..,rise=..) | tent(width=..) | "
                                           "center-spike(height=..) | random(seed=..,amplitude=..)");
    minimize->add_option("--label", label, "Type this guess is meant to produce");
    minimize->add_option("--trace", trace_path, "iteration trace CSV (first grid size only)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a preset or configured guess set over all grid sizes");
    Overrides so;
    so.attach(sweep);
    std::string preset;
    sweep->add_option("--preset", preset, "sin24-1 | sin24-2 | peak-1 | peak-2 | peak-3");

    // tables
    auto* tables = app.add_subcommand("tables", "reproduce the energy and seminorm tables as CSV");
    std::vector<Index> table_sizes{100, 200, 400};
    std::string table_dir = "tables";
    int table_threads = 0;
    tables->add_option("--N", table_sizes, "grid sizes")->delimiter(',');
    tables->add_option("--out", table_dir, "output directory");
    tables->add_option("--threads", table_threads, "worker threads (0: all cores)");

    // gamma-check
    auto* gamma = app.add_subcommand("gamma-check", "discrete vs continuous bending energy of Pi_h f");
    std::string fn_name = "sin(a=0.1,k=1)", gamma_out;
    std::vector<Index> gamma_sizes{50, 100, 200, 400};
    double gamma_C = 1.0;
    gamma->add_option("--function", fn_name, "sin(a=..,k=..) | cos(a=..,k=..) | const(c=..)");
    gamma->add_option("--N", gamma_sizes, "grid sizes")->delimiter(',');
    gamma->add_option("--C", gamma_C, "bending modulus");
    gamma->add_option("--out", gamma_out, "CSV file (default: stdout)");

    // grad-check
    auto* grad = app.add_subcommand("grad-check", "analytic gradient against central differences");
    Overrides go;
    go.attach(grad);
    std::string grad_guess = "random(seed=1,amplitude=0.01)", grad_term = "all";
    double grad_step = 1e-7, grad_max = 1e-6;
    grad->add_option("--guess", grad_guess, "curve to check at");
    grad->add_option("--term", grad_term, "all | bending | tension | adhesion | penalty");
    grad->add_option("--step", grad_step, "relative finite-difference step");
    grad->add_option("--max-error", grad_max, "fail above this relative error");

    // condition
    auto* cond = app.add_subcommand("condition", "sufficient condition for the global bounded-slope minimizer");
    Overrides co;
    co.attach(cond);
    double c0 = 1.0;
    cond->add_option("--c0", c0, "slack constant");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*minimize) {
            ExperimentConfig c = mo.apply(ExperimentConfig{});
            c.name = c.name == "experiment" ? "minimize" : c.name;
            c.guesses = {{label, guess}};
            c.scheme = c.obstacle.rfind("peak", 0) == 0 ? TypeScheme::peak : TypeScheme::ripple;
            if (!trace_path.empty()) {
                std::vector<TraceEntry> trace;
                run_cell(c, obstacle_by_name(c.obstacle), c.grid_sizes.front(), c.guesses.front(), &trace);
                std::ostringstream os;
                full_precision(os) << "iter,energy,criterion,step_length\n";
                for (const auto& t : trace) {
                    os << t.iteration << ',' << t.energy << ',' << t.criterion << ',' << t.step_length << '\n';
                }
                write_text_file(trace_path, os.str());
            }
            const auto record = run_experiment(c);
            print_cells(record);
            if (!c.output_dir.empty()) emit(record, c.output_dir);
            return all_converged(record) ? 0 : 1;
        }
        if (*sweep) {
            if (preset.empty() && so.config.empty()) throw std::invalid_argument("sweep needs --preset or --config");
            const auto c = so.apply(preset.empty() ? ExperimentConfig{} : preset_by_name(preset));
            const auto record = run_experiment(c);
            print_cells(record);
            if (!c.output_dir.empty()) emit(record, c.output_dir);
            return all_converged(record) ? 0 : 1;
        }
        if (*tables) {
            std::vector<RunRecord> ripple, peak;
            for (int set : {1, 2}) {
                auto c = ripple_preset(set, table_sizes);
                c.threads = table_threads;
                ripple.push_back(run_experiment(c));
            }
            for (int set : {1, 2, 3}) {
                auto c = peak_preset(set, table_sizes);
                c.threads = table_threads;
                peak.push_back(run_experiment(c));
            }
            bool ok = true;
            std::vector<std::pair<int, const RunRecord*>> rr, pr;
            for (std::size_t i = 0; i < ripple.size(); ++i) rr.emplace_back(static_cast<int>(i) + 1, &ripple[i]);
            for (std::size_t i = 0; i < peak.size(); ++i) pr.emplace_back(static_cast<int>(i) + 1, &peak[i]);
            for (const auto* set : {&ripple, &peak}) {
                for (const auto& r : *set) {
                    emit(r, table_dir + "/runs");
                    ok = ok && all_converged(r);
                }
            }
            const auto t1 = energy_table_csv(build_energy_table(rr, {"A", "B", "C", "D", "E", "F"}));
            const auto t2 = energy_table_csv(build_energy_table(pr, {"A", "B", "C", "D"}));
            const auto t3 = seminorm_table_csv(pr, "D");
            write_text_file(table_dir + "/sin24_energy.csv", t1);
            write_text_file(table_dir + "/peak_energy.csv", t2);
            write_text_file(table_dir + "/peak_typeD_seminorm.csv", t3);
            std::cout << t1 << '\n' << t2 << '\n' << t3;
            return ok ? 0 : 1;
        }
        if (*gamma) {
            const auto rows = gamma_convergence_study(test_function_by_name(fn_name), gamma_sizes, {gamma_C, 1.0, 1.0});
            write_or_print(gamma_out, gamma_csv(rows));
            return 0;
        }
        if (*grad) {
            ExperimentConfig base;
            base.grid_sizes = {50};
            const auto c = go.apply(base);
            const Term term = grad_term == "all"        ? Term::all
                              : grad_term == "bending"  ? Term::bending
                              : grad_term == "tension"  ? Term::tension
                              : grad_term == "adhesion" ? Term::adhesion
                              : grad_term == "penalty"  ? Term::penalty
                                                        : throw std::invalid_argument("unknown term " + grad_term);
            const PeriodicGrid grid(c.grid_sizes.front());
            const Obstacle psi = obstacle_by_name(c.obstacle);
            const RegularizationParams reg{c.delta_rule.apply(grid.width()), c.rho_rule.apply(grid.width())};
            const DiscreteProblem problem(grid, psi, c.params, reg, profile_by_name(c.profile));
            const auto v = initial_guess(GuessSpec::parse(grad_guess), grid, psi, reg);
            const auto an = analytic_gradient(problem, v.values(), term);
            const auto fd = finite_difference_gradient(problem, v.values(), term, grad_step);
            double scale = 1.0;
            for (double g : an) scale = std::max(scale, std::abs(g));
            std::ostringstream os;
            full_precision(os) << "j,analytic,fd,rel_err\n";
            for (std::size_t j = 0; j < an.size(); ++j) {
                os << j << ',' << an[j] << ',' << fd[j] << ',' << std::abs(an[j] - fd[j]) / scale << '\n';
            }
            write_or_print(c.output_dir.empty() ? "" : c.output_dir + "/grad_check.csv", os.str());
            const double err = relative_inf_error(an, fd);
            std::fprintf(stderr, "max relative error %.3e\n", err);
            return err <= grad_max ? 0 : 1;
        }
        if (*cond) {
            const auto c = co.apply(ExperimentConfig{});
            const Obstacle psi = obstacle_by_name(c.obstacle);
            const auto k = obstacle_constants(psi, c.params);
            const auto report = sufficient_condition(c.params, k, c0);
            std::printf("T[psi] = %.10g  |psi|_W1inf = %.10g  sup|psi| = %.10g\n", k.tension_of_psi,
                        k.lipschitz_of_psi, k.sup_norm_of_psi);
            std::printf("lhs = %.10g  (pi/2 = %.10g)  holds = %s\n", report.lhs, std::numbers::pi / 2,
                        report.holds ? "yes" : "no");
            try {
                std::printf("smallest C satisfying the condition: %.10g\n",
                            sufficient_bending_threshold(c.params.sigma, c.params.gamma, k, c0));
            } catch (const std::domain_error&) {
                std::printf("no C satisfies the condition for these sigma, gamma, c0\n");
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
