/**
 * Experiment presets, initial guesses, contact classification and the
 * convergence study behind the command line tool.
 *
 * An experiment minimizes the discrete energy for every (N, initial guess)
 * cell of a configuration, classifies the converged curve by its contact set
 * and labels it with a minimizer Type. A guess whose converged curve carries a
 * different Type than the one it was meant to produce marks that Type as not
 * found ("x" in the tables).
 *
 * Type labels follow two schemes:
 *  - ripple (periodic sinusoidal obstacle): A touches crests only, F adheres
 *    everywhere, and B/C/D/E adhere on 6/4/3/2 evenly spaced valleys with
 *    raised arcs in between;
 *  - peak (single sharp peak): A is detached, B adheres with a skirt over the
 *    peak, C adheres everywhere, D carries a spike whose slope grows like 1/h.
 */
#pragma once

#include "elastica/energy.hpp"
#include "elastica/gradient.hpp"
#include "elastica/io.hpp"
#include "elastica/obstacles.hpp"
#include "elastica/optimizer.hpp"
#include "elastica/periodic_grid.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace elastica {

// ---------------------------------------------------------------------------
// delta / rho rules

/// Either a fixed value or a multiple of the mesh width h.
struct ScaleRule {
    double factor = 1.0;
    bool proportional = true;

    [[nodiscard]] double apply(double h) const { return proportional ? factor * h : factor; }

    /// Accepts "h", "h/100", "0.5h", "0.5*h" or a plain number.
    static ScaleRule parse(const std::string& text) {
        static const std::regex over(R"(\s*h\s*/\s*([0-9.eE+-]+)\s*)");
        static const std::regex times(R"(\s*([0-9.eE+-]+)\s*\*?\s*h\s*)");
        std::smatch m;
        if (std::regex_match(text, std::regex(R"(\s*h\s*)"))) return {1.0, true};
        if (std::regex_match(text, m, over)) return {1.0 / std::stod(m[1].str()), true};
        if (std::regex_match(text, m, times)) return {std::stod(m[1].str()), true};
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("bad scale rule '" + text + "'");
        return {value, false};
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        full_precision(os);
        if (!proportional) {
            os << factor;
        } else if (factor == 1.0) {
            os << "h";
        } else if (factor < 1.0 && std::abs(1.0 / factor - std::round(1.0 / factor)) < 1e-9) {
            os << "h/" << std::round(1.0 / factor);
        } else {
            os << factor << "*h";
        }
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Initial guesses

enum class GuessKind { constant, full_adhesion, raised_arcs, tent, center_spike, random };

/// A parsed guess description such as "arcs(n=6,rise=0.2)".
struct GuessSpec {
    GuessKind kind = GuessKind::constant;
    std::map<std::string, double> args;

    [[nodiscard]] double arg(const std::string& key, double fallback) const {
        auto it = args.find(key);
        return it == args.end() ? fallback : it->second;
    }

    static GuessSpec parse(const std::string& text) {
        static const std::regex form(R"(\s*([a-z\-]+)\s*(?:\((.*)\))?\s*)");
        std::smatch m;
        if (!std::regex_match(text, m, form)) throw std::invalid_argument("bad guess '" + text + "'");
        static const std::map<std::string, GuessKind> kinds{
            {"constant", GuessKind::constant},   {"full-adhesion", GuessKind::full_adhesion},
            {"arcs", GuessKind::raised_arcs},    {"tent", GuessKind::tent},
            {"center-spike", GuessKind::center_spike}, {"random", GuessKind::random}};
        auto it = kinds.find(m[1].str());
        if (it == kinds.end()) throw std::invalid_argument("unknown guess kind '" + m[1].str() + "'");
        GuessSpec spec{it->second, {}};
        std::string body = m[2].str();
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                if (item.find_first_not_of(' ') == std::string::npos) continue;
                throw std::invalid_argument("guess argument without '=': '" + item + "'");
            }
            auto trim = [](std::string s) {
                s.erase(0, s.find_first_not_of(' '));
                s.erase(s.find_last_not_of(' ') + 1);
                return s;
            };
            spec.args[trim(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
        }
        return spec;
    }

    [[nodiscard]] std::string str() const {
        static const std::map<GuessKind, std::string> names{
            {GuessKind::constant, "constant"},   {GuessKind::full_adhesion, "full-adhesion"},
            {GuessKind::raised_arcs, "arcs"},    {GuessKind::tent, "tent"},
            {GuessKind::center_spike, "center-spike"}, {GuessKind::random, "random"}};
        std::ostringstream os;
        os << names.at(kind);
        if (!args.empty()) {
            os << '(';
            bool first = true;
            for (const auto& [k, v] : args) {
                os << (first ? "" : ",") << k << '=' << v;
                first = false;
            }
            os << ')';
        }
        return os.str();
    }
};

namespace detail {

/// Positions of the local maxima of psi on [0,1), found on a dense sample.
inline std::vector<double> crest_positions(const Obstacle& psi, int samples = 20000) {
    std::vector<double> y(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) y[static_cast<std::size_t>(k)] = psi(static_cast<double>(k) / samples);
    std::vector<double> out;
    for (int k = 0; k < samples; ++k) {
        const double prev = y[static_cast<std::size_t>((k + samples - 1) % samples)];
        const double next = y[static_cast<std::size_t>((k + 1) % samples)];
        const double cur = y[static_cast<std::size_t>(k)];
        if (cur > prev && cur >= next) out.push_back(static_cast<double>(k) / samples);
    }
    return out;
}

inline double max_of(std::span<const double> values) {
    return *std::max_element(values.begin(), values.end());
}

}  // namespace detail

/// Builds a starting curve:
///  constant(offset, offset_delta)
///                            v = max_j psi_j + offset + offset_delta * delta
///  full-adhesion             v = Pi_h psi
///  arcs(n, rise)             Pi_h psi except n evenly spaced raised arcs, each spanning
///                            from one crest to the crest before the next adhered period
///  tent(width)               max(psi, tent of half-width `width` over the highest crest)
///  center-spike(height)      Pi_h psi with the node nearest x = 1/2 lifted to `height`
///  random(seed, amplitude)   Pi_h psi + amplitude * U(0, 1)
inline PolygonalCurve initial_guess(const GuessSpec& spec, const PeriodicGrid& grid, const Obstacle& psi,
                                    const RegularizationParams& reg) {
    const auto obst = nodal_obstacle(grid, psi);
    const Index n = grid.segments();
    std::vector<double> v = obst;
    switch (spec.kind) {
        case GuessKind::constant:
            std::fill(v.begin(), v.end(),
                      detail::max_of(obst) + spec.arg("offset", 0.0) + spec.arg("offset_delta", 0.0) * reg.delta);
            break;
        case GuessKind::full_adhesion:
            break;
        case GuessKind::raised_arcs: {
            const auto crests = detail::crest_positions(psi);
            const auto m = static_cast<int>(crests.size());
            const int arcs = static_cast<int>(spec.arg("n", 1));
            const double rise = spec.arg("rise", 0.2);
            if (arcs < 1 || m == 0 || m % arcs != 0) {
                throw std::invalid_argument("arcs: number of arcs must divide the number of crests (" +
                                            std::to_string(m) + ")");
            }
            const int period = m / arcs;
            if (period < 2) throw std::invalid_argument("arcs: need at least two crests per arc period");
            for (int a = 0; a < arcs; ++a) {
                const int first = a * period + 1;
                const int last = a * period + period;
                const double xa = crests[static_cast<std::size_t>(first % m)];
                double span = crests[static_cast<std::size_t>(last % m)] - xa;
                if (last >= m) span += 1.0;
                span += (last - first >= m) ? 1.0 : 0.0;
                const double ya = psi(xa);
                const double yb = psi(xa + span);
                for (Index j = 0; j < n; ++j) {
                    double t = grid.node(j) - xa;
                    t -= std::floor(t);
                    if (t >= span) continue;
                    const double base = ya + (yb - ya) * t / span;
                    const double arc = base + rise * 4.0 * t * (span - t) / span;
                    auto& vj = v[static_cast<std::size_t>(j)];
                    vj = std::max(vj, arc);
                }
            }
            break;
        }
        case GuessKind::tent: {
            const double width = spec.arg("width", 0.3);
            const auto top = std::max_element(obst.begin(), obst.end());
            const double apex = *top;
            const double xc = grid.node(std::distance(obst.begin(), top));
            for (Index j = 0; j < n; ++j) {
                double dx = std::abs(grid.node(j) - xc);
                dx = std::min(dx, 1.0 - dx);
                auto& vj = v[static_cast<std::size_t>(j)];
                vj = std::max(vj, apex * std::max(0.0, 1.0 - dx / width));
            }
            break;
        }
        case GuessKind::center_spike: {
            const Index mid = static_cast<Index>(std::lround(0.5 * static_cast<double>(n))) % n;
            v[static_cast<std::size_t>(mid)] = spec.arg("height", 0.5);
            break;
        }
        case GuessKind::random: {
            std::mt19937_64 rng(static_cast<std::uint64_t>(spec.arg("seed", 1)));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double amp = spec.arg("amplitude", 0.01);
            for (auto& vj : v) vj += amp * unit(rng);
            break;
        }
    }
    return {grid, std::move(v)};
}

// ---------------------------------------------------------------------------
// Classification

struct ContactClassification {
    std::vector<bool> adhering;  ///< |v_j - psi_j| < delta
    int runs = 0;                ///< maximal periodic runs of adhering nodes
    double fraction = 0.0;       ///< adhering nodes / N
    int adhered_minima = 0;      ///< obstacle nodal valleys covered by the contact set
    int obstacle_minima = 0;
    std::vector<int> adhered_minimum_ranks;  ///< positions of the covered valleys among all valleys
    double max_jump = 0.0;                   ///< max_j |v_j - v_{j-1}|
    double lipschitz = 0.0;
};

inline ContactClassification classify(const PolygonalCurve& v, std::span<const double> obst, double delta) {
    ContactClassification c;
    const Index n = v.size();
    c.adhering.resize(static_cast<std::size_t>(n));
    int count = 0;
    for (Index j = 0; j < n; ++j) {
        const bool a = std::abs(v[j] - obst[static_cast<std::size_t>(j)]) < delta;
        c.adhering[static_cast<std::size_t>(j)] = a;
        count += a ? 1 : 0;
    }
    c.fraction = static_cast<double>(count) / static_cast<double>(n);
    if (count == n) {
        c.runs = 1;
    } else {
        for (Index j = 0; j < n; ++j) {
            if (c.adhering[static_cast<std::size_t>(j)] && !c.adhering[static_cast<std::size_t>(wrap_index(j - 1, n))]) {
                ++c.runs;
            }
        }
    }
    auto at = [&](Index j) { return obst[static_cast<std::size_t>(wrap_index(j, n))]; };
    for (Index j = 0; j < n; ++j) {
        // ties on the left count once
        if (at(j) <= at(j - 1) && at(j) < at(j + 1)) {
            if (c.adhering[static_cast<std::size_t>(j)]) {
                ++c.adhered_minima;
                c.adhered_minimum_ranks.push_back(c.obstacle_minima);
            }
            ++c.obstacle_minima;
        }
    }
    for (Index j = 1; j <= n; ++j) c.max_jump = std::max(c.max_jump, std::abs(v[j] - v[j - 1]));
    c.lipschitz = lipschitz_seminorm(v);
    return c;
}

inline ContactClassification classify(const PolygonalCurve& v, const Obstacle& psi, const RegularizationParams& reg) {
    return classify(v, nodal_obstacle(v.grid(), psi), reg.delta);
}

enum class TypeScheme { ripple, peak };

/// Slopes at or below this count as a straight curve.
inline constexpr double flat_slope = 1e-3;

inline TypeScheme type_scheme_from_string(const std::string& s) {
    if (s == "ripple") return TypeScheme::ripple;
    if (s == "peak") return TypeScheme::peak;
    throw std::invalid_argument("unknown type scheme '" + s + "'");
}

inline std::string to_string(TypeScheme s) { return s == TypeScheme::ripple ? "ripple" : "peak"; }

/// Maps a classified curve to a minimizer Type label; "combination" when the
/// contact set does not match any of the symmetric Types.
inline std::string identify_type(TypeScheme scheme, const ContactClassification& c, std::span<const double> obst) {
    if (scheme == TypeScheme::peak) {
        const auto [lo, hi] = std::minmax_element(obst.begin(), obst.end());
        // a straight curve grazing the peak is still the detached Type
        if (c.runs == 0 || c.lipschitz <= flat_slope) return "A";
        if (c.max_jump > 1.5 * (*hi - *lo)) return "D";
        if (c.fraction == 1.0) return "C";
        return "B";
    }
    if (c.fraction == 1.0) return "F";
    const int k = c.adhered_minima;
    if (k == 0) return "A";
    const int m = c.obstacle_minima;
    if (m % k != 0) return "combination";
    const int gap = m / k;
    for (std::size_t i = 0; i < c.adhered_minimum_ranks.size(); ++i) {
        const int a = c.adhered_minimum_ranks[i];
        const int b = c.adhered_minimum_ranks[(i + 1) % c.adhered_minimum_ranks.size()];
        if (((b - a) % m + m) % m != (k == 1 ? 0 : gap)) return "combination";
    }
    static const std::map<int, std::string> by_count{{6, "B"}, {4, "C"}, {3, "D"}, {2, "E"}};
    auto it = by_count.find(k);
    if (m == 12 && it != by_count.end()) return it->second;
    return "arcs(" + std::to_string(k) + ")";
}

// ---------------------------------------------------------------------------
// Configuration and records

struct TypeSpec {
    std::string label;
    std::string guess;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::string obstacle = "sin24";
    PhysicalParams params;
    std::vector<Index> grid_sizes{100};
    ScaleRule delta_rule{1.0, true};
    ScaleRule rho_rule{0.01, true};
    std::string profile = "quartic";
    TypeScheme scheme = TypeScheme::ripple;
    std::vector<TypeSpec> guesses;
    MinimizeOptions options;
    std::string output_dir;
    int threads = 0;  ///< 0: hardware concurrency

    void validate() const {
        params.validate();
        if (grid_sizes.empty()) throw std::invalid_argument("config: grid_sizes is empty");
        if (!std::is_sorted(grid_sizes.begin(), grid_sizes.end())) {
            throw std::invalid_argument("config: grid_sizes must be sorted ascending");
        }
        if (!(delta_rule.factor > 0.0) || !(rho_rule.factor > 0.0)) {
            throw std::invalid_argument("config: delta and rho rules must be positive");
        }
        if (guesses.empty()) throw std::invalid_argument("config: no initial guesses");
        options.validate();
    }
};

inline json to_json(const MinimizeOptions& o) {
    return json{{"tolerance", o.tolerance},       {"max_iterations", o.max_iterations},
                {"wolfe_c1", o.wolfe_c1},         {"wolfe_c2", o.wolfe_c2},
                {"energy_floor", o.energy_floor}, {"max_line_search_evaluations", o.max_line_search_evaluations}};
}

inline MinimizeOptions options_from_json(const json& j, MinimizeOptions o = {}) {
    o.tolerance = j.value("tolerance", o.tolerance);
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.wolfe_c1 = j.value("wolfe_c1", o.wolfe_c1);
    o.wolfe_c2 = j.value("wolfe_c2", o.wolfe_c2);
    o.energy_floor = j.value("energy_floor", o.energy_floor);
    o.max_line_search_evaluations = j.value("max_line_search_evaluations", o.max_line_search_evaluations);
    return o;
}

inline json to_json(const ExperimentConfig& c) {
    json guesses = json::array();
    for (const auto& g : c.guesses) guesses.push_back({{"label", g.label}, {"guess", g.guess}});
    return json{{"name", c.name},
                {"obstacle", c.obstacle},
                {"params", {{"C", c.params.C}, {"sigma", c.params.sigma}, {"gamma", c.params.gamma}}},
                {"grid_sizes", c.grid_sizes},
                {"delta_rule", c.delta_rule.str()},
                {"rho_rule", c.rho_rule.str()},
                {"profile", c.profile},
                {"type_scheme", to_string(c.scheme)},
                {"guesses", guesses},
                {"options", to_json(c.options)},
                {"output_dir", c.output_dir},
                {"threads", c.threads}};
}

/// Missing keys keep the values of `base`. "params" accepts "C" or "half_C".
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {}) {
    ExperimentConfig c = std::move(base);
    c.name = j.value("name", c.name);
    c.obstacle = j.value("obstacle", c.obstacle);
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (p.contains("half_C")) c.params.C = 2.0 * p.at("half_C").get<double>();
        c.params.C = p.value("C", c.params.C);
        c.params.sigma = p.value("sigma", c.params.sigma);
        c.params.gamma = p.value("gamma", c.params.gamma);
    }
    if (j.contains("grid_sizes")) c.grid_sizes = j.at("grid_sizes").get<std::vector<Index>>();
    if (j.contains("delta_rule")) c.delta_rule = ScaleRule::parse(j.at("delta_rule").get<std::string>());
    if (j.contains("rho_rule")) c.rho_rule = ScaleRule::parse(j.at("rho_rule").get<std::string>());
    c.profile = j.value("profile", c.profile);
    if (j.contains("type_scheme")) c.scheme = type_scheme_from_string(j.at("type_scheme").get<std::string>());
    if (j.contains("guesses")) {
        c.guesses.clear();
        for (const auto& g : j.at("guesses")) {
            c.guesses.push_back({g.at("label").get<std::string>(), g.at("guess").get<std::string>()});
        }
    }
    if (j.contains("options")) c.options = options_from_json(j.at("options"), c.options);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.threads = j.value("threads", c.threads);
    return c;
}

/// Summary of one (N, guess) minimization.
struct CellRecord {
    Index N = 0;
    std::string label;       ///< intended Type
    std::string guess;
    std::string identified;  ///< Type of the converged curve
    bool exists = false;     ///< identified == label and converged
    EnergyBreakdown energy;
    int iterations = 0;
    int evaluations = 0;
    double criterion = 0.0;
    bool converged = false;
    std::string message;
    double lipschitz = 0.0;
    int runs = 0;
    double fraction = 0.0;
    int adhered_minima = 0;
    double wall_time_s = 0.0;
    std::vector<double> curve;

    friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<CellRecord> cells;
};

inline json to_json(const CellRecord& r) {
    return json{{"N", r.N},
                {"label", r.label},
                {"guess", r.guess},
                {"identified", r.identified},
                {"exists", r.exists},
                {"energy", to_json(r.energy)},
                {"iterations", r.iterations},
                {"evaluations", r.evaluations},
                {"criterion", r.criterion},
                {"converged", r.converged},
                {"message", r.message},
                {"lipschitz", r.lipschitz},
                {"runs", r.runs},
                {"fraction", r.fraction},
                {"adhered_minima", r.adhered_minima},
                {"wall_time_s", r.wall_time_s},
                {"curve", r.curve}};
}

inline CellRecord cell_from_json(const json& j) {
    CellRecord r;
    r.N = j.at("N").get<Index>();
    r.label = j.at("label").get<std::string>();
    r.guess = j.at("guess").get<std::string>();
    r.identified = j.at("identified").get<std::string>();
    r.exists = j.at("exists").get<bool>();
    r.energy = breakdown_from_json(j.at("energy"));
    r.iterations = j.at("iterations").get<int>();
    r.evaluations = j.at("evaluations").get<int>();
    r.criterion = j.at("criterion").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.message = j.at("message").get<std::string>();
    r.lipschitz = j.at("lipschitz").get<double>();
    r.runs = j.at("runs").get<int>();
    r.fraction = j.at("fraction").get<double>();
    r.adhered_minima = j.at("adhered_minima").get<int>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.curve = j.at("curve").get<std::vector<double>>();
    return r;
}

inline json to_json(const RunRecord& r) {
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back(to_json(c));
    return json{{"config", to_json(r.config)}, {"cells", cells}};
}

inline RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.config = config_from_json(j.at("config"));
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    return r;
}

inline constexpr const char* record_csv_header =
    "experiment,N,label,guess,bending,tension,adhesion,penalty,total,iterations,evaluations,criterion,"
    "converged,lipschitz,runs,fraction,adhered_minima,identified,exists,wall_time_s";

inline std::string record_csv(const RunRecord& r) {
    std::ostringstream os;
    full_precision(os) << record_csv_header << '\n';
    for (const auto& c : r.cells) {
        os << r.config.name << ',' << c.N << ',' << c.label << ',' << '"' << c.guess << '"' << ','
           << breakdown_csv_row(c.energy) << ',' << c.iterations << ',' << c.evaluations << ',' << c.criterion
           << ',' << (c.converged ? 1 : 0) << ',' << c.lipschitz << ',' << c.runs << ',' << c.fraction << ','
           << c.adhered_minima << ',' << c.identified << ',' << (c.exists ? 1 : 0) << ',' << c.wall_time_s
           << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Running

/// Runs `count` independent jobs on up to `threads` workers; job i writes slot i only.
template <class Job>
void parallel_for(std::size_t count, int threads, Job&& job) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// One (N, guess) minimization; `trace`, when given, receives the iteration log.
inline CellRecord run_cell(const ExperimentConfig& config, const Obstacle& psi, Index n, const TypeSpec& type,
                           std::vector<TraceEntry>* trace = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    const PeriodicGrid grid(n);
    const RegularizationParams reg{config.delta_rule.apply(grid.width()), config.rho_rule.apply(grid.width())};
    const DiscreteProblem problem(grid, psi, config.params, reg, profile_by_name(config.profile));
    const auto guess = initial_guess(GuessSpec::parse(type.guess), grid, psi, reg);
    MinimizeOptions options = config.options;
    options.record_trace = trace != nullptr;
    auto result = minimize_bfgs(problem, guess, options);
    if (trace) *trace = std::move(result.trace);
    const auto cls = classify(result.curve, problem.obstacle_values(), reg.delta);

    CellRecord r;
    r.N = n;
    r.label = type.label;
    r.guess = type.guess;
    r.identified = identify_type(config.scheme, cls, problem.obstacle_values());
    r.converged = result.converged;
    r.exists = result.converged && r.identified == r.label;
    r.energy = result.breakdown;
    r.iterations = result.iterations;
    r.evaluations = result.evaluations;
    r.criterion = result.final_criterion;
    r.message = result.message;
    r.lipschitz = cls.lipschitz;
    r.runs = cls.runs;
    r.fraction = cls.fraction;
    r.adhered_minima = cls.adhered_minima;
    r.curve.assign(result.curve.values().begin(), result.curve.values().end());
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Minimizes every (N, guess) cell; cells are ordered by N, then by guess order.
inline RunRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Obstacle psi = obstacle_by_name(config.obstacle);
    RunRecord record{config, {}};
    std::vector<std::pair<Index, const TypeSpec*>> jobs;
    for (Index n : config.grid_sizes) {
        for (const auto& t : config.guesses) jobs.emplace_back(n, &t);
    }
    record.cells.resize(jobs.size());
    parallel_for(jobs.size(), config.threads,
                 [&](std::size_t i) { record.cells[i] = run_cell(config, psi, jobs[i].first, *jobs[i].second); });
    return record;
}

/// Writes <dir>/<name>.csv, <dir>/<name>.json and one (x, v, psi) file per cell.
inline void emit(const RunRecord& record, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string base = dir + "/" + record.config.name;
    write_text_file(base + ".csv", record_csv(record));
    write_text_file(base + ".json", to_json(record).dump(2));
    const Obstacle psi = obstacle_by_name(record.config.obstacle);
    for (const auto& c : record.cells) {
        std::ostringstream os;
        write_curve_csv(os, PolygonalCurve(PeriodicGrid(c.N), c.curve), psi);
        write_text_file(base + "_N" + std::to_string(c.N) + "_" + c.label + "_curve.csv", os.str());
    }
}

// ---------------------------------------------------------------------------
// Discrete-vs-continuous bending study

struct GammaRow {
    Index N = 0;
    double auxiliary = 0.0;   ///< auxiliary bending of Pi_h f
    double discrete = 0.0;    ///< B_h[Pi_h f]
    double continuous = 0.0;  ///< B[f] by quadrature
    double auxiliary_error = 0.0;
    double discrete_error = 0.0;
};

inline std::vector<GammaRow> gamma_convergence_study(const SmoothPeriodicFunction& fn, const std::vector<Index>& sizes,
                                                     const PhysicalParams& params) {
    const double reference = bending_continuous(fn, params).value;
    std::vector<GammaRow> rows;
    for (Index n : sizes) {
        const auto v = interpolate(PeriodicGrid(n), fn.f, 1e-12);
        GammaRow r;
        r.N = n;
        r.auxiliary = bending_auxiliary(v, params);
        r.discrete = bending_discrete(v, params);
        r.continuous = reference;
        r.auxiliary_error = std::abs(r.auxiliary - reference);
        r.discrete_error = std::abs(r.discrete - reference);
        rows.push_back(r);
    }
    return rows;
}

inline std::string gamma_csv(const std::vector<GammaRow>& rows) {
    std::ostringstream os;
    full_precision(os) << "N,auxiliary,discrete,continuous,auxiliary_error,discrete_error\n";
    for (const auto& r : rows) {
        os << r.N << ',' << r.auxiliary << ',' << r.discrete << ',' << r.continuous << ',' << r.auxiliary_error
           << ',' << r.discrete_error << '\n';
    }
    return os.str();
}

/// Parses "sin(a=0.1,k=1)" / "cos(a=0.05,k=2)" / "const(c=1)".
inline SmoothPeriodicFunction test_function_by_name(const std::string& text) {
    static const std::regex form(R"(\s*(sin|cos|const)\s*(?:\((.*)\))?\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, form)) throw std::invalid_argument("bad test function '" + text + "'");
    std::map<std::string, double> args;
    std::stringstream ss(m[2].str());
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        std::string key = item.substr(0, eq);
        key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
        args[key] = std::stod(item.substr(eq + 1));
    }
    auto get = [&](const std::string& k, double d) { return args.count(k) ? args[k] : d; };
    if (m[1] == "sin") return sine_function(get("a", 0.1), static_cast<int>(get("k", 1)));
    if (m[1] == "cos") return cosine_function(get("a", 0.1), static_cast<int>(get("k", 1)));
    return constant_function(get("c", 0.0));
}

// ---------------------------------------------------------------------------
// Presets

/// Parameter sets for the sinusoidal obstacle (index 1 or 2), given as (C/2, sigma, gamma).
inline PhysicalParams ripple_parameters(int index) {
    switch (index) {
        case 1: return PhysicalParams::from_half_bending(0.0005, 0.01, 1.0);
        case 2: return PhysicalParams::from_half_bending(0.0003, 0.01, 2.0);
        default: throw std::invalid_argument("ripple parameter set must be 1 or 2");
    }
}

/// Parameter sets for the peaked obstacle (index 1, 2 or 3).
inline PhysicalParams peak_parameters(int index) {
    switch (index) {
        case 1: return PhysicalParams::from_half_bending(0.1, 1.0, 1.0);
        case 2: return PhysicalParams::from_half_bending(0.1, 1.0, 0.01);
        case 3: return PhysicalParams::from_half_bending(0.001, 1.0, 5.0);
        default: throw std::invalid_argument("peak parameter set must be 1, 2 or 3");
    }
}

inline std::vector<TypeSpec> ripple_types() {
    return {{"A", "constant(offset=0)"},     {"B", "arcs(n=6,rise=0.2)"}, {"C", "arcs(n=4,rise=0.2)"},
            {"D", "arcs(n=3,rise=0.2)"},     {"E", "arcs(n=2,rise=0.2)"}, {"F", "full-adhesion"}};
}

inline std::vector<TypeSpec> peak_types() {
    return {{"A", "constant(offset_delta=10)"}, {"B", "tent(width=0.3)"}, {"C", "full-adhesion"},
            {"D", "center-spike(height=0.5)"}};
}

inline ExperimentConfig ripple_preset(int parameter_set, std::vector<Index> sizes = {100, 200, 400}) {
    ExperimentConfig c;
    c.name = "sin24-parameter" + std::to_string(parameter_set);
    c.obstacle = "sin24";
    c.params = ripple_parameters(parameter_set);
    c.grid_sizes = std::move(sizes);
    c.delta_rule = {1.0, true};
    c.rho_rule = {0.01, true};
    c.scheme = TypeScheme::ripple;
    c.guesses = ripple_types();
    return c;
}

inline ExperimentConfig peak_preset(int parameter_set, std::vector<Index> sizes = {100, 200, 400}) {
    ExperimentConfig c;
    c.name = "peak-parameter" + std::to_string(parameter_set);
    c.obstacle = "peak(eps=0.01)";
    c.params = peak_parameters(parameter_set);
    c.grid_sizes = std::move(sizes);
    c.delta_rule = {1.0, true};
    c.rho_rule = {0.001, true};
    c.scheme = TypeScheme::peak;
    c.guesses = peak_types();
    return c;
}

// ---------------------------------------------------------------------------
// Tables

/// Rows (parameter set, N) x Type columns of energies; "x" marks a Type the
/// corresponding guess did not produce.
struct EnergyTable {
    std::vector<std::string> types;
    struct Row {
        int parameter_set = 0;
        Index N = 0;
        std::map<std::string, const CellRecord*> cells;
        std::string global;  ///< least-energy existing Type
    };
    std::vector<Row> rows;
};

inline EnergyTable build_energy_table(const std::vector<std::pair<int, const RunRecord*>>& records,
                                      std::vector<std::string> types) {
    EnergyTable t;
    t.types = std::move(types);
    for (const auto& [set, rec] : records) {
        std::map<Index, EnergyTable::Row> by_n;
        for (const auto& c : rec->cells) {
            auto& row = by_n[c.N];
            row.parameter_set = set;
            row.N = c.N;
            row.cells[c.label] = &c;
        }
        for (auto& [n, row] : by_n) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [label, cell] : row.cells) {
                if (cell->exists && cell->energy.total < best) {
                    best = cell->energy.total;
                    row.global = label;
                }
            }
            t.rows.push_back(row);
        }
    }
    return t;
}

inline std::string energy_table_csv(const EnergyTable& t) {
    std::ostringstream os;
    os << std::setprecision(8) << "parameter,N";
    for (const auto& ty : t.types) os << ",Type " << ty;
    os << ",global\n";
    for (const auto& row : t.rows) {
        os << row.parameter_set << ',' << row.N;
        for (const auto& ty : t.types) {
            auto it = row.cells.find(ty);
            os << ',';
            if (it == row.cells.end()) continue;
            if (it->second->exists) {
                os << it->second->energy.total;
            } else {
                os << "x";
            }
        }
        os << ',' << row.global << '\n';
    }
    return os.str();
}

/// W^{1,inf} seminorm of every existing cell labelled `type`, one row per (parameter set, N).
inline std::string seminorm_table_csv(const std::vector<std::pair<int, const RunRecord*>>& records,
                                      const std::string& type) {
    std::ostringstream os;
    os << std::setprecision(8) << "parameter,N,Type " << type << " seminorm\n";
    for (const auto& [set, rec] : records) {
        for (const auto& c : rec->cells) {
            if (c.label != type) continue;
            os << set << ',' << c.N << ',';
            if (c.exists) {
                os << c.lipschitz;
            } else {
                os << "x";
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace elastica
