// CSV / JSON serialization for curves and energy breakdowns.
#pragma once

#include "elastica/energy.hpp"
#include "elastica/obstacles.hpp"
#include "elastica/periodic_grid.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastica {

using json = nlohmann::json;

// Every double is written with round-trip precision.
inline std::ostream& full_precision(std::ostream& os) {
    return os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

inline json to_json(const PolygonalCurve& v) {
    return json{{"N", v.size()}, {"values", std::vector<double>(v.values().begin(), v.values().end())}};
}

inline PolygonalCurve curve_from_json(const json& j) {
    const auto n = j.at("N").get<Index>();
    return {PeriodicGrid(n), j.at("values").get<std::vector<double>>()};
}

/// Header `x,v`, one row per node j = 0..N-1 with x = j h.
inline void write_curve_csv(std::ostream& os, const PolygonalCurve& v) {
    full_precision(os) << "x,v\n";
    for (Index j = 0; j < v.size(); ++j) os << v.grid().node(j) << ',' << v[j] << '\n';
}

/// Same as write_curve_csv with the obstacle appended as a third column.
inline void write_curve_csv(std::ostream& os, const PolygonalCurve& v, const Obstacle& psi) {
    full_precision(os) << "x,v,psi\n";
    for (Index j = 0; j < v.size(); ++j) {
        const double x = v.grid().node(j);
        os << x << ',' << v[j] << ',' << psi(x) << '\n';
    }
}

inline PolygonalCurve read_curve_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,v", 0) != 0) {
        throw std::runtime_error("curve CSV: expected header starting with 'x,v'");
    }
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string x, v;
        if (!std::getline(row, x, ',') || !std::getline(row, v, ',')) {
            throw std::runtime_error("curve CSV: malformed row '" + line + "'");
        }
        values.push_back(std::stod(v));
    }
    return {PeriodicGrid(static_cast<Index>(values.size())), std::move(values)};
}

inline json to_json(const EnergyBreakdown& e) {
    return json{{"bending", e.bending},
                {"tension", e.tension},
                {"adhesion", e.adhesion},
                {"penalty", e.penalty},
                {"total", e.total}};
}

inline EnergyBreakdown breakdown_from_json(const json& j) {
    return {j.at("bending").get<double>(), j.at("tension").get<double>(), j.at("adhesion").get<double>(),
            j.at("penalty").get<double>(), j.at("total").get<double>()};
}

inline constexpr const char* breakdown_csv_header = "bending,tension,adhesion,penalty,total";

inline std::string breakdown_csv_row(const EnergyBreakdown& e) {
    std::ostringstream os;
    full_precision(os) << e.bending << ',' << e.tension << ',' << e.adhesion << ',' << e.penalty << ','
                       << e.total;
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace elastica
