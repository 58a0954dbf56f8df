#pragma once

// JSON configuration: units, base system, solver, sweep axes, figure
// presets and nanotube geometry. Schema is documented in README.md.

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanoblock/cnt.hpp"
#include "nanoblock/sweep.hpp"

namespace nanoblock {

using Json = nlohmann::json;

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

namespace config_detail {

inline double number(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

inline void reject_unknown(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

}  // namespace config_detail

/// A grid is either {"values": [...]} or {"start", "stop", "count", "spacing": linear|log}.
inline std::vector<double> parse_grid(const Json& j, const std::string& where) {
    using namespace config_detail;
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.contains("values")) return j.at("values").get<std::vector<double>>();
    const double start = number(j, "start", where);
    const double stop = number(j, "stop", where);
    const int count = static_cast<int>(number(j, "count", where));
    const std::string spacing = j.value("spacing", std::string("linear"));
    if (count < 1) throw ConfigError(where + ": count must be >= 1");
    std::vector<double> g;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        if (spacing == "linear") {
            g.push_back(i == count - 1 ? stop : start + t * (stop - start));
        } else if (spacing == "log") {
            if (!(start > 0.0 && stop > 0.0)) throw ConfigError(where + ": log grid needs positive bounds");
            g.push_back(i == count - 1 ? stop : start * std::pow(stop / start, t));
        } else {
            throw ConfigError(where + ": unknown spacing '" + spacing + "'");
        }
    }
    return g;
}

inline Axis parse_axis(const Json& j, const std::string& where) {
    if (!j.contains("name") || !j.at("name").is_string()) throw ConfigError(where + ": missing axis 'name'");
    Axis a{j.at("name").get<std::string>(), parse_grid(j, where)};
    if (!is_parameter_name(a.name)) throw ConfigError(where + ": unknown parameter name '" + a.name + "'");
    return a;
}

inline UnitSystem parse_units(const Json& j) {
    using namespace config_detail;
    UnitSystem u;
    if (!j.contains("units")) return u;
    const Json& s = j.at("units");
    reject_unknown(s, {"omega1_hz", "gamma_over_omega1"}, "units");
    u.omega1_hz = number_or(s, "omega1_hz", u.omega1_hz, "units");
    u.gamma_over_omega1 = number_or(s, "gamma_over_omega1", u.gamma_over_omega1, "units");
    if (!(u.omega1_hz > 0.0) || !(u.gamma_over_omega1 > 0.0)) {
        throw ConfigError("units: omega1_hz and gamma_over_omega1 must be > 0");
    }
    return u;
}

/// Base parameters in gamma units; omega1 defaults to 1 / (gamma_ref / omega1).
inline SystemParams parse_system(const Json& sys, const UnitSystem& units, SystemParams p) {
    using namespace config_detail;
    std::vector<std::string> allowed(kParameterNames.begin(), kParameterNames.end());
    allowed.emplace_back("nth_convention");
    reject_unknown(sys, allowed, "system");
    for (auto name : kParameterNames) {
        const std::string key(name);
        if (sys.contains(key)) parameter_ref(p, key) = number(sys, key, "system");
    }
    if (sys.contains("nth_convention")) {
        p.nth_convention = parse_nth_convention(sys.at("nth_convention").get<std::string>());
    }
    const double expected = 1.0 / units.gamma_over_omega1;
    if (std::abs(p.omega1 - expected) > 1e-9 * expected && sys.contains("omega1")) {
        throw ConfigError("system: omega1 = " + std::to_string(p.omega1) +
                          " (gamma units) contradicts units.gamma_over_omega1 = " +
                          std::to_string(units.gamma_over_omega1));
    }
    return p;
}

inline SystemParams default_reduced_params(const UnitSystem& units) {
    SystemParams p;
    p.omega1 = 1.0 / units.gamma_over_omega1;
    p.omega2 = p.omega1;
    p.gamma1 = 1.0;
    p.gamma2 = 1.0;
    return p;
}

inline void parse_solver(const Json& j, SweepSpec& spec) {
    using namespace config_detail;
    if (!j.contains("solver")) return;
    const Json& s = j.at("solver");
    reject_unknown(s, {"method", "cutoff"}, "solver");
    if (s.contains("method")) spec.solver = parse_solver_method(s.at("method").get<std::string>());
    if (s.contains("cutoff")) spec.cutoff = FockCutoff(static_cast<int>(number(s, "cutoff", "solver")));
}

/// Sweep section `sweep_key` of a config carrying units/system/solver at top level.
inline SweepSpec parse_sweep_spec(const Json& j, const std::string& sweep_key = "sweep") {
    if (!j.contains(sweep_key)) throw ConfigError("config: missing '" + sweep_key + "' section");
    SweepSpec spec;
    spec.label = sweep_key;
    spec.units = parse_units(j);
    spec.base = default_reduced_params(spec.units);
    if (j.contains("system")) spec.base = parse_system(j.at("system"), spec.units, spec.base);
    parse_solver(j, spec);

    const Json& s = j.at(sweep_key);
    config_detail::reject_unknown(s, {"label", "axis1", "axis2", "output", "system", "cutoff", "search"},
                                  sweep_key);
    if (s.contains("label")) spec.label = s.at("label").get<std::string>();
    if (s.contains("system")) spec.base = parse_system(s.at("system"), spec.units, spec.base);
    if (s.contains("cutoff")) spec.cutoff = FockCutoff(s.at("cutoff").get<int>());
    if (!s.contains("axis1")) throw ConfigError(sweep_key + ": missing 'axis1'");
    spec.axis1 = parse_axis(s.at("axis1"), sweep_key + ".axis1");
    if (s.contains("axis2")) spec.axis2 = parse_axis(s.at("axis2"), sweep_key + ".axis2");
    spec.output_path = s.value("output", sweep_key + ".csv");
    spec.validate();
    return spec;
}

inline OperatingPointSearch parse_search(const Json& j, const SweepSpec& context, const std::string& where) {
    using namespace config_detail;
    reject_unknown(j, {"J", "F", "U", "gamma", "refine_rounds", "refine_points", "cutoff", "system"}, where);
    OperatingPointSearch s;
    s.units = context.units;
    s.base = context.base;
    if (j.contains("system")) s.base = parse_system(j.at("system"), s.units, s.base);
    s.base.temperature_ratio = 0.0;
    s.solver = context.solver;
    for (const char* key : {"J", "F", "U"}) {
        if (!j.contains(key)) throw ConfigError(where + ": missing grid '" + key + "'");
    }
    s.J = parse_grid(j.at("J"), where + ".J");
    s.F = parse_grid(j.at("F"), where + ".F");
    s.U = parse_grid(j.at("U"), where + ".U");
    if (j.contains("gamma")) s.gamma = parse_grid(j.at("gamma"), where + ".gamma");
    s.refine_rounds = static_cast<int>(number_or(j, "refine_rounds", s.refine_rounds, where));
    s.refine_points = static_cast<int>(number_or(j, "refine_points", s.refine_points, where));
    s.cutoff = FockCutoff(static_cast<int>(number_or(j, "cutoff", s.cutoff.n_max(), where)));
    return s;
}

struct FigurePresets {
    SweepSpec fig2;
    SweepSpec fig3;
    SweepSpec fig4;  ///< base J, F1, U1 = U2 replaced by the operating point search
    OperatingPointSearch fig4_search;
    std::optional<OperatingPointSearch> deep_search;
};

/// The three figure templates; every numeric range comes from the config.
inline FigurePresets figure_presets(const Json& j) {
    FigurePresets p{parse_sweep_spec(j, "fig2"), parse_sweep_spec(j, "fig3"), parse_sweep_spec(j, "fig4"),
                    {}, std::nullopt};
    const Json& f4 = j.at("fig4");
    if (!f4.contains("search")) throw ConfigError("fig4: missing 'search' section");
    p.fig4_search = parse_search(f4.at("search"), p.fig4, "fig4.search");
    if (j.contains("deep_search")) p.deep_search = parse_search(j.at("deep_search"), p.fig4, "deep_search");
    return p;
}

struct CliOverrides {
    std::optional<int> cutoff;
    std::optional<SolverMethod> solver;
    std::optional<NthConvention> nth_convention;

    void apply(SweepSpec& s) const {
        if (cutoff) s.cutoff = FockCutoff(*cutoff);
        if (solver) s.solver = *solver;
        if (nth_convention) s.base.nth_convention = *nth_convention;
    }
    void apply(OperatingPointSearch& s) const {
        if (solver) s.solver = *solver;
        if (nth_convention) s.base.nth_convention = *nth_convention;
    }
};

struct GeometryConfig {
    cnt::CntGeometry geometry;
    cnt::ReportOptions report;
    bool mass_estimated = false;
};

inline GeometryConfig parse_geometry(const Json& j) {
    using namespace config_detail;
    if (!j.contains("geometry")) throw ConfigError("config: missing 'geometry' section");
    const Json& g = j.at("geometry");
    reject_unknown(g, {"radius_m", "length_m", "modulus_pa", "gate_distance_m", "charge_c", "electrons",
                       "mass_kg", "target_frequency_hz", "tension_model"},
                   "geometry");
    GeometryConfig c;
    c.geometry.r = number(g, "radius_m", "geometry");
    c.geometry.L = number(g, "length_m", "geometry");
    c.geometry.E = number(g, "modulus_pa", "geometry");
    c.geometry.R = number(g, "gate_distance_m", "geometry");
    if (g.contains("charge_c") == g.contains("electrons")) {
        throw ConfigError("geometry: give exactly one of 'charge_c' or 'electrons'");
    }
    c.geometry.ne = g.contains("charge_c") ? number(g, "charge_c", "geometry")
                                           : number(g, "electrons", "geometry") * cnt::kElementaryCharge;
    if (g.contains("mass_kg")) {
        c.geometry.m = number(g, "mass_kg", "geometry");
    } else {
        c.geometry.m = cnt::estimated_mass(c.geometry.r, c.geometry.L);
        c.mass_estimated = true;
    }
    c.report.target_frequency_hz = number_or(g, "target_frequency_hz", 0.0, "geometry");
    const std::string model = g.value("tension_model", std::string("closed_form"));
    if (model == "closed_form") {
        c.report.tension_model = cnt::TensionModel::closed_form;
    } else if (model == "self_consistent") {
        c.report.tension_model = cnt::TensionModel::self_consistent;
    } else {
        throw ConfigError("geometry: unknown tension_model '" + model + "'");
    }
    try {
        c.geometry.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

}  // namespace nanoblock
