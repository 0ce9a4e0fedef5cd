#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"

namespace sepcsc::engine {

/**
 * @brief Quartic surrogate model of one solar-electric engine type.
 *
 * Coefficients are stored highest power first, exactly as tabulated:
 * thrust in mN and mass flow in mg/s for input power in kW.
 */
struct EngineSpec {
    int id = 0;
    std::string name;
    std::array<double, 5> thrust_coeffs{};
    std::array<double, 5> mdot_coeffs{};
    double p_min_kw = 0.0;
    double p_max_kw = 0.0;

    void validate() const {
        if (!(p_min_kw > 0.0) || !(p_min_kw < p_max_kw)) {
            std::ostringstream msg;
            msg << "engine " << id << ": require 0 < p_min (" << p_min_kw << ") < p_max (" << p_max_kw << ")";
            throw ConfigError(msg.str());
        }
    }
};

namespace detail {

inline double horner(const std::array<double, 5> &c, double x) {
    return (((c[0] * x + c[1]) * x + c[2]) * x + c[3]) * x + c[4];
}

inline void check_power(const EngineSpec &e, double p_kw) {
    if (!std::isfinite(p_kw) || p_kw < e.p_min_kw || p_kw > e.p_max_kw) {
        std::ostringstream msg;
        msg << "engine " << e.id << " (" << e.name << "): power " << p_kw << " kW "
            << (p_kw < e.p_min_kw ? "below p_min " : "above p_max ")
            << (p_kw < e.p_min_kw ? e.p_min_kw : e.p_max_kw) << " kW";
        throw RangeError(msg.str());
    }
}

} // namespace detail

/// Thrust [mN] at input power [kW].
inline double thrust_at_power(const EngineSpec &e, double p_kw) {
    detail::check_power(e, p_kw);
    return detail::horner(e.thrust_coeffs, p_kw);
}

/// Mass flow rate [mg/s] at input power [kW].
inline double mass_flow_at_power(const EngineSpec &e, double p_kw) {
    detail::check_power(e, p_kw);
    return detail::horner(e.mdot_coeffs, p_kw);
}

/// Exhaust velocity [m/s]; mN / (mg/s) is km/s.
inline double exhaust_velocity_at_power(const EngineSpec &e, double p_kw) {
    const double thrust = thrust_at_power(e, p_kw);
    const double mdot = mass_flow_at_power(e, p_kw);
    if (!(std::abs(mdot) > 0.0)) {
        throw ModelError("engine " + std::to_string(e.id) + ": zero mass flow, exhaust velocity undefined");
    }
    return 1000.0 * thrust / mdot;
}

inline double specific_impulse_at_power(const EngineSpec &e, double p_kw) {
    return exhaust_velocity_at_power(e, p_kw) / units::kG0;
}

struct Efficiency {
    double value = 0.0;
    bool consistent = true; // false when outside (0, 1)
};

/// Jet efficiency T*c/(2P). An out-of-range value is flagged, not thrown.
inline Efficiency efficiency_at_power(const EngineSpec &e, double p_kw) {
    const double thrust_n = 1e-3 * thrust_at_power(e, p_kw);
    const double c = exhaust_velocity_at_power(e, p_kw);
    const double eta = thrust_n * c / (2.0 * p_kw * 1000.0);
    return {eta, eta > 0.0 && eta < 1.0};
}

/// Performance of one engine at one fixed power setting, SI units.
struct SettingPerformance {
    double power_w = 0.0;
    double thrust_n = 0.0;
    double mdot_kgs = 0.0;
    double exhaust_velocity_ms = 0.0;
    double efficiency = 0.0;
};

inline SettingPerformance performance_at(const EngineSpec &e, double p_kw) {
    SettingPerformance out;
    out.power_w = p_kw * 1000.0;
    out.thrust_n = 1e-3 * thrust_at_power(e, p_kw);
    out.mdot_kgs = 1e-6 * mass_flow_at_power(e, p_kw);
    out.exhaust_velocity_ms = exhaust_velocity_at_power(e, p_kw);
    out.efficiency = efficiency_at_power(e, p_kw).value;
    return out;
}

class EngineCatalog {
  public:
    EngineCatalog() = default;

    void add(EngineSpec spec) {
        spec.validate();
        engines_[spec.id] = std::move(spec);
    }

    bool contains(int id) const { return engines_.count(id) != 0; }

    const EngineSpec &at(int id) const {
        auto it = engines_.find(id);
        if (it == engines_.end()) throw ConfigError("unknown engine id " + std::to_string(id));
        return it->second;
    }

    std::size_t size() const { return engines_.size(); }

    std::vector<int> ids() const {
        std::vector<int> out;
        for (const auto &[id, _] : engines_) out.push_back(id);
        return out;
    }

    auto begin() const { return engines_.begin(); }
    auto end() const { return engines_.end(); }

  private:
    std::map<int, EngineSpec> engines_;
};

/// Built-in catalog: three BPT-4000 variants, NEXT TT10/TT11 and NSTAR.
inline EngineCatalog default_catalog() {
    EngineCatalog cat;
    cat.add({1, "BPT-4000 High-Isp",
             {-0.095437, 1.637023, -9.517167, 72.030104, -7.181341},
             {-0.008432, 0.148511, -0.802790, 3.743362, 1.244345},
             0.302, 4.839});
    cat.add({2, "BPT-4000 High-Thrust",
             {0.173870, -1.150940, -2.118891, 77.342132, -8.597025},
             {-0.011949, 0.235144, -1.632373, 6.847936, 0.352444},
             0.302, 4.839});
    cat.add({3, "BPT-4000 Ext-High-Isp",
             {1.174296, -10.102479, 19.422224, 47.927765, -1.454064},
             {0.086106, -0.727280, 1.328508, 1.998082, 1.653105},
             0.302, 4.839});
    cat.add({4, "NEXT TT10 High-Isp",
             {-0.19082, 2.96519, -14.41789, 54.05382, -1.92224e-6},
             {-0.004776, 0.05717, -0.09956, 0.03211, 2.13781},
             0.638, 7.266});
    cat.add({5, "NEXT TT11 High-Thrust",
             {0.101855017, -2.04053417, 11.4181412, 16.0989424, 11.9388817},
             {0.011021367, -0.207253445, 1.21670237, -1.71102132, 2.75956482},
             0.64, 7.36});
    cat.add({6, "NSTAR",
             {5.145602, -36.720293, 90.486509, -51.694393, 26.337459},
             {0.36985, -2.5372, 6.2539, -5.3568, 2.5060},
             0.525, 2.6});
    return cat;
}

namespace detail {

inline std::array<double, 5> coeffs_from_json(const nlohmann::json &j, const std::string &field, int id) {
    if (!j.is_array() || j.size() != 5) {
        throw ConfigError("engine " + std::to_string(id) + ": field '" + field + "' must be an array of 5 numbers");
    }
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < 5; ++i) {
        if (!j[i].is_number())
            throw ConfigError("engine " + std::to_string(id) + ": field '" + field + "' has a non-numeric entry");
        out[i] = j[i].get<double>();
    }
    return out;
}

} // namespace detail

/**
 * @brief Builds a catalog from a JSON document.
 *
 * The document is either an array of engines or an object with an "engines"
 * array. Entries override built-in engines by id; a partial entry is allowed
 * only when it overrides an existing engine. A null document yields the
 * built-in catalog.
 */
inline EngineCatalog load_catalog(const nlohmann::json &doc) {
    EngineCatalog cat = default_catalog();
    if (doc.is_null()) return cat;

    const nlohmann::json *list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("engines")) return cat;
        list = &doc.at("engines");
    }
    if (!list->is_array()) throw ConfigError("engine catalog: expected an array of engines");

    std::vector<int> seen;
    for (const auto &entry : *list) {
        if (!entry.is_object() || !entry.contains("id") || !entry.at("id").is_number_integer())
            throw ConfigError("engine catalog: every entry needs an integer 'id'");
        const int id = entry.at("id").get<int>();
        if (std::find(seen.begin(), seen.end(), id) != seen.end())
            throw ConfigError("engine catalog: duplicate id " + std::to_string(id));
        seen.push_back(id);

        const bool existing = cat.contains(id);
        EngineSpec spec = existing ? cat.at(id) : EngineSpec{};
        spec.id = id;
        auto require = [&](const char *field) {
            if (!entry.contains(field) && !existing)
                throw ConfigError("engine " + std::to_string(id) + ": missing field '" + field + "'");
            return entry.contains(field);
        };
        if (require("name")) spec.name = entry.at("name").get<std::string>();
        if (require("thrust_coeffs")) spec.thrust_coeffs = detail::coeffs_from_json(entry.at("thrust_coeffs"), "thrust_coeffs", id);
        if (require("mdot_coeffs")) spec.mdot_coeffs = detail::coeffs_from_json(entry.at("mdot_coeffs"), "mdot_coeffs", id);
        if (require("p_min_kw")) spec.p_min_kw = entry.at("p_min_kw").get<double>();
        if (require("p_max_kw")) spec.p_max_kw = entry.at("p_max_kw").get<double>();
        cat.add(spec);
    }
    return cat;
}

inline EngineCatalog load_catalog_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open engine catalog '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("engine catalog '" + path + "': " + e.what());
    }
    return load_catalog(doc);
}

} // namespace sepcsc::engine
