#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sepcsc/core/error.hpp"
#include "sepcsc/engine_models.hpp"
#include "sepcsc/power_model.hpp"

namespace sepcsc::modes {

enum class ClusterKind { same_type, mixed };

enum class Setting : std::uint8_t { off = 0, min = 1, max = 2 };

struct ClusterSpec {
    ClusterKind kind = ClusterKind::same_type;
    std::vector<int> engine_ids;

    std::size_t size() const { return engine_ids.size(); }

    void validate(const engine::EngineCatalog &cat) const {
        if (engine_ids.empty()) throw ConfigError("cluster: at least one engine is required");
        for (int id : engine_ids)
            if (!cat.contains(id)) throw ConfigError("cluster: unknown engine id " + std::to_string(id));
        if (kind == ClusterKind::same_type &&
            std::any_of(engine_ids.begin(), engine_ids.end(), [&](int id) { return id != engine_ids.front(); }))
            throw ConfigError("cluster: same_type cluster lists different engine ids");
    }

    static ClusterSpec same(int id, std::size_t count) {
        return {ClusterKind::same_type, std::vector<int>(count, id)};
    }
    static ClusterSpec mixed(std::vector<int> ids) { return {ClusterKind::mixed, std::move(ids)}; }
};

/**
 * @brief One discrete cluster configuration.
 *
 * For mixed clusters `assignment` holds one setting per engine of the
 * cluster; for same-type clusters it is filled with the first n_at_pmax
 * engines at max and the next n_at_pmin at min so both kinds share one
 * representation. The counts are kept for both kinds.
 */
struct OperationMode {
    int index = 0; // 1-based rank after sorting
    double p_used_w = 0.0;
    int n_at_pmax = 0;
    int n_at_pmin = 0;
    std::vector<Setting> assignment;
    double mdot_full_mg_s = 0.0;
};

struct ModeTable {
    ClusterSpec cluster;
    std::vector<OperationMode> modes;
    double cap_w = 0.0;

    std::size_t size() const { return modes.size(); }
    const OperationMode &operator[](std::size_t i) const { return modes[i]; }
};

inline constexpr double kPowerTieTolW = 1e-6;

namespace detail {

// Setting power in watts, rounded to the milliwatt so that kW data such as
// 4.839 map onto exact integers.
inline double watts(double kw) { return std::round(kw * 1e6) / 1e3; }

inline double setting_power_w(const engine::EngineSpec &e, Setting s) {
    switch (s) {
    case Setting::off: return 0.0;
    case Setting::min: return watts(e.p_min_kw);
    case Setting::max: return watts(e.p_max_kw);
    }
    return 0.0;
}

inline double setting_mdot(const engine::EngineSpec &e, Setting s) {
    switch (s) {
    case Setting::off: return 0.0;
    case Setting::min: return engine::mass_flow_at_power(e, e.p_min_kw);
    case Setting::max: return engine::mass_flow_at_power(e, e.p_max_kw);
    }
    return 0.0;
}

inline bool assignment_less(const OperationMode &a, const OperationMode &b) {
    return std::lexicographical_compare(a.assignment.begin(), a.assignment.end(), b.assignment.begin(),
                                        b.assignment.end());
}

inline void sort_descending(std::vector<OperationMode> &modes) {
    std::stable_sort(modes.begin(), modes.end(), [](const OperationMode &a, const OperationMode &b) {
        if (std::abs(a.p_used_w - b.p_used_w) > kPowerTieTolW) return a.p_used_w > b.p_used_w;
        return assignment_less(a, b);
    });
}

inline void reindex(std::vector<OperationMode> &modes) {
    for (std::size_t i = 0; i < modes.size(); ++i) modes[i].index = static_cast<int>(i) + 1;
}

} // namespace detail

/**
 * @brief Keeps, among modes with equal aggregate power, the one with the
 * smallest full mass flow (fuel-optimal tie break). Remaining ties go to the
 * lexicographically smallest assignment. Output is sorted by decreasing power.
 */
inline std::vector<OperationMode> dedup_filter(std::vector<OperationMode> raw) {
    detail::sort_descending(raw);
    std::vector<OperationMode> out;
    for (auto &m : raw) {
        if (!out.empty() && std::abs(out.back().p_used_w - m.p_used_w) <= kPowerTieTolW) {
            auto &kept = out.back();
            const bool lighter = m.mdot_full_mg_s < kept.mdot_full_mg_s;
            const bool tie = m.mdot_full_mg_s == kept.mdot_full_mg_s;
            if (lighter || (tie && detail::assignment_less(m, kept))) kept = std::move(m);
            continue;
        }
        out.push_back(std::move(m));
    }
    detail::reindex(out);
    return out;
}

/// Cap used by the feasibility cut: p0_bol * phi(r_min) in watts.
inline double default_cap(const power::PowerModel &pm) {
    return 1000.0 * pm.p0_bol_kw * power::distance_factor(pm, pm.r_min_au);
}

inline ModeTable enumerate_same_type(const engine::EngineCatalog &cat, const ClusterSpec &cluster, double cap_w) {
    cluster.validate(cat);
    if (!(cap_w > 0.0)) throw ConfigError("mode table: cap must be positive");
    const auto &e = cat.at(cluster.engine_ids.front());
    const int n = static_cast<int>(cluster.size());
    const double p_max = detail::setting_power_w(e, Setting::max);
    const double p_min = detail::setting_power_w(e, Setting::min);
    const double mdot_max = detail::setting_mdot(e, Setting::max);
    const double mdot_min = detail::setting_mdot(e, Setting::min);

    std::vector<OperationMode> raw;
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; a + b <= n; ++b) {
            if (a + b == 0) continue;
            OperationMode m;
            m.p_used_w = a * p_max + b * p_min;
            if (m.p_used_w > cap_w + kPowerTieTolW) continue;
            m.n_at_pmax = a;
            m.n_at_pmin = b;
            m.assignment.assign(static_cast<std::size_t>(n), Setting::off);
            std::fill_n(m.assignment.begin(), a, Setting::max);
            std::fill_n(m.assignment.begin() + a, b, Setting::min);
            m.mdot_full_mg_s = a * mdot_max + b * mdot_min;
            raw.push_back(std::move(m));
        }
    }
    if (raw.empty()) throw ConfigError("mode table: no feasible mode under cap");
    return {cluster, dedup_filter(std::move(raw)), cap_w};
}

/// All {off,min,max} combinations except all-off, capped, unfiltered.
inline std::vector<OperationMode> enumerate_mixed_raw(const engine::EngineCatalog &cat, const ClusterSpec &cluster,
                                                      double cap_w) {
    cluster.validate(cat);
    const std::size_t n = cluster.size();
    std::vector<const engine::EngineSpec *> specs;
    for (int id : cluster.engine_ids) specs.push_back(&cat.at(id));

    std::vector<OperationMode> raw;
    std::vector<Setting> assign(n, Setting::off);
    // Odometer over base-3 digits, engine 0 most significant.
    while (true) {
        std::size_t pos = n;
        while (pos > 0) {
            auto &digit = assign[pos - 1];
            if (digit != Setting::max) {
                digit = static_cast<Setting>(static_cast<int>(digit) + 1);
                break;
            }
            digit = Setting::off;
            --pos;
        }
        if (pos == 0) break;

        OperationMode m;
        m.assignment = assign;
        for (std::size_t i = 0; i < n; ++i) {
            m.p_used_w += detail::setting_power_w(*specs[i], assign[i]);
            m.mdot_full_mg_s += detail::setting_mdot(*specs[i], assign[i]);
            m.n_at_pmax += assign[i] == Setting::max;
            m.n_at_pmin += assign[i] == Setting::min;
        }
        if (m.p_used_w <= cap_w + kPowerTieTolW) raw.push_back(std::move(m));
    }
    detail::sort_descending(raw);
    detail::reindex(raw);
    return raw;
}

inline ModeTable enumerate_mixed(const engine::EngineCatalog &cat, const ClusterSpec &cluster, double cap_w) {
    auto filtered = dedup_filter(enumerate_mixed_raw(cat, cluster, cap_w));
    if (filtered.empty()) throw ConfigError("mode table: no feasible mode under cap");
    return {cluster, std::move(filtered), cap_w};
}

inline ModeTable enumerate(const engine::EngineCatalog &cat, const ClusterSpec &cluster, double cap_w) {
    return cluster.kind == ClusterKind::same_type ? enumerate_same_type(cat, cluster, cap_w)
                                                  : enumerate_mixed(cat, cluster, cap_w);
}

struct PowerBounds {
    double lower_w;
    double upper_w; // +inf for the top mode
};

/// Power interval [lower, upper) over which mode i (1-based) is engaged.
inline PowerBounds mode_power_bounds(const ModeTable &table, std::size_t i) {
    if (i < 1 || i > table.size())
        throw RangeError("mode index " + std::to_string(i) + " outside 1.." + std::to_string(table.size()));
    const double upper = i == 1 ? std::numeric_limits<double>::infinity() : table.modes[i - 2].p_used_w;
    return {table.modes[i - 1].p_used_w, upper};
}

inline const char *setting_name(Setting s) {
    switch (s) {
    case Setting::off: return "off";
    case Setting::min: return "min";
    case Setting::max: return "max";
    }
    return "?";
}

/// CSV: index, p_used_w, setting columns, mdot_mg_s.
inline void write_csv(std::ostream &os, const ModeTable &table, const std::vector<OperationMode> &modes) {
    const auto &ids = table.cluster.engine_ids;
    const bool same = table.cluster.kind == ClusterKind::same_type;
    os << "index,p_used_w";
    if (same) {
        os << ",n_at_pmax,n_at_pmin";
    } else {
        for (std::size_t i = 0; i < ids.size(); ++i)
            os << ",e" << i + 1 << "_id" << ids[i] << "_pmin,e" << i + 1 << "_id" << ids[i] << "_pmax";
    }
    os << ",mdot_mg_s\n";
    const auto old_precision = os.precision(10);
    for (const auto &m : modes) {
        os << m.index << ',' << m.p_used_w;
        if (same) {
            os << ',' << m.n_at_pmax << ',' << m.n_at_pmin;
        } else {
            for (auto s : m.assignment) os << ',' << (s == Setting::min) << ',' << (s == Setting::max);
        }
        os << ',' << m.mdot_full_mg_s << '\n';
    }
    os.precision(old_precision);
}

inline void write_csv(std::ostream &os, const ModeTable &table) { write_csv(os, table, table.modes); }

} // namespace sepcsc::modes
