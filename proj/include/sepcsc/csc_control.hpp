#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"
#include "sepcsc/dynamics/mee.hpp"
#include "sepcsc/engine_models.hpp"
#include "sepcsc/mode_table.hpp"

namespace sepcsc::csc {

/// Continuation parameters: rho_b smooths switching functions, rho_c the mode constraints.
struct SmoothingParams {
    double rho_b = 1.0;
    double rho_c = 1.0;

    void validate() const {
        if (!(rho_b > 0.0) || !(rho_c > 0.0)) throw ConfigError("smoothing parameters must be positive");
    }
};

namespace detail {

/// Returns (1/(1+e^{-2u}), 1/(1+e^{2u})) without cancellation for large |u|.
inline std::pair<double, double> logistic_pair_value(double u) {
    const double e = std::exp(-2.0 * std::abs(u));
    const double big = 1.0 / (1.0 + e);
    const double small = e / (1.0 + e);
    return u >= 0.0 ? std::pair{big, small} : std::pair{small, big};
}

inline std::pair<double, double> logistic_pair(double u) { return logistic_pair_value(u); }

template <std::size_t N> std::pair<ad::Dual<N>, ad::Dual<N>> logistic_pair(const ad::Dual<N> &u) {
    const auto [hi, lo] = logistic_pair_value(u.v);
    const double slope = 2.0 * hi * lo;
    return {ad::apply(u, hi, slope), ad::apply(u, lo, -slope)};
}

/// ln(1 + e^u), overflow-safe.
inline double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

template <std::size_t N> ad::Dual<N> softplus(const ad::Dual<N> &u) {
    return ad::apply(u, softplus(u.v), logistic_pair_value(0.5 * u.v).first);
}

} // namespace detail

/// zeta = (1 + tanh(S / rho_b)) / 2, evaluated in logistic form.
template <typename S> S setting_activation(const S &switching, double rho_b) {
    return detail::logistic_pair(switching / rho_b).first;
}

/**
 * @brief Smooth mode activation weights.
 *
 * Each constraint g (watts, g <= 0 feasible) enters as (1 - tanh(g / (ref * rho_c))) / 2.
 * Mode i is bounded below by its own p_used and above by the p_used of mode i-1;
 * the top mode has no upper constraint.
 */
template <typename S>
std::vector<S> activation_weights(const std::vector<double> &p_used_w, const S &p_ava_w, double rho_c,
                                  double reference_w = 1000.0) {
    const double scale = reference_w * rho_c;
    std::vector<S> w(p_used_w.size());
    S upper(1.0);
    for (std::size_t i = 0; i < p_used_w.size(); ++i) {
        // lower constraint g = L_i - P  ->  factor = logistic(2 (P - L_i)/scale)
        auto [above, below] = detail::logistic_pair((p_ava_w - p_used_w[i]) / scale);
        w[i] = above * upper;
        upper = below; // becomes the upper-bound factor of mode i+1
    }
    return w;
}

template <typename S>
std::vector<S> activation_weights(const modes::ModeTable &table, const S &p_ava_w, double rho_c,
                                  double reference_w = 1000.0) {
    std::vector<double> p;
    p.reserve(table.size());
    for (const auto &m : table.modes) p.push_back(m.p_used_w);
    return activation_weights(p, p_ava_w, rho_c, reference_w);
}

/// S = |lambda^T B| / m + lambda_m / c. Positive favours thrusting.
template <typename S> S switching_function(const S &lambda_b_norm, const S &lambda_m, const S &mass, double c) {
    return lambda_b_norm / mass + lambda_m / c;
}

template <typename S> dynamics::Vec3<S> lambda_times_b(const dynamics::Vec6<S> &lambda, const dynamics::Matrix63<S> &b) {
    dynamics::Vec3<S> out{S(0.0), S(0.0), S(0.0)};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) out[j] += lambda[i] * b[i][j];
    return out;
}

template <typename S>
S switching_function(const dynamics::Vec6<S> &lambda, const S &lambda_m, const dynamics::Matrix63<S> &b, const S &mass,
                     double c) {
    return switching_function(dynamics::norm(lambda_times_b(lambda, b)), lambda_m, mass, c);
}

inline constexpr double kDegenerateLambdaB = 1e-14;

/// Primer direction -lambda^T B / |lambda^T B|.
inline dynamics::Vec3<double> primer_direction(const dynamics::Vec3<double> &lambda_b) {
    const double n = dynamics::norm(lambda_b);
    if (!(n >= kDegenerateLambdaB)) throw ModelError("primer_direction: |lambda^T B| vanishes, direction undefined");
    return {-lambda_b[0] / n, -lambda_b[1] / n, -lambda_b[2] / n};
}

inline dynamics::Vec3<double> primer_direction(const dynamics::Vec6<double> &lambda, const dynamics::Matrix63<double> &b) {
    return primer_direction(lambda_times_b(lambda, b));
}

struct SmoothCounts {
    double n_at_pmax = 0.0;
    double n_at_pmin = 0.0;
};

inline SmoothCounts smooth_counts(const modes::ModeTable &table, const std::vector<double> &w) {
    if (w.size() != table.size()) throw RangeError("smooth_counts: weight vector size does not match mode table");
    SmoothCounts out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out.n_at_pmax += w[i] * table.modes[i].n_at_pmax;
        out.n_at_pmin += w[i] * table.modes[i].n_at_pmin;
    }
    return out;
}

/// Thrust/mass-flow constants of one engine at one setting.
struct SettingEndpoint {
    double thrust_mn = 0.0;
    double mdot_mg_s = 0.0;
    double exhaust_velocity_ms = 0.0;
    double power_w = 0.0;
    double efficiency = 0.0;
};

inline SettingEndpoint endpoint(const engine::EngineSpec &e, modes::Setting s) {
    const double p_kw = s == modes::Setting::max ? e.p_max_kw : e.p_min_kw;
    SettingEndpoint out;
    out.thrust_mn = engine::thrust_at_power(e, p_kw);
    out.mdot_mg_s = engine::mass_flow_at_power(e, p_kw);
    out.exhaust_velocity_ms = engine::exhaust_velocity_at_power(e, p_kw);
    out.power_w = 1000.0 * p_kw;
    out.efficiency = engine::efficiency_at_power(e, p_kw).value;
    return out;
}

struct ThrustMdot {
    double thrust_mn = 0.0;
    double mdot_mg_s = 0.0; // magnitude of the propellant flow
};

/**
 * @brief Same-type composite thrust: T_s = N_s * zeta * 2 P eta / c per setting,
 * mass flow T_s / c.
 */
inline ThrustMdot composite_thrust_mdot_same(const SmoothCounts &counts, double zeta_max, double zeta_min,
                                             const SettingEndpoint &at_max, const SettingEndpoint &at_min) {
    auto term = [](double n, double zeta, const SettingEndpoint &e) {
        const double thrust_n = n * zeta * 2.0 * e.power_w * e.efficiency / e.exhaust_velocity_ms;
        return std::pair{1e3 * thrust_n, 1e6 * thrust_n / e.exhaust_velocity_ms};
    };
    const auto [t_max, md_max] = term(counts.n_at_pmax, zeta_max, at_max);
    const auto [t_min, md_min] = term(counts.n_at_pmin, zeta_min, at_min);
    return {t_max + t_min, md_max + md_min};
}

/// gamma[i][s]: smooth activation of engine i at setting s (0 = min, 1 = max).
inline std::vector<std::array<double, 2>> engine_gammas(const modes::ModeTable &table, const std::vector<double> &w) {
    if (w.size() != table.size()) throw RangeError("engine_gammas: weight vector size does not match mode table");
    std::vector<std::array<double, 2>> gamma(table.cluster.size(), {0.0, 0.0});
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto &assign = table.modes[j].assignment;
        for (std::size_t i = 0; i < assign.size(); ++i) {
            if (assign[i] == modes::Setting::min) gamma[i][0] += w[j];
            if (assign[i] == modes::Setting::max) gamma[i][1] += w[j];
        }
    }
    return gamma;
}

/// Mixed composite thrust: sum over engines and settings of gamma * zeta * endpoint.
inline ThrustMdot composite_thrust_mdot_mixed(const modes::ModeTable &table, const std::vector<double> &w,
                                              const std::vector<std::array<double, 2>> &zetas,
                                              const std::vector<std::array<SettingEndpoint, 2>> &endpoints) {
    const auto gamma = engine_gammas(table, w);
    if (zetas.size() != gamma.size() || endpoints.size() != gamma.size())
        throw RangeError("composite_thrust_mdot_mixed: per-engine inputs do not match cluster size");
    ThrustMdot out;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        for (int s = 0; s < 2; ++s) {
            const double a = gamma[i][s] * zetas[i][s];
            out.thrust_mn += a * endpoints[i][s].thrust_mn;
            out.mdot_mg_s += a * endpoints[i][s].mdot_mg_s;
        }
    }
    return out;
}

/**
 * @brief Mode table flattened into thrust channels for the dynamics.
 *
 * A channel is one (engine type, setting) pair; counts[j][k] is how many
 * engines mode j places on channel k. Same-type clusters use two channels
 * (max, min); mixed clusters use two per engine. Thrust and exhaust
 * velocity are in canonical units.
 */
struct ControlTable {
    struct Channel {
        int engine_index = 0; // position in the cluster (same-type: 0)
        int engine_id = 0;
        modes::Setting setting = modes::Setting::max;
        SettingEndpoint si;
        double thrust = 0.0;            // canonical
        double exhaust_velocity = 0.0;  // canonical
    };

    modes::ModeTable table;
    std::vector<double> p_used_w;
    std::vector<Channel> channels;
    std::vector<std::vector<double>> counts; // [mode][channel]

    std::size_t n_modes() const { return p_used_w.size(); }

    static ControlTable build(const modes::ModeTable &table, const engine::EngineCatalog &cat,
                              const units::Canonical &cu) {
        ControlTable out;
        out.table = table;
        for (const auto &m : table.modes) out.p_used_w.push_back(m.p_used_w);
        auto make = [&](int index, int id, modes::Setting s) {
            Channel c;
            c.engine_index = index;
            c.engine_id = id;
            c.setting = s;
            c.si = endpoint(cat.at(id), s);
            c.thrust = cu.thrust_from_newton(1e-3 * c.si.thrust_mn);
            c.exhaust_velocity = cu.velocity_from_ms(c.si.exhaust_velocity_ms);
            return c;
        };
        const auto &ids = table.cluster.engine_ids;
        if (table.cluster.kind == modes::ClusterKind::same_type) {
            out.channels = {make(0, ids.front(), modes::Setting::max), make(0, ids.front(), modes::Setting::min)};
            for (const auto &m : table.modes)
                out.counts.push_back({static_cast<double>(m.n_at_pmax), static_cast<double>(m.n_at_pmin)});
        } else {
            for (std::size_t i = 0; i < ids.size(); ++i) {
                out.channels.push_back(make(static_cast<int>(i), ids[i], modes::Setting::min));
                out.channels.push_back(make(static_cast<int>(i), ids[i], modes::Setting::max));
            }
            for (const auto &m : table.modes) {
                std::vector<double> row(out.channels.size(), 0.0);
                for (std::size_t i = 0; i < m.assignment.size(); ++i) {
                    if (m.assignment[i] == modes::Setting::min) row[2 * i] = 1.0;
                    if (m.assignment[i] == modes::Setting::max) row[2 * i + 1] = 1.0;
                }
                out.counts.push_back(std::move(row));
            }
        }
        return out;
    }

    /// Smooth number of engines on each channel for the given weights.
    template <typename S> std::vector<S> channel_counts(const std::vector<S> &w) const {
        std::vector<S> n(channels.size(), S(0.0));
        for (std::size_t j = 0; j < w.size(); ++j)
            for (std::size_t k = 0; k < channels.size(); ++k)
                if (counts[j][k] != 0.0) n[k] += w[j] * counts[j][k];
        return n;
    }
};

} // namespace sepcsc::csc
