#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"

namespace sepcsc::power {

/**
 * @brief Solar-array output and power left for the engines.
 *
 * P_SA = psi(tau) * phi(r) * p0_bol, P_ava = P_SA - p_bus. Without fit
 * coefficients phi is the pure inverse-square law.
 */
struct PowerModel {
    double p0_bol_kw = 30.0;
    double decay_rate = 0.0; // fraction per year
    double p_bus_kw = 0.5;
    std::optional<std::array<double, 5>> phi_coeffs; // A1..A5
    double r_min_au = 0.8;
    double r_max_au = 2.0;

    void validate() const {
        if (!(p0_bol_kw > 0.0)) throw ConfigError("power: p0_bol_kw must be > 0");
        if (!(decay_rate >= 0.0 && decay_rate < 1.0)) throw ConfigError("power: decay_rate_per_year must be in [0, 1)");
        if (!(p_bus_kw >= 0.0)) throw ConfigError("power: p_bus_kw must be >= 0");
        if (!(r_min_au > 0.0 && r_min_au < r_max_au)) throw ConfigError("power: require 0 < r_min_au < r_max_au");
    }
};

template <typename Scalar> Scalar distance_factor(const PowerModel &m, const Scalar &r_au) {
    using std::sqrt;
    if (!(ad::value(r_au) > 0.0)) throw RangeError("power: heliocentric distance must be positive");
    const Scalar inv_r2 = 1.0 / (r_au * r_au);
    if (!m.phi_coeffs) return inv_r2;
    const auto &a = *m.phi_coeffs;
    const Scalar num = a[0] + a[1] / r_au + a[2] / (r_au * r_au);
    const Scalar den = 1.0 + a[3] * r_au + a[4] * r_au * r_au;
    return inv_r2 * num / den;
}

inline double degradation_factor(const PowerModel &m, double tau_years) {
    if (!(tau_years >= 0.0)) throw RangeError("power: elapsed time must be nonnegative");
    return std::pow(1.0 - m.decay_rate, tau_years);
}

/// Power available to the engines [kW]; negative when the bus load dominates.
template <typename Scalar> Scalar available_power(const PowerModel &m, const Scalar &r_au, double tau_years) {
    return degradation_factor(m, tau_years) * distance_factor(m, r_au) * m.p0_bol_kw - m.p_bus_kw;
}

} // namespace sepcsc::power
