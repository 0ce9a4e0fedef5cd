#pragma once

#include <cmath>

namespace sepcsc::units {

inline constexpr double kAuKm = 149597870.7;
inline constexpr double kMuSunKm3s2 = 1.32712440018e11;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDaysPerYear = 365.25;
inline constexpr double kG0 = 9.80665; // m/s^2
inline constexpr double kJ2000 = 2451545.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/**
 * @brief Canonical scaling: 1 LU = 1 AU, mu_sun = 1, 1 MU = initial mass.
 */
struct Canonical {
    double lu_km = kAuKm;
    double mu_km3s2 = kMuSunKm3s2;
    double mu_kg = 1.0;

    double tu_s() const { return std::sqrt(lu_km * lu_km * lu_km / mu_km3s2); }
    double vu_kms() const { return lu_km / tu_s(); }
    /// Acceleration unit in m/s^2.
    double au_ms2() const { return lu_km * 1000.0 / (tu_s() * tu_s()); }

    double thrust_from_newton(double newton) const { return newton / (mu_kg * au_ms2()); }
    double velocity_from_ms(double ms) const { return ms / (vu_kms() * 1000.0); }
    double mass_rate_from_kgs(double kgs) const { return kgs * tu_s() / mu_kg; }
    double time_from_days(double days) const { return days * kSecondsPerDay / tu_s(); }
    double days_from_time(double t) const { return t * tu_s() / kSecondsPerDay; }
    double length_from_km(double km) const { return km / lu_km; }
    double mu_from_km3s2(double mu) const { return mu / mu_km3s2; }
};

} // namespace sepcsc::units
