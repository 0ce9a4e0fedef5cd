#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"
#include "sepcsc/dynamics/mee.hpp"

namespace sepcsc::dynamics {

/// Mean Keplerian elements at J2000 (ecliptic) with linear rates per Julian century.
struct BodyElements {
    std::string name;
    double mu_km3s2 = 0.0;
    // a [AU], e, I [deg], L [deg], longitude of perihelion [deg], longitude of node [deg]
    std::array<double, 6> elements{};
    std::array<double, 6> rates{};

    void validate() const {
        if (!(elements[0] > 0.0)) throw ConfigError("body " + name + ": semi-major axis must be positive");
        if (!(elements[1] >= 0.0 && elements[1] < 1.0)) throw ConfigError("body " + name + ": eccentricity outside [0,1)");
        if (!(mu_km3s2 >= 0.0)) throw ConfigError("body " + name + ": negative mu");
    }
};

/// Solves E - e sin E = M by Newton iteration.
inline double solve_kepler(double mean_anomaly, double ecc, double tol = 1e-12, int max_iter = 50) {
    const double m = std::remainder(mean_anomaly, units::kTwoPi);
    double e_anom = ecc < 0.8 ? m : units::kPi * (m < 0 ? -1.0 : 1.0);
    for (int i = 0; i < max_iter; ++i) {
        const double delta = (e_anom - ecc * std::sin(e_anom) - m) / (1.0 - ecc * std::cos(e_anom));
        e_anom -= delta;
        if (std::abs(delta) < tol) return e_anom;
    }
    throw ConvergenceError("kepler: no convergence after " + std::to_string(max_iter) + " iterations");
}

/**
 * @brief Low-precision planetary ephemeris from propagated mean elements.
 *
 * Valid between 1800 and 2050 AD for the default data set.
 */
class Ephemeris {
  public:
    Ephemeris() = default;
    explicit Ephemeris(std::vector<BodyElements> bodies, double jd_min = 2378496.5, double jd_max = 2469807.5)
        : bodies_(std::move(bodies)), jd_min_(jd_min), jd_max_(jd_max) {
        for (const auto &b : bodies_) b.validate();
    }

    const std::vector<BodyElements> &bodies() const { return bodies_; }
    std::size_t size() const { return bodies_.size(); }

    std::size_t index_of(const std::string &name) const {
        for (std::size_t i = 0; i < bodies_.size(); ++i)
            if (bodies_[i].name == name) return i;
        throw ConfigError("ephemeris: unknown body '" + name + "'");
    }

    Ephemeris subset(const std::vector<std::string> &names) const {
        std::vector<BodyElements> out;
        for (const auto &n : names) out.push_back(bodies_[index_of(n)]);
        return Ephemeris(std::move(out), jd_min_, jd_max_);
    }

    /// Heliocentric ecliptic position [km].
    Vec3<double> position(std::size_t body, double jd) const {
        if (jd < jd_min_ || jd > jd_max_)
            throw RangeError("ephemeris: epoch JD " + std::to_string(jd) + " outside validity window");
        const auto &b = bodies_.at(body);
        const double centuries = (jd - units::kJ2000) / 36525.0;
        std::array<double, 6> el{};
        for (int i = 0; i < 6; ++i) el[i] = b.elements[i] + b.rates[i] * centuries;
        constexpr double deg = units::kPi / 180.0;
        const double a = el[0] * units::kAuKm, e = el[1], inc = el[2] * deg;
        const double mean_lon = el[3] * deg, peri = el[4] * deg, node = el[5] * deg;
        const double argp = peri - node;
        const double e_anom = solve_kepler(mean_lon - peri, e);
        const double xp = a * (std::cos(e_anom) - e);
        const double yp = a * std::sqrt(1.0 - e * e) * std::sin(e_anom);
        const double cw = std::cos(argp), sw = std::sin(argp);
        const double co = std::cos(node), so = std::sin(node);
        const double ci = std::cos(inc), si = std::sin(inc);
        return {(cw * co - sw * so * ci) * xp + (-sw * co - cw * so * ci) * yp,
                (cw * so + sw * co * ci) * xp + (-sw * so + cw * co * ci) * yp, (sw * si) * xp + (cw * si) * yp};
    }

    Vec3<double> position(const std::string &body, double jd) const { return position(index_of(body), jd); }

  private:
    std::vector<BodyElements> bodies_;
    double jd_min_ = 2378496.5;
    double jd_max_ = 2469807.5;
};

/// Mercury..Neptune (Earth-Moon barycentre for Earth), J2000 ecliptic mean elements.
inline Ephemeris default_ephemeris() {
    std::vector<BodyElements> b = {
        {"Mercury", 22031.78, {0.38709927, 0.20563593, 7.00497902, 252.25032350, 77.45779628, 48.33076593},
         {0.00000037, 0.00001906, -0.00594749, 149472.67411175, 0.16047689, -0.12534081}},
        {"Venus", 324858.59, {0.72333566, 0.00677672, 3.39467605, 181.97909950, 131.60246718, 76.67984255},
         {0.00000390, -0.00004107, -0.00078890, 58517.81538729, 0.00268329, -0.27769418}},
        {"Earth", 403503.24, {1.00000261, 0.01671123, -0.00001531, 100.46457166, 102.93768193, 0.0},
         {0.00000562, -0.00004392, -0.01294668, 35999.37244981, 0.32327364, 0.0}},
        {"Mars", 42828.37, {1.52371034, 0.09339410, 1.84969142, -4.55343205, -23.94362959, 49.55953891},
         {0.00001847, 0.00007882, -0.00813131, 19140.30268499, 0.44441088, -0.29257343}},
        {"Jupiter", 126712764.1, {5.20288700, 0.04838624, 1.30439695, 34.39644051, 14.72847983, 100.47390909},
         {-0.00011607, -0.00013253, -0.00183714, 3034.74612775, 0.21252668, 0.20469106}},
        {"Saturn", 37940585.2, {9.53667594, 0.05386179, 2.48599187, 49.95424423, 92.59887831, 113.66242448},
         {-0.00125060, -0.00050991, 0.00193609, 1222.49362201, -0.41897216, -0.28867794}},
        {"Uranus", 5794556.4, {19.18916464, 0.04725744, 0.77263783, 313.23810451, 170.95427630, 74.01692503},
         {-0.00196176, -0.00004397, -0.00242939, 428.48202785, 0.40805281, 0.04240589}},
        {"Neptune", 6836527.1, {30.06992276, 0.00859048, 1.77004347, -55.12002969, 44.96476227, 131.78422574},
         {0.00026291, 0.00005105, 0.00035372, 218.45945325, -0.32241464, -0.00508664}},
    };
    return Ephemeris(std::move(b));
}

inline Ephemeris load_ephemeris(const nlohmann::json &doc) {
    if (doc.is_null()) return default_ephemeris();
    const auto &list = doc.is_object() ? doc.at("bodies") : doc;
    std::vector<BodyElements> out;
    static const char *keys[6] = {"a_au", "e", "i_deg", "L_deg", "long_peri_deg", "long_node_deg"};
    try {
        for (const auto &j : list) {
            BodyElements b;
            b.name = j.at("name").get<std::string>();
            b.mu_km3s2 = j.at("mu_km3s2").get<double>();
            for (int i = 0; i < 6; ++i) {
                b.elements[i] = j.at("elements").at(keys[i]).get<double>();
                b.rates[i] = j.at("rates_per_century").at(keys[i]).get<double>();
            }
            out.push_back(b);
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("planet elements: ") + e.what());
    }
    const double jd_min = doc.is_object() ? doc.value("jd_min", 2378496.5) : 2378496.5;
    const double jd_max = doc.is_object() ? doc.value("jd_max", 2469807.5) : 2469807.5;
    return Ephemeris(std::move(out), jd_min, jd_max);
}

inline Ephemeris load_ephemeris_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open planet elements file '" + path + "'");
    try {
        return load_ephemeris(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("planet elements '" + path + "': " + e.what());
    }
}

/// Body positions and gravitational parameters at one instant, in the caller's units.
struct BodySnapshot {
    std::vector<Vec3<double>> positions;
    std::vector<double> mus;
};

inline BodySnapshot snapshot(const Ephemeris &eph, double jd, double length_scale_km = 1.0, double mu_scale = 1.0) {
    BodySnapshot s;
    for (std::size_t i = 0; i < eph.size(); ++i) {
        auto r = eph.position(i, jd);
        for (auto &c : r) c /= length_scale_km;
        s.positions.push_back(r);
        s.mus.push_back(eph.bodies()[i].mu_km3s2 / mu_scale);
    }
    return s;
}

/**
 * @brief Third-body perturbation including the indirect term,
 * sum_b mu_b [(r_b - r)/|r_b - r|^3 - r_b/|r_b|^3].
 */
template <typename S> Vec3<S> secondary_accel(const BodySnapshot &bodies, const Vec3<S> &r_sc, double min_separation = 0.0) {
    using std::sqrt;
    Vec3<S> acc{S(0.0), S(0.0), S(0.0)};
    for (std::size_t b = 0; b < bodies.positions.size(); ++b) {
        const auto &rb = bodies.positions[b];
        const Vec3<S> d{rb[0] - r_sc[0], rb[1] - r_sc[1], rb[2] - r_sc[2]};
        const S d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if (!(ad::value(d2) > min_separation * min_separation) || !(ad::value(d2) > 0.0))
            throw ModelError("secondary_accel: spacecraft collides with body " + std::to_string(b));
        const S d3 = d2 * sqrt(d2);
        const double rb_norm = std::sqrt(rb[0] * rb[0] + rb[1] * rb[1] + rb[2] * rb[2]);
        const double rb3 = rb_norm * rb_norm * rb_norm;
        for (int i = 0; i < 3; ++i) acc[i] += bodies.mus[b] * (d[i] / d3 - rb[i] / rb3);
    }
    return acc;
}

} // namespace sepcsc::dynamics
