#pragma once

// Test oracles written independently of the library code paths they check.

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sepcsc/sepcsc.hpp"

namespace testsupport {

inline std::string source_path(const std::string &rel) { return std::string(SEPCSC_SOURCE_DIR) + "/" + rel; }

inline sepcsc::solver::ProblemConfig load_config(const std::string &name) {
    return sepcsc::solver::load_problem_file(source_path("configs/" + name));
}

/// Brute force over every engine's on/off/min/max state; counts distinct P_used below the cap.
/// Same-type engines are interchangeable, so distinct (a, b) pairs are what counts.
inline std::size_t brute_force_same_type_count(int n, double p_max_w, double p_min_w, double cap_w) {
    std::vector<std::pair<int, int>> seen;
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 1; code < total; ++code) {
        std::size_t c = code;
        int a = 0, b = 0;
        for (int i = 0; i < n; ++i) {
            const int d = static_cast<int>(c % 3);
            c /= 3;
            a += d == 2;
            b += d == 1;
        }
        if (a * p_max_w + b * p_min_w > cap_w + 1e-6) continue;
        bool dup = false;
        for (const auto &s : seen) dup = dup || (s.first == a && s.second == b);
        if (!dup) seen.emplace_back(a, b);
    }
    return seen.size();
}

/// Same count without the 3^n loop, for larger clusters: every (a, b) with a + b in [1, n].
inline std::size_t pair_count(int n, double p_max_w, double p_min_w, double cap_w) {
    std::size_t k = 0;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b)
            if (a + b > 0 && a * p_max_w + b * p_min_w <= cap_w + 1e-6) ++k;
    return k;
}

inline double horner_ref(const std::array<double, 5> &c, double x) {
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += c[i] * std::pow(x, 4 - i);
    return acc;
}

/// Central-difference derivative of a scalar function of one coordinate.
template <typename F> double central_diff(F &&f, double x, double h) { return (f(x + h) - f(x - h)) / (2.0 * h); }

/// Two-body acceleration plus an inertial perturbation, converted to MEE rates by finite
/// differences of the Cartesian-to-MEE map (an oracle for B(x)).
inline std::array<double, 6> mee_rate_from_cartesian(const sepcsc::dynamics::Vec3<double> &r,
                                                     const sepcsc::dynamics::Vec3<double> &v,
                                                     const sepcsc::dynamics::Vec3<double> &dv_inertial, double h) {
    using namespace sepcsc::dynamics;
    Vec3<double> vp = v, vm = v;
    for (int i = 0; i < 3; ++i) {
        vp[i] += h * dv_inertial[i];
        vm[i] -= h * dv_inertial[i];
    }
    const auto xp = mee_from_cartesian(r, vp, 1.0).as_array();
    const auto xm = mee_from_cartesian(r, vm, 1.0).as_array();
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) {
        double d = xp[i] - xm[i];
        if (i == 5) d = std::remainder(d, 2.0 * M_PI);
        out[i] = d / (2.0 * h);
    }
    return out;
}

/// Random elliptic MEE state with moderate eccentricity and inclination.
inline sepcsc::dynamics::MeeState random_mee(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    sepcsc::dynamics::MeeState x;
    x.p = 1.0 + 0.4 * u(rng);
    x.f = 0.2 * u(rng);
    x.g = 0.2 * u(rng);
    x.h = 0.1 * u(rng);
    x.k = 0.1 * u(rng);
    x.l = 3.0 * u(rng) + 3.0;
    return x;
}

} // namespace testsupport
