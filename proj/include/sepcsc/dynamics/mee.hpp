#pragma once

#include <array>
#include <cmath>

#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"

namespace sepcsc::dynamics {

template <typename S> using Vec3 = std::array<S, 3>;
template <typename S> using Vec6 = std::array<S, 6>;
template <typename S> using Matrix63 = std::array<std::array<S, 3>, 6>;

template <typename S> S dot(const Vec3<S> &a, const Vec3<S> &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

template <typename S> Vec3<S> cross(const Vec3<S> &a, const Vec3<S> &b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <typename S> S norm(const Vec3<S> &a) {
    using std::sqrt;
    return sqrt(dot(a, a));
}

/**
 * @brief Modified equinoctial elements.
 *
 * l is the true longitude, kept unwrapped so it grows monotonically along
 * prograde motion.
 */
template <typename S> struct Mee {
    S p{}, f{}, g{}, h{}, k{}, l{};

    Vec6<S> as_array() const { return {p, f, g, h, k, l}; }
    static Mee from_array(const Vec6<S> &a) { return {a[0], a[1], a[2], a[3], a[4], a[5]}; }
};

using MeeState = Mee<double>;

struct CartesianState {
    Vec3<double> r{}; // km
    Vec3<double> v{}; // km/s
    double epoch_jd = units::kJ2000;
};

/// w = 1 + f cos l + g sin l.
template <typename S> S conic_factor(const Mee<S> &x) {
    using std::cos;
    using std::sin;
    return 1.0 + x.f * cos(x.l) + x.g * sin(x.l);
}

template <typename S> S radius(const Mee<S> &x) { return x.p / conic_factor(x); }

inline bool is_valid(const MeeState &x) {
    return std::isfinite(x.p) && x.p > 0.0 && conic_factor(x) > 0.0 && std::isfinite(x.f) && std::isfinite(x.g) &&
           std::isfinite(x.h) && std::isfinite(x.k) && std::isfinite(x.l);
}

/// Converts position/velocity to elements; units follow mu (any consistent set).
inline MeeState mee_from_cartesian(const Vec3<double> &r, const Vec3<double> &v, double mu) {
    const Vec3<double> hv = cross(r, v);
    const double hmag = norm(hv);
    const double rmag = norm(r);
    if (!(rmag > 0.0) || !(hmag > 1e-14 * rmag * norm(v))) throw ModelError("mee: rectilinear or degenerate state");
    const Vec3<double> hhat{hv[0] / hmag, hv[1] / hmag, hv[2] / hmag};
    if (!(1.0 + hhat[2] > 1e-12)) throw ModelError("mee: retrograde equatorial orbit is singular for this element set");

    MeeState x;
    x.p = hmag * hmag / mu;
    x.h = -hhat[1] / (1.0 + hhat[2]);
    x.k = hhat[0] / (1.0 + hhat[2]);

    const Vec3<double> vxh = cross(v, hv);
    const Vec3<double> ecc{vxh[0] / mu - r[0] / rmag, vxh[1] / mu - r[1] / rmag, vxh[2] / mu - r[2] / rmag};
    if (!(norm(ecc) < 1.0 - 1e-12)) throw ModelError("mee: parabolic or hyperbolic state is not supported");

    const double s2 = 1.0 + x.h * x.h + x.k * x.k;
    const Vec3<double> fhat{(1.0 - x.k * x.k + x.h * x.h) / s2, 2.0 * x.k * x.h / s2, -2.0 * x.k / s2};
    const Vec3<double> ghat{2.0 * x.k * x.h / s2, (1.0 + x.k * x.k - x.h * x.h) / s2, 2.0 * x.h / s2};
    x.f = dot(ecc, fhat);
    x.g = dot(ecc, ghat);
    x.l = std::atan2(dot(r, ghat), dot(r, fhat));
    return x;
}

inline MeeState mee_from_cartesian(const CartesianState &s, double mu) { return mee_from_cartesian(s.r, s.v, mu); }

template <typename S> struct PosVel {
    Vec3<S> r;
    Vec3<S> v;
};

template <typename S> PosVel<S> cartesian_from_mee(const Mee<S> &x, double mu) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const S cl = cos(x.l), sl = sin(x.l);
    const S alpha2 = x.h * x.h - x.k * x.k;
    const S s2 = 1.0 + x.h * x.h + x.k * x.k;
    const S w = 1.0 + x.f * cl + x.g * sl;
    const S r = x.p / w;
    const S rs = r / s2;
    const S hk2 = 2.0 * x.h * x.k;
    PosVel<S> out;
    out.r = {rs * (cl + alpha2 * cl + hk2 * sl), rs * (sl - alpha2 * sl + hk2 * cl), 2.0 * rs * (x.h * sl - x.k * cl)};
    const S vs = -sqrt(mu / x.p) / s2;
    out.v = {vs * (sl + alpha2 * sl - hk2 * cl + x.g - hk2 * x.f + alpha2 * x.g),
             vs * (-cl + alpha2 * cl + hk2 * sl - x.f + hk2 * x.g + alpha2 * x.f),
             vs * (-2.0) * (x.h * cl + x.k * sl + x.f * x.h + x.g * x.k)};
    return out;
}

inline CartesianState cartesian_from_mee(const MeeState &x, double mu, double epoch_jd) {
    const auto pv = cartesian_from_mee(x, mu);
    return {pv.r, pv.v, epoch_jd};
}

/// Two-body part of the element rates: only l moves.
template <typename S> Vec6<S> two_body_term(const Mee<S> &x, double mu = 1.0) {
    using std::sqrt;
    const S w = conic_factor(x);
    const S ratio = w / x.p;
    return {S(0.0), S(0.0), S(0.0), S(0.0), S(0.0), sqrt(mu * x.p) * ratio * ratio};
}

/**
 * @brief Gauss variational matrix mapping an LVLH acceleration
 * (radial, transverse, normal) to element rates.
 */
template <typename S> Matrix63<S> control_influence(const Mee<S> &x, double mu = 1.0) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const S cl = cos(x.l), sl = sin(x.l);
    const S w = 1.0 + x.f * cl + x.g * sl;
    const S sp = sqrt(x.p / mu);
    const S s2 = 1.0 + x.h * x.h + x.k * x.k;
    const S hsk = x.h * sl - x.k * cl;
    const S zero(0.0);
    Matrix63<S> b;
    b[0] = {zero, 2.0 * x.p / w * sp, zero};
    b[1] = {sp * sl, sp / w * ((w + 1.0) * cl + x.f), -sp * x.g / w * hsk};
    b[2] = {-sp * cl, sp / w * ((w + 1.0) * sl + x.g), sp * x.f / w * hsk};
    b[3] = {zero, zero, sp * s2 * cl / (2.0 * w)};
    b[4] = {zero, zero, sp * s2 * sl / (2.0 * w)};
    b[5] = {zero, zero, sp / w * hsk};
    return b;
}

/// Rotates an inertial vector into the LVLH (radial, transverse, normal) frame.
template <typename S, typename V> Vec3<S> inertial_to_lvlh(const Mee<S> &x, const Vec3<V> &a) {
    using std::cos;
    using std::sin;
    const S cl = cos(x.l), sl = sin(x.l);
    const S s2 = 1.0 + x.h * x.h + x.k * x.k;
    const Vec3<S> fhat{(1.0 - x.k * x.k + x.h * x.h) / s2, 2.0 * x.k * x.h / s2, -2.0 * x.k / s2};
    const Vec3<S> ghat{2.0 * x.k * x.h / s2, (1.0 + x.k * x.k - x.h * x.h) / s2, 2.0 * x.h / s2};
    const Vec3<S> nhat{2.0 * x.k / s2, -2.0 * x.h / s2, (1.0 - x.h * x.h - x.k * x.k) / s2};
    Vec3<S> rhat, that;
    for (int i = 0; i < 3; ++i) {
        rhat[i] = cl * fhat[i] + sl * ghat[i];
        that[i] = -sl * fhat[i] + cl * ghat[i];
    }
    auto proj = [&](const Vec3<S> &u) { return u[0] * a[0] + u[1] * a[1] + u[2] * a[2]; };
    return {proj(rhat), proj(that), proj(nhat)};
}

} // namespace sepcsc::dynamics
