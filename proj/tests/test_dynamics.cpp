#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace sepcsc;
using namespace sepcsc::dynamics;

namespace {

const Vec3<double> kR0{-1671985.95664453, -151914424.309981, 1699.37510504324};
const Vec3<double> kV0{29.3070443053298, -0.596900982440449, -4.10911520334288e-4};

double rel_err(const Vec3<double> &a, const Vec3<double> &b) {
    return norm(Vec3<double>{a[0] - b[0], a[1] - b[1], a[2] - b[2]}) / norm(b);
}

// Classical RK4 on the Cartesian two-body problem (mu = 1), used as an oracle.
void rk4_two_body(Vec3<double> &r, Vec3<double> &v, double dt, int steps) {
    using St = std::array<double, 6>;
    auto f = [](const St &s) {
        const double rn = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
        const double k = -1.0 / (rn * rn * rn);
        return St{s[3], s[4], s[5], k * s[0], k * s[1], k * s[2]};
    };
    St s{r[0], r[1], r[2], v[0], v[1], v[2]};
    const double h = dt / steps;
    for (int i = 0; i < steps; ++i) {
        St k1 = f(s), t{};
        for (int j = 0; j < 6; ++j) t[j] = s[j] + 0.5 * h * k1[j];
        St k2 = f(t);
        for (int j = 0; j < 6; ++j) t[j] = s[j] + 0.5 * h * k2[j];
        St k3 = f(t);
        for (int j = 0; j < 6; ++j) t[j] = s[j] + h * k3[j];
        St k4 = f(t);
        for (int j = 0; j < 6; ++j) s[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    r = {s[0], s[1], s[2]};
    v = {s[3], s[4], s[5]};
}

struct Lvlh {
    Vec3<double> rhat, that, nhat;
};

Lvlh lvlh_from_cartesian(const Vec3<double> &r, const Vec3<double> &v) {
    const double rn = norm(r);
    Vec3<double> rhat{r[0] / rn, r[1] / rn, r[2] / rn};
    auto h = cross(r, v);
    const double hn = norm(h);
    Vec3<double> nhat{h[0] / hn, h[1] / hn, h[2] / hn};
    return {rhat, cross(nhat, rhat), nhat};
}

} // namespace

TEST(Dynamics, CircularEquatorialOrbit) {
    const double a = 1.7;
    const auto x = mee_from_cartesian({a, 0.0, 0.0}, {0.0, std::sqrt(1.0 / a), 0.0}, 1.0);
    EXPECT_NEAR(x.p, a, 1e-15);
    EXPECT_NEAR(x.f, 0.0, 1e-15);
    EXPECT_NEAR(x.g, 0.0, 1e-15);
    EXPECT_EQ(x.h, 0.0);
    EXPECT_EQ(x.k, 0.0);
    EXPECT_NEAR(x.l, 0.0, 1e-15);
    EXPECT_NEAR(radius(x), a, 1e-15);
}

TEST(Dynamics, BoundaryVectorRoundTrip) {
    const auto x = mee_from_cartesian(kR0, kV0, units::kMuSunKm3s2);
    EXPECT_TRUE(is_valid(x));
    const auto back = cartesian_from_mee(x, units::kMuSunKm3s2);
    EXPECT_LT(rel_err(back.r, kR0), 1e-9);
    EXPECT_LT(rel_err(back.v, kV0), 1e-9);
    const auto state = cartesian_from_mee(x, units::kMuSunKm3s2, 2460478.5);
    EXPECT_EQ(state.epoch_jd, 2460478.5);
    const auto again = mee_from_cartesian(state, units::kMuSunKm3s2);
    EXPECT_NEAR(again.p, x.p, 1e-9 * x.p);
}

TEST(Dynamics, DegenerateStatesAreRejected) {
    EXPECT_THROW(mee_from_cartesian({1, 0, 0}, {0, -1, 0}, 1.0), ModelError);       // retrograde equatorial
    EXPECT_THROW(mee_from_cartesian({1, 0, 0}, {2, 0, 0}, 1.0), ModelError);        // rectilinear
    EXPECT_THROW(mee_from_cartesian({1, 0, 0}, {0, 1.5, 0}, 1.0), ModelError);      // hyperbolic
    EXPECT_THROW(mee_from_cartesian({0, 0, 0}, {0, 1, 0}, 1.0), ModelError);
    // retrograde but inclined is fine
    EXPECT_NO_THROW(mee_from_cartesian({1, 0, 0}, {0, -0.9, 0.2}, 1.0));
}

TEST(Dynamics, TwoBodyTerm) {
    MeeState c{1.0, 0.0, 0.0, 0.0, 0.0, 0.3};
    const auto a = two_body_term(c);
    EXPECT_DOUBLE_EQ(a[5], 1.0);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto x = testsupport::random_mee(rng);
        const auto t = two_body_term(x);
        for (int j = 0; j < 5; ++j) EXPECT_EQ(t[j], 0.0);
        EXPECT_GT(t[5], 0.0);
    }
}

TEST(Dynamics, TrueLongitudeRateMatchesCartesianPropagation) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        const auto x = testsupport::random_mee(rng);
        const auto pv = cartesian_from_mee(x, 1.0);
        const double dt = 1e-3;
        auto rp = pv.r, vp = pv.v, rm = pv.r, vm = pv.v;
        rk4_two_body(rp, vp, dt, 20);
        rk4_two_body(rm, vm, -dt, 20);
        const double lp = mee_from_cartesian(rp, vp, 1.0).l, lm = mee_from_cartesian(rm, vm, 1.0).l;
        const double ldot = std::remainder(lp - lm, 2.0 * M_PI) / (2.0 * dt);
        EXPECT_NEAR(two_body_term(x)[5], ldot, 1e-6 * ldot);
    }
}

TEST(Dynamics, ControlInfluenceStructuralZero) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto b = control_influence(testsupport::random_mee(rng));
        EXPECT_EQ(b[0][0], 0.0);
        EXPECT_EQ(b[0][2], 0.0);
    }
}

TEST(Dynamics, TangentialThrustOnCircularOrbit) {
    // energy oracle: dE/dt = a.v = 1 for unit tangential thrust at v = 1, so da/dt = 2 a^2 = 2
    const MeeState x{1.0, 0.0, 0.0, 0.0, 0.0, 0.7};
    const auto b = control_influence(x);
    EXPECT_NEAR(b[0][1], 2.0, 1e-15);
}

TEST(Dynamics, ControlInfluenceMatchesCartesianFiniteDifferences) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 25; ++i) {
        const auto x = testsupport::random_mee(rng);
        const auto b = control_influence(x);
        const auto pv = cartesian_from_mee(x, 1.0);
        const auto frame = lvlh_from_cartesian(pv.r, pv.v);
        const std::array<Vec3<double>, 3> dirs{frame.rhat, frame.that, frame.nhat};
        for (int j = 0; j < 3; ++j) {
            const auto rate = testsupport::mee_rate_from_cartesian(pv.r, pv.v, dirs[j], 1e-6);
            double scale = 0.0;
            for (int r = 0; r < 6; ++r) scale = std::max(scale, std::abs(rate[r]));
            for (int r = 0; r < 6; ++r) EXPECT_NEAR(b[r][j], rate[r], 1e-6 * scale) << "row " << r << " col " << j;
        }
    }
}

TEST(Dynamics, InertialToLvlhMatchesGeometricFrame) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 20; ++i) {
        const auto x = testsupport::random_mee(rng);
        const auto pv = cartesian_from_mee(x, 1.0);
        const auto frame = lvlh_from_cartesian(pv.r, pv.v);
        const Vec3<double> a{0.3, -1.2, 0.8};
        const auto got = inertial_to_lvlh(x, a);
        EXPECT_NEAR(got[0], dot(a, frame.rhat), 1e-12);
        EXPECT_NEAR(got[1], dot(a, frame.that), 1e-12);
        EXPECT_NEAR(got[2], dot(a, frame.nhat), 1e-12);
    }
}

TEST(Dynamics, Calendar) {
    EXPECT_DOUBLE_EQ(calendar::julian_date(2000, 1, 1, 12), units::kJ2000);
    EXPECT_DOUBLE_EQ(calendar::parse_epoch("2024-06-17"), 2460478.5);
    EXPECT_DOUBLE_EQ(calendar::parse_epoch("2024-06-17T12:00:00"), 2460479.0);
    EXPECT_DOUBLE_EQ(calendar::parse_epoch("2024-06-17T12:00:00Z"), 2460479.0);
    EXPECT_DOUBLE_EQ(calendar::parse_epoch("JD2460478.5"), 2460478.5);
    EXPECT_DOUBLE_EQ(calendar::parse_epoch("2460478.5"), 2460478.5);
    EXPECT_THROW(calendar::parse_epoch("June 17"), ConfigError);
    EXPECT_THROW(calendar::parse_epoch("2024-13-01"), ConfigError);
    EXPECT_THROW(calendar::parse_epoch("2024-06-17T12:00:00+02"), ConfigError);
}

TEST(Dynamics, EarthDistance) {
    const auto eph = default_ephemeris();
    const double r2000 = norm(eph.position("Earth", units::kJ2000)) / units::kAuKm;
    EXPECT_GE(r2000, 0.983);
    EXPECT_LE(r2000, 1.017);
    const double r2024 = norm(eph.position("Earth", calendar::parse_epoch("2024-06-17"))) / units::kAuKm;
    EXPECT_NEAR(r2024, 1.016, 0.005);
}

TEST(Dynamics, EphemerisPeriodicity) {
    const auto eph = default_ephemeris();
    const double jd = 2455000.5;
    // Mars sidereal period 686.98 d; element drift over one orbit is small
    const auto a = eph.position("Mars", jd), b = eph.position("Mars", jd + 686.98);
    EXPECT_LT(rel_err(b, a), 2e-3);
}

TEST(Dynamics, EarthLongitudeNearJuneSolstice) {
    // the 2024 June solstice fell on June 20 20:51 UT, when Earth's heliocentric
    // longitude of date is 270 deg; the J2000 frame lags it by 24.47 yr of general
    // precession (50.29 arcsec/yr); a month before aphelion Earth moves at about
    // n (1 - e)^2 / (1 - e^2)^1.5 = 0.9533 deg/day
    const double jd = calendar::parse_epoch("2024-06-17");
    const double solstice = calendar::julian_date(2024, 6, 20, 20, 51);
    const auto e = default_ephemeris().position("Earth", jd);
    double lon = std::atan2(e[1], e[0]) * 180.0 / M_PI;
    if (lon < 0.0) lon += 360.0;
    const double precession = (solstice - units::kJ2000) / 365.25 * 50.29 / 3600.0;
    EXPECT_NEAR(lon, 270.0 - precession - (solstice - jd) * 0.9533, 0.02);
}

TEST(Dynamics, BoundaryDepartureVectorLeadsTheStatedEpoch) {
    // the Case 1 departure position is Earth's about 3.5 days after 2024-06-17, not on that date
    const auto eph = default_ephemeris();
    const double jd = calendar::parse_epoch("2024-06-17");
    auto dist = [&](double days) {
        const auto e = eph.position("Earth", jd + days);
        return norm(Vec3<double>{kR0[0] - e[0], kR0[1] - e[1], kR0[2] - e[2]});
    };
    double best = 0.0;
    for (double d = -10.0; d <= 10.0; d += 0.01)
        if (dist(d) < dist(best)) best = d;
    EXPECT_GT(dist(0.0), 8e6);
    EXPECT_NEAR(best, 3.5, 0.3);
    EXPECT_LT(dist(best), 1.5e6);
}

TEST(Dynamics, EphemerisErrors) {
    const auto eph = default_ephemeris();
    EXPECT_THROW(eph.index_of("Pluto"), ConfigError);
    EXPECT_THROW(eph.subset({"Earth", "Vulcan"}), ConfigError);
    EXPECT_THROW(eph.position("Earth", 2300000.0), RangeError);
    EXPECT_THROW(eph.position("Earth", 2500000.0), RangeError);
    EXPECT_THROW(solve_kepler(2.0, 0.9, 1e-15, 1), ConvergenceError);
    EXPECT_THROW((BodyElements{"bad", 1.0, {1.0, 1.2, 0, 0, 0, 0}, {}}.validate()), ConfigError);
    EXPECT_THROW((BodyElements{"bad", 1.0, {-1.0, 0.1, 0, 0, 0, 0}, {}}.validate()), ConfigError);
}

TEST(Dynamics, KeplerSolver) {
    for (double e : {0.0, 0.3, 0.85, 0.99}) {
        for (double m : {-3.0, -0.5, 0.1, 2.9}) {
            const double ea = solve_kepler(m, e);
            EXPECT_NEAR(ea - e * std::sin(ea), m, 1e-12);
        }
    }
}

TEST(Dynamics, EphemerisFileMatchesDefault) {
    const auto file = load_ephemeris_file(testsupport::source_path("data/planets.json"));
    const auto def = default_ephemeris();
    ASSERT_EQ(file.size(), def.size());
    for (std::size_t i = 0; i < def.size(); ++i) {
        EXPECT_EQ(file.bodies()[i].name, def.bodies()[i].name);
        EXPECT_LT(rel_err(file.position(i, 2460478.5), def.position(i, 2460478.5)), 1e-12);
    }
    const auto sub = def.subset({"Venus", "Jupiter"});
    EXPECT_EQ(sub.size(), 2u);
    EXPECT_EQ(sub.bodies()[1].name, "Jupiter");
    EXPECT_THROW(load_ephemeris_file("/nonexistent.json"), ConfigError);
}

TEST(Dynamics, SecondaryAccelNoBodies) {
    const BodySnapshot none;
    const auto a = secondary_accel(none, Vec3<double>{1.0, 0.2, 0.0});
    EXPECT_EQ(a, (Vec3<double>{0.0, 0.0, 0.0}));
}

TEST(Dynamics, SecondaryAccelHandFormula) {
    const auto eph = default_ephemeris().subset({"Earth"});
    const double jd = 2460478.5;
    const auto snap = snapshot(eph, jd);
    const auto re = snap.positions[0];
    const double d = 0.01 * units::kAuKm;
    const double rn = norm(re);
    const Vec3<double> u{re[0] / rn, re[1] / rn, re[2] / rn};
    const Vec3<double> sc{re[0] - d * u[0], re[1] - d * u[1], re[2] - d * u[2]};
    const auto a = secondary_accel(snap, sc);
    const double mu = 403503.24;
    // along u: direct pull mu/d^2 minus the Sun's reflex mu/|r_E|^2
    const double want = mu / (d * d) - mu / (rn * rn);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], want * u[i], 1e-12 * std::abs(want));
}

TEST(Dynamics, SecondaryAccelNearFieldScaling) {
    BodySnapshot s;
    s.positions = {{1.0, 0.0, 0.0}};
    s.mus = {1e-6};
    const auto a1 = secondary_accel(s, Vec3<double>{1.0 - 1e-4, 0, 0});
    const auto a2 = secondary_accel(s, Vec3<double>{1.0 - 2e-4, 0, 0});
    EXPECT_NEAR(a1[0] / a2[0], 4.0, 1e-3);
    EXPECT_THROW(secondary_accel(s, Vec3<double>{1.0, 0, 0}), ModelError);
    EXPECT_THROW(secondary_accel(s, Vec3<double>{1.0 - 1e-4, 0, 0}, 1e-3), ModelError);
}

TEST(Dynamics, ZeroThrustPropagationConservesSlowElements) {
    auto pb = solver::make_problem(testsupport::load_config("case1_ne4.json"));
    pb.set_rho({1e-2, 1e-2});
    // zero primer and strongly negative mass costate: every switching function is far below zero
    const std::array<double, 7> eta{0, 0, 0, 0, 0, 0, -1e3};
    const double tf = pb.ctx.cu.time_from_days(5.0 * units::kDaysPerYear);
    const auto res = solver::propagate(pb.initial_state(eta), 0.0, tf, pb.ctx);
    ASSERT_TRUE(res.ok) << res.failure;
    const auto x0 = pb.x0.as_array();
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(res.z[i], x0[i], 1e-9 * std::max(1.0, std::abs(x0[i]))) << "element " << i;
    EXPECT_EQ(res.z[6], 1.0);
    EXPECT_GT(res.z[5], x0[5] + 4.0 * 2.0 * M_PI);
    // l against the RK4 Cartesian oracle
    auto pv = cartesian_from_mee(pb.x0, 1.0);
    rk4_two_body(pv.r, pv.v, tf, 200000);
    const double l_oracle = mee_from_cartesian(pv.r, pv.v, 1.0).l;
    EXPECT_NEAR(std::remainder(res.z[5] - l_oracle, 2.0 * M_PI), 0.0, 1e-8);
}

TEST(DynamicsProperty, RoundTripOnRandomEllipticStates) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        MeeState x;
        x.p = 0.5 + 2.0 * std::abs(u(rng));
        x.f = 0.6 * u(rng);
        x.g = 0.6 * u(rng) * std::sqrt(1.0 - x.f * x.f / 0.36);
        x.h = 0.5 * u(rng);
        x.k = 0.5 * u(rng);
        x.l = M_PI * u(rng);
        const auto pv = cartesian_from_mee(x, 1.0);
        const auto y = mee_from_cartesian(pv.r, pv.v, 1.0);
        const auto back = cartesian_from_mee(y, 1.0);
        worst = std::max({worst, rel_err(back.r, pv.r), rel_err(back.v, pv.v)});
        ASSERT_NEAR(y.p, x.p, 1e-9 * x.p);
        ASSERT_NEAR(std::remainder(y.l - x.l, 2.0 * M_PI), 0.0, 1e-9);
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(DynamicsProperty, TrueLongitudeIncreasesForProgradeOrbits) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) EXPECT_GT(two_body_term(testsupport::random_mee(rng))[5], 0.0);
}
