#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"
#include "sepcsc/csc_control.hpp"
#include "sepcsc/dynamics/ephemeris.hpp"
#include "sepcsc/dynamics/mee.hpp"
#include "sepcsc/power_model.hpp"

namespace sepcsc::adjoint {

using dynamics::Matrix63;
using dynamics::Mee;
using dynamics::MeeState;
using dynamics::Vec3;
using dynamics::Vec6;

/// Everything the right-hand side needs besides the augmented state.
struct Context {
    csc::ControlTable control;
    power::PowerModel power;
    csc::SmoothingParams rho;
    double rho_c_reference_w = 1000.0;
    units::Canonical cu;
    double epoch0_jd = units::kJ2000;
    std::optional<dynamics::Ephemeris> bodies; // perturbing bodies; empty means two-body only

    double jd_at(double t) const { return epoch0_jd + cu.days_from_time(t); }
    double years_at(double t) const { return std::max(0.0, cu.days_from_time(t)) / units::kDaysPerYear; }

    std::optional<dynamics::BodySnapshot> snapshot_at(double t) const {
        if (!bodies || bodies->size() == 0) return std::nullopt;
        return dynamics::snapshot(*bodies, jd_at(t), cu.lu_km, cu.mu_km3s2);
    }
};

/// z = [x (6), m, lambda (6), lambda_m], canonical units.
using StateVector = std::array<double, 14>;

struct Costates {
    Vec6<double> lambda_mee{};
    double lambda_m = 0.0;
};

struct AugmentedState {
    MeeState x;
    double m = 1.0;
    Costates lam;
    double t = 0.0;

    StateVector to_vector() const {
        StateVector z{};
        const auto xa = x.as_array();
        std::copy(xa.begin(), xa.end(), z.begin());
        z[6] = m;
        std::copy(lam.lambda_mee.begin(), lam.lambda_mee.end(), z.begin() + 7);
        z[13] = lam.lambda_m;
        return z;
    }

    static AugmentedState from_vector(const StateVector &z, double t) {
        AugmentedState s;
        s.x = MeeState::from_array({z[0], z[1], z[2], z[3], z[4], z[5]});
        s.m = z[6];
        std::copy(z.begin() + 7, z.begin() + 13, s.lam.lambda_mee.begin());
        s.lam.lambda_m = z[13];
        s.t = t;
        return s;
    }
};

/// Intermediate quantities of one Hamiltonian evaluation.
template <typename S> struct Evaluation {
    S hamiltonian{};
    Vec6<S> a_two_body{};
    Matrix63<S> b{};
    Vec3<S> lambda_b{};
    S lambda_b_norm{};
    Vec3<S> a_sb_lvlh{};
    S p_ava_w{};
    std::vector<S> weights;
    std::vector<S> channel_counts;
    std::vector<S> switching;
};

namespace detail {

template <typename S> S safe_norm(const Vec3<S> &v) {
    using std::sqrt;
    const S n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if constexpr (std::is_same_v<S, double>) {
        return sqrt(n2);
    } else {
        const double n = std::sqrt(n2.v);
        if (n < csc::kDegenerateLambdaB) return ad::apply(n2, n, 0.0);
        return sqrt(n2);
    }
}

} // namespace detail

/**
 * @brief Smoothed, control-minimised Hamiltonian.
 *
 * H = lambda^T [A + B a_sb] - sum_k N_k T_k (rho_b/2) ln(1 + exp(2 S_k / rho_b)).
 *
 * The last term is min over thrust direction and zeta in [0,1] of
 * N_k T_k [zeta (lambda^T B alpha / m - lambda_m / c_k) + (rho_b/2) H_2(zeta)],
 * where H_2 is the binary entropy term zeta ln zeta + (1-zeta) ln(1-zeta).
 * Its minimiser is the primer direction with zeta = (1 + tanh(S_k/rho_b))/2,
 * so x' = dH/dlambda holds and H is constant along extremals of autonomous
 * problems. As rho_b -> 0 the term tends to -N_k T_k max(S_k, 0).
 */
template <typename S, typename L>
Evaluation<S> evaluate(const Mee<S> &x, const S &mass, const Vec6<L> &lambda, const L &lambda_m, double t,
                       const Context &ctx, const dynamics::BodySnapshot *bodies) {
    Evaluation<S> ev;
    ev.a_two_body = dynamics::two_body_term(x);
    ev.b = dynamics::control_influence(x);

    S h(0.0);
    for (int i = 0; i < 6; ++i) h += lambda[i] * ev.a_two_body[i];
    ev.lambda_b = {S(0.0), S(0.0), S(0.0)};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) ev.lambda_b[j] += lambda[i] * ev.b[i][j];
    ev.lambda_b_norm = detail::safe_norm(ev.lambda_b);

    ev.a_sb_lvlh = {S(0.0), S(0.0), S(0.0)};
    if (bodies) {
        const auto pv = dynamics::cartesian_from_mee(x, 1.0);
        const auto acc = dynamics::secondary_accel(*bodies, pv.r);
        ev.a_sb_lvlh = dynamics::inertial_to_lvlh(x, acc);
        for (int j = 0; j < 3; ++j) h += ev.lambda_b[j] * ev.a_sb_lvlh[j];
    }

    const S r = dynamics::radius(x);
    ev.p_ava_w = 1000.0 * power::available_power(ctx.power, r, ctx.years_at(t));
    ev.weights = csc::activation_weights(ctx.control.p_used_w, ev.p_ava_w, ctx.rho.rho_c, ctx.rho_c_reference_w);
    ev.channel_counts = ctx.control.channel_counts(ev.weights);

    const double rho_b = ctx.rho.rho_b;
    ev.switching.resize(ctx.control.channels.size());
    for (std::size_t k = 0; k < ctx.control.channels.size(); ++k) {
        const auto &ch = ctx.control.channels[k];
        ev.switching[k] = csc::switching_function(ev.lambda_b_norm, S(lambda_m), mass, ch.exhaust_velocity);
        h -= ev.channel_counts[k] * (ch.thrust * 0.5 * rho_b) * csc::detail::softplus(ev.switching[k] * (2.0 / rho_b));
    }
    ev.hamiltonian = h;
    return ev;
}

inline double hamiltonian(const AugmentedState &z, const Context &ctx) {
    const auto bodies = ctx.snapshot_at(z.t);
    return evaluate(z.x, z.m, z.lam.lambda_mee, z.lam.lambda_m, z.t, ctx, bodies ? &*bodies : nullptr).hamiltonian;
}

using Dual7 = ad::Dual<7>;

/// -dH/d(x, m) by forward-mode differentiation of the whole smoothed Hamiltonian.
inline std::array<double, 7> costate_rates(const AugmentedState &z, const Context &ctx) {
    const auto bodies = ctx.snapshot_at(z.t);
    const auto xa = z.x.as_array();
    Mee<Dual7> x;
    x.p = Dual7::variable(xa[0], 0);
    x.f = Dual7::variable(xa[1], 1);
    x.g = Dual7::variable(xa[2], 2);
    x.h = Dual7::variable(xa[3], 3);
    x.k = Dual7::variable(xa[4], 4);
    x.l = Dual7::variable(xa[5], 5);
    const Dual7 m = Dual7::variable(z.m, 6);
    const auto ev = evaluate(x, m, z.lam.lambda_mee, z.lam.lambda_m, z.t, ctx, bodies ? &*bodies : nullptr);
    std::array<double, 7> out{};
    for (int i = 0; i < 7; ++i) {
        out[i] = -ev.hamiltonian.d[i];
        if (!std::isfinite(out[i])) {
            throw ModelError(std::string("costate_rates: non-finite derivative of H with respect to ") +
                             (i < 6 ? "element " + std::to_string(i) : std::string("mass")));
        }
    }
    return out;
}

/**
 * @brief Realised smoothed control and per-step diagnostics.
 */
struct ControlDecision {
    Vec3<double> alpha_hat{0.0, 1.0, 0.0};
    bool direction_degenerate = false;
    std::vector<double> weights;
    std::vector<double> channel_counts;
    std::vector<double> switching;
    std::vector<double> zetas;
    double thrust = 0.0;  // canonical
    double mdot = 0.0;    // canonical, negative while thrusting
    double thrust_mn = 0.0;
    double mdot_mg_s = 0.0; // magnitude
    double p_ava_w = 0.0;
    std::size_t engaged_mode = 0; // 1-based argmax of weights
    double w_max = 0.0;
    double hamiltonian = 0.0;
};

template <typename S> ControlDecision decide(const Evaluation<S> &ev, const Context &ctx) {
    const auto &cu = ctx.cu;
    ControlDecision d;
    d.hamiltonian = ad::value(ev.hamiltonian);
    d.p_ava_w = ad::value(ev.p_ava_w);
    const Vec3<double> lb{ad::value(ev.lambda_b[0]), ad::value(ev.lambda_b[1]), ad::value(ev.lambda_b[2])};
    const double n = dynamics::norm(lb);
    if (n >= csc::kDegenerateLambdaB) {
        d.alpha_hat = csc::primer_direction(lb);
    } else {
        d.direction_degenerate = true;
    }
    for (const auto &w : ev.weights) d.weights.push_back(ad::value(w));
    for (const auto &c : ev.channel_counts) d.channel_counts.push_back(ad::value(c));
    for (std::size_t k = 0; k < ev.switching.size(); ++k) {
        const double s = ad::value(ev.switching[k]);
        const double zeta = csc::setting_activation(s, ctx.rho.rho_b);
        const auto &ch = ctx.control.channels[k];
        d.switching.push_back(s);
        d.zetas.push_back(zeta);
        const double tk = d.channel_counts[k] * zeta * ch.thrust;
        d.thrust += tk;
        d.mdot -= tk / ch.exhaust_velocity;
    }
    d.thrust_mn = 1e3 * d.thrust * cu.mu_kg * cu.au_ms2();
    d.mdot_mg_s = -d.mdot * cu.mu_kg / cu.tu_s() * 1e6;
    const auto it = std::max_element(d.weights.begin(), d.weights.end());
    d.engaged_mode = static_cast<std::size_t>(it - d.weights.begin()) + 1;
    d.w_max = it == d.weights.end() ? 0.0 : *it;
    return d;
}

inline ControlDecision evaluate_control(const AugmentedState &z, const Context &ctx) {
    const auto bodies = ctx.snapshot_at(z.t);
    const auto ev = evaluate(z.x, z.m, z.lam.lambda_mee, z.lam.lambda_m, z.t, ctx, bodies ? &*bodies : nullptr);
    return decide(ev, ctx);
}

/**
 * @brief Full state-costate right-hand side.
 *
 * x' = A + B (T alpha / m + a_sb), m' = -sum T_k / c_k, costates from the
 * dual-number gradient of the Hamiltonian.
 */
inline StateVector full_rhs(const StateVector &zv, double t, const Context &ctx) {
    const auto bodies = ctx.snapshot_at(t);
    Mee<Dual7> x;
    x.p = Dual7::variable(zv[0], 0);
    x.f = Dual7::variable(zv[1], 1);
    x.g = Dual7::variable(zv[2], 2);
    x.h = Dual7::variable(zv[3], 3);
    x.k = Dual7::variable(zv[4], 4);
    x.l = Dual7::variable(zv[5], 5);
    const Dual7 m = Dual7::variable(zv[6], 6);
    const Vec6<double> lambda{zv[7], zv[8], zv[9], zv[10], zv[11], zv[12]};
    const double lambda_m = zv[13];
    const auto ev = evaluate(x, m, lambda, lambda_m, t, ctx, bodies ? &*bodies : nullptr);

    const auto d = decide(ev, ctx);
    StateVector out{};
    const double accel = d.thrust / zv[6];
    for (int i = 0; i < 6; ++i) {
        double rate = ev.a_two_body[i].v;
        for (int j = 0; j < 3; ++j) rate += ev.b[i][j].v * (accel * d.alpha_hat[j] + ev.a_sb_lvlh[j].v);
        out[i] = rate;
    }
    out[6] = d.mdot;
    for (int i = 0; i < 7; ++i) out[7 + i] = -ev.hamiltonian.d[i];
    return out;
}

/**
 * @brief Hamiltonian at a frozen control (direction and per-channel zeta),
 * including the entropy term. Used to check the envelope property.
 */
template <typename S>
S hamiltonian_at_control(const Mee<S> &x, const S &mass, const Costates &lam, double t, const Context &ctx,
                         const Vec3<double> &alpha_hat, const std::vector<double> &zetas) {
    const auto bodies = ctx.snapshot_at(t);
    const auto ev = evaluate(x, mass, lam.lambda_mee, lam.lambda_m, t, ctx, bodies ? &*bodies : nullptr);
    S h(0.0);
    for (int i = 0; i < 6; ++i) h += lam.lambda_mee[i] * ev.a_two_body[i];
    for (int j = 0; j < 3; ++j) h += ev.lambda_b[j] * ev.a_sb_lvlh[j];
    const S lb_alpha = ev.lambda_b[0] * alpha_hat[0] + ev.lambda_b[1] * alpha_hat[1] + ev.lambda_b[2] * alpha_hat[2];
    for (std::size_t k = 0; k < zetas.size(); ++k) {
        const auto &ch = ctx.control.channels[k];
        const double z = zetas[k];
        const double entropy = (z > 0.0 ? z * std::log(z) : 0.0) + (z < 1.0 ? (1.0 - z) * std::log1p(-z) : 0.0);
        h += ev.channel_counts[k] * ch.thrust *
             (z * (lb_alpha / mass - lam.lambda_m / ch.exhaust_velocity) + 0.5 * ctx.rho.rho_b * entropy);
    }
    return h;
}

/// Exact (unsmoothed) Hamiltonian of a discrete choice: mode j with channel on/off flags.
inline double discrete_hamiltonian(const AugmentedState &z, const Context &ctx, std::size_t mode,
                                   const std::vector<bool> &on) {
    const auto bodies = ctx.snapshot_at(z.t);
    const auto ev = evaluate(z.x, z.m, z.lam.lambda_mee, z.lam.lambda_m, z.t, ctx, bodies ? &*bodies : nullptr);
    double h = 0.0;
    for (int i = 0; i < 6; ++i) h += z.lam.lambda_mee[i] * ev.a_two_body[i];
    for (int j = 0; j < 3; ++j) h += ev.lambda_b[j] * ev.a_sb_lvlh[j];
    for (std::size_t k = 0; k < ctx.control.channels.size(); ++k) {
        if (!on[k]) continue;
        h -= ctx.control.counts[mode][k] * ctx.control.channels[k].thrust * ev.switching[k];
    }
    return h;
}

} // namespace sepcsc::adjoint
