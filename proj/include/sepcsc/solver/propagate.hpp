#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "sepcsc/adjoint.hpp"

namespace sepcsc::solver {

using adjoint::StateVector;

struct IntegratorOptions {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    std::size_t max_steps = 500000;
    double initial_step = 1e-3;
};

/// Accepted steps of an adaptive run as (start time, step) pairs.
using StepMesh = std::vector<std::array<double, 2>>;

struct PropagationResult {
    bool ok = false;
    std::string failure;
    StateVector z{};
    double t = 0.0;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

namespace detail {

inline bool physical(const StateVector &z) {
    for (double v : z)
        if (!std::isfinite(v)) return false;
    const double w = 1.0 + z[1] * std::cos(z[5]) + z[2] * std::sin(z[5]);
    return z[0] > 0.0 && w > 0.0 && z[6] > 0.0;
}

} // namespace detail

/**
 * @brief Integrates the state-costate system from t0 to tf.
 *
 * Adaptive Dormand-Prince 5(4) with absolute/relative error control.
 * Steps are clipped to land on every requested output time; `on_sample` is
 * called at t0, each output time and tf. A non-finite or unphysical state
 * stops the integration with ok = false rather than throwing.
 */
inline PropagationResult propagate(const StateVector &z0, double t0, double tf, const adjoint::Context &ctx,
                                   const IntegratorOptions &opt = {}, const std::vector<double> &output_times = {},
                                   const std::function<void(double, const StateVector &)> &on_sample = {},
                                   StepMesh *accepted_steps = nullptr) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<StateVector>());

    PropagationResult res;
    res.z = z0;
    res.t = t0;
    if (!detail::physical(z0)) {
        res.failure = "initial state is not finite or physical";
        return res;
    }
    const double span = tf - t0;
    const double direction = span >= 0.0 ? 1.0 : -1.0;
    if (span == 0.0) {
        res.ok = true;
        if (on_sample) on_sample(t0, z0);
        return res;
    }

    std::vector<double> stops;
    for (double ts : output_times)
        if ((ts - t0) * direction > 0.0 && (tf - ts) * direction > 0.0) stops.push_back(ts);
    std::sort(stops.begin(), stops.end(), [&](double a, double b) { return a * direction < b * direction; });
    stops.push_back(tf);

    bool failed = false;
    std::string failure;
    auto system = [&](const StateVector &z, StateVector &dz, double t) {
        try {
            dz = adjoint::full_rhs(z, t, ctx);
        } catch (const std::exception &e) {
            failed = true;
            failure = e.what();
            dz.fill(std::numeric_limits<double>::quiet_NaN());
        }
    };

    if (on_sample) on_sample(t0, z0);
    double t = t0;
    double dt = direction * std::min(std::abs(opt.initial_step), std::abs(span));
    StateVector z = z0;
    for (double stop : stops) {
        while ((stop - t) * direction > 0.0) {
            if (res.steps + res.rejected >= opt.max_steps) {
                res.failure = "step budget exhausted at t = " + std::to_string(t);
                res.z = z;
                res.t = t;
                return res;
            }
            const double remaining = stop - t;
            const bool clipped = std::abs(dt) >= std::abs(remaining);
            double step = clipped ? remaining : dt;
            const double step_before = step;
            const double t_before = t;
            const auto outcome = stepper.try_step(system, z, t, step);
            if (failed || !detail::physical(z)) {
                res.failure = failed ? failure : "state became non-finite or unphysical at t = " + std::to_string(t);
                res.z = z;
                res.t = t;
                return res;
            }
            if (outcome == odeint::success) {
                ++res.steps;
                if (accepted_steps) accepted_steps->push_back({t_before, step_before});
                // keep the controller's suggestion unless the step was shortened to hit a stop
                dt = clipped ? (std::abs(step) > std::abs(dt) ? step : dt) : step;
                if (clipped) t = stop;
            } else {
                ++res.rejected;
                dt = step;
                if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(t)) || std::abs(step) >= std::abs(step_before)) {
                    res.failure = "step size underflow at t = " + std::to_string(t);
                    res.z = z;
                    res.t = t;
                    return res;
                }
            }
        }
        if (on_sample) on_sample(stop, z);
    }
    res.ok = true;
    res.z = z;
    res.t = tf;
    return res;
}

/**
 * @brief Replays a recorded step sequence without error control.
 *
 * The map from initial state to final state is then a smooth function of
 * the initial state, which keeps finite-difference Jacobians free of the
 * jitter that step-size selection introduces.
 */
inline PropagationResult replay(const StateVector &z0, const StepMesh &steps, const adjoint::Context &ctx) {
    namespace odeint = boost::numeric::odeint;
    odeint::runge_kutta_dopri5<StateVector> stepper;
    PropagationResult res;
    res.z = z0;
    res.t = steps.empty() ? 0.0 : steps.front()[0];
    if (!detail::physical(z0)) {
        res.failure = "initial state is not finite or physical";
        return res;
    }
    bool failed = false;
    std::string failure;
    auto system = [&](const StateVector &z, StateVector &dz, double t) {
        try {
            dz = adjoint::full_rhs(z, t, ctx);
        } catch (const std::exception &e) {
            failed = true;
            failure = e.what();
            dz.fill(std::numeric_limits<double>::quiet_NaN());
        }
    };
    StateVector z = z0;
    double t = res.t;
    for (const auto &[t_start, dt] : steps) {
        t = t_start;
        stepper.do_step(system, z, t, dt);
        t = t_start + dt;
        ++res.steps;
        if (failed || !detail::physical(z)) {
            res.failure = failed ? failure : "state became non-finite or unphysical at t = " + std::to_string(t);
            res.z = z;
            res.t = t;
            return res;
        }
    }
    res.ok = true;
    res.z = z;
    res.t = t;
    return res;
}

} // namespace sepcsc::solver
