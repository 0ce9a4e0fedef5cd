#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "sepcsc/solver/problem.hpp"
#include "sepcsc/solver/propagate.hpp"

namespace sepcsc::solver {

/// Bumped whenever a column is added, removed or reordered.
inline constexpr int kTrajectoryCsvVersion = 1;

struct TrajectorySample {
    double t = 0.0; // canonical
    double t_days = 0.0;
    adjoint::StateVector z{};
    double r_au = 0.0;
    double m_kg = 0.0;
    adjoint::ControlDecision control;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    PropagationResult propagation;
};

/**
 * @brief Propagates from eta0 and records the state and realised control on
 * n_intervals + 1 evenly spaced epochs (both ends included).
 */
inline Trajectory sample_trajectory(const ShootingProblem &pb, const std::array<double, 7> &eta0,
                                    std::size_t n_intervals = 1000) {
    if (n_intervals == 0) throw ConfigError("trajectory: at least one sample interval is required");
    std::vector<double> times;
    for (std::size_t i = 1; i < n_intervals; ++i) times.push_back(pb.tf * static_cast<double>(i) / n_intervals);
    Trajectory out;
    auto record = [&](double t, const adjoint::StateVector &z) {
        TrajectorySample s;
        s.t = t;
        s.t_days = pb.ctx.cu.days_from_time(t);
        s.z = z;
        const auto aug = adjoint::AugmentedState::from_vector(z, t);
        s.r_au = dynamics::radius(aug.x) * pb.ctx.cu.lu_km / units::kAuKm;
        s.m_kg = z[6] * pb.m0_kg;
        s.control = adjoint::evaluate_control(aug, pb.ctx);
        out.samples.push_back(std::move(s));
    };
    out.propagation = propagate(pb.initial_state(eta0), 0.0, pb.tf, pb.ctx, pb.integrator, times, record);
    return out;
}

/// Column label per thrust channel, e.g. "max" / "min" or "e2_id5_max".
inline std::vector<std::string> channel_labels(const csc::ControlTable &ct) {
    std::vector<std::string> out;
    const bool same = ct.table.cluster.kind == modes::ClusterKind::same_type;
    for (const auto &ch : ct.channels) {
        const std::string s = modes::setting_name(ch.setting);
        out.push_back(same ? s
                           : "e" + std::to_string(ch.engine_index + 1) + "_id" + std::to_string(ch.engine_id) + "_" + s);
    }
    return out;
}

/**
 * @brief Trajectory CSV. First line is a schema comment, then the header:
 * t_days, p, f, g, h, k, l, r_au, m_kg, thrust_mN, S_<channel>...,
 * zeta_<channel>..., engaged_mode, w_max.
 */
inline void write_trajectory_csv(std::ostream &os, const Trajectory &traj, const csc::ControlTable &ct) {
    const auto labels = channel_labels(ct);
    os << "# sepcsc-trajectory v" << kTrajectoryCsvVersion << '\n';
    os << "t_days,p,f,g,h,k,l,r_au,m_kg,thrust_mN";
    for (const auto &l : labels) os << ",S_" << l;
    for (const auto &l : labels) os << ",zeta_" << l;
    os << ",engaged_mode,w_max\n";
    const auto old = os.precision(17);
    for (const auto &s : traj.samples) {
        os << s.t_days;
        for (int i = 0; i < 6; ++i) os << ',' << s.z[i];
        os << ',' << s.r_au << ',' << s.m_kg << ',' << s.control.thrust_mn;
        for (double v : s.control.switching) os << ',' << v;
        for (double v : s.control.zetas) os << ',' << v;
        os << ',' << s.control.engaged_mode << ',' << s.control.w_max << '\n';
    }
    os.precision(old);
}

} // namespace sepcsc::solver
