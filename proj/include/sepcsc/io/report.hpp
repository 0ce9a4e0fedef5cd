#pragma once

#include <chrono>
#include <ctime>
#include <string>
#include <vector>

#include "json.hpp"

#include "sepcsc/solver/shooting.hpp"
#include "sepcsc/version.hpp"

namespace sepcsc::io {

using nlohmann::json;

inline json rho_json(const csc::SmoothingParams &r) { return {{"rho_b", r.rho_b}, {"rho_c", r.rho_c}}; }

/// Non-finite numbers become null so the document stays valid JSON.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <std::size_t N> json array_json(const std::array<double, N> &a) {
    json out = json::array();
    for (double v : a) out.push_back(number_or_null(v));
    return out;
}

inline json trace_json(const std::vector<solver::TraceEntry> &trace) {
    json out = json::array();
    for (const auto &t : trace)
        out.push_back({{"rho_b", t.rho.rho_b},
                       {"rho_c", t.rho.rho_c},
                       {"converged", t.converged},
                       {"iterations", t.iterations},
                       {"residual_inf", number_or_null(t.residual_inf)},
                       {"m_f_kg", t.m_f_kg},
                       {"eta0", array_json(t.eta0)},
                       {"refinement", t.refinement},
                       {"mass_anomaly", t.mass_anomaly}});
    return out;
}

inline json trials_json(const std::vector<solver::TrialRecord> &trials) {
    json out = json::array();
    for (const auto &t : trials)
        out.push_back({{"trial", t.trial},
                       {"guess", array_json(t.guess)},
                       {"converged", t.converged},
                       {"residual_inf", number_or_null(t.residual_inf)},
                       {"iterations", t.iterations},
                       {"stage", t.stage},
                       {"message", t.message}});
    return out;
}

/**
 * @brief Solution document. Contains nothing time- or host-dependent, so two
 * runs with the same binary, config and seed produce identical files.
 */
inline json solution_json(const solver::ContinuationOutcome &out, const solver::ShootingProblem &pb, std::uint64_t seed,
                          const std::string &name = {}) {
    const auto &r = out.result;
    return {{"schema", "sepcsc-solution v1"},
            {"name", name},
            {"converged", out.converged},
            {"message", out.message},
            {"seed", seed},
            {"n_rev", pb.n_rev},
            {"rho_final", rho_json(r.rho)},
            {"eta0", array_json(r.eta0)},
            {"residual", array_json(r.residual)},
            {"residual_inf", number_or_null(r.residual_inf)},
            {"m_f_kg", r.m_f_kg},
            {"iterations", r.iterations},
            {"winning_trial", out.converged ? json(out.winning_trial) : json(nullptr)},
            {"trace", trace_json(out.trace)},
            {"trials", trials_json(out.trials)}};
}

inline json sweep_json(const std::vector<solver::SweepEntry> &entries, const solver::ShootingProblem &pb,
                       std::uint64_t seed, const std::string &name = {}) {
    json list = json::array();
    for (const auto &e : entries) {
        solver::ShootingProblem p = pb;
        p.n_rev = e.n_rev;
        json s = solution_json(e.outcome, p, seed, name);
        s["best"] = e.best;
        list.push_back(std::move(s));
    }
    return {{"schema", "sepcsc-sweep v1"}, {"name", name}, {"seed", seed}, {"entries", list}};
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Everything needed to rerun a command: arguments, config as read, seed and outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::string config_path;
    json config;
    std::uint64_t seed = 0;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;
    int exit_code = 0;

    json to_json() const {
        return {{"schema", "sepcsc-manifest v1"},
                {"tool", "sepcsc"},
                {"version", kVersion},
                {"command", command},
                {"arguments", arguments},
                {"config_path", config_path},
                {"config", config},
                {"seed", seed},
                {"started_utc", started_utc},
                {"finished_utc", finished_utc},
                {"outputs", outputs},
                {"exit_code", exit_code}};
    }
};

} // namespace sepcsc::io
