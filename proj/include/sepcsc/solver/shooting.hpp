#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sepcsc/solver/problem.hpp"
#include "sepcsc/solver/propagate.hpp"
#include "sepcsc/solver/root.hpp"

namespace sepcsc::solver {

using Eta = std::array<double, 7>;
using Residual = std::array<double, 7>;

struct ResidualEvaluation {
    Residual residual{};
    bool finite = false;
    double m_f = 0.0; // canonical
    PropagationResult propagation;
};

/**
 * @brief Terminal-condition residual after propagating from the initial
 * costates eta0 = [lambda(t0), lambda_m(t0)] at the problem's current rho.
 *
 * [x(tf) - x_T, lambda_m(tf) + 1] with the target longitude shifted by
 * 2 pi N_rev. A failed propagation yields finite = false and NaN entries.
 */
inline ResidualEvaluation shooting_residual(const Eta &eta0, const ShootingProblem &pb, const StepMesh *mesh = nullptr,
                                            StepMesh *record = nullptr) {
    ResidualEvaluation out;
    out.residual.fill(std::numeric_limits<double>::quiet_NaN());
    for (double v : eta0)
        if (!std::isfinite(v)) {
            out.propagation.failure = "eta0 is not finite";
            return out;
        }
    if (record) record->clear();
    out.propagation = mesh ? replay(pb.initial_state(eta0), *mesh, pb.ctx)
                           : propagate(pb.initial_state(eta0), 0.0, pb.tf, pb.ctx, pb.integrator, {}, {}, record);
    if (!out.propagation.ok) return out;
    const auto &z = out.propagation.z;
    const auto xt = pb.x_target.as_array();
    for (int i = 0; i < 5; ++i) out.residual[i] = z[i] - xt[i];
    out.residual[5] = z[5] - pb.l_target();
    out.residual[6] = z[13] + 1.0;
    out.m_f = z[6];
    out.finite = std::all_of(out.residual.begin(), out.residual.end(), [](double v) { return std::isfinite(v); });
    return out;
}

inline double inf_norm(const Residual &r) {
    double n = 0.0;
    for (double v : r) n = std::max(n, std::isfinite(v) ? std::abs(v) : std::numeric_limits<double>::infinity());
    return n;
}

struct ShootingResult {
    Eta eta0{};
    Residual residual{};
    double residual_inf = std::numeric_limits<double>::infinity();
    double m_f_kg = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    csc::SmoothingParams rho;
    std::string message;
};

namespace detail {

inline ShootingResult to_result(const Eta &eta, const ResidualEvaluation &ev, const ShootingProblem &pb) {
    ShootingResult out;
    out.eta0 = eta;
    out.residual = ev.residual;
    out.residual_inf = solver::inf_norm(ev.residual);
    out.m_f_kg = ev.finite ? ev.m_f * pb.m0_kg : 0.0;
    return out;
}

inline RootResult root_on(const ShootingProblem &pb, const Eta &start, const RootOptions &opt, const StepMesh *mesh) {
    auto fn = [&](const Eigen::VectorXd &x, Eigen::VectorXd &f) {
        Eta eta{};
        for (int i = 0; i < 7; ++i) eta[i] = x[i];
        const auto ev = shooting_residual(eta, pb, mesh);
        f.resize(7);
        for (int i = 0; i < 7; ++i) f[i] = ev.residual[i];
        return ev.finite;
    };
    Eigen::VectorXd x0(7);
    for (int i = 0; i < 7; ++i) x0[i] = start[i];
    return solve_root(fn, x0, opt);
}

} // namespace detail

/**
 * @brief Root solve of the shooting residual at one rho from a given guess.
 *
 * With frozen_mesh_passes > 0 each pass records the adaptive step sequence
 * at the current iterate and solves the residual on that fixed sequence,
 * which is smooth in eta0; the adaptive residual is then re-evaluated and
 * decides convergence. Without passes the adaptive residual is solved
 * directly.
 */
inline ShootingResult solve_fixed_rho(const ShootingProblem &problem, const csc::SmoothingParams &rho, const Eta &guess,
                                      const RootOptions &opt, int frozen_mesh_passes = 4) {
    ShootingProblem pb = problem;
    pb.set_rho(rho);

    StepMesh mesh;
    auto ev = shooting_residual(guess, pb, nullptr, &mesh);
    ShootingResult best = detail::to_result(guess, ev, pb);
    best.rho = rho;
    best.evaluations = 1;
    if (!ev.finite) {
        best.message = "residual not finite at initial guess";
        return best;
    }
    if (best.residual_inf < opt.tolerance) {
        best.converged = true;
        best.message = "converged";
        return best;
    }

    if (frozen_mesh_passes <= 0) {
        const auto rr = detail::root_on(pb, guess, opt, nullptr);
        Eta eta{};
        for (int i = 0; i < 7; ++i) eta[i] = rr.x[i];
        auto out = detail::to_result(eta, shooting_residual(eta, pb), pb);
        out.rho = rho;
        out.iterations = rr.iterations;
        out.evaluations = rr.evaluations + 2;
        out.converged = out.residual_inf < opt.tolerance;
        out.message = out.converged ? "converged" : rr.message;
        return out;
    }

    RootOptions inner = opt;
    inner.tolerance = std::min(opt.tolerance * 1e-2, 1e-11);
    Eta current = guess;
    std::string message;
    for (int pass = 0; pass < frozen_mesh_passes; ++pass) {
        const auto rr = detail::root_on(pb, current, inner, &mesh);
        best.iterations += rr.iterations;
        best.evaluations += rr.evaluations;
        message = rr.message;
        Eta next{};
        for (int i = 0; i < 7; ++i) next[i] = rr.x[i];
        StepMesh next_mesh;
        const auto adaptive = shooting_residual(next, pb, nullptr, &next_mesh);
        ++best.evaluations;
        if (!adaptive.finite) {
            message = "adaptive residual not finite after frozen-mesh solve";
            break;
        }
        const auto candidate = detail::to_result(next, adaptive, pb);
        const bool improved = candidate.residual_inf < best.residual_inf;
        if (improved) {
            const int it = best.iterations, evals = best.evaluations;
            best = candidate;
            best.rho = rho;
            best.iterations = it;
            best.evaluations = evals;
        }
        if (best.residual_inf < opt.tolerance) {
            best.converged = true;
            best.message = "converged";
            return best;
        }
        if (!improved && !rr.converged) break;
        current = next;
        mesh = std::move(next_mesh);
    }
    best.converged = false;
    best.message = message.empty() ? "frozen-mesh passes exhausted" : message;
    return best;
}

/// Uniform sample of the initial costates inside the configured box.
inline Eta sample_costates(const InitBounds &b, std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 rng(seq);
    Eta eta{};
    // explicit affine map keeps the draw independent of distribution implementations
    auto draw = [&](double lo, double hi) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    };
    for (int i = 0; i < 6; ++i) eta[i] = draw(b.lambda_lo[i], b.lambda_hi[i]);
    eta[6] = draw(b.lambda_m_lo, b.lambda_m_hi);
    return eta;
}

struct TraceEntry {
    csc::SmoothingParams rho;
    bool converged = false;
    int iterations = 0;
    double residual_inf = 0.0;
    double m_f_kg = 0.0;
    Eta eta0{};
    bool refinement = false;  // inserted between scheduled pairs after a failure
    bool mass_anomaly = false; // m_f fell by more than 0.5 % relative to the previous converged pair
};

struct TrialRecord {
    std::size_t trial = 0;
    Eta guess{};
    bool converged = false;
    double residual_inf = 0.0;
    int iterations = 0;
    std::string message;
    std::string stage; // "rho_max" or "continuation"
};

struct ContinuationOutcome {
    ShootingResult result;
    std::vector<TraceEntry> trace;
    std::vector<TrialRecord> trials;
    std::size_t winning_trial = 0;
    bool converged = false;
    std::string message;
};

struct ContinuationOptions {
    ContinuationSchedule schedule;
    RootOptions final_root;
    RootOptions intermediate_root;
    std::uint64_t seed = 1;
    std::size_t multistart = 32;
    int max_refinements = 4;
    InitBounds init;
    std::optional<Eta> initial_guess; // used as trial 0 when present
    std::size_t threads = 1;          // trials evaluated concurrently

    static ContinuationOptions from(const ProblemConfig &cfg) {
        ContinuationOptions o;
        o.schedule = cfg.solver.schedule;
        o.final_root.tolerance = cfg.solver.tolerance;
        o.final_root.max_iterations = cfg.solver.max_iterations;
        o.final_root.fd_step = cfg.solver.fd_step;
        o.intermediate_root = o.final_root;
        o.intermediate_root.tolerance = cfg.solver.intermediate_tolerance;
        o.seed = cfg.solver.seed;
        o.multistart = cfg.solver.multistart;
        o.max_refinements = cfg.solver.max_refinements;
        o.init = cfg.solver.init;
        return o;
    }
};

namespace detail {

inline csc::SmoothingParams geometric_mid(const csc::SmoothingParams &a, const csc::SmoothingParams &b) {
    return {std::sqrt(a.rho_b * b.rho_b), std::sqrt(a.rho_c * b.rho_c)};
}

/// Walks the schedule from a solution at steps[0]; false if a pair cannot be reached.
inline bool follow_schedule(const ShootingProblem &pb, const ContinuationOptions &opt, ShootingResult &current,
                            std::vector<TraceEntry> &trace, std::string &why) {
    const auto &steps = opt.schedule.steps;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const bool last = i + 1 == steps.size();
        const RootOptions &ro = last ? opt.final_root : opt.intermediate_root;
        // sub-targets between the last solved pair and steps[i]
        std::vector<csc::SmoothingParams> pending{steps[i]};
        int refinements = 0;
        while (!pending.empty()) {
            const auto target = pending.back();
            const bool is_scheduled = pending.size() == 1;
            auto next = solve_fixed_rho(pb, target, current.eta0, is_scheduled ? ro : opt.intermediate_root);
            TraceEntry te{target, next.converged, next.iterations, next.residual_inf, next.m_f_kg, next.eta0, !is_scheduled};
            if (next.converged) {
                // less smoothing wastes less propellant, so m_f should not fall as rho shrinks
                if (!trace.empty() && trace.back().converged && next.m_f_kg < trace.back().m_f_kg * 0.995)
                    te.mass_anomaly = true;
                trace.push_back(te);
                current = next;
                pending.pop_back();
            } else {
                trace.push_back(te);
                if (refinements++ >= opt.max_refinements) {
                    why = "continuation stalled before rho_b = " + std::to_string(target.rho_b) + ": " + next.message;
                    return false;
                }
                pending.push_back(geometric_mid(current.rho, target));
            }
        }
    }
    return true;
}

} // namespace detail

namespace detail {

struct TrialRun {
    TrialRecord record;
    std::vector<TraceEntry> trace;
    ShootingResult result;
    bool completed = false;
};

inline TrialRun run_trial(const ShootingProblem &pb, const ContinuationOptions &opt, std::size_t t) {
    TrialRun run;
    auto &rec = run.record;
    rec.trial = t;
    rec.guess = (t == 0 && opt.initial_guess) ? *opt.initial_guess : sample_costates(opt.init, opt.seed, t);
    const auto &first = opt.schedule.steps.front();
    const RootOptions &first_ro = opt.schedule.steps.size() == 1 ? opt.final_root : opt.intermediate_root;
    auto start = solve_fixed_rho(pb, first, rec.guess, first_ro);
    rec.converged = start.converged;
    rec.residual_inf = start.residual_inf;
    rec.iterations = start.iterations;
    rec.message = start.message;
    rec.stage = "rho_max";
    run.result = start;
    if (!start.converged) return run;
    run.trace.push_back({first, true, start.iterations, start.residual_inf, start.m_f_kg, start.eta0, false, false});
    std::string why;
    if (follow_schedule(pb, opt, run.result, run.trace, why)) {
        run.completed = true;
        return run;
    }
    rec.converged = false;
    rec.stage = "continuation";
    rec.message = why;
    return run;
}

} // namespace detail

/**
 * @brief Multi-start at the first schedule pair followed by warm-started
 * continuation to the last pair.
 *
 * Each trial draws its costates from an RNG seeded by (seed, trial index).
 * Trials run in batches of opt.threads; the lowest-index trial of the first
 * batch in which any trial reaches the end of the schedule wins, so the
 * outcome does not depend on the thread count. Failed pairs are bisected
 * geometrically up to max_refinements times.
 */
inline ContinuationOutcome continuation_solve(const ShootingProblem &pb, const ContinuationOptions &opt) {
    opt.schedule.validate();
    ContinuationOutcome out;
    const std::size_t batch = std::max<std::size_t>(1, opt.threads);
    for (std::size_t begin = 0; begin < opt.multistart; begin += batch) {
        const std::size_t end = std::min(opt.multistart, begin + batch);
        std::vector<detail::TrialRun> runs(end - begin);
        if (runs.size() == 1) {
            runs[0] = detail::run_trial(pb, opt, begin);
        } else {
            std::vector<std::thread> workers;
            for (std::size_t t = begin; t < end; ++t)
                workers.emplace_back([&, t] { runs[t - begin] = detail::run_trial(pb, opt, t); });
            for (auto &w : workers) w.join();
        }
        for (auto &run : runs) {
            out.trials.push_back(run.record);
            if (run.completed) {
                out.result = run.result;
                out.trace = std::move(run.trace);
                out.winning_trial = run.record.trial;
                out.converged = true;
                out.message = "converged";
                return out;
            }
            if (!run.trace.empty() && (out.trace.empty() || run.trace.size() > out.trace.size())) {
                out.trace = std::move(run.trace);
                out.result = run.result;
            } else if (out.trace.empty() && run.result.residual_inf < out.result.residual_inf) {
                out.result = run.result; // closest start so far, for diagnostics
            }
        }
    }
    out.converged = false;
    out.message = "no multi-start trial completed the continuation schedule (" + std::to_string(out.trials.size()) +
                  " trials)";
    return out;
}

struct SweepEntry {
    int n_rev = 0;
    ContinuationOutcome outcome;
    bool best = false;
};

/// Independent continuation per distinct N_rev; the converged entry with the largest m_f is flagged.
inline std::vector<SweepEntry> nrev_sweep(const ShootingProblem &pb, const ContinuationOptions &opt,
                                          const std::vector<int> &n_revs) {
    if (n_revs.empty()) throw ConfigError("nrev_sweep: empty N_rev range");
    const std::set<int> unique(n_revs.begin(), n_revs.end());
    std::vector<SweepEntry> out;
    for (int n : unique) {
        if (n < 0) throw ConfigError("nrev_sweep: N_rev must be >= 0");
        ShootingProblem p = pb;
        p.n_rev = n;
        SweepEntry e;
        e.n_rev = n;
        e.outcome = continuation_solve(p, opt);
        out.push_back(std::move(e));
    }
    SweepEntry *best = nullptr;
    for (auto &e : out)
        if (e.outcome.converged && (!best || e.outcome.result.m_f_kg > best->outcome.result.m_f_kg)) best = &e;
    if (best) best->best = true;
    return out;
}

} // namespace sepcsc::solver
