#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sepcsc/adjoint.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"
#include "sepcsc/csc_control.hpp"
#include "sepcsc/dynamics/calendar.hpp"
#include "sepcsc/dynamics/ephemeris.hpp"
#include "sepcsc/dynamics/mee.hpp"
#include "sepcsc/engine_models.hpp"
#include "sepcsc/mode_table.hpp"
#include "sepcsc/power_model.hpp"
#include "sepcsc/solver/propagate.hpp"

namespace sepcsc::solver {

/// Ordered (rho_b, rho_c) pairs, componentwise nonincreasing.
struct ContinuationSchedule {
    std::vector<csc::SmoothingParams> steps;

    void validate() const {
        if (steps.empty()) throw ConfigError("solver.schedule: at least one (rho_b, rho_c) pair is required");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            steps[i].validate();
            if (i > 0 && (steps[i].rho_b > steps[i - 1].rho_b || steps[i].rho_c > steps[i - 1].rho_c))
                throw ConfigError("solver.schedule: pair " + std::to_string(i) + " increases a smoothing parameter");
        }
    }

    /// n log-spaced values from rho_max to rho_min, same for both parameters.
    static ContinuationSchedule logarithmic(double rho_max, double rho_min, std::size_t n) {
        if (!(rho_max > 0.0 && rho_min > 0.0 && rho_min <= rho_max))
            throw ConfigError("solver.schedule: require 0 < rho_min <= rho_max");
        if (n == 0) throw ConfigError("solver.schedule: steps must be >= 1");
        ContinuationSchedule s;
        if (n == 1) {
            s.steps.push_back({rho_min, rho_min});
            return s;
        }
        const double a = std::log(rho_max), b = std::log(rho_min);
        for (std::size_t i = 0; i < n; ++i) {
            const double rho = i + 1 == n ? rho_min : std::exp(a + (b - a) * static_cast<double>(i) / (n - 1.0));
            s.steps.push_back({rho, rho});
        }
        return s;
    }
};

struct InitBounds {
    std::array<double, 6> lambda_lo{-1, -1, -1, -1, -1, -1};
    std::array<double, 6> lambda_hi{1, 1, 1, 1, 1, 1};
    double lambda_m_lo = -1.0;
    double lambda_m_hi = 0.0;
};

struct SolverSettings {
    ContinuationSchedule schedule = ContinuationSchedule::logarithmic(1.0, 1e-2, 8);
    double rho_c_reference_w = 1000.0;
    double tolerance = 1e-9;
    double intermediate_tolerance = 1e-9;
    int max_iterations = 60;
    int max_refinements = 4;
    double fd_step = 1e-7;
    std::uint64_t seed = 1;
    std::size_t multistart = 32;
    InitBounds init;
    IntegratorOptions integrator;
};

struct BoundarySpec {
    double epoch0_jd = 0.0;
    double tof_days = 0.0;
    dynamics::Vec3<double> r0_km{}, v0_kms{}, rf_km{}, vf_kms{};
};

/// Complete problem definition, in physical units as read from a config.
struct ProblemConfig {
    std::string name;
    double m0_kg = 0.0;
    power::PowerModel power;
    engine::EngineCatalog catalog = engine::default_catalog();
    modes::ClusterSpec cluster;
    std::optional<double> mode_cap_w;
    std::vector<std::string> perturbing_bodies;
    std::optional<dynamics::Ephemeris> ephemeris; // full element set the bodies are drawn from
    BoundarySpec boundary;
    int n_rev = 0;
    SolverSettings solver;
    nlohmann::json source; // document as read, for manifests

    void validate() const {
        if (!(m0_kg > 0.0)) throw ConfigError("spacecraft.m0_kg: must be > 0");
        if (!(boundary.tof_days > 0.0)) throw ConfigError("boundary.tof_days: must be > 0");
        if (n_rev < 0) throw ConfigError("n_rev: must be >= 0");
        power.validate();
        cluster.validate(catalog);
        solver.schedule.validate();
        if (!(solver.tolerance > 0.0)) throw ConfigError("solver.tolerance: must be > 0");
        if (solver.max_iterations < 1) throw ConfigError("solver.max_iterations: must be >= 1");
        if (solver.multistart < 1) throw ConfigError("solver.multistart: must be >= 1");
        if (!(solver.rho_c_reference_w > 0.0)) throw ConfigError("solver.rho_c_reference_w: must be > 0");
    }

    double cap_w() const { return mode_cap_w ? *mode_cap_w : modes::default_cap(power); }

    modes::ModeTable mode_table() const { return modes::enumerate(catalog, cluster, cap_w()); }
};

namespace detail {

inline const nlohmann::json &require(const nlohmann::json &j, const std::string &section, const char *key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(section + "." + key + ": missing required field");
    return j.at(key);
}

inline double number(const nlohmann::json &j, const std::string &field) {
    if (!j.is_number()) throw ConfigError(field + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field + ": not finite");
    return v;
}

inline double number_or(const nlohmann::json &sec, const std::string &section, const char *key, double dflt) {
    if (!sec.is_object() || !sec.contains(key)) return dflt;
    return number(sec.at(key), section + "." + key);
}

inline dynamics::Vec3<double> vec3(const nlohmann::json &j, const std::string &field) {
    if (!j.is_array()) throw ConfigError(field + ": expected an array of 3 numbers");
    if (j.size() != 3)
        throw ConfigError(field + ": expected 3 components, got " + std::to_string(j.size()));
    dynamics::Vec3<double> v{};
    for (std::size_t i = 0; i < 3; ++i) v[i] = number(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

inline std::array<double, 2> interval(const nlohmann::json &j, const std::string &field) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(field + ": expected [lo, hi]");
    const double lo = number(j[0], field + "[0]"), hi = number(j[1], field + "[1]");
    if (!(lo <= hi)) throw ConfigError(field + ": lo > hi");
    return {lo, hi};
}

inline double epoch(const nlohmann::json &j, const std::string &field) {
    if (j.is_number()) return number(j, field);
    if (!j.is_string()) throw ConfigError(field + ": expected a calendar date string or Julian date");
    try {
        return calendar::parse_epoch(j.get<std::string>());
    } catch (const ConfigError &e) {
        throw ConfigError(field + ": " + e.what());
    }
}

inline std::string resolve(const std::filesystem::path &base, const std::string &p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.string();
}

inline ContinuationSchedule parse_schedule(const nlohmann::json &sol) {
    if (sol.contains("rho_schedule")) {
        const auto &list = sol.at("rho_schedule");
        if (!list.is_array()) throw ConfigError("solver.rho_schedule: expected an array of [rho_b, rho_c] pairs");
        ContinuationSchedule s;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string f = "solver.rho_schedule[" + std::to_string(i) + "]";
            if (!list[i].is_array() || list[i].size() != 2) throw ConfigError(f + ": expected [rho_b, rho_c]");
            s.steps.push_back({number(list[i][0], f + "[0]"), number(list[i][1], f + "[1]")});
        }
        return s;
    }
    const nlohmann::json sch = sol.value("schedule", nlohmann::json::object());
    const double rho_max = number_or(sch, "solver.schedule", "rho_max", 1.0);
    const double rho_min = number_or(sch, "solver.schedule", "rho_min", 1e-2);
    const double steps = number_or(sch, "solver.schedule", "steps", 8);
    if (steps < 1 || steps != std::floor(steps)) throw ConfigError("solver.schedule.steps: expected a positive integer");
    return ContinuationSchedule::logarithmic(rho_max, rho_min, static_cast<std::size_t>(steps));
}

} // namespace detail

/**
 * @brief Builds a ProblemConfig from a JSON document.
 *
 * Relative file references (engine catalogue, planet elements) are resolved
 * against `base_dir`. Errors name the offending field.
 */
inline ProblemConfig parse_problem(const nlohmann::json &doc, const std::filesystem::path &base_dir = {}) {
    using detail::number;
    using detail::number_or;
    using detail::require;
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    ProblemConfig cfg;
    cfg.source = doc;
    cfg.name = doc.value("name", std::string{});

    const auto &sc = require(doc, "config", "spacecraft");
    cfg.m0_kg = number(require(sc, "spacecraft", "m0_kg"), "spacecraft.m0_kg");

    const auto &pw = require(doc, "config", "power");
    cfg.power.p0_bol_kw = number_or(pw, "power", "p0_bol_kw", cfg.power.p0_bol_kw);
    cfg.power.decay_rate = number_or(pw, "power", "decay_rate_per_year", cfg.power.decay_rate);
    cfg.power.p_bus_kw = number_or(pw, "power", "p_bus_kw", cfg.power.p_bus_kw);
    cfg.power.r_min_au = number_or(pw, "power", "r_min_au", cfg.power.r_min_au);
    cfg.power.r_max_au = number_or(pw, "power", "r_max_au", cfg.power.r_max_au);
    if (pw.contains("phi_coeffs") && !pw.at("phi_coeffs").is_null()) {
        const auto &c = pw.at("phi_coeffs");
        if (!c.is_array() || c.size() != 5) throw ConfigError("power.phi_coeffs: expected 5 numbers A1..A5");
        std::array<double, 5> a{};
        for (std::size_t i = 0; i < 5; ++i) a[i] = number(c[i], "power.phi_coeffs[" + std::to_string(i) + "]");
        cfg.power.phi_coeffs = a;
    }

    if (doc.contains("engines")) {
        const auto &e = doc.at("engines");
        cfg.catalog = e.is_string() ? engine::load_catalog_file(detail::resolve(base_dir, e.get<std::string>()))
                                    : engine::load_catalog(e);
    }

    const auto &cl = require(doc, "config", "cluster");
    const std::string kind = cl.value("kind", std::string("same_type"));
    if (kind == "same_type") {
        if (cl.contains("engine_ids")) {
            const auto &ids = cl.at("engine_ids");
            if (!ids.is_array()) throw ConfigError("cluster.engine_ids: expected an array of integers");
            cfg.cluster.kind = modes::ClusterKind::same_type;
            for (const auto &id : ids) {
                if (!id.is_number_integer()) throw ConfigError("cluster.engine_ids: expected integers");
                cfg.cluster.engine_ids.push_back(id.get<int>());
            }
        } else {
            const auto &id = require(cl, "cluster", "engine_id");
            const auto &count = require(cl, "cluster", "count");
            if (!id.is_number_integer()) throw ConfigError("cluster.engine_id: expected an integer");
            if (!count.is_number_integer() || count.get<int>() < 1)
                throw ConfigError("cluster.count: expected a positive integer");
            cfg.cluster = modes::ClusterSpec::same(id.get<int>(), count.get<std::size_t>());
        }
    } else if (kind == "mixed") {
        const auto &ids = require(cl, "cluster", "engine_ids");
        if (!ids.is_array()) throw ConfigError("cluster.engine_ids: expected an array of integers");
        std::vector<int> v;
        for (const auto &id : ids) {
            if (!id.is_number_integer()) throw ConfigError("cluster.engine_ids: expected integers");
            v.push_back(id.get<int>());
        }
        cfg.cluster = modes::ClusterSpec::mixed(v);
    } else {
        throw ConfigError("cluster.kind: expected \"same_type\" or \"mixed\", got \"" + kind + "\"");
    }
    if (cl.contains("cap_w") && !cl.at("cap_w").is_null()) cfg.mode_cap_w = number(cl.at("cap_w"), "cluster.cap_w");

    if (doc.contains("perturbations") && !doc.at("perturbations").is_null()) {
        const auto &pt = doc.at("perturbations");
        if (pt.contains("elements_file"))
            cfg.ephemeris = dynamics::load_ephemeris_file(detail::resolve(base_dir, pt.at("elements_file").get<std::string>()));
        else
            cfg.ephemeris = dynamics::default_ephemeris();
        if (pt.contains("bodies")) {
            const auto &b = pt.at("bodies");
            if (!b.is_array()) throw ConfigError("perturbations.bodies: expected an array of names");
            for (const auto &n : b) {
                if (!n.is_string()) throw ConfigError("perturbations.bodies: expected names");
                cfg.perturbing_bodies.push_back(n.get<std::string>());
                cfg.ephemeris->index_of(cfg.perturbing_bodies.back());
            }
        }
    }

    if (doc.contains("boundary")) {
        const auto &bd = doc.at("boundary");
        cfg.boundary.epoch0_jd = detail::epoch(require(bd, "boundary", "epoch0"), "boundary.epoch0");
        cfg.boundary.tof_days = number(require(bd, "boundary", "tof_days"), "boundary.tof_days");
        cfg.boundary.r0_km = detail::vec3(require(bd, "boundary", "r0_km"), "boundary.r0_km");
        cfg.boundary.v0_kms = detail::vec3(require(bd, "boundary", "v0_kms"), "boundary.v0_kms");
        cfg.boundary.rf_km = detail::vec3(require(bd, "boundary", "rf_km"), "boundary.rf_km");
        cfg.boundary.vf_kms = detail::vec3(require(bd, "boundary", "vf_kms"), "boundary.vf_kms");
    } else {
        cfg.boundary.tof_days = 1.0; // mode-table-only configs
    }
    if (doc.contains("n_rev")) {
        if (!doc.at("n_rev").is_number_integer()) throw ConfigError("n_rev: expected an integer");
        cfg.n_rev = doc.at("n_rev").get<int>();
    }

    if (doc.contains("solver")) {
        const auto &sol = doc.at("solver");
        if (!sol.is_object()) throw ConfigError("solver: expected an object");
        auto &s = cfg.solver;
        s.schedule = detail::parse_schedule(sol);
        s.rho_c_reference_w = number_or(sol, "solver", "rho_c_reference_w", s.rho_c_reference_w);
        s.tolerance = number_or(sol, "solver", "tolerance", s.tolerance);
        s.intermediate_tolerance = number_or(sol, "solver", "intermediate_tolerance", s.tolerance);
        s.max_iterations = static_cast<int>(number_or(sol, "solver", "max_iterations", s.max_iterations));
        s.max_refinements = static_cast<int>(number_or(sol, "solver", "max_refinements", s.max_refinements));
        s.fd_step = number_or(sol, "solver", "fd_step", s.fd_step);
        if (sol.contains("seed")) {
            if (!sol.at("seed").is_number_unsigned()) throw ConfigError("solver.seed: expected a non-negative integer");
            s.seed = sol.at("seed").get<std::uint64_t>();
        }
        s.multistart = static_cast<std::size_t>(number_or(sol, "solver", "multistart", static_cast<double>(s.multistart)));
        if (sol.contains("init_bounds")) {
            const auto &ib = sol.at("init_bounds");
            if (ib.contains("lambda")) {
                const auto &l = ib.at("lambda");
                if (l.is_array() && l.size() == 6) {
                    for (std::size_t i = 0; i < 6; ++i) {
                        const auto iv = detail::interval(l[i], "solver.init_bounds.lambda[" + std::to_string(i) + "]");
                        s.init.lambda_lo[i] = iv[0];
                        s.init.lambda_hi[i] = iv[1];
                    }
                } else {
                    const auto iv = detail::interval(l, "solver.init_bounds.lambda");
                    s.init.lambda_lo.fill(iv[0]);
                    s.init.lambda_hi.fill(iv[1]);
                }
            }
            if (ib.contains("lambda_m")) {
                const auto iv = detail::interval(ib.at("lambda_m"), "solver.init_bounds.lambda_m");
                s.init.lambda_m_lo = iv[0];
                s.init.lambda_m_hi = iv[1];
            }
        }
        if (sol.contains("integrator")) {
            const auto &ig = sol.at("integrator");
            s.integrator.abs_tol = number_or(ig, "solver.integrator", "abs_tol", s.integrator.abs_tol);
            s.integrator.rel_tol = number_or(ig, "solver.integrator", "rel_tol", s.integrator.rel_tol);
            s.integrator.max_steps =
                static_cast<std::size_t>(number_or(ig, "solver.integrator", "max_steps", static_cast<double>(s.integrator.max_steps)));
        }
    }
    cfg.validate();
    return cfg;
}

inline ProblemConfig load_problem_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_problem(doc, std::filesystem::path(path).parent_path());
}

/**
 * @brief Canonical-unit shooting problem derived from a config.
 */
struct ShootingProblem {
    adjoint::Context ctx;
    dynamics::MeeState x0;
    dynamics::MeeState x_target;
    double m0_kg = 1.0;
    double tf = 0.0;
    int n_rev = 0;
    IntegratorOptions integrator;

    /// Target true longitude: l_f shifted into [l0, l0 + 2 pi), plus 2 pi N_rev.
    double l_target() const {
        const double shift = std::floor((x_target.l - x0.l) / units::kTwoPi);
        return x_target.l - shift * units::kTwoPi + units::kTwoPi * n_rev;
    }

    adjoint::StateVector initial_state(const std::array<double, 7> &eta0) const {
        adjoint::StateVector z{};
        const auto xa = x0.as_array();
        std::copy(xa.begin(), xa.end(), z.begin());
        z[6] = 1.0;
        std::copy(eta0.begin(), eta0.end(), z.begin() + 7);
        return z;
    }

    void set_rho(const csc::SmoothingParams &rho) { ctx.rho = rho; }
};

inline ShootingProblem make_problem(const ProblemConfig &cfg) {
    ShootingProblem pb;
    pb.m0_kg = cfg.m0_kg;
    pb.n_rev = cfg.n_rev;
    pb.integrator = cfg.solver.integrator;
    auto &ctx = pb.ctx;
    ctx.cu = units::Canonical{units::kAuKm, units::kMuSunKm3s2, cfg.m0_kg};
    ctx.power = cfg.power;
    ctx.control = csc::ControlTable::build(cfg.mode_table(), cfg.catalog, ctx.cu);
    ctx.rho = cfg.solver.schedule.steps.front();
    ctx.rho_c_reference_w = cfg.solver.rho_c_reference_w;
    ctx.epoch0_jd = cfg.boundary.epoch0_jd;
    if (cfg.ephemeris && !cfg.perturbing_bodies.empty()) ctx.bodies = cfg.ephemeris->subset(cfg.perturbing_bodies);

    const double lu = ctx.cu.lu_km, vu = ctx.cu.vu_kms();
    auto canon = [&](const dynamics::Vec3<double> &r, const dynamics::Vec3<double> &v) {
        return dynamics::mee_from_cartesian({r[0] / lu, r[1] / lu, r[2] / lu}, {v[0] / vu, v[1] / vu, v[2] / vu}, 1.0);
    };
    pb.x0 = canon(cfg.boundary.r0_km, cfg.boundary.v0_kms);
    pb.x_target = canon(cfg.boundary.rf_km, cfg.boundary.vf_kms);
    pb.tf = ctx.cu.time_from_days(cfg.boundary.tof_days);
    return pb;
}

} // namespace sepcsc::solver
