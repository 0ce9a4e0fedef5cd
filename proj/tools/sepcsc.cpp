// sepcsc: mode tables, single propagations and continuation solves from a JSON config.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sepcsc/sepcsc.hpp"

namespace fs = std::filesystem;
using namespace sepcsc;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNotConverged = 3, kRuntimeError = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::string out_dir = "out";
};

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

/// Reads 7 initial costates from a solution JSON ("eta0"), a JSON array, or plain whitespace-separated numbers.
solver::Eta read_eta0(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open eta0 file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<double> values;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error &e) {
            throw ConfigError("eta0 file '" + path + "': " + e.what());
        }
        const json &arr = doc.is_object() ? doc.at("eta0") : doc;
        for (const auto &v : arr) {
            if (!v.is_number()) throw ConfigError("eta0 file '" + path + "': non-numeric entry");
            values.push_back(v.get<double>());
        }
    } else {
        std::istringstream is(text);
        double v;
        while (is >> v) values.push_back(v);
        if (!is.eof()) throw ConfigError("eta0 file '" + path + "': unreadable number");
    }
    if (values.size() != 7)
        throw ConfigError("eta0 file '" + path + "': expected 7 values, got " + std::to_string(values.size()));
    solver::Eta eta{};
    for (std::size_t i = 0; i < 7; ++i) {
        if (!std::isfinite(values[i])) throw ConfigError("eta0 file '" + path + "': value " + std::to_string(i) + " is not finite");
        eta[i] = values[i];
    }
    return eta;
}

std::vector<int> parse_range(const std::string &text) {
    static const std::regex re(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ConfigError("--sweep-nrev: expected 'a..b' or a single integer, got '" + text + "'");
    const int a = std::stoi(m[1]);
    const int b = m[2].matched ? std::stoi(m[2]) : a;
    if (b < a) throw ConfigError("--sweep-nrev: empty range '" + text + "'");
    std::vector<int> out;
    for (int n = a; n <= b; ++n) out.push_back(n);
    return out;
}

void print_mode_row(const modes::OperationMode &m) {
    std::cout << "  #" << m.index << "  P_used = " << m.p_used_w << " W  (" << m.n_at_pmax << " @Pmax, " << m.n_at_pmin
              << " @Pmin)\n";
}

std::string write_trajectory(const fs::path &dir, const solver::ShootingProblem &pb, const solver::Eta &eta,
                             std::size_t samples, const std::string &name = "trajectory.csv") {
    const auto traj = solver::sample_trajectory(pb, eta, samples);
    std::ostringstream os;
    solver::write_trajectory_csv(os, traj, pb.ctx.control);
    const auto path = dir / name;
    write_file(path, os.str());
    if (!traj.propagation.ok)
        std::cerr << "warning: trajectory propagation stopped early: " << traj.propagation.failure << '\n';
    return path.string();
}

int run_modes(const Common &c, bool raw) {
    const auto cfg = solver::load_problem_file(c.config);
    const auto dir = prepare_out_dir(c.out_dir);
    const auto table = cfg.mode_table();
    std::ostringstream os;
    if (raw && cfg.cluster.kind == modes::ClusterKind::mixed) {
        const auto raw_modes = modes::enumerate_mixed_raw(cfg.catalog, cfg.cluster, cfg.cap_w());
        modes::write_csv(os, table, raw_modes);
        std::cout << raw_modes.size() << " raw modes before filtering\n";
    } else {
        if (raw) std::cout << "note: --raw only differs from the filtered table for mixed clusters\n";
        modes::write_csv(os, table);
    }
    write_file(dir / "modes.csv", os.str());
    std::cout << table.size() << " operation modes (cap " << table.cap_w << " W)\n";
    print_mode_row(table.modes.front());
    if (table.size() > 1) print_mode_row(table.modes.back());
    std::cout << "wrote " << (dir / "modes.csv").string() << '\n';
    return kOk;
}

struct SolveFlags {
    std::optional<std::uint64_t> seed;
    std::optional<double> rho_final;
    std::optional<std::size_t> schedule_steps;
    std::optional<std::size_t> multistart;
    std::string sweep;
    std::size_t samples = 2000;
    std::size_t threads = 1;
};

solver::ContinuationSchedule adjusted_schedule(const solver::ContinuationSchedule &s, const SolveFlags &f) {
    if (!f.rho_final && !f.schedule_steps) return s;
    const double rho_max = s.steps.front().rho_b;
    const double rho_min = f.rho_final ? *f.rho_final : s.steps.back().rho_b;
    const std::size_t n = f.schedule_steps ? *f.schedule_steps : s.steps.size();
    return solver::ContinuationSchedule::logarithmic(rho_max, std::min(rho_min, rho_max), n);
}

int run_solve(const Common &c, const SolveFlags &f, io::RunManifest &manifest) {
    auto cfg = solver::load_problem_file(c.config);
    if (f.seed) cfg.solver.seed = *f.seed;
    if (f.multistart) cfg.solver.multistart = *f.multistart;
    cfg.solver.schedule = adjusted_schedule(cfg.solver.schedule, f);
    cfg.validate();
    manifest.seed = cfg.solver.seed;
    const auto dir = prepare_out_dir(c.out_dir);
    const auto pb = solver::make_problem(cfg);
    auto opt = solver::ContinuationOptions::from(cfg);
    opt.threads = f.threads;

    if (!f.sweep.empty()) {
        const auto entries = solver::nrev_sweep(pb, opt, parse_range(f.sweep));
        const auto doc = io::sweep_json(entries, pb, cfg.solver.seed, cfg.name);
        write_file(dir / "sweep.json", doc.dump(2) + "\n");
        manifest.outputs.push_back((dir / "sweep.json").string());
        const solver::SweepEntry *best = nullptr;
        for (const auto &e : entries) {
            std::cout << "N_rev " << e.n_rev << ": "
                      << (e.outcome.converged ? "converged, m_f = " + std::to_string(e.outcome.result.m_f_kg) + " kg"
                                              : "failed (" + e.outcome.message + ")")
                      << (e.best ? "  <- best" : "") << '\n';
            if (e.best) best = &e;
        }
        if (!best) {
            write_file(dir / "diagnostics.json", doc.dump(2) + "\n");
            manifest.outputs.push_back((dir / "diagnostics.json").string());
            std::cerr << "no N_rev value converged\n";
            return kNotConverged;
        }
        solver::ShootingProblem p = pb;
        p.n_rev = best->n_rev;
        p.set_rho(best->outcome.result.rho);
        manifest.outputs.push_back(write_trajectory(dir, p, best->outcome.result.eta0, f.samples));
        return kOk;
    }

    const auto outcome = solver::continuation_solve(pb, opt);
    const auto doc = io::solution_json(outcome, pb, cfg.solver.seed, cfg.name);
    if (!outcome.converged) {
        write_file(dir / "diagnostics.json", doc.dump(2) + "\n");
        manifest.outputs.push_back((dir / "diagnostics.json").string());
        std::cerr << "not converged: " << outcome.message << "\nsee " << (dir / "diagnostics.json").string() << '\n';
        return kNotConverged;
    }
    write_file(dir / "solution.json", doc.dump(2) + "\n");
    manifest.outputs.push_back((dir / "solution.json").string());
    solver::ShootingProblem p = pb;
    p.set_rho(outcome.result.rho);
    manifest.outputs.push_back(write_trajectory(dir, p, outcome.result.eta0, f.samples));
    std::cout << "converged (trial " << outcome.winning_trial << "): m_f = " << outcome.result.m_f_kg
              << " kg, |residual|_inf = " << outcome.result.residual_inf << ", rho = " << outcome.result.rho.rho_b << '\n';
    return kOk;
}

int run_propagate(const Common &c, const std::string &eta_path, std::optional<double> rho, std::size_t samples,
                  io::RunManifest &manifest) {
    const auto cfg = solver::load_problem_file(c.config);
    manifest.seed = cfg.solver.seed;
    const auto eta = read_eta0(eta_path);
    const auto dir = prepare_out_dir(c.out_dir);
    auto pb = solver::make_problem(cfg);
    const auto r = rho ? csc::SmoothingParams{*rho, *rho} : cfg.solver.schedule.steps.back();
    r.validate();
    pb.set_rho(r);

    // zero costates put every switching function at 0, where zeta = 1/2 rather than a coast
    const auto z0 = adjoint::evaluate_control(adjoint::AugmentedState::from_vector(pb.initial_state(eta), 0.0), pb.ctx);
    for (double s : z0.switching)
        if (std::abs(s) < 10.0 * r.rho_b) {
            std::cerr << "note: switching function " << s << " is within the smoothing band at t0; zeta = "
                      << csc::setting_activation(s, r.rho_b) << " there, not 0 or 1\n";
            break;
        }

    manifest.outputs.push_back(write_trajectory(dir, pb, eta, samples));
    const auto ev = solver::shooting_residual(eta, pb);
    json summary = {{"schema", "sepcsc-propagation v1"},
                    {"eta0", io::array_json(eta)},
                    {"rho", io::rho_json(r)},
                    {"ok", ev.propagation.ok},
                    {"failure", ev.propagation.failure},
                    {"residual", io::array_json(ev.residual)},
                    {"residual_inf", io::number_or_null(solver::inf_norm(ev.residual))},
                    {"m_f_kg", ev.finite ? ev.m_f * pb.m0_kg : 0.0}};
    write_file(dir / "propagation.json", summary.dump(2) + "\n");
    manifest.outputs.push_back((dir / "propagation.json").string());
    if (!ev.propagation.ok) {
        std::cerr << "propagation failed: " << ev.propagation.failure << '\n';
        return kRuntimeError;
    }
    std::cout << "m_f = " << ev.m_f * pb.m0_kg << " kg, |residual|_inf = " << solver::inf_norm(ev.residual) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Fuel-optimal multi-mode SEP rendezvous with composite smooth control"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", common.config, "problem configuration (JSON)")->required();
        sub->add_option("--out-dir", common.out_dir, "directory for output files")->capture_default_str();
    };

    bool raw = false;
    auto *modes_cmd = app.add_subcommand("modes", "write the operation-mode table");
    add_common(modes_cmd);
    modes_cmd->add_flag("--raw", raw, "mixed clusters: write the table before tie filtering");

    SolveFlags sf;
    auto *solve_cmd = app.add_subcommand("solve", "multi-start continuation solve");
    add_common(solve_cmd);
    solve_cmd->add_option("--seed", sf.seed, "override solver.seed");
    solve_cmd->add_option("--rho-final", sf.rho_final, "final smoothing parameter (both rho_b and rho_c)")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--schedule-steps", sf.schedule_steps, "number of logarithmic schedule pairs")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--multistart", sf.multistart, "override solver.multistart")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--sweep-nrev", sf.sweep, "solve every N_rev in a..b");
    solve_cmd->add_option("--samples", sf.samples, "trajectory CSV intervals")->capture_default_str()->check(CLI::PositiveNumber);
    solve_cmd->add_option("--threads", sf.threads, "multi-start trials run concurrently")->capture_default_str()->check(CLI::PositiveNumber);

    std::string eta_path;
    std::optional<double> rho;
    std::size_t samples = 2000;
    auto *prop_cmd = app.add_subcommand("propagate", "propagate one extremal from given initial costates");
    add_common(prop_cmd);
    prop_cmd->add_option("--eta0", eta_path, "7 initial costates: solution.json, JSON array or plain numbers")->required();
    prop_cmd->add_option("--rho", rho, "smoothing parameter (default: last schedule pair)")->check(CLI::PositiveNumber);
    prop_cmd->add_option("--samples", samples, "trajectory CSV intervals")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    io::RunManifest manifest;
    manifest.arguments.assign(argv, argv + argc);
    manifest.config_path = common.config;
    manifest.started_utc = io::utc_timestamp();
    int code = kOk;
    std::string error;
    try {
        if (*modes_cmd) {
            manifest.command = "modes";
            code = run_modes(common, raw);
        } else if (*solve_cmd) {
            manifest.command = "solve";
            code = run_solve(common, sf, manifest);
        } else {
            manifest.command = "propagate";
            code = run_propagate(common, eta_path, rho, samples, manifest);
        }
    } catch (const ConfigError &e) {
        error = e.what();
        code = kConfigError;
    } catch (const ConvergenceError &e) {
        error = e.what();
        code = kNotConverged;
    } catch (const std::exception &e) {
        error = e.what();
        code = kRuntimeError;
    }
    if (!error.empty()) std::cerr << "error: " << error << '\n';

    manifest.finished_utc = io::utc_timestamp();
    manifest.exit_code = code;
    try {
        // the config snapshot is re-read so the manifest holds exactly what was parsed
        std::ifstream in(common.config);
        if (in) manifest.config = json::parse(in, nullptr, false);
        if (manifest.config.is_discarded()) manifest.config = nullptr;
        const auto dir = prepare_out_dir(common.out_dir);
        if (!error.empty()) {
            write_file(dir / "diagnostics.json",
                       json{{"command", manifest.command}, {"exit_code", code}, {"error", error}}.dump(2) + "\n");
            manifest.outputs.push_back((dir / "diagnostics.json").string());
        }
        write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    } catch (const std::exception &e) {
        std::cerr << "warning: could not write manifest: " << e.what() << '\n';
    }
    return code;
}
