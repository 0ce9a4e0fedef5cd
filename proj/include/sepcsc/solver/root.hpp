#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

namespace sepcsc::solver {

enum class RootMethod { powell_hybrid, levenberg_marquardt };

struct RootOptions {
    RootMethod method = RootMethod::powell_hybrid;
    double tolerance = 1e-9;   // on the infinity norm of the residual
    int max_iterations = 60;   // outer iterations (hybrid: per restart)
    int max_restarts = 3;      // hybrid only: fresh Jacobians after stagnation
    double nonfinite_penalty = 1e3;
    double fd_step = 1e-7;     // forward-difference step, scaled by max(1, |x_i|)
    double initial_damping = 1e-3;
    double max_damping = 1e10;
};

struct RootResult {
    Eigen::VectorXd x;
    Eigen::VectorXd f;
    double norm_inf = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    int rejected_nonfinite = 0;
    std::string message;
};

/// Residual callback: writes f(x); returns false when f cannot be evaluated.
using ResidualFn = std::function<bool(const Eigen::VectorXd &, Eigen::VectorXd &)>;

namespace detail {

inline bool all_finite(const Eigen::VectorXd &v) { return v.allFinite(); }

inline double inf_norm(const Eigen::VectorXd &v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace detail

/**
 * @brief Levenberg-Marquardt on a square system with a forward-difference
 * Jacobian.
 *
 * Steps whose residual is non-finite or does not decrease the sum of squares
 * are rejected and the damping is raised; accepted steps lower it. The best
 * iterate is always returned.
 */
inline RootResult solve_levenberg_marquardt(const ResidualFn &fn, const Eigen::VectorXd &x0, const RootOptions &opt = {}) {
    RootResult res;
    res.x = x0;
    res.f.resize(x0.size());
    const Eigen::Index n = x0.size();
    if (!detail::all_finite(x0)) {
        res.message = "initial guess is not finite";
        return res;
    }
    ++res.evaluations;
    if (!fn(res.x, res.f) || !detail::all_finite(res.f)) {
        res.message = "residual not finite at initial guess";
        res.f.setConstant(std::numeric_limits<double>::quiet_NaN());
        return res;
    }
    res.norm_inf = detail::inf_norm(res.f);
    if (res.norm_inf < opt.tolerance) {
        res.converged = true;
        res.message = "converged";
        return res;
    }
    const Eigen::Index m = res.f.size();

    double mu = opt.initial_damping;
    Eigen::MatrixXd jac(m, n);
    bool need_jacobian = true;
    Eigen::VectorXd trial(n), f_trial(m), f_pert(m);

    while (res.iterations < opt.max_iterations) {
        if (need_jacobian) {
            for (Eigen::Index j = 0; j < n; ++j) {
                double h = opt.fd_step * std::max(1.0, std::abs(res.x[j]));
                Eigen::VectorXd xp = res.x;
                xp[j] += h;
                ++res.evaluations;
                bool ok = fn(xp, f_pert) && detail::all_finite(f_pert);
                if (!ok) {
                    // try the other side before giving up on this column
                    h = -h;
                    xp[j] = res.x[j] + h;
                    ++res.evaluations;
                    ok = fn(xp, f_pert) && detail::all_finite(f_pert);
                }
                if (!ok) {
                    res.message = "jacobian column " + std::to_string(j) + " not finite";
                    return res;
                }
                jac.col(j) = (f_pert - res.f) / h;
            }
            need_jacobian = false;
        }

        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * res.f;
        Eigen::MatrixXd a = jtj;
        for (Eigen::Index i = 0; i < n; ++i) a(i, i) += mu * std::max(jtj(i, i), 1e-12);
        const Eigen::VectorXd step = a.ldlt().solve(-g);
        ++res.iterations;
        if (!detail::all_finite(step)) {
            mu *= 10.0;
            if (mu > opt.max_damping) break;
            continue;
        }
        trial = res.x + step;
        ++res.evaluations;
        const bool ok = fn(trial, f_trial) && detail::all_finite(f_trial);
        if (!ok) ++res.rejected_nonfinite;
        if (ok && f_trial.squaredNorm() < res.f.squaredNorm()) {
            // gain ratio decides how fast the damping relaxes
            const double predicted = -(step.dot(g) + 0.5 * step.dot(jtj * step));
            const double actual = 0.5 * (res.f.squaredNorm() - f_trial.squaredNorm());
            const double rho = predicted > 0.0 ? actual / predicted : 0.0;
            res.x = trial;
            res.f = f_trial;
            res.norm_inf = detail::inf_norm(res.f);
            if (res.norm_inf < opt.tolerance) {
                res.converged = true;
                res.message = "converged";
                return res;
            }
            mu *= rho > 0.75 ? 1.0 / 3.0 : (rho > 0.25 ? 1.0 : 2.0);
            mu = std::max(mu, 1e-12);
            need_jacobian = true;
        } else {
            mu *= ok ? 4.0 : 10.0;
            if (mu > opt.max_damping) {
                res.message = "damping limit reached";
                return res;
            }
        }
    }
    if (res.message.empty()) res.message = "iteration limit reached";
    return res;
}

namespace detail {

struct PenalisedFunctor {
    using Scalar = double;
    const ResidualFn *fn;
    double penalty;
    mutable int evaluations = 0;
    mutable int nonfinite = 0;

    int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &f) const {
        ++evaluations;
        Eigen::VectorXd out(f.size());
        const bool ok = (*fn)(x, out) && out.size() == f.size() && out.allFinite();
        if (ok) {
            f = out;
        } else {
            // a uniformly large residual makes the trust region shrink away from this point
            ++nonfinite;
            f.setConstant(penalty);
        }
        return 0;
    }
};

} // namespace detail

/**
 * @brief Powell's hybrid (dogleg trust-region) method with a forward-difference
 * Jacobian and Broyden updates, restarted from the best iterate when it
 * stagnates. Non-finite residuals are replaced by a large constant vector so
 * the offending step is rejected and the trust region contracts.
 */
inline RootResult solve_powell_hybrid(const ResidualFn &fn, const Eigen::VectorXd &x0, const RootOptions &opt = {}) {
    using Status = Eigen::HybridNonLinearSolverSpace::Status;
    RootResult res;
    res.x = x0;
    const Eigen::Index n = x0.size();
    if (!detail::all_finite(x0)) {
        res.message = "initial guess is not finite";
        res.f = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
        return res;
    }
    res.f.resize(n);
    ++res.evaluations;
    if (!fn(res.x, res.f) || !detail::all_finite(res.f)) {
        res.message = "residual not finite at initial guess";
        res.f.setConstant(std::numeric_limits<double>::quiet_NaN());
        return res;
    }
    res.norm_inf = detail::inf_norm(res.f);
    if (res.norm_inf < opt.tolerance) {
        res.converged = true;
        res.message = "converged";
        return res;
    }
    const double penalty = std::max(opt.nonfinite_penalty, 10.0 * res.f.norm());
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        detail::PenalisedFunctor functor{&fn, penalty};
        Eigen::HybridNonLinearSolver<detail::PenalisedFunctor> solver(functor);
        solver.parameters.epsfcn = opt.fd_step * opt.fd_step;
        solver.parameters.xtol = 1e-15;
        solver.parameters.maxfev = 1000000;
        Eigen::VectorXd x = res.x;
        Status status = solver.solveNumericalDiffInit(x);
        int iterations = 0;
        const double start_norm = res.f.norm();
        while (status == Status::Running && iterations < opt.max_iterations) {
            status = solver.solveNumericalDiffOneStep(x);
            ++iterations;
            if (solver.fvec.allFinite() && detail::inf_norm(solver.fvec) < opt.tolerance) break;
        }
        res.iterations += iterations;
        res.evaluations += functor.evaluations;
        res.rejected_nonfinite += functor.nonfinite;
        // the solver keeps its best point in x / fvec
        Eigen::VectorXd f(n);
        ++res.evaluations;
        const bool ok = fn(x, f) && f.allFinite();
        if (ok && f.norm() < res.f.norm()) {
            res.x = x;
            res.f = f;
            res.norm_inf = detail::inf_norm(f);
        }
        if (res.norm_inf < opt.tolerance) {
            res.converged = true;
            res.message = "converged";
            return res;
        }
        if (status == Status::Running) {
            res.message = "iteration limit reached";
            return res;
        }
        if (!(res.f.norm() < 0.5 * start_norm)) {
            res.message = status == Status::NotMakingProgressJacobian ? "no progress (jacobian)" : "no progress";
            return res;
        }
    }
    res.message = "restart limit reached";
    return res;
}

inline RootResult solve_root(const ResidualFn &fn, const Eigen::VectorXd &x0, const RootOptions &opt = {}) {
    return opt.method == RootMethod::powell_hybrid ? solve_powell_hybrid(fn, x0, opt)
                                                   : solve_levenberg_marquardt(fn, x0, opt);
}

} // namespace sepcsc::solver
