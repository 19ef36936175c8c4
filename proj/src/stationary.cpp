#include "stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "operators.hpp"

namespace mfg {

void SolverConfig::validate() const {
    if (!(theta > 0.0 && theta <= 1.0))
        throw ValidationError("solver: theta must be in (0,1]");
    if (!(picard_tol > 0.0)) throw ValidationError("solver: picard_tol must be > 0");
    if (max_iters < 1) throw ValidationError("solver: max_iters must be >= 1");
    if (!(linear_tol > 0.0)) throw ValidationError("solver: linear_tol must be > 0");
    if (!(hjb_tol > 0.0)) throw ValidationError("solver: hjb_tol must be > 0");
}

namespace {

double mean_of(const EVec& v) { return v.mean(); }

}  // namespace

std::pair<ScalarField, double> solve_hjb_ergodic_rhs(
    const ScalarField& g_field, const Hamiltonian& H, const TorusGrid& grid,
    const SolverConfig& config, const ScalarField* warm_start) {
    config.validate();
    const double dt = config.pseudo_dt > 0.0 ? config.pseudo_dt : grid.h;
    DiffusionSolver diff(grid, dt);
    SpMat negLap = neg_laplacian_matrix(grid);
    EVec g = to_eigen(g_field);

    EVec w;
    if (warm_start && warm_start->grid == grid) {
        w = to_eigen(*warm_start);
        w.array() -= mean_of(w);
    } else {
        w = EVec::Zero(grid.size());
    }

    std::vector<double> res_history;
    for (int it = 0; it < config.hjb_max_iters; ++it) {
        EVec Hf = to_eigen(hamiltonian_field(from_eigen(grid, w), H));
        EVec r = negLap * w + Hf - g;
        double hbar = mean_of(r);
        double res = (r.array() - hbar).abs().maxCoeff();
        if (!std::isfinite(res))
            throw NumericError("solve_hjb_ergodic: non-finite residual");
        res_history.push_back(res);
        if (res <= config.hjb_tol) {
            ScalarField u = from_eigen(grid, w);
            return {u, hbar};
        }
        EVec rhs = w - dt * (Hf - g);
        w = diff.solve(rhs);
        w.array() -= mean_of(w);
    }
    std::ostringstream os;
    os << "solve_hjb_ergodic: iteration budget exceeded; residual trace (last 5):";
    for (size_t k = res_history.size() >= 5 ? res_history.size() - 5 : 0;
         k < res_history.size(); ++k)
        os << " " << res_history[k];
    throw ConvergenceError(os.str());
}

std::pair<ScalarField, double> solve_hjb_ergodic(
    const ScalarField& m, const Hamiltonian& H, const CouplingParams& coupling,
    const TorusGrid& grid, const SolverConfig& config,
    const ScalarField* warm_start) {
    return solve_hjb_ergodic_rhs(g_eps(m, coupling), H, grid, config, warm_start);
}

ScalarField solve_fp_stationary_drift(const VectorField& b, const TorusGrid& grid,
                                      const SolverConfig& config,
                                      const ScalarField* warm_start) {
    config.validate();
    const int N = grid.size();
    SpMat L = generator_matrix(grid, b);
    const double sigma = 1e-2;
    SpMat A = SpMat(L.transpose());
    for (int i = 0; i < N; ++i) A.coeffRef(i, i) += sigma;
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw NumericError("solve_fp_stationary: factorization failed");

    const double hd = grid.dim == 1 ? grid.h : grid.h * grid.h;
    auto normalize = [&](EVec& x) {
        double mass = x.sum() * hd;
        if (!(mass > 0.0))
            throw NumericError("solve_fp_stationary: iterate lost positivity");
        x /= mass;
    };

    EVec m = (warm_start && warm_start->grid == grid)
                 ? to_eigen(*warm_start)
                 : EVec::Ones(N);
    normalize(m);

    SpMat Lt = SpMat(L.transpose());
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        EVec next = lu.solve(m);
        if (lu.info() != Eigen::Success)
            throw NumericError("solve_fp_stationary: solve failed");
        normalize(next);
        double change = (next - m).cwiseAbs().maxCoeff();
        m = next;
        if (change <= 1e-14) { converged = true; break; }
    }
    if (!converged && (Lt * m).cwiseAbs().maxCoeff() > config.linear_tol / (grid.h * grid.h))
        throw ConvergenceError("solve_fp_stationary: inverse iteration did not settle");

    // Deflated second iteration: a surviving near-null direction beyond the
    // kernel signals a degenerate invariant density.
    {
        EVec y(N);
        for (int i = 0; i < N; ++i) y[i] = std::sin(2.0 * M_PI * (i + 0.37) / N);
        double msum = m.sum();
        auto deflate = [&](EVec& z) { z -= m * (z.sum() / msum); };
        deflate(y);
        double ny = y.norm();
        if (ny > 0) {
            y /= ny;
            double growth = 0.0;
            for (int it = 0; it < 3; ++it) {
                EVec z = lu.solve(y);
                deflate(z);
                growth = z.norm();
                if (growth <= 0) break;
                y = z / growth;
            }
            if (growth >= 0.5 / sigma)
                throw NumericError(
                    "solve_fp_stationary: kernel degenerate (two eigenvalues near zero)");
        }
    }
    return from_eigen(grid, m);
}

ScalarField solve_fp_stationary(const ScalarField& u, const Hamiltonian& H,
                                const TorusGrid& grid, const SolverConfig& config,
                                const ScalarField* warm_start) {
    if (!all_finite(u)) throw ValidationError("solve_fp_stationary: u not finite");
    return solve_fp_stationary_drift(optimal_drift(u, H), grid, config, warm_start);
}

namespace {

double fp_residual(const ScalarField& u, const ScalarField& m, const Hamiltonian& H) {
    SpMat Lt = SpMat(generator_matrix(m.grid, optimal_drift(u, H)).transpose());
    return (Lt * to_eigen(m)).cwiseAbs().maxCoeff();
}

}  // namespace

StationarySolution solve_stationary_eps(const Hamiltonian& H,
                                        const CouplingParams& coupling,
                                        const TorusGrid& grid,
                                        const SolverConfig& config,
                                        const StationarySolution* warm_start,
                                        const StationaryIterHook& hook) {
    config.validate();
    if (!(coupling.eps > 0.0))
        throw ValidationError("solve_stationary_eps: eps must be > 0 for solver calls");

    ScalarField m = (warm_start && warm_start->m.grid == grid) ? warm_start->m
                                                               : ScalarField(grid, 1.0);
    ScalarField u = (warm_start && warm_start->u.grid == grid) ? warm_start->u
                                                               : ScalarField(grid, 0.0);
    double hbar = 0.0;

    int iter = 0;
    bool converged = false;
    for (iter = 1; iter <= config.max_iters; ++iter) {
        auto [u_new, hbar_new] = solve_hjb_ergodic(m, H, coupling, grid, config, &u);
        ScalarField m_new = solve_fp_stationary(u_new, H, grid, config, &m);
        double update = config.theta * sup_diff(m_new, m);
        for (int id = 0; id < m.size(); ++id)
            m[id] = (1.0 - config.theta) * m[id] + config.theta * m_new[id];
        u = u_new;
        hbar = hbar_new;
        if (hook) {
            ScalarField lap = laplacian(u);
            ScalarField Hf = hamiltonian_field(u, H);
            ScalarField g = g_eps(m, coupling);
            double hres = 0.0;
            for (int id = 0; id < grid.size(); ++id)
                hres = std::max(hres, std::abs(-lap[id] + Hf[id] - hbar - g[id]));
            hook(iter, hres, fp_residual(u, m, H), hbar, field_min(m));
        }
        if (update < config.picard_tol) { converged = true; break; }
    }
    if (!converged)
        throw ConvergenceError("solve_stationary_eps: Picard iteration budget exceeded");

    // Final consistent pass on the converged density.
    auto [u_fin, hbar_fin] = solve_hjb_ergodic(m, H, coupling, grid, config, &u);
    StationarySolution sol;
    sol.u = u_fin;
    sol.m = m;
    sol.hbar = hbar_fin;
    sol.eps = coupling.eps;
    sol.picard_iters = iter;
    {
        EVec r = to_eigen(laplacian(sol.u));
        ScalarField Hf = hamiltonian_field(sol.u, H);
        ScalarField g = g_eps(sol.m, coupling);
        double res = 0.0;
        for (int id = 0; id < grid.size(); ++id)
            res = std::max(res, std::abs(-r[id] + Hf[id] - hbar_fin - g[id]));
        sol.hjb_res = res;
    }
    sol.fp_res = fp_residual(sol.u, sol.m, H);
    if (hook) hook(iter + 1, sol.hjb_res, sol.fp_res, sol.hbar, field_min(sol.m));
    return sol;
}

StationaryContinuation epsilon_continuation_stationary(
    const Hamiltonian& H, double alpha, const std::vector<double>& eps_schedule,
    const TorusGrid& grid, const SolverConfig& config,
    const StationaryIterHook& hook) {
    if (eps_schedule.empty())
        throw ValidationError("epsilon continuation: empty schedule");
    for (size_t k = 1; k < eps_schedule.size(); ++k)
        if (!(eps_schedule[k] < eps_schedule[k - 1]))
            throw ValidationError("epsilon continuation: schedule must strictly decrease");

    StationaryContinuation out;
    const StationarySolution* warm = nullptr;
    for (double eps : eps_schedule) {
        CouplingParams cp{alpha, eps};
        StationarySolution sol = solve_stationary_eps(H, cp, grid, config, warm, hook);
        out.min_m_plus_eps.push_back(field_min(sol.m) + eps);
        out.hbar_trace.push_back(sol.hbar);
        out.picard_counts.push_back(sol.picard_iters);
        out.stages.push_back(std::move(sol));
        warm = &out.stages.back();
        if (out.stages.size() >= 2) {
            const auto& a = out.stages[out.stages.size() - 2];
            const auto& b = out.stages.back();
            out.cauchy.push_back({a.eps, b.eps, sup_diff(a.u, b.u), sup_diff(a.m, b.m)});
        }
    }
    return out;
}

}  // namespace mfg
