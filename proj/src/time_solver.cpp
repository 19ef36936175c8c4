#include "time_solver.hpp"

#include <algorithm>
#include <cmath>

#include "operators.hpp"

namespace mfg {

std::vector<ScalarField> solve_hjb_backward(const std::vector<ScalarField>& m_path,
                                            const Hamiltonian& H,
                                            const CouplingParams& coupling,
                                            const ScalarField& uT, double dt) {
    if (m_path.empty()) throw ValidationError("solve_hjb_backward: empty m path");
    const TorusGrid& grid = uT.grid;
    const int nt = static_cast<int>(m_path.size()) - 1;
    DiffusionSolver diff(grid, dt);

    std::vector<ScalarField> u(nt + 1, ScalarField(grid));
    u[nt] = uT;
    for (int k = nt - 1; k >= 0; --k) {
        ScalarField Hf = hamiltonian_field(u[k + 1], H);
        ScalarField g = g_eps(m_path[k], coupling);
        EVec rhs = to_eigen(u[k + 1]) - dt * to_eigen(Hf) + dt * to_eigen(g);
        u[k] = from_eigen(grid, diff.solve(rhs));
        if (!all_finite(u[k]))
            throw NumericError("solve_hjb_backward: NaN at time index " +
                               std::to_string(k) + " (explicit Hamiltonian unstable)");
    }
    return u;
}

std::vector<ScalarField> solve_fp_forward(const std::vector<ScalarField>& u_path,
                                          const Hamiltonian& H,
                                          const ScalarField& m0, double dt) {
    if (u_path.empty()) throw ValidationError("solve_fp_forward: empty u path");
    if (field_min(m0) <= 0.0)
        throw ValidationError("solve_fp_forward: m0 must be strictly positive");
    const TorusGrid& grid = m0.grid;
    const int nt = static_cast<int>(u_path.size()) - 1;

    std::vector<ScalarField> m(nt + 1, ScalarField(grid));
    m[0] = m0;
    EVec cur = to_eigen(m0);
    for (int k = 0; k < nt; ++k) {
        VectorField b = optimal_drift(u_path[k], H);
        cur = fp_transition_step(grid, b, dt, cur);
        m[k + 1] = from_eigen(grid, cur);
        if (!all_finite(m[k + 1]))
            throw NumericError("solve_fp_forward: NaN at time index " +
                               std::to_string(k + 1));
    }
    return m;
}

std::vector<ScalarField> heat_flow(const ScalarField& z0, int nt, double dt) {
    const TorusGrid& grid = z0.grid;
    DiffusionSolver diff(grid, dt);
    std::vector<ScalarField> z(nt + 1, ScalarField(grid));
    z[0] = z0;
    EVec cur = to_eigen(z0);
    for (int k = 0; k < nt; ++k) {
        cur = diff.solve(cur);
        z[k + 1] = from_eigen(grid, cur);
    }
    return z;
}

namespace {

double path_sup_diff(const std::vector<ScalarField>& a,
                     const std::vector<ScalarField>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s = std::max(s, sup_diff(a[k], b[k]));
    return s;
}

double path_min(const std::vector<ScalarField>& a) {
    double s = field_min(a.front());
    for (const auto& f : a) s = std::min(s, field_min(f));
    return s;
}

double path_max(const std::vector<ScalarField>& a) {
    double s = field_max(a.front());
    for (const auto& f : a) s = std::max(s, field_max(f));
    return s;
}

}  // namespace

double lipschitz_norm(const std::vector<ScalarField>& u_path) {
    double s = 0.0;
    for (const auto& u : u_path) {
        VectorField du = gradient(u);
        for (int id = 0; id < u.size(); ++id) {
            double g2 = du.comp[0][id] * du.comp[0][id];
            if (u.grid.dim == 2) g2 += du.comp[1][id] * du.comp[1][id];
            s = std::max(s, g2);
        }
    }
    return std::sqrt(s);
}

TimeDependentSolution fixed_point_time(const Hamiltonian& H,
                                       const CouplingParams& coupling,
                                       const TorusGrid& grid, const ScalarField& uT,
                                       const ScalarField& m0, double T, int nt,
                                       const SolverConfig& config,
                                       const TimeDependentSolution* warm_start,
                                       const TimeIterHook& hook) {
    config.validate();
    if (!(T > 0.0)) throw ValidationError("fixed_point_time: T must be > 0");
    if (nt < 1) throw ValidationError("fixed_point_time: nt must be >= 1");
    if (!(coupling.eps > 0.0))
        throw ValidationError("fixed_point_time: eps must be > 0 for solver calls");
    if (field_min(m0) <= 0.0)
        throw ValidationError("fixed_point_time: m0 must be strictly positive");
    const double dt = T / nt;

    std::vector<ScalarField> m_path =
        (warm_start && static_cast<int>(warm_start->m.size()) == nt + 1 &&
         warm_start->m.front().grid == grid)
            ? warm_start->m
            : heat_flow(m0, nt, dt);
    std::vector<ScalarField> u_path;

    int iter = 0;
    bool converged = false;
    for (iter = 1; iter <= config.max_iters; ++iter) {
        u_path = solve_hjb_backward(m_path, H, coupling, uT, dt);
        std::vector<ScalarField> m_new = solve_fp_forward(u_path, H, m0, dt);
        double update = config.theta * path_sup_diff(m_new, m_path);
        for (int k = 0; k <= nt; ++k)
            for (int id = 0; id < grid.size(); ++id)
                m_path[k][id] = (1.0 - config.theta) * m_path[k][id] +
                                config.theta * m_new[k][id];
        if (hook)
            hook(iter, update, path_min(m_path), path_max(u_path),
                 lipschitz_norm(u_path));
        if (update < config.picard_tol) { converged = true; break; }
    }
    if (!converged)
        throw ConvergenceError("fixed_point_time: Picard iteration budget exceeded");

    // Consistent final sweeps on the converged density path.
    u_path = solve_hjb_backward(m_path, H, coupling, uT, dt);
    std::vector<ScalarField> m_fin = solve_fp_forward(u_path, H, m0, dt);

    TimeDependentSolution sol;
    sol.T = T;
    sol.nt = nt;
    sol.dt = dt;
    sol.uT = uT;
    sol.m0 = m0;
    sol.eps = coupling.eps;
    sol.picard_iters = iter;
    sol.fixed_point_residual = path_sup_diff(m_fin, m_path);
    sol.u = std::move(u_path);
    sol.m = std::move(m_fin);
    return sol;
}

ScalarField hopf_cole(const ScalarField& m, double eps) {
    ScalarField v(m.grid);
    for (int id = 0; id < m.size(); ++id) {
        double z = m[id] + eps;
        if (z <= 0.0)
            throw SingularityError("hopf_cole: m + eps <= 0 at node " +
                                   std::to_string(id));
        v[id] = std::log(z);
    }
    return v;
}

ScalarField hopf_cole_inverse(const ScalarField& v, double eps) {
    ScalarField m(v.grid);
    for (int id = 0; id < v.size(); ++id) m[id] = std::exp(v[id]) - eps;
    return m;
}

TimeContinuation epsilon_continuation_time(const Hamiltonian& H, double alpha,
                                           const std::vector<double>& eps_schedule,
                                           const TorusGrid& grid,
                                           const ScalarField& uT,
                                           const ScalarField& m0, double T, int nt,
                                           const SolverConfig& config,
                                           const TimeIterHook& hook) {
    if (eps_schedule.empty())
        throw ValidationError("epsilon continuation: empty schedule");
    for (size_t k = 1; k < eps_schedule.size(); ++k)
        if (!(eps_schedule[k] < eps_schedule[k - 1]))
            throw ValidationError("epsilon continuation: schedule must strictly decrease");

    TimeContinuation out;
    const TimeDependentSolution* warm = nullptr;
    for (double eps : eps_schedule) {
        CouplingParams cp{alpha, eps};
        TimeDependentSolution sol =
            fixed_point_time(H, cp, grid, uT, m0, T, nt, config, warm, hook);
        out.min_m_plus_eps.push_back(path_min(sol.m) + eps);
        out.lipschitz_trace.push_back(lipschitz_norm(sol.u));
        out.picard_counts.push_back(sol.picard_iters);
        out.stages.push_back(std::move(sol));
        warm = &out.stages.back();
        if (out.stages.size() >= 2) {
            const auto& a = out.stages[out.stages.size() - 2];
            const auto& b = out.stages.back();
            out.cauchy.push_back(
                {a.eps, b.eps, path_sup_diff(a.u, b.u), path_sup_diff(a.m, b.m)});
        }
    }
    return out;
}

}  // namespace mfg
