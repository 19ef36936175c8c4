#ifndef MFG_TIME_SOLVER_HPP
#define MFG_TIME_SOLVER_HPP

#include <functional>
#include <vector>

#include "coupling.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "stationary.hpp"

namespace mfg {

struct TimeDependentSolution {
    std::vector<ScalarField> u;  // nt+1 slices, u[k] at t_k = k*dt
    std::vector<ScalarField> m;
    double T = 1.0;
    int nt = 0;
    double dt = 0.0;
    ScalarField uT;
    ScalarField m0;
    double eps = 0.0;
    double fixed_point_residual = 0.0;
    int picard_iters = 0;
};

// Per-iteration hook (iter, update_norm, min_m, max_u, lipschitz_norm).
using TimeIterHook = std::function<void(int, double, double, double, double)>;

// Backward IMEX sweep from u(T) = uT:
//   (I - dt Lap) u^k = u^{k+1} - dt H(x, Du^{k+1}) + dt g_eps(m^k).
std::vector<ScalarField> solve_hjb_backward(const std::vector<ScalarField>& m_path,
                                            const Hamiltonian& H,
                                            const CouplingParams& coupling,
                                            const ScalarField& uT, double dt);

// Forward sweep applying the exact transpose of the implicit generator step
// (I + dt(-Lap + b.grad_up)) with b = D_p H(x, Du^k); conserves mass exactly
// and preserves positivity.
std::vector<ScalarField> solve_fp_forward(const std::vector<ScalarField>& u_path,
                                          const Hamiltonian& H,
                                          const ScalarField& m0, double dt);

// Heat flow (zero drift) of an initial density; shared by the fixed-point
// initialization and the heat-comparison estimate.
std::vector<ScalarField> heat_flow(const ScalarField& z0, int nt, double dt);

TimeDependentSolution fixed_point_time(const Hamiltonian& H,
                                       const CouplingParams& coupling,
                                       const TorusGrid& grid, const ScalarField& uT,
                                       const ScalarField& m0, double T, int nt,
                                       const SolverConfig& config,
                                       const TimeDependentSolution* warm_start = nullptr,
                                       const TimeIterHook& hook = nullptr);

ScalarField hopf_cole(const ScalarField& m, double eps);
ScalarField hopf_cole_inverse(const ScalarField& v, double eps);

double lipschitz_norm(const std::vector<ScalarField>& u_path);

struct TimeLimitRow {
    double eps_prev, eps_next;
    double cauchy_u, cauchy_m;
};

struct TimeContinuation {
    std::vector<TimeDependentSolution> stages;
    std::vector<TimeLimitRow> cauchy;
    std::vector<double> min_m_plus_eps;  // min over space-time, per stage
    std::vector<double> lipschitz_trace;
    std::vector<int> picard_counts;
};

TimeContinuation epsilon_continuation_time(const Hamiltonian& H, double alpha,
                                           const std::vector<double>& eps_schedule,
                                           const TorusGrid& grid,
                                           const ScalarField& uT,
                                           const ScalarField& m0, double T, int nt,
                                           const SolverConfig& config,
                                           const TimeIterHook& hook = nullptr);

}  // namespace mfg

#endif
