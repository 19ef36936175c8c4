#ifndef MFG_STATIONARY_HPP
#define MFG_STATIONARY_HPP

#include <functional>
#include <optional>
#include <vector>

#include "coupling.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"

namespace mfg {

struct SolverConfig {
    double theta = 0.5;        // Picard damping in (0,1]
    double picard_tol = 1e-8;
    int max_iters = 500;
    double linear_tol = 1e-10;
    bool upwinding = true;
    // Long-time method for the ergodic HJB.
    double hjb_tol = 1e-9;
    int hjb_max_iters = 200000;
    double pseudo_dt = 0.0;    // 0 -> grid spacing h

    void validate() const;
};

struct StationarySolution {
    ScalarField u;   // zero mean
    ScalarField m;   // nonnegative, unit mass
    double hbar = 0.0;
    double eps = 0.0;
    double hjb_res = 0.0;
    double fp_res = 0.0;
    int picard_iters = 0;
};

// Per-Picard-iteration hook (iter, hjb_res, fp_res, hbar, min_m).
using StationaryIterHook =
    std::function<void(int, double, double, double, double)>;

// Ergodic HJB -Lap u + H(x,Du) = hbar + g for a given right-hand field g,
// solved by evolving w_t = Lap w - H(x,Dw) + g to a steady shape.  Returns
// zero-mean u and hbar = mean(-Lap u + H(x,Du) - g).
std::pair<ScalarField, double> solve_hjb_ergodic_rhs(
    const ScalarField& g_field, const Hamiltonian& H, const TorusGrid& grid,
    const SolverConfig& config, const ScalarField* warm_start = nullptr);

std::pair<ScalarField, double> solve_hjb_ergodic(
    const ScalarField& m, const Hamiltonian& H, const CouplingParams& coupling,
    const TorusGrid& grid, const SolverConfig& config,
    const ScalarField* warm_start = nullptr);

// Nonnegative unit-mass kernel element of L^T, L = -Lap + b.grad_upwind,
// by inverse power iteration.  Throws ConvergenceError on iteration budget
// and NumericError("kernel degenerate...") when a second near-null direction
// survives deflation.
ScalarField solve_fp_stationary_drift(const VectorField& b, const TorusGrid& grid,
                                      const SolverConfig& config,
                                      const ScalarField* warm_start = nullptr);

ScalarField solve_fp_stationary(const ScalarField& u, const Hamiltonian& H,
                                const TorusGrid& grid, const SolverConfig& config,
                                const ScalarField* warm_start = nullptr);

StationarySolution solve_stationary_eps(const Hamiltonian& H,
                                        const CouplingParams& coupling,
                                        const TorusGrid& grid,
                                        const SolverConfig& config,
                                        const StationarySolution* warm_start = nullptr,
                                        const StationaryIterHook& hook = nullptr);

struct StationaryLimitRow {
    double eps_prev, eps_next;
    double cauchy_u, cauchy_m;
};

struct StationaryContinuation {
    std::vector<StationarySolution> stages;
    std::vector<StationaryLimitRow> cauchy;
    std::vector<double> min_m_plus_eps;  // per stage
    std::vector<double> hbar_trace;
    std::vector<int> picard_counts;
};

StationaryContinuation epsilon_continuation_stationary(
    const Hamiltonian& H, double alpha, const std::vector<double>& eps_schedule,
    const TorusGrid& grid, const SolverConfig& config,
    const StationaryIterHook& hook = nullptr);

}  // namespace mfg

#endif
