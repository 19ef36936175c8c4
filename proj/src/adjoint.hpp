#ifndef MFG_ADJOINT_HPP
#define MFG_ADJOINT_HPP

#include <vector>

#include "coupling.hpp"
#include "estimates.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "time_solver.hpp"

namespace mfg {

// Adjoint probe density launched as a mollified point mass at (x0, tau) and
// transported forward by the same dual transition step as the density.
struct AdjointField {
    std::vector<ScalarField> rho;  // rho[j] at t_{k_tau + j}, j = 0..nt-k_tau
    Pt x0{0.0, 0.0};
    double tau = 0.0;
    int k_tau = 0;        // time index of tau on the solver's grid
    double moll_width = 0.0;
    double dt = 0.0;
};

// Periodic Gaussian bump centered at x0 with the given width, normalized to
// unit mass.  width must be >= 2h so the mollifier is resolved.
ScalarField mollified_delta(const TorusGrid& grid, const Pt& x0, double width);

AdjointField solve_adjoint(const TimeDependentSolution& sol, const Hamiltonian& H,
                           const Pt& x0, double tau, double moll_width);

// Representation formula
//   <u(tau), rho(tau)> = int_tau^T <DpH.Du - H - (m+eps)^-alpha, rho> dt
//                        + <uT, rho(T)>
// checked to C * (h^2 + dt + width^2).
EstimateEntry representation_check(const TimeDependentSolution& sol,
                                   const AdjointField& adj, const Hamiltonian& H,
                                   const CouplingParams& coupling,
                                   double tol_constant = 10.0);

// Lower bound on <u(tau), rho(tau)> from the representation formula, the
// growth constants, and Holder in space at each time step:
//   lhs >= -C1 (T - tau) + min uT - sum dt ||(m+eps)^-alpha||_p ||rho||_q.
EstimateEntry value_lower_bound(const TimeDependentSolution& sol,
                                const AdjointField& adj,
                                const CouplingParams& coupling, double C1_growth,
                                double p_exp, double q_exp);

// Integrability report on the probe: dissipation int int |D rho^(nu/2)|^2,
// ||rho||_{L^1(tau,T;L^q)}, the mass bound int rho^nu <= 1 for nu in (0,1),
// and the Hamiltonian pairing int int H(x,Du) rho with its fitted bound
//   int int H rho <= C (1 + sup_t ||(m+eps)^-alpha||_p (1 + ||Du||_inf^{2(gamma-1)})).
// When fitted_C > 0 it is reused; otherwise the fitted constant is recorded.
EstimateEntry adjoint_norm_report(const TimeDependentSolution& sol,
                                  const AdjointField& adj, const Hamiltonian& H,
                                  const CouplingParams& coupling,
                                  const std::vector<double>& nu_list,
                                  double q_exp, double p_exp,
                                  double fitted_C = 0.0);

}  // namespace mfg

#endif
