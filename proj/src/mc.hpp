#ifndef MFG_MC_HPP
#define MFG_MC_HPP

#include <vector>

#include "coupling.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "stationary.hpp"
#include "time_solver.hpp"

namespace mfg {

// Particle simulation of dX = -DpH(X, Du(X,t)) dt + sqrt(2) dW on the torus.
// The feedback field is bilinear in space and piecewise constant in time
// (the slice used for step k -> k+1 is Du(., t_k)).  Each particle draws from
// its own counter-derived stream, so results are independent of scheduling.

struct EnsembleSnapshot {
    int time_index = 0;
    std::vector<Pt> pos;
};

struct ParticleEnsemble {
    int particles = 0;
    unsigned long seed = 0;
    double dt = 0.0;
    long clip_events = 0;  // steps where |v| exceeded the speed cap
    std::vector<EnsembleSnapshot> snapshots;
};

// Periodic bilinear interpolation of a nodal field at x.
double interp_scalar(const ScalarField& f, const Pt& x);
Pt interp_vector(const VectorField& f, const Pt& x);

// Draw N points from a nodal density (inverse CDF for d=1, rejection for
// d=2).  The density must be nonnegative with positive mass.
std::vector<Pt> sample_density(const ScalarField& m, int N, unsigned long seed);

ParticleEnsemble simulate_ensemble(const TimeDependentSolution& sol,
                                   const Hamiltonian& H, int N,
                                   unsigned long seed,
                                   const std::vector<int>& record_indices,
                                   double clip_speed = 1e3, int jobs = 1);

// Periodic Gaussian kernel density estimate from particle positions.
ScalarField empirical_density(const std::vector<Pt>& pos, const TorusGrid& grid,
                              double bandwidth);

struct McCost {
    double mean = 0.0;
    double std_error = 0.0;
    long clip_events = 0;
};

// Pathwise control cost from a fixed start:
//   sum_k dt [ L(X_k, v_k) - (m(X_k,t_k)+eps)^-alpha ] + uT(X_nt),
// averaged over N particles, with v the clipped feedback velocity.
McCost empirical_cost(const TimeDependentSolution& sol, const Hamiltonian& H,
                      const CouplingParams& coupling, const Pt& x0,
                      double t_start, int N, unsigned long seed,
                      double clip_speed = 1e3, int jobs = 1);

// Long-run average of L(X, v(X)) + g(X) under the stationary feedback,
// which should match -hbar; used by the ergodic validation.
McCost ergodic_average_cost(const StationarySolution& sol, const Hamiltonian& H,
                            const CouplingParams& coupling, double T_sim,
                            double burn_in, double dt, int N,
                            unsigned long seed, double clip_speed = 1e3,
                            int jobs = 1);

}  // namespace mfg

#endif
