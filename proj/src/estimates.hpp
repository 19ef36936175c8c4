#ifndef MFG_ESTIMATES_HPP
#define MFG_ESTIMATES_HPP

#include <map>
#include <string>
#include <vector>

#include "coupling.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "stationary.hpp"
#include "time_solver.hpp"

namespace mfg {

struct EstimateEntry {
    std::string id;
    std::map<std::string, double> values;
    bool pass = false;
    double tolerance = 0.0;
    std::string note;
};

struct EstimateReport {
    std::vector<EstimateEntry> entries;

    std::string to_json() const;
    std::string to_table() const;
    bool all_pass() const;
};

// Factor-2 rule between the two smallest epsilons of a nonnegative trace.
bool factor2_rule(const std::vector<double>& trace, double floor = 1e-12);

// --- stationary ---

// Q1 = int (m+eps)^-alpha, Q2 = int H(x,Du), Q3 = int H(x,Du) m, Q4 = |hbar|;
// also records the integrated-HJB identity gap |Q2 - (hbar - Q1)|.
EstimateEntry stationary_first_order(const StationarySolution& sol,
                                     const Hamiltonian& H,
                                     const CouplingParams& coupling);

// S1 = int |Dm|^2/(m+eps)^(alpha+1), S2 = int Tr(D2pp H (D2u)^2) m.
EstimateEntry stationary_second_order(const StationarySolution& sol,
                                      const Hamiltonian& H,
                                      const CouplingParams& coupling);

EstimateEntry min_density_monitor(const ScalarField& m, double eps,
                                  const std::vector<double>& p_list);

// Heat-comparison upper bound for a time-dependent run: evolve zeta by the
// heat equation from zeta0 at t=0 and require
//   int u(.,0) zeta0 <= -int int zeta/(m+eps)^alpha + int uT zeta(.,T)
// up to 10 (h^2 + dt).
EstimateEntry heat_comparison(const TimeDependentSolution& sol,
                              const ScalarField& zeta0,
                              const CouplingParams& coupling,
                              const std::string& label);

EstimateEntry time_first_order(const TimeDependentSolution& sol,
                               const Hamiltonian& H,
                               const CouplingParams& coupling);

EstimateEntry inverse_density_norms(const TimeDependentSolution& sol,
                                    const CouplingParams& coupling, double gamma,
                                    const std::vector<double>& p_list);

EstimateEntry max_principle_check(const TimeDependentSolution& sol);

EstimateEntry lipschitz_and_duality(const TimeDependentSolution& sol,
                                    const Hamiltonian& H,
                                    const CouplingParams& coupling);

double oscillation(const ScalarField& f);

// Discrete L^p norm of 1/(m+eps) over the torus (h^d-weighted).
double inverse_density_lp(const ScalarField& m, double eps, double p);

// Both sides of the discrete duality identity
//   <u(T),m(T)> - <u(0),m(0)> = sum_k dt <H - DpH.Du - g, m>.
struct DualityValues {
    double lhs, rhs;
};
DualityValues duality_identity(const TimeDependentSolution& sol, const Hamiltonian& H,
                               const CouplingParams& coupling);

}  // namespace mfg

#endif
