#ifndef MFG_COUPLING_HPP
#define MFG_COUPLING_HPP

#include "grid.hpp"

namespace mfg {

struct CouplingParams {
    double alpha = 1.0;  // > 0
    double eps = 0.0;    // >= 0; solvers require > 0
};

// g_eps(m) = -(m + eps)^(-alpha), pointwise.  Throws SingularityError with
// the offending node index if m + eps <= 0 anywhere.
ScalarField g_eps(const ScalarField& m, const CouplingParams& params);

// d/dm g_eps = alpha (m + eps)^(-alpha-1) > 0.
ScalarField g_eps_derivative(const ScalarField& m, const CouplingParams& params);

// z^(1-alpha)/(alpha-1) for alpha != 1; -ln z in the log-limit alpha = 1.
double convex_power(double z, double alpha);

}  // namespace mfg

#endif
