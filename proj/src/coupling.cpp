#include "coupling.hpp"

#include <cmath>
#include <string>

namespace mfg {

namespace {

void check_params(const CouplingParams& p) {
    if (!(p.alpha > 0.0)) throw ValidationError("coupling: alpha must be > 0");
    if (p.eps < 0.0) throw ValidationError("coupling: eps must be >= 0");
}

}  // namespace

ScalarField g_eps(const ScalarField& m, const CouplingParams& params) {
    check_params(params);
    ScalarField out(m.grid);
    for (int id = 0; id < m.size(); ++id) {
        double z = m[id] + params.eps;
        if (z <= 0.0)
            throw SingularityError("g_eps: m + eps <= 0 at node " + std::to_string(id));
        out[id] = -std::pow(z, -params.alpha);
    }
    return out;
}

ScalarField g_eps_derivative(const ScalarField& m, const CouplingParams& params) {
    check_params(params);
    ScalarField out(m.grid);
    for (int id = 0; id < m.size(); ++id) {
        double z = m[id] + params.eps;
        if (z <= 0.0)
            throw SingularityError("g_eps_derivative: m + eps <= 0 at node " +
                                   std::to_string(id));
        out[id] = params.alpha * std::pow(z, -params.alpha - 1.0);
    }
    return out;
}

double convex_power(double z, double alpha) {
    if (!(z > 0.0)) throw ValidationError("convex_power: z must be > 0");
    if (alpha == 1.0) return -std::log(z);
    return std::pow(z, 1.0 - alpha) / (alpha - 1.0);
}

}  // namespace mfg
