#include "operators.hpp"

#include <vector>

namespace mfg {

EVec to_eigen(const ScalarField& f) {
    return Eigen::Map<const EVec>(f.v.data(), f.size());
}

ScalarField from_eigen(const TorusGrid& g, const EVec& v) {
    ScalarField f(g);
    Eigen::Map<EVec>(f.v.data(), f.size()) = v;
    return f;
}

SpMat neg_laplacian_matrix(const TorusGrid& g) {
    const int n = g.n, N = g.size();
    const double invh2 = 1.0 / (g.h * g.h);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N) * (2 * g.dim + 1));
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            trip.emplace_back(i, i, 2.0 * invh2);
            trip.emplace_back(i, g.wrap(i + 1), -invh2);
            trip.emplace_back(i, g.wrap(i - 1), -invh2);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                int id = i * n + j;
                trip.emplace_back(id, id, 4.0 * invh2);
                trip.emplace_back(id, g.index(i + 1, j), -invh2);
                trip.emplace_back(id, g.index(i - 1, j), -invh2);
                trip.emplace_back(id, g.index(i, j + 1), -invh2);
                trip.emplace_back(id, g.index(i, j - 1), -invh2);
            }
        }
    }
    SpMat A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

SpMat upwind_drift_matrix(const TorusGrid& g, const VectorField& b) {
    const int n = g.n, N = g.size();
    const double invh = 1.0 / g.h;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N) * (g.dim + 1));
    auto add_axis = [&](int id, double bv, int fwd, int bwd) {
        if (bv > 0) {
            trip.emplace_back(id, id, bv * invh);
            trip.emplace_back(id, bwd, -bv * invh);
        } else if (bv < 0) {
            trip.emplace_back(id, id, -bv * invh);
            trip.emplace_back(id, fwd, bv * invh);
        }
    };
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i)
            add_axis(i, b.comp[0][i], g.wrap(i + 1), g.wrap(i - 1));
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                int id = i * n + j;
                add_axis(id, b.comp[0][id], g.index(i + 1, j), g.index(i - 1, j));
                add_axis(id, b.comp[1][id], g.index(i, j + 1), g.index(i, j - 1));
            }
        }
    }
    SpMat A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

SpMat generator_matrix(const TorusGrid& g, const VectorField& b) {
    SpMat L = neg_laplacian_matrix(g);
    L += upwind_drift_matrix(g, b);
    return L;
}

VectorField drift_from_gradient(const VectorField& du, const Hamiltonian& H) {
    const TorusGrid& g = du.grid;
    VectorField b(g);
    for (int id = 0; id < g.size(); ++id) {
        Pt x = g.coord(id);
        Pt p{du.comp[0][id], g.dim == 2 ? du.comp[1][id] : 0.0};
        Pt v = H.dp(x, p);
        b.comp[0][id] = v[0];
        if (g.dim == 2) b.comp[1][id] = v[1];
    }
    return b;
}

VectorField optimal_drift(const ScalarField& u, const Hamiltonian& H) {
    return drift_from_gradient(gradient(u), H);
}

ScalarField hamiltonian_of_gradient(const VectorField& du, const Hamiltonian& H) {
    const TorusGrid& g = du.grid;
    ScalarField out(g);
    for (int id = 0; id < g.size(); ++id) {
        Pt x = g.coord(id);
        Pt p{du.comp[0][id], g.dim == 2 ? du.comp[1][id] : 0.0};
        out[id] = H.value(x, p);
    }
    return out;
}

ScalarField hamiltonian_field(const ScalarField& u, const Hamiltonian& H) {
    return hamiltonian_of_gradient(gradient(u), H);
}

DiffusionSolver::DiffusionSolver(const TorusGrid& g, double dt) : dt_(dt) {
    SpMat A = neg_laplacian_matrix(g) * dt;
    for (int i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += 1.0;
    A.makeCompressed();
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success)
        throw NumericError("DiffusionSolver: factorization failed");
}

EVec DiffusionSolver::solve(const EVec& rhs) const {
    EVec x = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success)
        throw NumericError("DiffusionSolver: solve failed");
    return x;
}

EVec fp_transition_step(const TorusGrid& g, const VectorField& b, double dt,
                        const EVec& m) {
    SpMat A = generator_matrix(g, b) * dt;
    for (int i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += 1.0;
    SpMat At = SpMat(A.transpose());
    At.makeCompressed();
    Eigen::SparseLU<SpMat> lu(At);
    if (lu.info() != Eigen::Success)
        throw NumericError("fp_transition_step: factorization failed");
    EVec out = lu.solve(m);
    if (lu.info() != Eigen::Success)
        throw NumericError("fp_transition_step: solve failed");
    return out;
}

}  // namespace mfg
