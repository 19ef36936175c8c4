#ifndef MFG_OPERATORS_HPP
#define MFG_OPERATORS_HPP

#include <Eigen/Sparse>
#include <memory>

#include "grid.hpp"
#include "hamiltonian.hpp"

namespace mfg {

using SpMat = Eigen::SparseMatrix<double>;
using EVec = Eigen::VectorXd;

EVec to_eigen(const ScalarField& f);
ScalarField from_eigen(const TorusGrid& g, const EVec& v);

// -Laplacian, (2d+1)-point periodic stencil.
SpMat neg_laplacian_matrix(const TorusGrid& g);

// b . grad with drift-sign upwinding (backward difference where b > 0).
// Row sums vanish, diagonal >= 0, off-diagonal <= 0.
SpMat upwind_drift_matrix(const TorusGrid& g, const VectorField& b);

// Generator L = -Lap + b.grad_upwind; L 1 = 0 and L + sigma*I is an M-matrix
// for sigma > 0.
SpMat generator_matrix(const TorusGrid& g, const VectorField& b);

// Drift b = D_p H(x, Du) with centered Du.
VectorField optimal_drift(const ScalarField& u, const Hamiltonian& H);
VectorField drift_from_gradient(const VectorField& du, const Hamiltonian& H);

// H(x, Du) evaluated nodewise with centered Du.
ScalarField hamiltonian_field(const ScalarField& u, const Hamiltonian& H);
ScalarField hamiltonian_of_gradient(const VectorField& du, const Hamiltonian& H);

// Reusable factorization of I - dt*Lap (SPD).
class DiffusionSolver {
public:
    DiffusionSolver(const TorusGrid& g, double dt);
    EVec solve(const EVec& rhs) const;
    double dt() const { return dt_; }

private:
    double dt_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
};

// One transposed transition step m_next = (I + dt L)^-T m, the exact
// transpose of the implicit generator step.  Mass <m,1> is conserved exactly
// because L 1 = 0, and positivity is preserved (M-matrix transpose).
EVec fp_transition_step(const TorusGrid& g, const VectorField& b, double dt,
                        const EVec& m);

}  // namespace mfg

#endif
