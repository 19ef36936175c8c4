#ifndef MFG_GRID_HPP
#define MFG_GRID_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mfg {

// Point on the torus (or a momentum vector); only the first `dim` entries
// of a grid's dimension are meaningful.
using Pt = std::array<double, 2>;

// Uniform periodic grid on [0,1)^d, d in {1,2}.  h*n == 1.
struct TorusGrid {
    int dim = 1;
    int n = 8;
    double h = 0.125;

    int size() const { return dim == 1 ? n : n * n; }
    int wrap(int i) const {
        i %= n;
        return i < 0 ? i + n : i;
    }
    int index(int i, int j = 0) const {
        return dim == 1 ? wrap(i) : wrap(i) * n + wrap(j);
    }
    Pt coord(int id) const {
        if (dim == 1) return {id * h, 0.0};
        return {(id / n) * h, (id % n) * h};
    }
    bool operator==(const TorusGrid&) const = default;
};

TorusGrid make_grid(int dim, int n);

struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid(g), v(g.size(), fill) {}

    double& operator[](int id) { return v[id]; }
    double operator[](int id) const { return v[id]; }
    int size() const { return static_cast<int>(v.size()); }
};

struct VectorField {
    TorusGrid grid;
    // comp[a][id] is the a-th component at node id; comp[1] unused for d=1.
    std::array<std::vector<double>, 2> comp;

    VectorField() = default;
    explicit VectorField(const TorusGrid& g) : grid(g) {
        for (int a = 0; a < g.dim; ++a) comp[a].assign(g.size(), 0.0);
    }
};

enum class GradScheme { Centered, UpwindBySign };

// Periodic finite differences.  Centered gradient is second order; the
// upwind variant differences against the sign of the supplied drift.
VectorField gradient(const ScalarField& f, GradScheme scheme = GradScheme::Centered,
                     const VectorField* drift = nullptr);
ScalarField laplacian(const ScalarField& f);

// Exact negative transpose of the centered gradient under <f,g> = h^d sum f g.
ScalarField divergence(const VectorField& F);

double integrate(const ScalarField& f);
double field_min(const ScalarField& f);
double field_max(const ScalarField& f);
double sup_norm(const ScalarField& f);
double sup_diff(const ScalarField& a, const ScalarField& b);
bool all_finite(const ScalarField& f);

// Discrete inner product h^d sum f g.
double inner(const ScalarField& a, const ScalarField& b);

}  // namespace mfg

#endif
