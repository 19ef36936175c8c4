#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adjoint.hpp"
#include "mc.hpp"
#include "stationary.hpp"
#include "time_solver.hpp"

using namespace mfg;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

PowerFamilyHamiltonian unit_model(int dim = 1) {
    return PowerFamilyHamiltonian(dim, FieldSpec::constant_spec(1.0),
                                  FieldSpec::constant_spec(0.0), 2.0);
}

FieldSpec cosine(double constant, double amp, int k = 1) {
    FieldSpec f;
    f.constant = constant;
    f.modes.push_back({{k, 0}, amp, 0.0});
    return f;
}

TimeDependentSolution constant_time_solution(const TorusGrid& g, int nt, double T,
                                             double c, double rate, double eps) {
    TimeDependentSolution sol;
    sol.T = T;
    sol.nt = nt;
    sol.dt = T / nt;
    sol.eps = eps;
    sol.uT = ScalarField(g, c);
    sol.m0 = ScalarField(g, 1.0);
    for (int k = 0; k <= nt; ++k) {
        sol.u.push_back(ScalarField(g, c - (T - k * sol.dt) * rate));
        sol.m.push_back(ScalarField(g, 1.0));
    }
    return sol;
}

double periodic_var(const std::vector<Pt>& pos, double x0) {
    double var = 0.0;
    for (const Pt& p : pos) {
        double d = std::abs(p[0] - x0);
        d = std::min(d, 1.0 - d);
        var += d * d;
    }
    return var / pos.size();
}
}  // namespace

TEST_CASE("interpolation: nodal exactness and midpoint averages") {
    TorusGrid g = make_grid(1, 16);
    ScalarField f(g);
    for (int id = 0; id < g.size(); ++id)
        f[id] = std::sin(kTwoPi * g.coord(id)[0]) + 2.0;
    for (int id = 0; id < g.size(); ++id)
        CHECK(interp_scalar(f, g.coord(id)) == doctest::Approx(f[id]).epsilon(1e-14));
    // midpoints average the two neighbors, including across the wrap
    for (int i = 0; i < g.n; ++i) {
        Pt mid{(i + 0.5) * g.h, 0.0};
        CHECK(interp_scalar(f, mid) ==
              doctest::Approx(0.5 * (f[i] + f[g.index(i + 1)])).epsilon(1e-14));
    }

    TorusGrid g2 = make_grid(2, 8);
    VectorField F(g2);
    for (int id = 0; id < g2.size(); ++id) {
        F.comp[0][id] = std::cos(kTwoPi * g2.coord(id)[1]);
        F.comp[1][id] = 3.0;
    }
    for (int id = 0; id < g2.size(); ++id) {
        Pt v = interp_vector(F, g2.coord(id));
        CHECK(v[0] == doctest::Approx(F.comp[0][id]).epsilon(1e-14));
        CHECK(v[1] == doctest::Approx(3.0).epsilon(1e-14));
    }
}

TEST_CASE("initial sampling matches the target law (KS distance, d=1)") {
    TorusGrid g = make_grid(1, 128);
    ScalarField m(g);
    for (int id = 0; id < g.size(); ++id)
        m[id] = 1.0 + 0.5 * std::cos(kTwoPi * g.coord(id)[0]);
    const int N = 100000;
    std::vector<Pt> pos = sample_density(m, N, 424242);
    std::vector<double> xs(N);
    for (int i = 0; i < N; ++i) xs[i] = pos[i][0];
    std::sort(xs.begin(), xs.end());
    // analytic CDF of the target density
    auto cdf = [](double x) { return x + 0.5 * std::sin(kTwoPi * x) / kTwoPi; };
    double ks = 0.0;
    for (int i = 0; i < N; ++i) {
        double F = cdf(xs[i]);
        ks = std::max(ks, std::abs(F - double(i) / N));
        ks = std::max(ks, std::abs(F - double(i + 1) / N));
    }
    CHECK(ks <= 0.01);

    TorusGrid g2 = make_grid(2, 32);
    std::vector<Pt> pos2 = sample_density(ScalarField(g2, 1.0), 1000, 7);
    for (const Pt& p : pos2) {
        CHECK(p[0] >= 0.0);
        CHECK(p[0] < 1.0);
        CHECK(p[1] >= 0.0);
        CHECK(p[1] < 1.0);
    }
}

TEST_CASE("zero drift: displacement variance grows like 2t") {
    TorusGrid g = make_grid(1, 128);
    PowerFamilyHamiltonian H = unit_model();
    int nt = 8;
    double T = 0.005;
    TimeDependentSolution sol = constant_time_solution(g, nt, T, 0.7, 0.0, 1.0);
    sol.m0 = mollified_delta(g, {0.5, 0.0}, 0.02);  // concentrated start
    const int N = 100000;
    ParticleEnsemble ens = simulate_ensemble(sol, H, N, 99, {0, nt});
    REQUIRE(ens.snapshots.size() == 2);
    double growth = periodic_var(ens.snapshots[1].pos, 0.5) -
                    periodic_var(ens.snapshots[0].pos, 0.5);
    CHECK(growth == doctest::Approx(2.0 * T).epsilon(0.05));
    CHECK(ens.clip_events == 0);
}

TEST_CASE("determinism: seed-reproducible and scheduling-independent") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.2), cosine(0.2, 0.1), 1.3);
    TimeDependentSolution sol = constant_time_solution(g, 16, 0.1, 0.0, 1.5, 1.0);
    for (int k = 0; k <= sol.nt; ++k)
        for (int id = 0; id < g.size(); ++id)
            sol.u[k][id] += 0.2 * std::sin(kTwoPi * g.coord(id)[0]);

    ParticleEnsemble a = simulate_ensemble(sol, H, 2000, 5, {0, 8, 16}, 1e3, 1);
    ParticleEnsemble b = simulate_ensemble(sol, H, 2000, 5, {0, 8, 16}, 1e3, 4);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (size_t s = 0; s < a.snapshots.size(); ++s)
        for (int i = 0; i < 2000; ++i) {
            CHECK(a.snapshots[s].pos[i][0] == b.snapshots[s].pos[i][0]);
        }
    ParticleEnsemble c = simulate_ensemble(sol, H, 2000, 6, {0, 8, 16});
    bool any_diff = false;
    for (int i = 0; i < 2000; ++i)
        any_diff = any_diff || c.snapshots[0].pos[i][0] != a.snapshots[0].pos[i][0];
    CHECK(any_diff);
}

TEST_CASE("kernel density estimate: mass and concentration") {
    TorusGrid g = make_grid(1, 64);
    std::vector<Pt> one = {{0.5, 0.0}};
    ScalarField kde = empirical_density(one, g, 2.0 * g.h);
    CHECK(std::abs(integrate(kde) - 1.0) <= 1e-12);
    int peak = 0;
    for (int id = 1; id < g.size(); ++id)
        if (kde[id] > kde[peak]) peak = id;
    CHECK(g.coord(peak)[0] == doctest::Approx(0.5).epsilon(1e-12));
    // many uniform draws flatten out
    TorusGrid g2 = make_grid(1, 32);
    std::vector<Pt> many = sample_density(ScalarField(g2, 1.0), 50000, 3);
    ScalarField flat = empirical_density(many, g2, 0.1);
    CHECK(std::abs(integrate(flat) - 1.0) <= 1e-12);
    CHECK(oscillation(flat) <= 0.15);
}

TEST_CASE("pathwise cost: closed form on the decoupled constant run") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H = unit_model();
    double T = 0.5, c = 1.0;
    // zero drift and flat cost field: J = T (L(x,0) - 1/2) + c = c - 1.5 T
    // exactly, with zero variance (L(x,0) = -H(x,0) = -1)
    TimeDependentSolution sol = constant_time_solution(g, 20, T, c, 0.0, 1.0);
    for (auto& uk : sol.u) uk = ScalarField(g, c);
    McCost cost = empirical_cost(sol, H, {1.0, 1.0}, {0.25, 0.0}, 0.0, 500, 11);
    CHECK(cost.mean == doctest::Approx(c - 1.5 * T).epsilon(1e-12));
    CHECK(cost.std_error <= 1e-12);
    CHECK(cost.clip_events == 0);
}

TEST_CASE("pathwise cost: standard error decays like 1/sqrt(N)") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.3), cosine(0.2, 0.1), 1.3);
    TimeDependentSolution sol = constant_time_solution(g, 16, 0.25, 0.0, 1.5, 1.0);
    auto se_at = [&](int N) {
        return empirical_cost(sol, H, {1.5, 1.0}, {0.5, 0.0}, 0.0, N, 21).std_error;
    };
    double s1 = se_at(400), s2 = se_at(10000);
    CHECK(s2 < s1);
    double ratio = s1 / s2;  // expect ~ sqrt(25) = 5
    CHECK(ratio > 2.5);
    CHECK(ratio < 10.0);
}

TEST_CASE("velocity clipping triggers and is counted") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H = unit_model();
    TimeDependentSolution sol = constant_time_solution(g, 8, 0.1, 0.0, 0.0, 1.0);
    for (int k = 0; k <= sol.nt; ++k)
        for (int id = 0; id < g.size(); ++id)
            sol.u[k][id] = 2.0 * std::sin(kTwoPi * g.coord(id)[0]);
    ParticleEnsemble ens = simulate_ensemble(sol, H, 500, 13, {sol.nt}, 1e-3);
    CHECK(ens.clip_events > 0);
}

TEST_CASE("ergodic average cost matches the negative ergodic constant") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.2), cosine(0.2, 0.1), 1.3);
    SolverConfig cfg;
    CouplingParams cp{1.5, 0.1};
    StationarySolution sol = solve_stationary_eps(H, cp, g, cfg);
    McCost cost = ergodic_average_cost(sol, H, cp, 40.0, 8.0, 0.01, 100, 31);
    double tol = 3.0 * cost.std_error + 5.0 * (g.h + 0.01);
    CHECK(std::abs(cost.mean - (-sol.hbar)) <= tol);
}
