#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coupling.hpp"
#include "time_solver.hpp"

using namespace mfg;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// H identically zero: the backward sweep reduces to the heat equation.
class ZeroHamiltonian final : public Hamiltonian {
public:
    explicit ZeroHamiltonian(int d) : d_(d) {}
    int dim() const override { return d_; }
    double growth_gamma() const override { return 1.5; }
    double value(const Pt&, const Pt&) const override { return 0.0; }
    Pt dp(const Pt&, const Pt&) const override { return {0.0, 0.0}; }
    Pt dx(const Pt&, const Pt&) const override { return {0.0, 0.0}; }
    Mat2 dpp(const Pt&, const Pt&) const override { return {0.0, 0.0, 0.0, 0.0}; }
    Mat2 dxp(const Pt&, const Pt&) const override { return {0.0, 0.0, 0.0, 0.0}; }

private:
    int d_;
};

FieldSpec cosine(double constant, double amp, int k = 1) {
    FieldSpec f;
    f.constant = constant;
    f.modes.push_back({{k, 0}, amp, 0.0});
    return f;
}

// coupling with a huge epsilon so the density term is numerically zero
const CouplingParams kNoCoupling{2.0, 1e8};
}  // namespace

TEST_CASE("backward sweep: constant data evolve linearly in time") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H(1, FieldSpec::constant_spec(1.0),
                             FieldSpec::constant_spec(0.0), 2.0);
    int nt = 40;
    double T = 0.5, dt = T / nt;
    std::vector<ScalarField> m_path(nt + 1, ScalarField(g, 1.0));
    ScalarField uT(g, 2.0);
    // H(x,0) = 1 and g = -(1+1)^-1 = -1/2, so u(t) = 2 - (T-t) * 3/2 exactly.
    auto u = solve_hjb_backward(m_path, H, {1.0, 1.0}, uT, dt);
    REQUIRE(u.size() == size_t(nt + 1));
    for (int k = 0; k <= nt; ++k) {
        double expect = 2.0 - (T - k * dt) * 1.5;
        for (int id = 0; id < g.size(); ++id)
            CHECK(u[k][id] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("backward sweep reduces to the heat equation (second-order in h)") {
    auto sup_err = [](int n, int nt) {
        TorusGrid g = make_grid(1, n);
        ZeroHamiltonian H(1);
        double T = 0.1, dt = T / nt;
        std::vector<ScalarField> m_path(nt + 1, ScalarField(g, 1.0));
        ScalarField uT(g);
        for (int id = 0; id < g.size(); ++id)
            uT[id] = std::sin(kTwoPi * g.coord(id)[0]);
        auto u = solve_hjb_backward(m_path, H, kNoCoupling, uT, dt);
        double lam = kTwoPi * kTwoPi, err = 0.0;
        for (int id = 0; id < g.size(); ++id)
            err = std::max(err, std::abs(u[0][id] - std::exp(-lam * T) * uT[id]));
        return err;
    };
    // dt is chosen small so the first-order time error is subdominant and the
    // joint (h, dt) halving shows the spatial order 2.
    double e1 = sup_err(16, 4096);
    double e2 = sup_err(32, 8192);
    CHECK(e1 <= 10.0 * (1.0 / 256.0 + 0.1 / 4096.0));
    double ratio = e1 / e2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("forward sweep: exact mass conservation and positivity") {
    TorusGrid g = make_grid(1, 48);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.2), cosine(0.3, 0.1), 1.3);
    int nt = 32;
    double T = 0.25, dt = T / nt;
    // a non-constant value field produces a genuine drift
    std::vector<ScalarField> u_path;
    for (int k = 0; k <= nt; ++k) {
        ScalarField u(g);
        for (int id = 0; id < g.size(); ++id)
            u[id] = 0.3 * std::sin(kTwoPi * g.coord(id)[0]) * (1.0 + 0.5 * k * dt);
        u_path.push_back(u);
    }
    ScalarField m0(g);
    for (int id = 0; id < g.size(); ++id)
        m0[id] = 1.0 + 0.5 * std::cos(kTwoPi * g.coord(id)[0]);
    auto m = solve_fp_forward(u_path, H, m0, dt);
    REQUIRE(m.size() == size_t(nt + 1));
    for (int k = 0; k <= nt; ++k) {
        CHECK(std::abs(integrate(m[k]) - 1.0) <= 1e-12);
        CHECK(field_min(m[k]) > 0.0);
    }
}

TEST_CASE("forward sweep: zero drift relaxes to the uniform density") {
    TorusGrid g = make_grid(1, 64);
    PowerFamilyHamiltonian H(1, FieldSpec::constant_spec(1.0),
                             FieldSpec::constant_spec(0.0), 2.0);
    int nt = 256;
    double T = 0.25, dt = T / nt;
    std::vector<ScalarField> u_path(nt + 1, ScalarField(g, 0.7));
    ScalarField m0(g);
    for (int id = 0; id < g.size(); ++id)
        m0[id] = 1.0 + 0.5 * std::cos(kTwoPi * g.coord(id)[0]);
    auto m = solve_fp_forward(u_path, H, m0, dt);
    double lam = kTwoPi * kTwoPi;
    double err = 0.0;
    for (int id = 0; id < g.size(); ++id) {
        double exact = 1.0 + 0.5 * std::exp(-lam * T) *
                                 std::cos(kTwoPi * g.coord(id)[0]);
        err = std::max(err, std::abs(m[nt][id] - exact));
    }
    CHECK(err <= 10.0 * (g.h * g.h + dt));
    // decay toward the uniform density is monotone in the sup distance
    ScalarField one(g, 1.0);
    for (int k = 1; k <= nt; ++k)
        CHECK(sup_diff(m[k], one) <= sup_diff(m[k - 1], one) + 1e-14);
}

TEST_CASE("heat flow conserves mass and smooths") {
    TorusGrid g = make_grid(2, 16);
    ScalarField z0(g, 0.0);
    z0[g.index(3, 5)] = 1.0 / (g.h * g.h);  // discrete point mass, unit integral
    auto z = heat_flow(z0, 20, 0.01);
    REQUIRE(z.size() == 21);
    for (const auto& zk : z) {
        CHECK(std::abs(integrate(zk) - 1.0) <= 1e-12);
        CHECK(field_min(zk) >= 0.0);
    }
    CHECK(field_max(z[20]) < field_max(z[0]));
}

TEST_CASE("coupled time solve: residual, invariants, determinism") {
    TorusGrid g = make_grid(1, 32);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.2), cosine(0.2, 0.1), 1.3);
    SolverConfig cfg;
    ScalarField uT(g);
    ScalarField m0(g);
    for (int id = 0; id < g.size(); ++id) {
        uT[id] = 0.1 * std::cos(kTwoPi * g.coord(id)[0]);
        m0[id] = 1.0 + 0.3 * std::cos(kTwoPi * g.coord(id)[0]);
    }
    TimeDependentSolution sol =
        fixed_point_time(H, {1.5, 0.05}, g, uT, m0, 0.5, 32, cfg);
    CHECK(sol.fixed_point_residual <= 10.0 * cfg.picard_tol);
    for (int k = 0; k <= sol.nt; ++k) {
        CHECK(std::abs(integrate(sol.m[k]) - 1.0) <= 1e-12);
        CHECK(field_min(sol.m[k]) > 0.0);
    }
    // terminal and initial data are reproduced exactly
    CHECK(sup_diff(sol.u[sol.nt], uT) == 0.0);

    // self-consistency: re-running the frozen sweeps reproduces the paths
    auto u2 = solve_hjb_backward(sol.m, H, {1.5, 0.05}, uT, sol.dt);
    double du = 0.0;
    for (int k = 0; k <= sol.nt; ++k) du = std::max(du, sup_diff(u2[k], sol.u[k]));
    CHECK(du <= 10.0 * cfg.picard_tol);

    TimeDependentSolution again =
        fixed_point_time(H, {1.5, 0.05}, g, uT, m0, 0.5, 32, cfg);
    CHECK(again.picard_iters == sol.picard_iters);
    for (int k = 0; k <= sol.nt; ++k) {
        CHECK(sup_diff(again.u[k], sol.u[k]) == 0.0);
        CHECK(sup_diff(again.m[k], sol.m[k]) == 0.0);
    }
}

TEST_CASE("log transform round trips") {
    TorusGrid g = make_grid(1, 32);
    ScalarField m(g);
    for (int id = 0; id < g.size(); ++id)
        m[id] = 0.5 + 0.1 * std::sin(kTwoPi * g.coord(id)[0]);
    ScalarField v = hopf_cole(m, 0.25);
    ScalarField back = hopf_cole_inverse(v, 0.25);
    CHECK(sup_diff(back, m) <= 1e-14);
    ScalarField one(g, 1.0);
    ScalarField v1 = hopf_cole(one, 0.0);
    CHECK(sup_norm(v1) <= 1e-15);  // log 1 = 0
    ScalarField neg(g, -1.0);
    CHECK_THROWS_AS(hopf_cole(neg, 0.5), SingularityError);
}

TEST_CASE("path Lipschitz norm on a known field") {
    TorusGrid g = make_grid(1, 256);
    ScalarField u(g);
    for (int id = 0; id < g.size(); ++id)
        u[id] = std::sin(kTwoPi * g.coord(id)[0]);
    double lip = lipschitz_norm({u});
    CHECK(lip == doctest::Approx(kTwoPi).epsilon(0.01));
    CHECK(lipschitz_norm({ScalarField(g, 3.0)}) <= 1e-15);
}

TEST_CASE("time continuation: bookkeeping and traces") {
    TorusGrid g = make_grid(1, 24);
    PowerFamilyHamiltonian H(1, cosine(1.0, 0.2), cosine(0.2, 0.1), 1.3);
    SolverConfig cfg;
    ScalarField uT(g, 0.0);
    ScalarField m0(g, 1.0);
    TimeContinuation cont = epsilon_continuation_time(
        H, 1.5, {1e-1, 1e-2, 1e-3}, g, uT, m0, 0.25, 16, cfg);
    REQUIRE(cont.stages.size() == 3);
    REQUIRE(cont.cauchy.size() == 2);
    REQUIRE(cont.min_m_plus_eps.size() == 3);
    REQUIRE(cont.lipschitz_trace.size() == 3);
    CHECK(cont.cauchy[0].eps_prev == 1e-1);
    CHECK(cont.cauchy[1].eps_next == 1e-3);
    for (double v : cont.min_m_plus_eps) CHECK(v > 0.0);
    // successive limits shrink as the regularization converges
    CHECK(cont.cauchy[1].cauchy_u <= cont.cauchy[0].cauchy_u);
    CHECK_THROWS_AS(epsilon_continuation_time(H, 1.5, {1e-3, 1e-2}, g, uT, m0,
                                              0.25, 16, cfg),
                    ValidationError);
}
