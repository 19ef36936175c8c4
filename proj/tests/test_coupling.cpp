#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "coupling.hpp"
#include "grid.hpp"

using namespace mfg;

TEST_CASE("coupling point values") {
    TorusGrid g = make_grid(1, 8);
    ScalarField one(g, 1.0);
    ScalarField zero(g, 0.0);
    ScalarField three(g, 3.0);

    ScalarField r1 = g_eps(one, {1.0, 0.0});
    for (int id = 0; id < g.size(); ++id) CHECK(r1[id] == doctest::Approx(-1.0));

    ScalarField r2 = g_eps(zero, {2.0, 0.1});
    for (int id = 0; id < g.size(); ++id) CHECK(r2[id] == doctest::Approx(-100.0));

    ScalarField r3 = g_eps(three, {0.5, 1.0});
    for (int id = 0; id < g.size(); ++id) CHECK(r3[id] == doctest::Approx(-0.5));
}

TEST_CASE("singularity error carries the node index") {
    TorusGrid g = make_grid(1, 8);
    ScalarField m(g, 1.0);
    m[3] = -2.0;
    try {
        g_eps(m, {1.0, 0.5});
        FAIL("expected SingularityError");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("coupling derivative values and monotonicity") {
    TorusGrid g = make_grid(1, 8);
    ScalarField one(g, 1.0);
    ScalarField zero(g, 0.0);
    ScalarField d1 = g_eps_derivative(one, {1.0, 0.0});
    for (int id = 0; id < g.size(); ++id) CHECK(d1[id] == doctest::Approx(1.0));
    ScalarField d2 = g_eps_derivative(zero, {1.0, 0.5});
    for (int id = 0; id < g.size(); ++id) CHECK(d2[id] == doctest::Approx(4.0));

    // g is increasing in m (positive derivative): m1 >= m2 => g(m1) >= g(m2)
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(0.1, 3.0);
    ScalarField m1(g), m2(g);
    for (int id = 0; id < g.size(); ++id) {
        double a = uni(rng), b = uni(rng);
        m1[id] = std::max(a, b);
        m2[id] = std::min(a, b);
    }
    ScalarField ga = g_eps(m1, {1.3, 0.0});
    ScalarField gb = g_eps(m2, {1.3, 0.0});
    for (int id = 0; id < g.size(); ++id) CHECK(ga[id] >= gb[id]);
}

TEST_CASE("epsilon convergence rate on positive fields") {
    TorusGrid g = make_grid(1, 16);
    ScalarField m(g);
    for (int id = 0; id < g.size(); ++id) m[id] = 0.5 + 0.1 * id / g.size();
    ScalarField limit = g_eps(m, {1.5, 0.0});
    double prev = 0.0;
    for (int k = 0; k < 4; ++k) {
        double eps = std::pow(10.0, -(k + 2));
        ScalarField ge = g_eps(m, {1.5, eps});
        double err = sup_diff(ge, limit);
        if (k > 0) CHECK(err <= 0.15 * prev);  // O(eps): factor 10 per step
        prev = err;
    }
}

TEST_CASE("convex power branch values") {
    CHECK(convex_power(1.0, 2.0) == doctest::Approx(1.0));
    CHECK(convex_power(4.0, 3.0) == doctest::Approx(0.03125));
    CHECK(convex_power(2.0, 1.0) == doctest::Approx(-std::log(2.0)));
    // convexity probe at alpha = 2
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(0.05, 5.0);
    for (int t = 0; t < 100; ++t) {
        double a = uni(rng), b = uni(rng);
        CHECK(0.5 * (convex_power(a, 2.0) + convex_power(b, 2.0)) >=
              convex_power(0.5 * (a + b), 2.0) - 1e-12);
    }
}
