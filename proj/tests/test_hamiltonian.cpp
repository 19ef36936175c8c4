#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hamiltonian.hpp"

using namespace mfg;

namespace {

// Test-only model with H(x,p) = |p|^gamma / gamma (no x dependence), used for
// the closed-form Legendre identity L = |v|^g'/g'.
class PurePowerHamiltonian final : public Hamiltonian {
public:
    PurePowerHamiltonian(int dim, double gamma) : dim_(dim), gamma_(gamma) {}
    int dim() const override { return dim_; }
    double growth_gamma() const override { return gamma_; }
    double value(const Pt&, const Pt& p) const override {
        return std::pow(nrm(p), gamma_) / gamma_;
    }
    Pt dp(const Pt&, const Pt& p) const override {
        double r = nrm(p);
        if (r < 1e-300) return {0.0, 0.0};
        double c = std::pow(r, gamma_ - 2.0);
        return {c * p[0], dim_ == 2 ? c * p[1] : 0.0};
    }
    Pt dx(const Pt&, const Pt&) const override { return {0.0, 0.0}; }
    Mat2 dpp(const Pt&, const Pt& p) const override {
        // not needed by the ascent path; return a PD surrogate
        double r = std::max(nrm(p), 1e-8);
        double c = std::pow(r, gamma_ - 2.0);
        return {c, 0.0, 0.0, c};
    }
    Mat2 dxp(const Pt&, const Pt&) const override { return {0, 0, 0, 0}; }

private:
    double nrm(const Pt& p) const {
        return std::sqrt(p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0));
    }
    int dim_;
    double gamma_;
};

FieldSpec one_mode(double constant, double amp, int k = 1, double phase = 0.0) {
    FieldSpec f;
    f.constant = constant;
    f.modes.push_back({{k, 0}, amp, phase});
    return f;
}

}  // namespace

TEST_CASE("field spec values and analytic gradient") {
    FieldSpec f = one_mode(1.0, 0.5);
    CHECK(f.value({0.0, 0.0}, 1) == doctest::Approx(1.5));
    CHECK(f.value({0.25, 0.0}, 1) == doctest::Approx(1.0));
    // gradient vs finite differences
    double h = 1e-6;
    for (double x : {0.1, 0.37, 0.77}) {
        double fd = (f.value({x + h, 0.0}, 1) - f.value({x - h, 0.0}, 1)) / (2 * h);
        CHECK(f.grad({x, 0.0}, 1)[0] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("power family point values") {
    PowerFamilyHamiltonian h1(2, FieldSpec::constant_spec(1.0),
                              FieldSpec::constant_spec(0.0), 2.0);
    CHECK(h1.value({0, 0}, {0, 0}) == doctest::Approx(1.0));
    CHECK(h1.value({0, 0}, {3, 4}) == doctest::Approx(26.0));
    PowerFamilyHamiltonian h2(1, FieldSpec::constant_spec(2.0),
                              FieldSpec::constant_spec(0.5), 1.5);
    CHECK(h2.value({0, 0}, {0, 0}) == doctest::Approx(2.5));
}

TEST_CASE("model validation: positivity of a, auto-shift of V") {
    CHECK_THROWS_AS(PowerFamilyHamiltonian(1, FieldSpec::constant_spec(-1.0),
                                           FieldSpec::constant_spec(0.0), 2.0),
                    ValidationError);
    CHECK_THROWS_AS(PowerFamilyHamiltonian(1, one_mode(0.3, 0.5),
                                           FieldSpec::constant_spec(0.0), 2.0),
                    ValidationError);
    PowerFamilyHamiltonian shifted(1, FieldSpec::constant_spec(1.0),
                                   one_mode(0.0, 0.2), 1.5);
    CHECK(shifted.shift_applied() == doctest::Approx(0.2).epsilon(1e-3));
    // H(x, 0) = a + shifted V >= a > 0 everywhere
    for (double x : {0.0, 0.3, 0.5, 0.9})
        CHECK(shifted.value({x, 0.0}, {0.0, 0.0}) >= 1.0 - 1e-12);
}

TEST_CASE("derivatives match finite differences") {
    PowerFamilyHamiltonian H(2, one_mode(1.0, 0.3), one_mode(0.5, 0.2, 2), 1.7);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    const double e = 1e-6;
    for (int t = 0; t < 30; ++t) {
        Pt x{ux(rng), ux(rng)};
        Pt p{uni(rng), uni(rng)};
        Pt dp = H.dp(x, p);
        Pt dx = H.dx(x, p);
        Mat2 dpp = H.dpp(x, p);
        Mat2 dxp = H.dxp(x, p);
        for (int a = 0; a < 2; ++a) {
            Pt pp = p, pm = p;
            pp[a] += e;
            pm[a] -= e;
            CHECK(dp[a] == doctest::Approx((H.value(x, pp) - H.value(x, pm)) / (2 * e))
                               .epsilon(1e-5));
            Pt xp = x, xm = x;
            xp[a] += e;
            xm[a] -= e;
            CHECK(dx[a] == doctest::Approx((H.value(xp, p) - H.value(xm, p)) / (2 * e))
                               .epsilon(1e-5));
            for (int b = 0; b < 2; ++b) {
                CHECK(dpp[a * 2 + b] ==
                      doctest::Approx((H.dp(x, pp)[b] - H.dp(x, pm)[b]) / (2 * e))
                          .epsilon(1e-4));
                CHECK(dxp[a * 2 + b] ==
                      doctest::Approx((H.dp(xp, p)[b] - H.dp(xm, p)[b]) / (2 * e))
                          .epsilon(1e-4));
            }
        }
        // strict convexity: smallest eigenvalue of dpp > 0
        double tr = dpp[0] + dpp[3];
        double det = dpp[0] * dpp[3] - dpp[1] * dpp[2];
        CHECK(tr / 2.0 - std::sqrt(std::max(0.0, tr * tr / 4.0 - det)) > 0.0);
    }
}

TEST_CASE("legendre closed forms") {
    // Quadratic variant H = |p|^2/2: L(v) = |v|^2/2, so L((1,0)) = 0.5.
    PurePowerHamiltonian quad(2, 2.0);
    Pt pstar;
    CHECK(legendre(quad, {0, 0}, {1.0, 0.0}, &pstar) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(pstar[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(pstar[1] == doctest::Approx(0.0).epsilon(1e-6));

    // H = |p|^g/g: L = |v|^{g'}/g' with g' = g/(g-1); gamma = 1.5 -> g' = 3.
    PurePowerHamiltonian pp(1, 1.5);
    CHECK(legendre(pp, {0, 0}, {1.0, 0.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-7));

    // v = 0 for the built-in family: L = -H(x,0) = -(a+V).
    PowerFamilyHamiltonian fam(1, one_mode(1.0, 0.3), FieldSpec::constant_spec(0.25),
                               1.6);
    for (double x : {0.0, 0.21, 0.6})
        CHECK(legendre(fam, {x, 0.0}, {0.0, 0.0}) ==
              doctest::Approx(-fam.value({x, 0.0}, {0.0, 0.0})).epsilon(1e-10));
}

TEST_CASE("legendre round trip recovers H") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> up(-1.5, 1.5);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::vector<std::unique_ptr<Hamiltonian>> models;
    models.emplace_back(new PowerFamilyHamiltonian(
        1, FieldSpec::constant_spec(1.0), FieldSpec::constant_spec(0.0), 2.0));
    models.emplace_back(new PowerFamilyHamiltonian(1, one_mode(1.0, 0.3),
                                                   one_mode(0.2, 0.1, 2), 1.3));
    models.emplace_back(new PowerFamilyHamiltonian(
        2, FieldSpec::constant_spec(0.8), FieldSpec::constant_spec(0.1), 1.7));
    for (const auto& m : models) {
        for (int t = 0; t < 34; ++t) {
            Pt x{ux(rng), ux(rng)};
            Pt p{up(rng), m->dim() == 2 ? up(rng) : 0.0};
            double recovered = legendre_dual(*m, x, p);
            CHECK(std::abs(recovered - m->value(x, p)) <= 1e-6);
        }
    }
}

TEST_CASE("growth constant fits certify the sampled inequalities") {
    PowerFamilyHamiltonian H(1, one_mode(1.0, 0.5), FieldSpec::constant_spec(0.0),
                             2.0);
    SampleSpec spec;
    GrowthConstants a1 = check_A1(H, spec);
    CHECK(a1.pass);
    CHECK(a1.samples >= 100);
    // spot-verify the |DpH| inequality with the fitted constants at the
    // sampled x nodes (the certificate covers the sample box, not all x)
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> up(-spec.p_max, spec.p_max);
    std::uniform_int_distribution<int> node(0, spec.x_per_axis - 1);
    auto ux = [&](std::mt19937_64& r) { return node(r) / double(spec.x_per_axis); };
    for (int t = 0; t < 200; ++t) {
        Pt x{ux(rng), 0.0};
        Pt p{up(rng), 0.0};
        double dpn = std::abs(H.dp(x, p)[0]);
        double pg1 = std::pow(std::abs(p[0]), H.growth_gamma() - 1.0);
        CHECK(dpn <= a1.C1 + a1.C2 * pg1 + 1e-9);
        double hv = H.value(x, p);
        double dxn = std::abs(H.dx(x, p)[0]);
        CHECK(dxn <= a1.C1 + a1.C2 * hv + 1e-9);
    }

    GrowthConstants a2 = check_A2(H, spec);
    CHECK(a2.pass);
    for (int t = 0; t < 200; ++t) {
        Pt x{ux(rng), 0.0};
        Pt p{up(rng), 0.0};
        double hv = H.value(x, p);
        double lag = H.dp(x, p)[0] * p[0] - hv;
        CHECK(lag >= hv / a2.C2 - a2.C1 - 1e-9);
    }

    CHECK_THROWS_AS(
        [&] {
            SampleSpec tiny;
            tiny.x_per_axis = 4;
            tiny.p_count = 10;
            check_A1(H, tiny);
        }(),
        ValidationError);
}

TEST_CASE("A3 table: zero cross term for constant a") {
    PowerFamilyHamiltonian flat(1, FieldSpec::constant_spec(1.0),
                                FieldSpec::constant_spec(0.0), 1.5);
    SampleSpec spec;
    auto table = check_A3(flat, spec, {0.25, 0.5, 1.0});
    REQUIRE(table.size() == 3);
    for (const auto& e : table) {
        CHECK(e.pass);
        CHECK(e.C_delta <= 1e-12);
    }
    PowerFamilyHamiltonian varying(1, one_mode(1.0, 0.5), FieldSpec::constant_spec(0.0),
                                   1.15);
    auto t2 = check_A3(varying, spec, {0.5});
    CHECK(t2[0].pass);
    CHECK(std::isfinite(t2[0].C_delta));
}

TEST_CASE("gamma gate") {
    CHECK(gamma_gate_A4(1.2, 2));
    CHECK_FALSE(gamma_gate_A4(4.0 / 3.0, 2));
    CHECK_FALSE(gamma_gate_A4(1.24, 4));  // (d+2)/(d+1) = 1.2
    CHECK(gamma_gate_A4(1.19, 4));
    CHECK_FALSE(gamma_gate_A4(1.0, 1));
}

TEST_CASE("alpha threshold case formula") {
    const double inf = std::numeric_limits<double>::infinity();
    struct Case {
        int d;
        double gamma, want;
    };
    // hand-evaluated pairs covering the three branches and the +inf region
    const Case cases[] = {
        {5, 1.1, 0.0},          // gamma < d/(d-1) = 1.25
        {2, 2.5, 1.0},          // d = 2, gamma >= 2
        {2, 2.0, 1.0},          // boundary gamma = 2 included in the "1" case
        {3, 1.6, 1.6},          // denom = 1.6*0 + 1 = 1
        {4, 1.5, 3.0},          // denom = 1.5*(-1) + 2 = 0.5
        {2, 1.5, 0.0},          // gamma < 2 = d/(d-1)
        {2, 1.99, 0.0},
        {3, 1.4, 0.0},          // < 1.5
        {3, 1.5, 1.5},          // boundary of case 3: max(1.5/1, 1)
        {3, 2.0, 2.0},
        {3, 3.0, 3.0},          // d=3: case 3 for all gamma >= 1.5
        {3, 1.51, 1.51},
        {4, 4.0 / 3.0, 2.0},    // boundary gamma = d/(d-1): denom = 2/3 -> 2
        {4, 1.9, 19.0},         // denom = -1.9 + 2 = 0.1
        {4, 2.0, inf},          // gamma >= (d-2)/(d-3) = 2
        {4, 2.5, inf},
        {5, 1.3, 1.3 / 0.4},    // denom = 1.3*(-2) + 3 = 0.4
        {5, 1.25, 1.25 / 0.5},  // boundary of case 3
        {5, 1.5, inf},          // (d-2)/(d-3) = 1.5
        {1, 1.5, 0.0},          // d = 1: the gate d/(d-1) is vacuous
    };
    for (const auto& c : cases) {
        double got = alpha_threshold_A5(c.d, c.gamma);
        if (std::isinf(c.want))
            CHECK(std::isinf(got));
        else
            CHECK(got == doctest::Approx(c.want).epsilon(1e-12));
    }
}
