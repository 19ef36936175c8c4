#ifndef MFG_HAMILTONIAN_HPP
#define MFG_HAMILTONIAN_HPP

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "grid.hpp"

namespace mfg {

// Closed-form coefficient field on the torus: a constant plus cosine modes.
// Mode entries carry an integer wave vector, an amplitude and a phase:
//   amp * cos(2*pi*(k . x) + phase).
struct FieldSpec {
    double constant = 0.0;
    struct Mode {
        std::array<int, 2> k{0, 0};
        double amp = 0.0;
        double phase = 0.0;
    };
    std::vector<Mode> modes;

    double value(const Pt& x, int dim) const;
    Pt grad(const Pt& x, int dim) const;
    ScalarField sample(const TorusGrid& g) const;

    static FieldSpec constant_spec(double c);
};

using Mat2 = std::array<double, 4>;  // row-major 2x2; only dim x dim used

// Hamiltonian interface.  The shipped model is the a/V/gamma power family;
// the interface exists so tests can plug in analytic variants.
class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;
    virtual int dim() const = 0;
    virtual double growth_gamma() const = 0;
    virtual double value(const Pt& x, const Pt& p) const = 0;
    virtual Pt dp(const Pt& x, const Pt& p) const = 0;
    virtual Pt dx(const Pt& x, const Pt& p) const = 0;
    virtual Mat2 dpp(const Pt& x, const Pt& p) const = 0;
    virtual Mat2 dxp(const Pt& x, const Pt& p) const = 0;
};

// H(x,p) = a(x) (1+|p|^2)^(gamma/2) + V(x), a > 0, V >= 0.
// A model whose V dips below zero is shifted up at construction (the shift is
// reported through shift_applied()).
class PowerFamilyHamiltonian final : public Hamiltonian {
public:
    PowerFamilyHamiltonian(int dim, FieldSpec a, FieldSpec V, double gamma);

    int dim() const override { return dim_; }
    double growth_gamma() const override { return gamma_; }
    double value(const Pt& x, const Pt& p) const override;
    Pt dp(const Pt& x, const Pt& p) const override;
    Pt dx(const Pt& x, const Pt& p) const override;
    Mat2 dpp(const Pt& x, const Pt& p) const override;
    Mat2 dxp(const Pt& x, const Pt& p) const override;

    const FieldSpec& a_spec() const { return a_; }
    const FieldSpec& V_spec() const { return V_; }
    double shift_applied() const { return shift_; }

    // Closed-form inner solve for the Legendre fast path: the radius r >= 0
    // with a*gamma*(1+r^2)^(gamma/2-1) r = s.
    double radial_inverse_dp(double a_val, double s) const;

private:
    int dim_;
    FieldSpec a_;
    FieldSpec V_;
    double gamma_;
    double shift_ = 0.0;
};

// L(x,v) = sup_p [ -p.v - H(x,p) ].  Damped ascent from p = 0 with a
// closed-form fast path for the power family.  Returns the supremum; the
// maximizer is written to *maximizer when non-null.
double legendre(const Hamiltonian& H, const Pt& x, const Pt& v,
                Pt* maximizer = nullptr, double tol = 1e-10, int max_iters = 20000);

// Inverse transform sup_v [ -v.p - L(x,v) ], used by the round-trip checks.
double legendre_dual(const Hamiltonian& H, const Pt& x, const Pt& p,
                     double tol = 1e-10, int max_iters = 20000);

struct SampleSpec {
    int x_per_axis = 16;   // x nodes per axis
    int p_count = 512;     // random p draws with |p| <= p_max
    double p_max = 10.0;
    double m_max = 5.0;    // matrix norm cap for the A3 sweep
    unsigned long seed = 12345;
};

struct GrowthConstants {
    double C1 = 0.0;
    double C2 = 1.0;
    bool pass = false;
    int samples = 0;
    double p_max = 0.0;
};

GrowthConstants check_A1(const Hamiltonian& H, const SampleSpec& spec);
GrowthConstants check_A2(const Hamiltonian& H, const SampleSpec& spec);

struct A3Entry {
    double delta;
    double C_delta;
    bool pass;
};
std::vector<A3Entry> check_A3(const Hamiltonian& H, const SampleSpec& spec,
                              const std::vector<double>& delta_list);

bool gamma_gate_A4(double gamma, int d);

// The threshold alpha_bar(d, gamma); +infinity is returned as
// std::numeric_limits<double>::infinity().
double alpha_threshold_A5(int d, double gamma);

}  // namespace mfg

#endif
