#include "hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mfg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double FieldSpec::value(const Pt& x, int dim) const {
    double s = constant;
    for (const auto& m : modes) {
        double kx = m.k[0] * x[0];
        if (dim == 2) kx += m.k[1] * x[1];
        s += m.amp * std::cos(kTwoPi * kx + m.phase);
    }
    return s;
}

Pt FieldSpec::grad(const Pt& x, int dim) const {
    Pt g{0.0, 0.0};
    for (const auto& m : modes) {
        double kx = m.k[0] * x[0];
        if (dim == 2) kx += m.k[1] * x[1];
        double ds = -m.amp * kTwoPi * std::sin(kTwoPi * kx + m.phase);
        g[0] += ds * m.k[0];
        if (dim == 2) g[1] += ds * m.k[1];
    }
    return g;
}

ScalarField FieldSpec::sample(const TorusGrid& g) const {
    ScalarField f(g);
    for (int id = 0; id < f.size(); ++id) f[id] = value(g.coord(id), g.dim);
    return f;
}

FieldSpec FieldSpec::constant_spec(double c) {
    FieldSpec s;
    s.constant = c;
    return s;
}

namespace {

// Exact minimum would need global optimization; a fine sample is enough for
// the validation gates here.
double sampled_min(const FieldSpec& s, int dim) {
    double lo = std::numeric_limits<double>::infinity();
    const int n = 512;
    if (dim == 1) {
        for (int i = 0; i < n; ++i)
            lo = std::min(lo, s.value({i / double(n), 0.0}, 1));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                lo = std::min(lo, s.value({i / double(n), j / double(n)}, 2));
    }
    return lo;
}

}  // namespace

PowerFamilyHamiltonian::PowerFamilyHamiltonian(int dim, FieldSpec a, FieldSpec V, double gamma)
    : dim_(dim), a_(std::move(a)), V_(std::move(V)), gamma_(gamma) {
    if (dim != 1 && dim != 2)
        throw ValidationError("hamiltonian: dim must be 1 or 2");
    if (!(gamma > 1.0))
        throw ValidationError("hamiltonian: gamma must be > 1");
    if (sampled_min(a_, dim_) <= 0.0)
        throw ValidationError("hamiltonian: a(x) must be strictly positive");
    double vmin = sampled_min(V_, dim_);
    if (vmin < 0.0) {
        shift_ = -vmin;
        V_.constant += shift_;
    }
}

double PowerFamilyHamiltonian::value(const Pt& x, const Pt& p) const {
    double w = 1.0 + p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0);
    return a_.value(x, dim_) * std::pow(w, gamma_ / 2.0) + V_.value(x, dim_);
}

Pt PowerFamilyHamiltonian::dp(const Pt& x, const Pt& p) const {
    double w = 1.0 + p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0);
    double c = a_.value(x, dim_) * gamma_ * std::pow(w, gamma_ / 2.0 - 1.0);
    return {c * p[0], dim_ == 2 ? c * p[1] : 0.0};
}

Pt PowerFamilyHamiltonian::dx(const Pt& x, const Pt& p) const {
    double w = 1.0 + p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0);
    double wg = std::pow(w, gamma_ / 2.0);
    Pt da = a_.grad(x, dim_);
    Pt dv = V_.grad(x, dim_);
    return {da[0] * wg + dv[0], dim_ == 2 ? da[1] * wg + dv[1] : 0.0};
}

Mat2 PowerFamilyHamiltonian::dpp(const Pt& x, const Pt& p) const {
    double w = 1.0 + p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0);
    double av = a_.value(x, dim_);
    double c1 = av * gamma_ * std::pow(w, gamma_ / 2.0 - 1.0);
    double c2 = av * gamma_ * (gamma_ - 2.0) * std::pow(w, gamma_ / 2.0 - 2.0);
    Mat2 m{0, 0, 0, 0};
    m[0] = c1 + c2 * p[0] * p[0];
    if (dim_ == 2) {
        m[1] = m[2] = c2 * p[0] * p[1];
        m[3] = c1 + c2 * p[1] * p[1];
    }
    return m;
}

Mat2 PowerFamilyHamiltonian::dxp(const Pt& x, const Pt& p) const {
    double w = 1.0 + p[0] * p[0] + (dim_ == 2 ? p[1] * p[1] : 0.0);
    double c = gamma_ * std::pow(w, gamma_ / 2.0 - 1.0);
    Pt da = a_.grad(x, dim_);
    Mat2 m{0, 0, 0, 0};
    m[0] = c * da[0] * p[0];
    if (dim_ == 2) {
        m[1] = c * da[0] * p[1];
        m[2] = c * da[1] * p[0];
        m[3] = c * da[1] * p[1];
    }
    return m;
}

double PowerFamilyHamiltonian::radial_inverse_dp(double a_val, double s) const {
    if (s <= 0.0) return 0.0;
    auto f = [&](double r) {
        return a_val * gamma_ * std::pow(1.0 + r * r, gamma_ / 2.0 - 1.0) * r - s;
    };
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    double lo = 0.0;
    // f is strictly increasing for gamma > 1; Newton with bisection fallback.
    double r = hi * 0.5;
    for (int it = 0; it < 200; ++it) {
        double w = 1.0 + r * r;
        double fr = f(r);
        if (fr > 0.0) hi = r; else lo = r;
        double dfr = a_val * gamma_ * std::pow(w, gamma_ / 2.0 - 2.0) *
                     (1.0 + (gamma_ - 1.0) * r * r);
        double step = fr / dfr;
        double rn = r - step;
        if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
        if (std::abs(rn - r) < 1e-15 * (1.0 + r)) { r = rn; break; }
        r = rn;
    }
    return r;
}

namespace {

double dot(const Pt& a, const Pt& b, int dim) {
    return a[0] * b[0] + (dim == 2 ? a[1] * b[1] : 0.0);
}

double norm(const Pt& a, int dim) { return std::sqrt(dot(a, a, dim)); }

}  // namespace

double legendre(const Hamiltonian& H, const Pt& x, const Pt& v, Pt* maximizer,
                double tol, int max_iters) {
    const int d = H.dim();
    if (auto* pf = dynamic_cast<const PowerFamilyHamiltonian*>(&H)) {
        double s = norm(v, d);
        double a_val = pf->a_spec().value(x, d);
        double r = pf->radial_inverse_dp(a_val, s);
        Pt p{0.0, 0.0};
        if (s > 0.0) {
            p[0] = -r * v[0] / s;
            if (d == 2) p[1] = -r * v[1] / s;
        }
        if (maximizer) *maximizer = p;
        return -dot(p, v, d) - H.value(x, p);
    }

    // Gradient ascent with Armijo backtracking on the strictly concave
    // objective -p.v - H(x,p).
    Pt p{0.0, 0.0};
    double fp = -H.value(x, p);
    double eta = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        Pt dH = H.dp(x, p);
        Pt g{-v[0] - dH[0], d == 2 ? -v[1] - dH[1] : 0.0};
        double gn = norm(g, d);
        if (gn <= tol) {
            if (maximizer) *maximizer = p;
            return fp;
        }
        double step = eta;
        while (true) {
            Pt pn{p[0] + step * g[0], d == 2 ? p[1] + step * g[1] : 0.0};
            double fn = -dot(pn, v, d) - H.value(x, pn);
            if (fn >= fp + 0.25 * step * gn * gn) {
                p = pn;
                fp = fn;
                eta = std::min(step * 2.0, 1e6);
                break;
            }
            step *= 0.5;
            if (step < 1e-18) {
                // no measurable ascent left at roundoff: accept the point
                if (maximizer) *maximizer = p;
                return fp;
            }
        }
    }
    throw ConvergenceError("legendre: ascent did not converge");
}

double legendre_dual(const Hamiltonian& H, const Pt& x, const Pt& p,
                     double tol, int max_iters) {
    const int d = H.dim();
    // First-order optimality of sup_v [-v.p - L(x,v)] gives v = -DpH(x,p);
    // start there and let the ascent correct it.
    Pt dH = H.dp(x, p);
    Pt v{-dH[0], d == 2 ? -dH[1] : 0.0};
    double fv = -dot(v, p, d) - legendre(H, x, v);
    double eta = 0.5;
    for (int it = 0; it < max_iters; ++it) {
        Pt pstar;
        legendre(H, x, v, &pstar);
        // Envelope theorem: d/dv L(x,v) = -p*(v), so the ascent direction of
        // -v.p - L(x,v) is p*(v) - p.
        Pt g{pstar[0] - p[0], d == 2 ? pstar[1] - p[1] : 0.0};
        double gn = norm(g, d);
        if (gn <= tol) return fv;
        double step = eta;
        while (true) {
            Pt vn{v[0] + step * g[0], d == 2 ? v[1] + step * g[1] : 0.0};
            double fn = -dot(vn, p, d) - legendre(H, x, vn);
            if (fn >= fv + 0.25 * step * gn * gn) {
                v = vn;
                fv = fn;
                eta = std::min(step * 2.0, 1e6);
                break;
            }
            step *= 0.5;
            if (step < 1e-18) return fv;  // converged to roundoff
        }
    }
    throw ConvergenceError("legendre_dual: ascent did not converge");
}

namespace {

struct SamplePoint {
    Pt x;
    Pt p;
};

std::vector<SamplePoint> build_samples(const Hamiltonian& H, const SampleSpec& spec) {
    const int d = H.dim();
    int x_count = d == 1 ? spec.x_per_axis : spec.x_per_axis * spec.x_per_axis;
    if (x_count * spec.p_count < 100)
        throw ValidationError("assumption check: sample too small (< 100 points)");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    std::vector<Pt> ps;
    ps.reserve(spec.p_count);
    for (int k = 0; k < spec.p_count; ++k) {
        Pt dir{unit(rng), d == 2 ? unit(rng) : 0.0};
        double nn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1]);
        if (nn < 1e-12) { dir = {1.0, 0.0}; nn = 1.0; }
        // Magnitudes biased toward both ends of [0, p_max].
        double r = spec.p_max * std::pow(mag(rng), 2.0 - 1.5 * mag(rng));
        ps.push_back({dir[0] / nn * r, d == 2 ? dir[1] / nn * r : 0.0});
    }
    ps.push_back({0.0, 0.0});
    ps.push_back({spec.p_max, 0.0});
    if (d == 2) ps.push_back({0.0, spec.p_max});

    std::vector<SamplePoint> out;
    out.reserve(static_cast<size_t>(x_count) * ps.size());
    for (int ix = 0; ix < spec.x_per_axis; ++ix) {
        for (int jx = 0; jx < (d == 2 ? spec.x_per_axis : 1); ++jx) {
            Pt x{ix / double(spec.x_per_axis), jx / double(spec.x_per_axis)};
            for (const auto& p : ps) out.push_back({x, p});
        }
    }
    return out;
}

// Smallest eigenvalue of the dim x dim block of a symmetric Mat2.
double min_eig(const Mat2& m, int dim) {
    if (dim == 1) return m[0];
    double tr = m[0] + m[3];
    double det = m[0] * m[3] - m[1] * m[2];
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
}

// Golden-section search of C2 minimizing C1(C2) + C2 on a log scale, where
// C1(C2) = required_c1(C2) is non-increasing in C2.
template <typename F>
std::pair<double, double> fit_constants(F required_c1) {
    double lo = std::log(1e-3), hi = std::log(1e6);
    const double gr = 0.6180339887498949;
    double b = hi - gr * (hi - lo), c = lo + gr * (hi - lo);
    auto cost = [&](double t) {
        double c2 = std::exp(t);
        return required_c1(c2) + c2;
    };
    double fb = cost(b), fc = cost(c);
    for (int it = 0; it < 120; ++it) {
        if (fb < fc) {
            hi = c; c = b; fc = fb;
            b = hi - gr * (hi - lo); fb = cost(b);
        } else {
            lo = b; b = c; fb = fc;
            c = lo + gr * (hi - lo); fc = cost(c);
        }
    }
    double c2 = std::exp(0.5 * (lo + hi));
    return {required_c1(c2), c2};
}

}  // namespace

GrowthConstants check_A1(const Hamiltonian& H, const SampleSpec& spec) {
    const int d = H.dim();
    auto samples = build_samples(H, spec);

    struct Row {
        double Hval, pg, pgm1, dpn, dxn;
    };
    std::vector<Row> rows;
    rows.reserve(samples.size());
    const double gamma = H.growth_gamma();
    bool convex_ok = true;
    for (const auto& s : samples) {
        Row r;
        r.Hval = H.value(s.x, s.p);
        double pn = norm(s.p, d);
        r.pg = std::pow(pn, gamma);
        r.pgm1 = std::pow(pn, gamma - 1.0);
        r.dpn = norm(H.dp(s.x, s.p), d);
        r.dxn = norm(H.dx(s.x, s.p), d);
        if (min_eig(H.dpp(s.x, s.p), d) <= 0.0) convex_ok = false;
        rows.push_back(r);
    }

    auto required_c1 = [&](double c2) {
        double c1 = 0.0;
        for (const auto& r : rows) {
            c1 = std::max(c1, r.Hval - c2 * r.pg);        // upper growth
            c1 = std::max(c1, r.pg / c2 - r.Hval);        // lower growth
            c1 = std::max(c1, r.dpn - c2 * r.pgm1);       // |D_p H| bound
            c1 = std::max(c1, r.dxn - c2 * r.Hval);       // |D_x H| bound
        }
        return c1;
    };
    auto [c1, c2] = fit_constants(required_c1);
    GrowthConstants out;
    out.C1 = c1;
    out.C2 = c2;
    out.samples = static_cast<int>(rows.size());
    out.p_max = spec.p_max;
    out.pass = convex_ok && std::isfinite(c1) && std::isfinite(c2);
    return out;
}

GrowthConstants check_A2(const Hamiltonian& H, const SampleSpec& spec) {
    const int d = H.dim();
    auto samples = build_samples(H, spec);
    struct Row {
        double Hval, lag;
    };
    std::vector<Row> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        double hv = H.value(s.x, s.p);
        rows.push_back({hv, dot(H.dp(s.x, s.p), s.p, d) - hv});
    }
    auto required_c1 = [&](double c2) {
        double c1 = 0.0;
        for (const auto& r : rows) c1 = std::max(c1, r.Hval / c2 - r.lag);
        return c1;
    };
    auto [c1, c2] = fit_constants(required_c1);
    GrowthConstants out;
    out.C1 = c1;
    out.C2 = c2;
    out.samples = static_cast<int>(rows.size());
    out.p_max = spec.p_max;
    out.pass = std::isfinite(c1) && std::isfinite(c2);
    return out;
}

std::vector<A3Entry> check_A3(const Hamiltonian& H, const SampleSpec& spec,
                              const std::vector<double>& delta_list) {
    const int d = H.dim();
    auto samples = build_samples(H, spec);
    std::mt19937_64 rng(spec.seed + 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    struct Row {
        double Hval, trxp, trpp2;
    };
    std::vector<Row> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        // Random symmetric M with norm <= m_max.
        Mat2 M{unit(rng) * spec.m_max, 0, 0, 0};
        if (d == 2) {
            M[1] = M[2] = unit(rng) * spec.m_max * 0.5;
            M[3] = unit(rng) * spec.m_max;
        }
        Mat2 xp = H.dxp(s.x, s.p);
        Mat2 pp = H.dpp(s.x, s.p);
        double trxp, trpp2;
        if (d == 1) {
            trxp = xp[0] * M[0];
            trpp2 = pp[0] * M[0] * M[0];
        } else {
            // Tr(A M) and Tr(A M^2) with symmetric M.
            Mat2 M2{M[0] * M[0] + M[1] * M[2], M[0] * M[1] + M[1] * M[3],
                    M[2] * M[0] + M[3] * M[2], M[2] * M[1] + M[3] * M[3]};
            trxp = xp[0] * M[0] + xp[1] * M[2] + xp[2] * M[1] + xp[3] * M[3];
            trpp2 = pp[0] * M2[0] + pp[1] * M2[2] + pp[2] * M2[1] + pp[3] * M2[3];
        }
        rows.push_back({H.value(s.x, s.p), trxp, trpp2});
    }

    std::vector<A3Entry> out;
    for (double delta : delta_list) {
        double cd = 0.0;
        bool ok = true;
        for (const auto& r : rows) {
            if (r.Hval <= 0.0) { ok = false; break; }
            cd = std::max(cd, (r.trxp - delta * r.trpp2) / r.Hval);
        }
        out.push_back({delta, cd, ok && std::isfinite(cd)});
    }
    return out;
}

bool gamma_gate_A4(double gamma, int d) {
    return gamma > 1.0 && gamma < double(d + 2) / double(d + 1);
}

double alpha_threshold_A5(int d, double gamma) {
    const double inf = std::numeric_limits<double>::infinity();
    double gate1 = d > 1 ? double(d) / double(d - 1) : inf;
    if (gamma < gate1) return 0.0;
    if (d == 2 && gamma >= 2.0) return 1.0;
    if (d >= 3) {
        double upper = d > 3 ? double(d - 2) / double(d - 3) : inf;
        if (gamma >= gate1 && gamma < upper) {
            double denom = gamma * (3.0 - d) + d - 2.0;
            return std::max(gamma / denom, 1.0);
        }
    }
    return inf;
}

}  // namespace mfg
