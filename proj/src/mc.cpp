#include "mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>

#include "operators.hpp"

namespace mfg {

namespace {

double wrap01(double x) {
    x -= std::floor(x);
    if (x >= 1.0) x -= 1.0;
    return x;
}

uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 particle_rng(unsigned long seed, long particle) {
    return std::mt19937_64(
        splitmix64(static_cast<uint64_t>(seed) ^
                   splitmix64(static_cast<uint64_t>(particle) + 1)));
}

// Run fn(particle_index) over 0..N-1 on `jobs` threads with a static split.
void parallel_particles(int N, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int i = 0; i < N; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(256);
                if (i >= N) return;
                int end = std::min(N, i + 256);
                for (; i < end; ++i) fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

double interp_scalar(const ScalarField& f, const Pt& x) {
    const TorusGrid& g = f.grid;
    double fx = wrap01(x[0]) / g.h;
    int i0 = static_cast<int>(fx);
    double wx = fx - i0;
    if (g.dim == 1) {
        return (1.0 - wx) * f[g.index(i0)] + wx * f[g.index(i0 + 1)];
    }
    double fy = wrap01(x[1]) / g.h;
    int j0 = static_cast<int>(fy);
    double wy = fy - j0;
    double v00 = f[g.index(i0, j0)], v01 = f[g.index(i0, j0 + 1)];
    double v10 = f[g.index(i0 + 1, j0)], v11 = f[g.index(i0 + 1, j0 + 1)];
    return (1.0 - wx) * ((1.0 - wy) * v00 + wy * v01) +
           wx * ((1.0 - wy) * v10 + wy * v11);
}

Pt interp_vector(const VectorField& f, const Pt& x) {
    Pt out{0.0, 0.0};
    for (int a = 0; a < f.grid.dim; ++a) {
        ScalarField comp(f.grid);
        comp.v = f.comp[a];
        out[a] = interp_scalar(comp, x);
    }
    return out;
}

std::vector<Pt> sample_density(const ScalarField& m, int N, unsigned long seed) {
    const TorusGrid& g = m.grid;
    if (field_min(m) < 0.0)
        throw ValidationError("sample_density: density must be >= 0");
    double mass = integrate(m);
    if (!(mass > 0.0)) throw ValidationError("sample_density: zero mass");
    std::vector<Pt> pts(N);

    if (g.dim == 1) {
        // Piecewise-constant density per cell -> piecewise-linear CDF.
        std::vector<double> cdf(g.n + 1, 0.0);
        for (int i = 0; i < g.n; ++i) cdf[i + 1] = cdf[i] + m[i] * g.h / mass;
        cdf[g.n] = 1.0;
        parallel_particles(N, 1, [&](int i) {
            std::mt19937_64 rng = particle_rng(seed, i);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            double u = uni(rng);
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            int cell = std::max(1, static_cast<int>(it - cdf.begin())) - 1;
            cell = std::min(cell, g.n - 1);
            double lo = cdf[cell], hi = cdf[cell + 1];
            double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
            pts[i] = {wrap01((cell + frac) * g.h), 0.0};
        });
        return pts;
    }

    double cap = field_max(m);
    parallel_particles(N, 1, [&](int i) {
        std::mt19937_64 rng = particle_rng(seed, i);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int tries = 0; tries < 100000; ++tries) {
            Pt x{uni(rng), uni(rng)};
            if (uni(rng) * cap <= interp_scalar(m, x)) {
                pts[i] = x;
                return;
            }
        }
        throw NumericError("sample_density: rejection sampling stalled");
    });
    return pts;
}

namespace {

struct FeedbackField {
    // Gradient slices of u, one per time index.
    std::vector<VectorField> du;

    static FeedbackField from_path(const std::vector<ScalarField>& u_path) {
        FeedbackField f;
        f.du.reserve(u_path.size());
        for (const auto& u : u_path) f.du.push_back(gradient(u));
        return f;
    }

    Pt velocity(const Hamiltonian& H, const Pt& x, int k, double clip_speed,
                long* clipped) const {
        Pt p = interp_vector(du[k], x);
        Pt dp = H.dp(x, p);
        Pt v{-dp[0], -dp[1]};
        double s2 = v[0] * v[0] + v[1] * v[1];
        if (s2 > clip_speed * clip_speed) {
            double scale = clip_speed / std::sqrt(s2);
            v[0] *= scale;
            v[1] *= scale;
            if (clipped) ++*clipped;
        }
        return v;
    }
};

const double kSqrt2 = std::sqrt(2.0);

}  // namespace

ParticleEnsemble simulate_ensemble(const TimeDependentSolution& sol,
                                   const Hamiltonian& H, int N,
                                   unsigned long seed,
                                   const std::vector<int>& record_indices,
                                   double clip_speed, int jobs) {
    const TorusGrid& grid = sol.uT.grid;
    const int d = grid.dim;
    FeedbackField fb = FeedbackField::from_path(sol.u);

    std::vector<int> rec = record_indices;
    std::sort(rec.begin(), rec.end());
    rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
    for (int k : rec)
        if (k < 0 || k > sol.nt)
            throw ValidationError("simulate_ensemble: record index out of range");

    ParticleEnsemble ens;
    ens.particles = N;
    ens.seed = seed;
    ens.dt = sol.dt;
    ens.snapshots.resize(rec.size());
    for (size_t s = 0; s < rec.size(); ++s) {
        ens.snapshots[s].time_index = rec[s];
        ens.snapshots[s].pos.resize(N);
    }

    std::vector<Pt> start = sample_density(sol.m0, N, seed);
    std::atomic<long> clip_total{0};
    const double sdt = kSqrt2 * std::sqrt(sol.dt);

    parallel_particles(N, jobs, [&](int i) {
        std::mt19937_64 rng = particle_rng(seed ^ 0xa5a5a5a5ULL, i);
        std::normal_distribution<double> gauss(0.0, 1.0);
        long clipped = 0;
        Pt x = start[i];
        size_t s = 0;
        for (int k = 0; k <= sol.nt; ++k) {
            while (s < rec.size() && rec[s] == k) ens.snapshots[s++].pos[i] = x;
            if (k == sol.nt) break;
            Pt v = fb.velocity(H, x, k, clip_speed, &clipped);
            x[0] = wrap01(x[0] + sol.dt * v[0] + sdt * gauss(rng));
            if (d == 2) x[1] = wrap01(x[1] + sol.dt * v[1] + sdt * gauss(rng));
        }
        clip_total += clipped;
    });
    ens.clip_events = clip_total.load();
    return ens;
}

ScalarField empirical_density(const std::vector<Pt>& pos, const TorusGrid& grid,
                              double bandwidth) {
    if (bandwidth < grid.h)
        throw ValidationError("empirical_density: bandwidth must be >= h");
    ScalarField out(grid);
    const double inv2b2 = 0.5 / (bandwidth * bandwidth);
    // Truncate the kernel at 5 bandwidths; periodic images via nearest wrap.
    const int reach = std::min(grid.n / 2,
                               static_cast<int>(std::ceil(5.0 * bandwidth / grid.h)));
    auto perd = [](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, 1.0 - d);
    };
    for (const Pt& x : pos) {
        int ic = static_cast<int>(std::floor(wrap01(x[0]) / grid.h));
        if (grid.dim == 1) {
            for (int di = -reach; di <= reach; ++di) {
                int id = grid.index(ic + di);
                double dx = perd(id * grid.h, x[0]);
                out[id] += std::exp(-dx * dx * inv2b2);
            }
        } else {
            int jc = static_cast<int>(std::floor(wrap01(x[1]) / grid.h));
            for (int di = -reach; di <= reach; ++di)
                for (int dj = -reach; dj <= reach; ++dj) {
                    int id = grid.index(ic + di, jc + dj);
                    Pt xc = grid.coord(id);
                    double d2 = perd(xc[0], x[0]) * perd(xc[0], x[0]) +
                                perd(xc[1], x[1]) * perd(xc[1], x[1]);
                    out[id] += std::exp(-d2 * inv2b2);
                }
        }
    }
    double mass = integrate(out);
    if (mass > 0.0)
        for (int id = 0; id < out.size(); ++id) out[id] /= mass;
    return out;
}

McCost empirical_cost(const TimeDependentSolution& sol, const Hamiltonian& H,
                      const CouplingParams& coupling, const Pt& x0,
                      double t_start, int N, unsigned long seed,
                      double clip_speed, int jobs) {
    const TorusGrid& grid = sol.uT.grid;
    const int d = grid.dim;
    int k0 = static_cast<int>(std::lround(t_start / sol.dt));
    k0 = std::clamp(k0, 0, sol.nt);
    FeedbackField fb = FeedbackField::from_path(sol.u);
    const double sdt = kSqrt2 * std::sqrt(sol.dt);

    std::vector<double> cost(N, 0.0);
    std::atomic<long> clip_total{0};

    parallel_particles(N, jobs, [&](int i) {
        std::mt19937_64 rng = particle_rng(seed, i);
        std::normal_distribution<double> gauss(0.0, 1.0);
        long clipped = 0;
        Pt x = x0;
        double c = 0.0;
        for (int k = k0; k < sol.nt; ++k) {
            Pt v = fb.velocity(H, x, k, clip_speed, &clipped);
            double run = legendre(H, x, v);
            double mloc = std::max(interp_scalar(sol.m[k], x), 0.0);
            run -= std::pow(mloc + sol.eps, -coupling.alpha);
            c += sol.dt * run;
            x[0] = wrap01(x[0] + sol.dt * v[0] + sdt * gauss(rng));
            if (d == 2) x[1] = wrap01(x[1] + sol.dt * v[1] + sdt * gauss(rng));
        }
        c += interp_scalar(sol.uT, x);
        cost[i] = c;
        clip_total += clipped;
    });

    McCost out;
    out.clip_events = clip_total.load();
    double sum = 0.0;
    for (double c : cost) sum += c;
    out.mean = sum / N;
    double var = 0.0;
    for (double c : cost) var += (c - out.mean) * (c - out.mean);
    out.std_error = N > 1 ? std::sqrt(var / (N - 1.0) / N) : 0.0;
    return out;
}

McCost ergodic_average_cost(const StationarySolution& sol, const Hamiltonian& H,
                            const CouplingParams& coupling, double T_sim,
                            double burn_in, double dt, int N,
                            unsigned long seed, double clip_speed, int jobs) {
    const TorusGrid& grid = sol.u.grid;
    const int d = grid.dim;
    if (!(T_sim > burn_in && burn_in >= 0.0 && dt > 0.0))
        throw ValidationError("ergodic_average_cost: need T_sim > burn_in >= 0, dt > 0");
    const int steps = static_cast<int>(std::lround(T_sim / dt));
    const int skip = static_cast<int>(std::lround(burn_in / dt));
    VectorField du = gradient(sol.u);
    const double sdt = kSqrt2 * std::sqrt(dt);

    std::vector<double> avg(N, 0.0);
    std::atomic<long> clip_total{0};

    parallel_particles(N, jobs, [&](int i) {
        std::mt19937_64 rng = particle_rng(seed, i);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        long clipped = 0;
        Pt x{uni(rng), d == 2 ? uni(rng) : 0.0};
        double acc = 0.0;
        int counted = 0;
        for (int k = 0; k < steps; ++k) {
            Pt p = interp_vector(du, x);
            Pt dp = H.dp(x, p);
            Pt v{-dp[0], -dp[1]};
            double s2 = v[0] * v[0] + v[1] * v[1];
            if (s2 > clip_speed * clip_speed) {
                double sc = clip_speed / std::sqrt(s2);
                v[0] *= sc;
                v[1] *= sc;
                ++clipped;
            }
            if (k >= skip) {
                double run = legendre(H, x, v);
                double mloc = std::max(interp_scalar(sol.m, x), 0.0);
                run -= std::pow(mloc + sol.eps, -coupling.alpha);
                acc += run;
                ++counted;
            }
            x[0] = wrap01(x[0] + dt * v[0] + sdt * gauss(rng));
            if (d == 2) x[1] = wrap01(x[1] + dt * v[1] + sdt * gauss(rng));
        }
        avg[i] = counted > 0 ? acc / counted : 0.0;
        clip_total += clipped;
    });

    McCost out;
    out.clip_events = clip_total.load();
    double sum = 0.0;
    for (double a : avg) sum += a;
    out.mean = sum / N;
    double var = 0.0;
    for (double a : avg) var += (a - out.mean) * (a - out.mean);
    out.std_error = N > 1 ? std::sqrt(var / (N - 1.0) / N) : 0.0;
    return out;
}

}  // namespace mfg
