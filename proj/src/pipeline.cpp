#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "adjoint.hpp"
#include "estimates.hpp"
#include "field_io.hpp"
#include "mc.hpp"
#include "operators.hpp"

namespace fs = std::filesystem;

namespace mfg {

using nlohmann::json;

LogLevel current_log_level() {
    const char* env = std::getenv("MFG_LOG_LEVEL");
    if (!env) return LogLevel::Warn;
    std::string s(env);
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

void log_line(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(level) <= static_cast<int>(current_log_level()))
        std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("manifest: cannot hash '" + path + "'");
    uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

namespace {

json entry_to_json(const EstimateEntry& e) {
    json je;
    je["id"] = e.id;
    je["pass"] = e.pass;
    je["tolerance"] = e.tolerance;
    if (!e.note.empty()) je["note"] = e.note;
    je["values"] = json::object();
    for (const auto& [k, v] : e.values) {
        if (std::isfinite(v))
            je["values"][k] = v;
        else
            je["values"][k] = v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
    return je;
}

// Tracks everything written so the manifest (written last) references all of
// it; paths are stored relative to the run directory so manifests are
// location-independent.
struct RunDir {
    fs::path root;
    std::vector<std::string> files;

    explicit RunDir(const std::string& out_dir) : root(out_dir) {
        if (out_dir.empty())
            throw ValidationError("pipeline: an output directory is required");
        fs::create_directories(root);
    }

    fs::path track(const std::string& rel) {
        fs::create_directories((root / rel).parent_path());
        files.push_back(rel);
        return root / rel;
    }

    void write_json(const std::string& rel, const json& j) {
        std::ofstream out(track(rel));
        out << j.dump(2) << "\n";
    }

    void write_manifest(const std::string& subcommand) {
        std::sort(files.begin(), files.end());
        json m;
        m["schema_version"] = 1;
        m["subcommand"] = subcommand;
        m["files"] = json::array();
        for (const auto& rel : files) {
            fs::path p = root / rel;
            char hash[32];
            std::snprintf(hash, sizeof(hash), "%016llx",
                          static_cast<unsigned long long>(fnv1a64_file(p.string())));
            m["files"].push_back({{"path", rel},
                                  {"bytes", static_cast<uint64_t>(fs::file_size(p))},
                                  {"fnv1a64", hash}});
        }
        std::ofstream out(root / "manifest.json");
        out << m.dump(2) << "\n";
    }
};

struct CsvLog {
    std::ofstream out;
    CsvLog(const fs::path& path, const std::string& header) : out(path) {
        out << header << "\n";
    }
    template <typename... Args>
    void row(const char* fmt, Args... args) {
        char buf[512];
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out << buf << "\n";
    }
};

json stationary_meta(const RunConfig& c, const StationarySolution& sol) {
    return json{{"kind", "stationary"}, {"dim", c.dim},      {"n", c.n},
                {"eps", sol.eps},       {"alpha", c.alpha},  {"gamma", c.gamma},
                {"hbar", sol.hbar},     {"hjb_res", sol.hjb_res},
                {"fp_res", sol.fp_res}, {"picard_iters", sol.picard_iters}};
}

json time_meta(const RunConfig& c, const TimeDependentSolution& sol) {
    return json{{"kind", "time"},   {"dim", c.dim},     {"n", c.n},
                {"eps", sol.eps},   {"alpha", c.alpha}, {"gamma", c.gamma},
                {"T", sol.T},       {"nt", sol.nt},
                {"fixed_point_residual", sol.fixed_point_residual},
                {"picard_iters", sol.picard_iters}};
}

StationarySolution load_stationary(const std::string& dir, json* meta_out) {
    std::ifstream in(fs::path(dir) / "solution_meta.json");
    if (!in)
        throw ValidationError("pipeline: no solution_meta.json in '" + dir + "'");
    json meta;
    in >> meta;
    if (meta.value("kind", "") != "stationary")
        throw ValidationError("pipeline: '" + dir + "' is not a stationary run");
    StationarySolution sol;
    sol.u = load_field((fs::path(dir) / "u.fld").string());
    sol.m = load_field((fs::path(dir) / "m.fld").string());
    sol.hbar = meta.at("hbar").get<double>();
    sol.eps = meta.at("eps").get<double>();
    if (meta_out) *meta_out = meta;
    return sol;
}

TimeDependentSolution load_time(const std::string& dir, json* meta_out) {
    std::ifstream in(fs::path(dir) / "solution_meta.json");
    if (!in)
        throw ValidationError("pipeline: no solution_meta.json in '" + dir + "'");
    json meta;
    in >> meta;
    if (meta.value("kind", "") != "time")
        throw ValidationError("pipeline: '" + dir + "' is not a time run");
    TimeDependentSolution sol;
    sol.u = load_spacetime((fs::path(dir) / "u.fld").string());
    sol.m = load_spacetime((fs::path(dir) / "m.fld").string());
    sol.T = meta.at("T").get<double>();
    sol.nt = meta.at("nt").get<int>();
    sol.dt = sol.T / sol.nt;
    sol.eps = meta.at("eps").get<double>();
    sol.uT = sol.u.back();
    sol.m0 = sol.m.front();
    if (meta_out) *meta_out = meta;
    return sol;
}

std::vector<double> effective_p_list(const RunConfig& c) {
    std::vector<double> p = c.p_list;
    if (std::none_of(p.begin(), p.end(),
                     [&](double x) { return std::abs(x - c.alpha) < 1e-12; }))
        p.push_back(c.alpha);
    return p;
}

EstimateReport stationary_report(const RunConfig& c, const StationarySolution& sol,
                                 const Hamiltonian& model) {
    EstimateReport rep;
    CouplingParams cp{c.alpha, sol.eps};
    rep.entries.push_back(stationary_first_order(sol, model, cp));
    rep.entries.push_back(stationary_second_order(sol, model, cp));
    rep.entries.push_back(min_density_monitor(sol.m, sol.eps, effective_p_list(c)));
    return rep;
}

EstimateReport time_report(const RunConfig& c, const TimeDependentSolution& sol,
                           const Hamiltonian& model) {
    EstimateReport rep;
    CouplingParams cp{c.alpha, sol.eps};
    rep.entries.push_back(time_first_order(sol, model, cp));
    rep.entries.push_back(
        heat_comparison(sol, ScalarField(sol.m0.grid, 1.0), cp, "uniform"));
    rep.entries.push_back(heat_comparison(sol, sol.m0, cp, "m0"));
    rep.entries.push_back(max_principle_check(sol));
    rep.entries.push_back(lipschitz_and_duality(sol, model, cp));
    rep.entries.push_back(
        inverse_density_norms(sol, cp, c.gamma, effective_p_list(c)));
    return rep;
}

json gates_json(const RunConfig& c, const Hamiltonian& model) {
    SampleSpec spec;
    spec.seed = c.seed;
    GrowthConstants a1 = check_A1(model, spec);
    GrowthConstants a2 = check_A2(model, spec);
    std::vector<A3Entry> a3 = check_A3(model, spec, {0.25, 0.5, 1.0});
    bool a3_pass = std::all_of(a3.begin(), a3.end(),
                               [](const A3Entry& e) { return e.pass; });
    bool a4 = gamma_gate_A4(c.gamma, c.dim);
    double abar = alpha_threshold_A5(c.dim, c.gamma);

    json j;
    j["A1"] = {{"pass", a1.pass}, {"C1", a1.C1}, {"C2", a1.C2},
               {"samples", a1.samples}, {"p_max", a1.p_max}};
    j["A2"] = {{"pass", a2.pass}, {"C1", a2.C1}, {"C2", a2.C2},
               {"samples", a2.samples}, {"p_max", a2.p_max}};
    j["A3"] = json::array();
    for (const auto& e : a3)
        j["A3"].push_back(
            {{"delta", e.delta}, {"C_delta", e.C_delta}, {"pass", e.pass}});
    j["A4"] = {{"pass", a4}, {"gamma", c.gamma}, {"dim", c.dim}};
    j["A5"] = {{"alpha", c.alpha},
               {"threshold", std::isfinite(abar) ? json(abar) : json("inf")},
               {"pass", c.alpha > abar}};
    j["stationary_hypotheses"] =
        a1.pass && a2.pass && a3_pass && (c.alpha > abar);
    j["time_hypotheses"] = a1.pass && a2.pass && a4;
    j["alpha_log_limit_flag"] = std::abs(c.alpha - 1.0) < 1e-12;
    return j;
}

void print_gates_table(const json& g) {
    auto line = [](const std::string& name, bool pass, const std::string& extra) {
        std::printf("  %-4s %-5s %s\n", name.c_str(), pass ? "pass" : "FAIL",
                    extra.c_str());
    };
    std::printf("assumption gates:\n");
    {
        char e[128];
        std::snprintf(e, sizeof(e), "C1=%.6g C2=%.6g (%d samples, |p|<=%.3g)",
                      g["A1"]["C1"].get<double>(), g["A1"]["C2"].get<double>(),
                      g["A1"]["samples"].get<int>(), g["A1"]["p_max"].get<double>());
        line("A1", g["A1"]["pass"].get<bool>(), e);
        std::snprintf(e, sizeof(e), "C1=%.6g C2=%.6g",
                      g["A2"]["C1"].get<double>(), g["A2"]["C2"].get<double>());
        line("A2", g["A2"]["pass"].get<bool>(), e);
    }
    for (const auto& a3 : g["A3"]) {
        char e[96];
        std::snprintf(e, sizeof(e), "delta=%.3g C_delta=%.6g",
                      a3["delta"].get<double>(), a3["C_delta"].get<double>());
        line("A3", a3["pass"].get<bool>(), e);
    }
    {
        char e[96];
        std::snprintf(e, sizeof(e), "gamma=%.4g d=%d",
                      g["A4"]["gamma"].get<double>(), g["A4"]["dim"].get<int>());
        line("A4", g["A4"]["pass"].get<bool>(), e);
        std::string thr = g["A5"]["threshold"].is_string()
                              ? g["A5"]["threshold"].get<std::string>()
                              : std::to_string(g["A5"]["threshold"].get<double>());
        std::snprintf(e, sizeof(e), "alpha=%.4g threshold=%s",
                      g["A5"]["alpha"].get<double>(), thr.c_str());
        line("A5", g["A5"]["pass"].get<bool>(), e);
    }
    std::printf("  stationary existence hypotheses: %s\n",
                g["stationary_hypotheses"].get<bool>() ? "satisfied" : "violated");
    std::printf("  time-dependent existence hypotheses: %s\n",
                g["time_hypotheses"].get<bool>() ? "satisfied" : "violated");
    if (g["alpha_log_limit_flag"].get<bool>())
        std::printf("  note: alpha = 1 is outside the estimate hypotheses "
                    "(logarithmic limit)\n");
}

// --- subcommand bodies ---

void save_stationary_stage(RunDir& dir, const std::string& prefix,
                           const RunConfig& c, const StationarySolution& sol) {
    save_field(dir.track(prefix + "u.fld").string(), sol.u);
    save_field(dir.track(prefix + "m.fld").string(), sol.m);
    dir.write_json(prefix + "solution_meta.json", stationary_meta(c, sol));
}

void save_time_stage(RunDir& dir, const std::string& prefix, const RunConfig& c,
                     const TimeDependentSolution& sol) {
    save_spacetime(dir.track(prefix + "u.fld").string(), sol.u);
    save_spacetime(dir.track(prefix + "m.fld").string(), sol.m);
    dir.write_json(prefix + "solution_meta.json", time_meta(c, sol));
}

StationarySolution run_stationary_stage(RunDir& dir, const std::string& prefix,
                                        const RunConfig& c, const Hamiltonian& model,
                                        double eps,
                                        const StationarySolution* warm) {
    TorusGrid grid = make_grid(c.dim, c.n);
    CsvLog csv(dir.track(prefix + "stationary_iters.csv"),
               "iter,hjb_res,fp_res,hbar,min_m");
    auto hook = [&](int it, double hjb, double fp, double hbar, double mn) {
        csv.row("%d,%.17g,%.17g,%.17g,%.17g", it, hjb, fp, hbar, mn);
    };
    CouplingParams cp{c.alpha, eps};
    StationarySolution sol =
        solve_stationary_eps(model, cp, grid, c.solver, warm, hook);
    save_stationary_stage(dir, prefix, c, sol);
    return sol;
}

TimeDependentSolution run_time_stage(RunDir& dir, const std::string& prefix,
                                     const RunConfig& c, const Hamiltonian& model,
                                     double eps,
                                     const TimeDependentSolution* warm) {
    TorusGrid grid = make_grid(c.dim, c.n);
    ScalarField uT = c.uT_spec.sample(grid);
    ScalarField m0 = c.m0_spec.sample(grid);
    double mass = integrate(m0);
    if (!(mass > 0.0))
        throw ValidationError("pipeline: m0 must have positive mass");
    for (int id = 0; id < m0.size(); ++id) m0[id] /= mass;

    CsvLog csv(dir.track(prefix + "evolve_iters.csv"),
               "iter,update_norm,min_m,max_u,lipschitz_norm");
    auto hook = [&](int it, double up, double mn, double mx, double lip) {
        csv.row("%d,%.17g,%.17g,%.17g,%.17g", it, up, mn, mx, lip);
    };
    CouplingParams cp{c.alpha, eps};
    TimeDependentSolution sol = fixed_point_time(
        model, cp, grid, uT, m0, c.T, c.resolved_nt(), c.solver, warm, hook);
    save_time_stage(dir, prefix, c, sol);
    return sol;
}

void cmd_stationary(RunDir& dir, const RunConfig& c) {
    auto model = c.make_model();
    StationarySolution sol =
        run_stationary_stage(dir, "", c, *model, c.eps, nullptr);
    EstimateReport rep = stationary_report(c, sol, *model);

    json report;
    report["subcommand"] = "stationary";
    report["summary"] = stationary_meta(c, sol);
    double abar = alpha_threshold_A5(c.dim, c.gamma);
    if (!(c.alpha > abar))
        report["flags"] = json::array({"outside certified range: alpha <= threshold"});
    report["estimates"] = json::array();
    for (const auto& e : rep.entries) report["estimates"].push_back(entry_to_json(e));
    dir.write_json("report.json", report);
    std::cout << rep.to_table();
}

void cmd_evolve(RunDir& dir, const RunConfig& c) {
    auto model = c.make_model();
    TimeDependentSolution sol = run_time_stage(dir, "", c, *model, c.eps, nullptr);
    EstimateReport rep = time_report(c, sol, *model);

    json report;
    report["subcommand"] = "evolve";
    report["summary"] = time_meta(c, sol);
    json flags = json::array();
    if (!gamma_gate_A4(c.gamma, c.dim))
        flags.push_back("outside certified range: gamma gate fails");
    if (std::abs(c.alpha - 1.0) < 1e-12)
        flags.push_back("outside estimate hypotheses: alpha = 1");
    if (!flags.empty()) report["flags"] = flags;
    report["estimates"] = json::array();
    for (const auto& e : rep.entries) report["estimates"].push_back(entry_to_json(e));
    dir.write_json("report.json", report);
    std::cout << rep.to_table();
}

// Pulls one named value out of per-stage entries to form an eps trace.
std::vector<double> trace_of(const std::vector<EstimateReport>& stages,
                             const std::string& entry_id, const std::string& key) {
    std::vector<double> t;
    for (const auto& rep : stages)
        for (const auto& e : rep.entries)
            if (e.id == entry_id && e.values.count(key))
                t.push_back(e.values.at(key));
    return t;
}

json trace_json(const std::string& name, const std::vector<double>& t) {
    return json{{"name", name}, {"trace", t}, {"factor2_pass", factor2_rule(t)}};
}

void cmd_sweep(RunDir& dir, const RunConfig& c, int /*jobs*/) {
    if (c.eps_schedule.size() < 2)
        throw ValidationError(
            "sweep-eps: coupling.eps_schedule needs at least two entries");
    auto model = c.make_model();

    json report;
    report["subcommand"] = "sweep-eps";
    report["kind"] = c.kind;
    json cauchy = json::array();
    json traces = json::array();

    if (c.kind == "stationary") {
        std::vector<EstimateReport> reps;
        std::vector<StationarySolution> sols;
        std::vector<double> min_trace, hbar_trace, lip_trace;
        std::vector<int> picard;
        for (size_t s = 0; s < c.eps_schedule.size(); ++s) {
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "stage_%03zu/", s);
            log_line(LogLevel::Info, std::string("sweep stage ") + prefix +
                                         " eps=" + std::to_string(c.eps_schedule[s]));
            const StationarySolution* warm = sols.empty() ? nullptr : &sols.back();
            sols.push_back(run_stationary_stage(dir, prefix, c, *model,
                                                c.eps_schedule[s], warm));
            reps.push_back(stationary_report(c, sols.back(), *model));
            min_trace.push_back(field_min(sols.back().m) + c.eps_schedule[s]);
            hbar_trace.push_back(sols.back().hbar);
            picard.push_back(sols.back().picard_iters);
            lip_trace.push_back(lipschitz_norm({sols.back().u}));
            if (sols.size() >= 2) {
                const auto& a = sols[sols.size() - 2];
                const auto& b = sols.back();
                cauchy.push_back({{"eps_prev", a.eps},
                                  {"eps_next", b.eps},
                                  {"cauchy_u", sup_diff(a.u, b.u)},
                                  {"cauchy_m", sup_diff(a.m, b.m)}});
            }
        }
        for (const char* q : {"Q1", "Q2", "Q3", "Q4"})
            traces.push_back(trace_json(q, trace_of(reps, "stationary_first_order", q)));
        for (const char* sq : {"S1", "S2"})
            traces.push_back(trace_json(sq, trace_of(reps, "stationary_second_order", sq)));
        traces.push_back(trace_json("min_m_plus_eps", min_trace));
        traces.push_back(trace_json("lipschitz", lip_trace));
        report["hbar_trace"] = hbar_trace;
        report["picard_counts"] = picard;
    } else {
        std::vector<EstimateReport> reps;
        std::vector<TimeDependentSolution> sols;
        std::vector<double> min_trace, lip_trace;
        std::vector<int> picard;
        double beta = c.alpha * (2.0 - c.gamma) / c.gamma;
        char beta_key[64];
        std::snprintf(beta_key, sizeof(beta_key), "sup_t_inv_lp_%.4g", beta);
        std::vector<double> inv_trace;
        for (size_t s = 0; s < c.eps_schedule.size(); ++s) {
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "stage_%03zu/", s);
            log_line(LogLevel::Info, std::string("sweep stage ") + prefix +
                                         " eps=" + std::to_string(c.eps_schedule[s]));
            const TimeDependentSolution* warm = sols.empty() ? nullptr : &sols.back();
            sols.push_back(
                run_time_stage(dir, prefix, c, *model, c.eps_schedule[s], warm));
            reps.push_back(time_report(c, sols.back(), *model));
            double mn = field_min(sols.back().m.front());
            for (const auto& mk : sols.back().m) mn = std::min(mn, field_min(mk));
            min_trace.push_back(mn + c.eps_schedule[s]);
            lip_trace.push_back(lipschitz_norm(sols.back().u));
            picard.push_back(sols.back().picard_iters);
            for (const auto& e : reps.back().entries)
                if (e.id == "inverse_density_norms" && e.values.count(beta_key))
                    inv_trace.push_back(e.values.at(beta_key));
            if (sols.size() >= 2) {
                const auto& a = sols[sols.size() - 2];
                const auto& b = sols.back();
                double cu = 0.0, cm = 0.0;
                for (int k = 0; k <= a.nt; ++k) {
                    cu = std::max(cu, sup_diff(a.u[k], b.u[k]));
                    cm = std::max(cm, sup_diff(a.m[k], b.m[k]));
                }
                cauchy.push_back({{"eps_prev", a.eps},
                                  {"eps_next", b.eps},
                                  {"cauchy_u", cu},
                                  {"cauchy_m", cm}});
            }
        }
        for (const char* t : {"T1", "T2", "T3", "T4"})
            traces.push_back(trace_json(t, trace_of(reps, "time_first_order", t)));
        traces.push_back(trace_json("min_m_plus_eps", min_trace));
        traces.push_back(trace_json("lipschitz", lip_trace));
        if (!inv_trace.empty())
            traces.push_back(trace_json(std::string("inv_density_") + beta_key,
                                        inv_trace));
        report["picard_counts"] = picard;
    }
    report["cauchy"] = cauchy;
    report["traces"] = traces;
    dir.write_json("report.json", report);
}

void cmd_verify(RunDir& dir, const RunConfig& c) {
    if (c.input_dir.empty())
        throw ValidationError("verify: config must set verify.input_dir");
    auto model = c.make_model();
    json meta;
    EstimateReport rep;
    if (c.kind == "stationary") {
        StationarySolution sol = load_stationary(c.input_dir, &meta);
        rep = stationary_report(c, sol, *model);
    } else {
        TimeDependentSolution sol = load_time(c.input_dir, &meta);
        rep = time_report(c, sol, *model);
    }
    json report;
    report["subcommand"] = "verify";
    report["input_meta"] = meta;
    report["estimates"] = json::array();
    for (const auto& e : rep.entries) report["estimates"].push_back(entry_to_json(e));
    dir.write_json("report.json", report);
    std::cout << rep.to_table();
}

void cmd_probe(RunDir& dir, const RunConfig& c) {
    if (c.input_dir.empty())
        throw ValidationError("probe: config must set verify.input_dir");
    auto model = c.make_model();
    TimeDependentSolution sol = load_time(c.input_dir, nullptr);
    double width = c.probe_moll_width > 0.0 ? c.probe_moll_width
                                            : 4.0 * sol.uT.grid.h;
    AdjointField adj = solve_adjoint(sol, *model, c.probe_x0, c.probe_tau, width);
    save_spacetime(dir.track("rho.fld").string(), adj.rho);

    CouplingParams cp{c.alpha, sol.eps};
    EstimateReport rep;
    rep.entries.push_back(
        representation_check(sol, adj, *model, cp, c.probe_tol_constant));
    SampleSpec sspec;
    sspec.seed = c.seed;
    GrowthConstants a2 = check_A2(*model, sspec);
    double p_exp = c.dim + 1.0;
    double q_exp = (c.dim + 1.0) / c.dim;
    rep.entries.push_back(value_lower_bound(sol, adj, cp, a2.C1, p_exp, q_exp));
    for (double q : c.probe_q)
        rep.entries.push_back(
            adjoint_norm_report(sol, adj, *model, cp, c.probe_nu, q, p_exp));

    json report;
    report["subcommand"] = "probe";
    report["x0"] = {c.probe_x0[0], c.probe_x0[1]};
    report["tau"] = c.probe_tau;
    report["moll_width"] = width;
    report["estimates"] = json::array();
    for (const auto& e : rep.entries) report["estimates"].push_back(entry_to_json(e));
    dir.write_json("report.json", report);
    std::cout << rep.to_table();
}

void cmd_simulate(RunDir& dir, const RunConfig& c, int jobs) {
    if (c.input_dir.empty())
        throw ValidationError("simulate: config must set verify.input_dir");
    auto model = c.make_model();
    TimeDependentSolution sol = load_time(c.input_dir, nullptr);
    const TorusGrid& grid = sol.uT.grid;
    double bw = c.bandwidth > 0.0 ? c.bandwidth : 2.0 * grid.h;

    int mid = sol.nt / 2;
    ParticleEnsemble ens = simulate_ensemble(sol, *model, c.particles, c.seed,
                                             {0, mid, sol.nt}, c.clip_speed, jobs);
    ScalarField kde = empirical_density(ens.snapshots[1].pos, grid, bw);
    save_field(dir.track("empirical_density.fld").string(), kde);
    double l1 = 0.0;
    for (int id = 0; id < kde.size(); ++id)
        l1 += std::abs(kde[id] - sol.m[mid][id]);
    l1 *= grid.dim == 1 ? grid.h : grid.h * grid.h;

    CouplingParams cp{c.alpha, sol.eps};
    McCost cost = empirical_cost(sol, *model, cp, c.sim_x0, c.sim_t, c.particles,
                                 c.seed, c.clip_speed, jobs);
    int k0 = static_cast<int>(std::lround(c.sim_t / sol.dt));
    k0 = std::clamp(k0, 0, sol.nt);
    double u_val = interp_scalar(sol.u[k0], c.sim_x0);
    double tol = 3.0 * cost.std_error +
                 10.0 * (grid.h * grid.h + sol.dt);

    json report;
    report["subcommand"] = "simulate";
    report["particles"] = c.particles;
    report["seed"] = c.seed;
    report["bandwidth"] = bw;
    report["clip_events"] = ens.clip_events + cost.clip_events;
    report["density_l1_at_mid"] = l1;
    report["cost"] = {{"mc_mean", cost.mean},
                      {"std_error", cost.std_error},
                      {"u_value", u_val},
                      {"gap", std::abs(cost.mean - u_val)},
                      {"tolerance", tol},
                      {"pass", std::abs(cost.mean - u_val) <= tol}};
    dir.write_json("report.json", report);
    std::printf("density L1 at T/2: %.6g\n", l1);
    std::printf("MC cost %.6g +- %.3g vs u(x0,t) = %.6g (%s)\n", cost.mean,
                cost.std_error, u_val,
                std::abs(cost.mean - u_val) <= tol ? "pass" : "FAIL");
}

void cmd_gates(RunDir& dir, const RunConfig& c) {
    auto model = c.make_model();
    json g = gates_json(c, *model);
    json report;
    report["subcommand"] = "gates";
    report["gates"] = g;
    dir.write_json("report.json", report);
    print_gates_table(g);
}

}  // namespace

void run_pipeline(const std::string& subcommand, const std::string& config_path,
                  const std::string& out_dir, int jobs, long seed_override) {
    RunConfig c = load_config(config_path);
    if (seed_override >= 0) c.seed = static_cast<unsigned long>(seed_override);

    RunDir dir(out_dir);
    dir.write_json("resolved_config.json", c.to_json());
    log_line(LogLevel::Info, "running '" + subcommand + "' into " + out_dir);

    if (subcommand == "stationary") {
        if (c.kind != "stationary")
            throw ValidationError("stationary: config kind must be 'stationary'");
        cmd_stationary(dir, c);
    } else if (subcommand == "evolve") {
        if (c.kind != "time")
            throw ValidationError("evolve: config kind must be 'time'");
        cmd_evolve(dir, c);
    } else if (subcommand == "sweep-eps") {
        cmd_sweep(dir, c, jobs);
    } else if (subcommand == "verify") {
        cmd_verify(dir, c);
    } else if (subcommand == "probe") {
        cmd_probe(dir, c);
    } else if (subcommand == "simulate") {
        cmd_simulate(dir, c, jobs);
    } else if (subcommand == "gates") {
        cmd_gates(dir, c);
    } else {
        throw ValidationError("unknown subcommand '" + subcommand + "'");
    }
    dir.write_manifest(subcommand);
}

}  // namespace mfg
