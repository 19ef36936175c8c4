#include "config.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>

namespace mfg {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    if (!j.is_object())
        throw ValidationError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " +
                                  where);
}

double get_num(const json& j, const std::string& key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number())
        throw ValidationError("config: '" + key + "' must be a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, int dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_integer())
        throw ValidationError("config: '" + key + "' must be an integer");
    return j[key].get<int>();
}

Pt get_point(const json& j, const std::string& key, Pt dflt,
             const std::string& where) {
    if (!j.contains(key)) return dflt;
    const json& v = j[key];
    if (!v.is_array() || v.empty() || v.size() > 2)
        throw ValidationError("config: '" + key + "' in " + where +
                              " must be a 1- or 2-element array");
    Pt out{0.0, 0.0};
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get<double>();
    return out;
}

std::vector<double> get_list(const json& j, const std::string& key,
                             std::vector<double> dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_array())
        throw ValidationError("config: '" + key + "' must be an array");
    return j[key].get<std::vector<double>>();
}

}  // namespace

// Field-spec syntax: {"const": c} and/or {"fourier": [[k, amp, phase], ...]}
// with k either an integer (d=1) or a 2-element integer array.  A bare number
// is shorthand for a constant field.
json field_spec_to_json(const FieldSpec& fs) {
    json j;
    j["const"] = fs.constant;
    j["fourier"] = json::array();
    for (const auto& m : fs.modes)
        j["fourier"].push_back(json::array(
            {json::array({m.k[0], m.k[1]}), m.amp, m.phase}));
    return j;
}

FieldSpec field_spec_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return FieldSpec::constant_spec(j.get<double>());
    reject_unknown(j, {"const", "fourier"}, where);
    FieldSpec fs;
    fs.constant = get_num(j, "const", 0.0);
    if (j.contains("fourier")) {
        if (!j["fourier"].is_array())
            throw ValidationError("config: 'fourier' in " + where +
                                  " must be an array of [k, amp, phase] rows");
        for (const auto& jm : j["fourier"]) {
            if (!jm.is_array() || jm.size() < 2 || jm.size() > 3)
                throw ValidationError("config: fourier rows in " + where +
                                      " must be [k, amp] or [k, amp, phase]");
            FieldSpec::Mode m;
            const json& k = jm[0];
            if (k.is_number_integer()) {
                m.k[0] = k.get<int>();
            } else if (k.is_array() && !k.empty() && k.size() <= 2) {
                for (size_t i = 0; i < k.size(); ++i) m.k[i] = k[i].get<int>();
            } else {
                throw ValidationError("config: fourier wave vector in " + where +
                                      " must be an integer or 2-element array");
            }
            m.amp = jm[1].get<double>();
            m.phase = jm.size() == 3 ? jm[2].get<double>() : 0.0;
            fs.modes.push_back(m);
        }
    }
    return fs;
}

int RunConfig::resolved_nt() const {
    if (nt > 0) return nt;
    return static_cast<int>(std::ceil(T * n));
}

std::shared_ptr<PowerFamilyHamiltonian> RunConfig::make_model() const {
    return std::make_shared<PowerFamilyHamiltonian>(dim, a_spec, V_spec, gamma);
}

RunConfig parse_config(const json& j) {
    reject_unknown(j,
                   {"schema_version", "kind", "grid", "model", "coupling", "data",
                    "solver", "verify", "probe", "simulate", "seed"},
                   "top level");
    RunConfig c;
    c.schema_version = get_int(j, "schema_version", 1);
    if (c.schema_version != 1)
        throw ValidationError("config: unsupported schema_version " +
                              std::to_string(c.schema_version));
    if (j.contains("kind")) c.kind = j["kind"].get<std::string>();
    if (c.kind != "stationary" && c.kind != "time")
        throw ValidationError("config: kind must be 'stationary' or 'time'");

    if (j.contains("grid")) {
        const json& g = j["grid"];
        reject_unknown(g, {"dim", "n"}, "grid");
        c.dim = get_int(g, "dim", c.dim);
        c.n = get_int(g, "n", c.n);
    }
    if (c.dim != 1 && c.dim != 2)
        throw ValidationError("config: grid.dim must be 1 or 2");
    if (c.n < 8 || c.n % 2 != 0)
        throw ValidationError("config: grid.n must be an even integer >= 8");

    if (j.contains("model")) {
        const json& m = j["model"];
        reject_unknown(m, {"gamma", "a", "V"}, "model");
        c.gamma = get_num(m, "gamma", c.gamma);
        if (m.contains("a")) c.a_spec = field_spec_from_json(m["a"], "model.a");
        if (m.contains("V")) c.V_spec = field_spec_from_json(m["V"], "model.V");
    }
    if (!(c.gamma > 1.0))
        throw ValidationError("config: model.gamma must be > 1");

    if (j.contains("coupling")) {
        const json& cp = j["coupling"];
        reject_unknown(cp, {"alpha", "eps", "eps_schedule"}, "coupling");
        c.alpha = get_num(cp, "alpha", c.alpha);
        c.eps = get_num(cp, "eps", c.eps);
        c.eps_schedule = get_list(cp, "eps_schedule", {});
    }
    if (!(c.alpha > 0.0))
        throw ValidationError("config: coupling.alpha must be > 0");
    if (!(c.eps >= 0.0))
        throw ValidationError("config: coupling.eps must be >= 0");
    for (size_t k = 1; k < c.eps_schedule.size(); ++k)
        if (!(c.eps_schedule[k] < c.eps_schedule[k - 1]))
            throw ValidationError(
                "config: coupling.eps_schedule must strictly decrease");

    if (j.contains("data")) {
        const json& d = j["data"];
        reject_unknown(d, {"T", "nt", "uT", "m0"}, "data");
        c.T = get_num(d, "T", c.T);
        c.nt = get_int(d, "nt", c.nt);
        if (d.contains("uT")) c.uT_spec = field_spec_from_json(d["uT"], "data.uT");
        if (d.contains("m0")) c.m0_spec = field_spec_from_json(d["m0"], "data.m0");
    }
    if (!(c.T > 0.0)) throw ValidationError("config: data.T must be > 0");
    if (c.nt < 0) throw ValidationError("config: data.nt must be >= 0");

    if (j.contains("solver")) {
        const json& s = j["solver"];
        reject_unknown(s,
                       {"theta", "picard_tol", "max_iters", "linear_tol",
                        "upwinding", "hjb_tol", "hjb_max_iters", "pseudo_dt"},
                       "solver");
        c.solver.theta = get_num(s, "theta", c.solver.theta);
        c.solver.picard_tol = get_num(s, "picard_tol", c.solver.picard_tol);
        c.solver.max_iters = get_int(s, "max_iters", c.solver.max_iters);
        c.solver.linear_tol = get_num(s, "linear_tol", c.solver.linear_tol);
        if (s.contains("upwinding")) c.solver.upwinding = s["upwinding"].get<bool>();
        c.solver.hjb_tol = get_num(s, "hjb_tol", c.solver.hjb_tol);
        c.solver.hjb_max_iters = get_int(s, "hjb_max_iters", c.solver.hjb_max_iters);
        c.solver.pseudo_dt = get_num(s, "pseudo_dt", c.solver.pseudo_dt);
    }
    c.solver.validate();

    if (j.contains("verify")) {
        const json& v = j["verify"];
        reject_unknown(v, {"p_list", "input_dir"}, "verify");
        c.p_list = get_list(v, "p_list", {});
        if (v.contains("input_dir")) c.input_dir = v["input_dir"].get<std::string>();
    }

    if (j.contains("probe")) {
        const json& p = j["probe"];
        reject_unknown(p, {"x0", "tau", "moll_width", "nu", "q", "tol_constant"},
                       "probe");
        c.probe_x0 = get_point(p, "x0", c.probe_x0, "probe");
        c.probe_tau = get_num(p, "tau", c.probe_tau);
        c.probe_moll_width = get_num(p, "moll_width", c.probe_moll_width);
        c.probe_nu = get_list(p, "nu", c.probe_nu);
        c.probe_q = get_list(p, "q", c.probe_q);
        c.probe_tol_constant = get_num(p, "tol_constant", c.probe_tol_constant);
    }
    for (double nu : c.probe_nu)
        if (!(nu > 0.0 && nu < 1.0))
            throw ValidationError("config: probe.nu values must lie in (0,1)");
    for (double q : c.probe_q)
        if (!(q > 1.0))
            throw ValidationError("config: probe.q values must be > 1");

    if (j.contains("simulate")) {
        const json& s = j["simulate"];
        reject_unknown(s, {"particles", "bandwidth", "x0", "t", "clip_speed"},
                       "simulate");
        c.particles = get_int(s, "particles", c.particles);
        c.bandwidth = get_num(s, "bandwidth", c.bandwidth);
        c.sim_x0 = get_point(s, "x0", c.sim_x0, "simulate");
        c.sim_t = get_num(s, "t", c.sim_t);
        c.clip_speed = get_num(s, "clip_speed", c.clip_speed);
    }
    if (c.particles < 1)
        throw ValidationError("config: simulate.particles must be >= 1");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ValidationError("config: seed must be an integer");
        c.seed = j["seed"].get<unsigned long>();
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

json RunConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["kind"] = kind;
    j["grid"] = {{"dim", dim}, {"n", n}};
    j["model"] = {{"gamma", gamma},
                  {"a", field_spec_to_json(a_spec)},
                  {"V", field_spec_to_json(V_spec)}};
    j["coupling"] = {{"alpha", alpha}, {"eps", eps}, {"eps_schedule", eps_schedule}};
    j["data"] = {{"T", T},
                 {"nt", nt},
                 {"uT", field_spec_to_json(uT_spec)},
                 {"m0", field_spec_to_json(m0_spec)}};
    j["solver"] = {{"theta", solver.theta},
                   {"picard_tol", solver.picard_tol},
                   {"max_iters", solver.max_iters},
                   {"linear_tol", solver.linear_tol},
                   {"upwinding", solver.upwinding},
                   {"hjb_tol", solver.hjb_tol},
                   {"hjb_max_iters", solver.hjb_max_iters},
                   {"pseudo_dt", solver.pseudo_dt}};
    j["verify"] = {{"p_list", p_list}, {"input_dir", input_dir}};
    j["probe"] = {{"x0", {probe_x0[0], probe_x0[1]}},
                  {"tau", probe_tau},
                  {"moll_width", probe_moll_width},
                  {"nu", probe_nu},
                  {"q", probe_q},
                  {"tol_constant", probe_tol_constant}};
    j["simulate"] = {{"particles", particles},
                     {"bandwidth", bandwidth},
                     {"x0", {sim_x0[0], sim_x0[1]}},
                     {"t", sim_t},
                     {"clip_speed", clip_speed}};
    j["seed"] = seed;
    return j;
}

}  // namespace mfg
