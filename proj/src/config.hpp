#ifndef MFG_CONFIG_HPP
#define MFG_CONFIG_HPP

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "coupling.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "stationary.hpp"

namespace mfg {

// Versioned JSON run configuration.  Unknown keys are validation errors and
// every applied default is materialized, so the resolved config re-runs
// bitwise-identically.
struct RunConfig {
    int schema_version = 1;
    std::string kind = "stationary";  // "stationary" | "time"

    int dim = 1;
    int n = 64;

    double gamma = 1.2;
    FieldSpec a_spec = FieldSpec::constant_spec(1.0);
    FieldSpec V_spec = FieldSpec::constant_spec(0.0);

    double alpha = 1.0;
    double eps = 1e-2;
    std::vector<double> eps_schedule;  // used by sweep-eps

    // Time-dependent data.
    double T = 1.0;
    int nt = 0;  // 0 -> ceil(T/h), dt ~ h
    FieldSpec uT_spec = FieldSpec::constant_spec(0.0);
    FieldSpec m0_spec = FieldSpec::constant_spec(1.0);

    SolverConfig solver;

    // verify
    std::vector<double> p_list;
    std::string input_dir;  // dumps consumed by verify/probe/simulate

    // probe
    Pt probe_x0{0.5, 0.5};
    double probe_tau = 0.0;
    double probe_moll_width = 0.0;  // 0 -> 4h
    std::vector<double> probe_nu{0.5};
    std::vector<double> probe_q{2.0};
    double probe_tol_constant = 10.0;

    // simulate
    int particles = 10000;
    double bandwidth = 0.0;  // 0 -> 2h
    Pt sim_x0{0.5, 0.5};
    double sim_t = 0.0;
    double clip_speed = 1e3;

    unsigned long seed = 12345;

    int resolved_nt() const;
    double grid_h() const { return 1.0 / n; }
    CouplingParams coupling() const { return {alpha, eps}; }
    std::shared_ptr<PowerFamilyHamiltonian> make_model() const;

    nlohmann::json to_json() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json field_spec_to_json(const FieldSpec& fs);
FieldSpec field_spec_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace mfg

#endif
