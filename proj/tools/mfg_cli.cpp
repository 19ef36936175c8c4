// Command-line front end; links only the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mfg.h"

int main(int argc, char** argv) {
    CLI::App app{"Mean-field-game solver and verification toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    long seed = -1;

    const char* names[] = {"stationary", "evolve", "sweep-eps", "verify",
                           "probe",      "simulate", "gates"};
    const char* descs[] = {
        "solve the regularized stationary system",
        "solve the time-dependent system",
        "run the epsilon continuation schedule",
        "recompute estimate reports from field dumps",
        "adjoint probe and representation-formula checks",
        "Monte-Carlo validation of the control interpretation",
        "assumption gate report for the configured model"};
    for (int i = 0; i < 7; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--jobs", jobs, "worker threads for particle sweeps");
        sub->add_option("--seed", seed, "override the config seed");
    }

    CLI11_PARSE(app, argc, argv);
    std::string subcommand = app.get_subcommands().front()->get_name();

    mfg_context* ctx = mfg_context_create();
    if (!ctx) {
        std::fprintf(stderr, "error code=1 reason=\"context allocation failed\"\n");
        return 1;
    }
    int rc = mfg_run(ctx, subcommand.c_str(), config_path.c_str(), out_dir.c_str(),
                     jobs, seed);
    if (rc != 0)
        std::fprintf(stderr, "error code=%d reason=\"%s\"\n", rc,
                     mfg_error_message(ctx));
    mfg_context_destroy(ctx);
    return rc;
}
