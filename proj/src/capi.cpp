#include "mfg.h"

#include <exception>
#include <string>

#include "errors.hpp"
#include "hamiltonian.hpp"
#include "pipeline.hpp"

struct mfg_context {
    std::string last_error;
};

extern "C" {

mfg_context* mfg_context_create(void) { return new (std::nothrow) mfg_context(); }

void mfg_context_destroy(mfg_context* ctx) { delete ctx; }

const char* mfg_error_message(const mfg_context* ctx) {
    return ctx ? ctx->last_error.c_str() : "";
}

const char* mfg_version(void) { return "1.0.0"; }

int mfg_run(mfg_context* ctx, const char* subcommand, const char* config_path,
            const char* out_dir, int jobs, long seed) {
    if (!ctx) return 2;
    ctx->last_error.clear();
    if (!subcommand || !config_path || !out_dir) {
        ctx->last_error = "validation: subcommand, config path and output "
                          "directory are required";
        return 2;
    }
    try {
        mfg::run_pipeline(subcommand, config_path, out_dir, jobs, seed);
        return 0;
    } catch (const mfg::ValidationError& e) {
        ctx->last_error = std::string("validation: ") + e.what();
        return 2;
    } catch (const mfg::ConvergenceError& e) {
        ctx->last_error = std::string("convergence: ") + e.what();
        return 3;
    } catch (const mfg::SingularityError& e) {
        ctx->last_error = std::string("singularity: ") + e.what();
        return 4;
    } catch (const std::exception& e) {
        ctx->last_error = std::string("numeric: ") + e.what();
        return 1;
    }
}

double mfg_alpha_threshold(int dim, double gamma) {
    try {
        return mfg::alpha_threshold_A5(dim, gamma);
    } catch (const std::exception&) {
        return -1.0;
    }
}

int mfg_gamma_gate(double gamma, int dim) {
    return mfg::gamma_gate_A4(gamma, dim) ? 1 : 0;
}

}  // extern "C"
