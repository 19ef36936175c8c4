#ifndef MFG_C_API_H
#define MFG_C_API_H

/* C API for the mean-field-game solver library.  All workflows run through
 * mfg_run; errors are reported as exit-code-style integers with a retrievable
 * message on the context handle.
 *
 * Return codes: 0 success, 2 validation error, 3 solver non-convergence,
 * 4 singularity (nonpositive regularized density), 1 other numeric failure.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mfg_context mfg_context;

mfg_context* mfg_context_create(void);
void mfg_context_destroy(mfg_context* ctx);

/* Last error message for this context; empty string if none. */
const char* mfg_error_message(const mfg_context* ctx);

const char* mfg_version(void);

/* Run one subcommand (stationary | evolve | sweep-eps | verify | probe |
 * simulate | gates) with a JSON config, writing all artifacts into out_dir.
 * jobs <= 0 means single-threaded; seed < 0 keeps the config's seed. */
int mfg_run(mfg_context* ctx, const char* subcommand, const char* config_path,
            const char* out_dir, int jobs, long seed);

/* Pure helpers exposed for convenience. */
double mfg_alpha_threshold(int dim, double gamma);
int mfg_gamma_gate(double gamma, int dim);

#ifdef __cplusplus
}
#endif

#endif
