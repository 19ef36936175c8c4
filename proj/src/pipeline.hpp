#ifndef MFG_PIPELINE_HPP
#define MFG_PIPELINE_HPP

#include <string>

#include "config.hpp"

namespace mfg {

// Log levels: error < warn < info < debug; selected by MFG_LOG_LEVEL.
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };
LogLevel current_log_level();
void log_line(LogLevel level, const std::string& msg);

uint64_t fnv1a64_file(const std::string& path);

// Executes one subcommand end to end and writes all artifacts into out_dir
// (resolved_config.json, CSV logs, .fld dumps, report.json, and finally
// manifest.json as the completion marker).  Throws the module error types;
// the C API maps them to exit codes.
void run_pipeline(const std::string& subcommand, const std::string& config_path,
                  const std::string& out_dir, int jobs, long seed_override);

}  // namespace mfg

#endif
