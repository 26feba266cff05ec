#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace bprel::cli {

enum class LogLevel { error, info, debug, trace };

/// Reads BP7_LOG_LEVEL; unset means info. Throws ConfigError on other
/// values.
LogLevel log_level_from_env();

struct RunArgs {
    std::string scenario_file;
    std::string builtin;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "text";
    bool dump_state = false;
    bool check_invariants = false;
};

void run_command(const RunArgs& args, LogLevel level, std::ostream& out, std::ostream& err);

/// `input` is hex text, or `@path` naming a file holding hex text or raw
/// bytes.
void decode_command(const std::string& kind, const std::string& input, const std::optional<std::string>& receiver,
                    std::ostream& out);

/// Prints the hex encoding built from space-separated key=value fields.
void encode_command(const std::string& kind, const std::string& fields, std::ostream& out);

/// Summarises an event log file and checks the custody chain. Returns
/// false when the check finds violations.
bool report_command(const std::string& log_path, const std::string& format, std::ostream& out);

} // namespace bprel::cli
