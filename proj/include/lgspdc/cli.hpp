#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgspdc/config.hpp"

namespace lgspdc {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kExitSuccess = 0,
    kExitConfig = 1,
    kExitInfeasible = 2,
    kExitAccuracy = 3,
};

/// Result of one command: CSV rows already formatted, a summary for the
/// manifest and the exit status the command asks for.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json summary = nlohmann::json::object();
    int exit_code = kExitSuccess;
};

/// %.17g
std::string format_number(double x);
void write_csv(std::ostream& out, const Table& table);

Table cmd_amplitude(const RunConfig& config);
Table cmd_spiral_bandwidth(const RunConfig& config);
Table cmd_schmidt(const RunConfig& config);
Table cmd_purity_sweep(const RunConfig& config);
/// Writes the emitted pump block to `pump_yaml`.
Table cmd_engineer(const RunConfig& config, std::string& pump_yaml);
Table cmd_validate_oracle(const RunConfig& config);
Table cmd_gouy_check(const RunConfig& config);

/// Full command-line entry point. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lgspdc
