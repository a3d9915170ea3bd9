#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace filamenta {

inline constexpr const char* kVersion = "0.3.0";

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,    ///< unexpected runtime failure
    kExitInvalid = 2,    ///< bad configuration or input data
    kExitNoAccepted = 3, ///< ABC finished without accepting a draw
    kExitChecksFailed = 4, ///< reproduction ran but some checks failed
};

struct CommandOptions {
    std::string command;
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::string outDir = ".";
    unsigned workers = 1;

    // Command-line overrides of config entries.
    std::optional<std::string> points;
    std::optional<std::string> method;
    std::optional<std::string> table;
    std::optional<double> scale;
};

std::vector<std::string> commandNames();

/// Runs one command, writing results, manifest.json and timing.json under
/// outDir. Errors are reported on `err` and mapped to an exit code. Every
/// file except timing.json depends only on the configuration and seed.
int runCommand(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

} // namespace filamenta
