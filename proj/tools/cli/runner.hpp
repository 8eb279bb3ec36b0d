#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace stochdp::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kConditionFailed = 2, kNumericalError = 3 };

struct RunRequest {
    std::string command = "solve";  // solve | check | counterexample | oracle
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::filesystem::path> out;
};

struct RunResult {
    int exit_code = kOk;
    std::string status;
    std::string message;
    std::filesystem::path out_dir;
    nlohmann::json report;
    std::map<std::string, std::string> files;  // file name -> content, as written
};

/// Loads the configuration, dispatches on the model and writes every artifact into the
/// output directory once at the end. Never throws; errors map onto the exit codes.
RunResult run(const RunRequest& request);

}  // namespace stochdp::cli
