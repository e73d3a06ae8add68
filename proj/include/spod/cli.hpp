#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spod/metrics.hpp"
#include "spod/solvers.hpp"

namespace spod::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitDiverged = 4,
};

/// Environment variable naming the default output root.
inline constexpr const char* kOutputDirEnv = "SPOD_OUTPUT_DIR";

/// Where decompose reads its data from.
struct RunInputs {
    std::string benchmark;
    std::filesystem::path q_path;
    std::vector<std::filesystem::path> shift_paths;
    std::optional<std::filesystem::path> times_path;
    double x_min = 0.0;
    double dx = 0.0;
};

/// Everything needed to replay a decompose run.
struct RunManifest {
    RunInputs inputs;
    SolverConfig config;
    /// Applied to the preset mu0 when config.mu is unset.
    double mu_scale = 1.0;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

std::string manifest_to_json(const RunManifest& manifest);
/// Throws IoError on malformed JSON, DomainError on invalid field values.
RunManifest manifest_from_json(std::string_view text);

/// Fills inputs from a directory written by `generate` (Q.matrix, shift_k.txt,
/// times.txt, meta.txt).
RunInputs inputs_from_directory(const std::filesystem::path& dir);

/// Loads Q (binary, or CSV by extension), shifts and times into a problem.
SpodProblem load_problem(const RunInputs& inputs, bool noise_enabled);

/// Reads result.json from a decompose output directory.
RunReport read_run_report(const std::filesystem::path& run_dir);

/// $SPOD_OUTPUT_DIR, or "spod_output" when unset.
std::filesystem::path default_output_root();

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spod::cli
