#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace peco::cli {

/// One resolved command-line invocation; `run` dispatches it.
struct Invocation {
    std::string subcommand; // gen-trace | pretrain | train | evaluate | compare | gradcheck
    std::filesystem::path config_path; // optional: empty means built-in defaults
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;  // overrides every configured seed stream
    std::optional<std::string> mode;    // overrides train.mode
    std::filesystem::path checkpoint;       // evaluate: agent checkpoint
    std::filesystem::path forecaster_path;  // evaluate (hybrid): forecaster checkpoint
    std::filesystem::path baseline_eval;    // compare inputs
    std::filesystem::path hybrid_eval;
};

/// Executes the invocation. Writes all artifacts plus manifest.json under
/// out_dir; on failure prints a machine-readable error JSON to stderr and
/// returns nonzero.
int run(const Invocation& inv);

/// argv-level entry point (flag parsing + run).
int main_entry(int argc, char** argv);

} // namespace peco::cli
