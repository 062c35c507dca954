#pragma once

#include <filesystem>

#include "elastinv/config.hpp"

namespace elastinv {

enum ExitCode : int {
    exit_ok = 0,
    exit_error = 1,
    exit_threshold = 2,  ///< gradcheck relative error above the threshold
    exit_stalled = 3,    ///< inversion stopped without decrease
};

/// Each command writes into cfg.output_dir, finishing with manifest.json.
/// Configuration and solver failures are thrown; the return value reports
/// the outcome of a run that completed.
int cmd_forward(const RunConfig& cfg);
int cmd_synthesize(const RunConfig& cfg);
int cmd_invert(const RunConfig& cfg, const std::filesystem::path& delta_path);
int cmd_gradcheck(const RunConfig& cfg, double threshold = 0.05);
int cmd_profile(const RunConfig& cfg, const std::filesystem::path& delta_path);

}  // namespace elastinv
