#pragma once

#include <filesystem>

#include "config.hpp"
#include "report.hpp"

namespace hls::cli {

enum ExitCode { kPass = 0, kFail = 1, kUsage = 2, kNumerical = 3 };

/// Runs one command; field outputs (if any) go to out_dir.
Report run(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// hlsinv entry point: parses flags, runs, writes report.csv and summary.txt
/// and returns the exit code.
int cli_main(int argc, char** argv);

}  // namespace hls::cli
