#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "flock/config.hpp"

namespace flock::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitBoundFail = 4;

inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json report_skeleton(const char* command, const RunConfig& cfg);

/// Closed-form quantities, gates, horizons, and probability bounds.
int cmd_theory(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// One simulation run; writes trajectory.csv and prints the alignment step.
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                 std::ostream& log);

/// Monte Carlo estimate against the theoretical bound; exit 4 on FAIL.
int cmd_montecarlo(const RunConfig& cfg, const std::filesystem::path& out_dir,
                   std::ostream& log);

/// Sample statistics of the smoothed noise process against its theory.
int cmd_noise_check(const RunConfig& cfg, const std::filesystem::path& out_dir,
                    std::ostream& log);

}  // namespace flock::cli
