#pragma once

#include <cstddef>
#include <vector>

#include "edgerent/core.hpp"

namespace edgerent {

/// @brief Result of an offline schedule search.
struct OfflineResult {
    HostingSchedule schedule;
    CostBreakdown cost;
};

/// @brief A maximal stretch of consecutive slots held at one level.
struct HostingRun {
    std::size_t start = 0;  ///< 1-based slot index of the first slot in the run.
    std::size_t length = 0;
    int level = 0;
    int entered_from = 0;  ///< Level held just before the run (0 before slot 1).
};

/// @brief Computes a minimum-cost hosting schedule with full hindsight.
///
/// Dynamic program over (slot, level) pairs: the state before slot 1 is
/// level 0, moving from fraction a to fraction b at a slot boundary costs
/// fetch_cost * (b - a)^+, and each slot pays rent plus deterministic
/// forwarding for the level held during it. Ties are broken toward the
/// lower level index, which also means fetches happen as late as possible
/// among equal-cost schedules.
///
/// @throws ConfigError on an empty or otherwise invalid instance.
[[nodiscard]] OfflineResult optimal_schedule(const Instance& instance,
                                             const CostParams& params);

/// @brief Exhaustively enumerates all level assignments and returns the best.
///
/// Oracle for optimal_schedule on tiny inputs; costs match it exactly.
///
/// @throws ConfigError if levels^horizon exceeds 2e6 assignments.
[[nodiscard]] OfflineResult brute_force_schedule(const Instance& instance,
                                                 const CostParams& params);

/// @brief Splits a schedule into maximal constant-level runs.
[[nodiscard]] std::vector<HostingRun> hosting_runs(const HostingSchedule& schedule);

/// @brief Length of the shortest maximal run spent above level 0.
///
/// Returns horizon + 1 when the schedule never hosts anything.
[[nodiscard]] std::size_t min_hosting_run(const HostingSchedule& schedule);

}  // namespace edgerent
