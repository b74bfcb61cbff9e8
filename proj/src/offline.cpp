#include "edgerent/offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgerent {

namespace {

constexpr double kBruteForceLimit = 2e6;

void require_valid(const Instance& instance, const CostParams& params) {
    const auto violations = validate(instance, params);
    if (has_errors(violations)) {
        throw ConfigError(describe(violations));
    }
}

/// Per-slot servable demand and overflow under the capacity cap.
struct SlotDemand {
    std::vector<double> servable;
    std::vector<double> overflow;
};

SlotDemand split_demand(const Instance& instance, const CostParams& params) {
    const std::size_t horizon = instance.horizon();
    SlotDemand demand;
    demand.servable.resize(horizon);
    demand.overflow.resize(horizon);
    for (std::size_t i = 0; i < horizon; ++i) {
        const double x = static_cast<double>(instance.arrivals[i]);
        const double servable =
            std::isfinite(params.capacity) ? std::min(x, params.capacity) : x;
        demand.servable[i] = servable;
        demand.overflow[i] = x - servable;
    }
    return demand;
}

}  // namespace

OfflineResult optimal_schedule(const Instance& instance, const CostParams& params) {
    require_valid(instance, params);
    const std::size_t horizon = instance.horizon();
    const std::size_t level_count = params.levels.size();
    const SlotDemand demand = split_demand(instance, params);

    const auto slot_cost = [&](std::size_t level, std::size_t slot) {
        return params.levels.fraction(level) * instance.rents[slot] +
               params.levels.forward_cost(level) * demand.servable[slot] +
               demand.overflow[slot];
    };

    // dp[j] = best cost of slots 1..t with slot t held at level j; the
    // state before slot 1 is level 0 (nothing cached), so row 1 charges the
    // entry fetch.
    std::vector<double> dp(level_count);
    std::vector<double> next(level_count);
    std::vector<std::vector<int>> parent(horizon, std::vector<int>(level_count, -1));
    for (std::size_t j = 0; j < level_count; ++j) {
        dp[j] = params.fetch_cost * params.levels.fraction(j) + slot_cost(j, 0);
    }

    for (std::size_t t = 1; t < horizon; ++t) {
        for (std::size_t j = 0; j < level_count; ++j) {
            double best = std::numeric_limits<double>::infinity();
            int arg = -1;
            for (std::size_t i = 0; i < level_count; ++i) {
                const double grow = std::max(
                    params.levels.fraction(j) - params.levels.fraction(i), 0.0);
                const double cand = dp[i] + params.fetch_cost * grow;
                if (cand < best) {
                    best = cand;
                    arg = static_cast<int>(i);
                }
            }
            next[j] = best + slot_cost(j, t);
            parent[t][j] = arg;
        }
        dp.swap(next);
    }

    std::size_t final_level = 0;
    for (std::size_t j = 1; j < level_count; ++j) {
        if (dp[j] < dp[final_level]) final_level = j;
    }

    OfflineResult result;
    result.schedule.level_index.resize(horizon);
    int level = static_cast<int>(final_level);
    for (std::size_t t = horizon; t-- > 0;) {
        result.schedule.level_index[t] = level;
        if (t > 0) level = parent[t][static_cast<std::size_t>(level)];
    }
    result.cost = evaluate_schedule(result.schedule, instance, params);
    return result;
}

OfflineResult brute_force_schedule(const Instance& instance, const CostParams& params) {
    require_valid(instance, params);
    const std::size_t horizon = instance.horizon();
    const std::size_t level_count = params.levels.size();

    double combos = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        combos *= static_cast<double>(level_count);
        if (combos > kBruteForceLimit) {
            throw ConfigError("brute force would enumerate more than 2e6 schedules");
        }
    }

    const SlotDemand demand = split_demand(instance, params);
    const auto assignment_cost = [&](const std::vector<int>& levels) {
        double total = 0.0;
        double prev_fraction = 0.0;
        for (std::size_t t = 0; t < horizon; ++t) {
            const auto j = static_cast<std::size_t>(levels[t]);
            const double fraction = params.levels.fraction(j);
            total += params.fetch_cost * std::max(fraction - prev_fraction, 0.0);
            total += fraction * instance.rents[t] +
                     params.levels.forward_cost(j) * demand.servable[t] +
                     demand.overflow[t];
            prev_fraction = fraction;
        }
        return total;
    };

    std::vector<int> levels(horizon, 0);
    std::vector<int> best_levels = levels;
    double best_cost = assignment_cost(levels);
    const auto advance = [&]() {
        for (std::size_t pos = horizon; pos-- > 0;) {
            if (++levels[pos] < static_cast<int>(level_count)) return true;
            levels[pos] = 0;
        }
        return false;
    };
    while (advance()) {
        const double cost = assignment_cost(levels);
        if (cost < best_cost) {
            best_cost = cost;
            best_levels = levels;
        }
    }

    OfflineResult result;
    result.schedule.level_index = std::move(best_levels);
    result.cost = evaluate_schedule(result.schedule, instance, params);
    return result;
}

std::vector<HostingRun> hosting_runs(const HostingSchedule& schedule) {
    std::vector<HostingRun> runs;
    const std::size_t horizon = schedule.horizon();
    std::size_t start = 0;
    int previous = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
        const int level = schedule.level_index[i];
        if (i == 0 || level != schedule.level_index[i - 1]) {
            if (i > 0) {
                runs.push_back({start + 1, i - start, schedule.level_index[i - 1], previous});
                previous = schedule.level_index[i - 1];
            }
            start = i;
        }
    }
    if (horizon > 0) {
        runs.push_back({start + 1, horizon - start, schedule.level_index[horizon - 1], previous});
    }
    return runs;
}

std::size_t min_hosting_run(const HostingSchedule& schedule) {
    std::size_t shortest = schedule.horizon() + 1;
    for (const auto& run : hosting_runs(schedule)) {
        if (run.level > 0) shortest = std::min(shortest, run.length);
    }
    return shortest;
}

}  // namespace edgerent
