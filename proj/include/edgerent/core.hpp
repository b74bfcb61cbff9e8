#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgerent {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration, or a broken invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// One hosting level: the fraction of the service kept at the edge and the
/// per-request forwarding cost g(fraction) paid to the cloud at that level.
struct LevelEntry {
    double fraction = 0.0;
    double forward_cost = 1.0;
};

/// Ordered table of hosting levels. Index 0 is always "not hosted"
/// (fraction 0, forwarding cost 1) and the last index is "fully hosted"
/// (fraction 1, forwarding cost 0); fractions increase strictly while
/// forwarding costs decrease strictly.
struct LevelTable {
    std::vector<LevelEntry> entries;

    LevelTable() : entries{{0.0, 1.0}, {1.0, 0.0}} {}
    explicit LevelTable(std::vector<LevelEntry> e) : entries(std::move(e)) {}

    /// The classic rent-or-buy table {not hosted, fully hosted}.
    [[nodiscard]] static LevelTable two_level() { return LevelTable{}; }

    /// Two-level table plus one partial level.
    [[nodiscard]] static LevelTable three_level(double alpha, double g_alpha) {
        return LevelTable{{{0.0, 1.0}, {alpha, g_alpha}, {1.0, 0.0}}};
    }

    [[nodiscard]] std::size_t size() const { return entries.size(); }
    [[nodiscard]] double fraction(std::size_t i) const { return entries[i].fraction; }
    [[nodiscard]] double forward_cost(std::size_t i) const { return entries[i].forward_cost; }
    [[nodiscard]] bool is_two_level() const { return entries.size() == 2; }
    [[nodiscard]] int top() const { return static_cast<int>(entries.size()) - 1; }
};

/// Marker for an unbounded per-slot edge serving capacity.
inline constexpr double kUnboundedCapacity = std::numeric_limits<double>::infinity();

/// Cost-model parameters shared by every policy and analysis.
///
/// `fetch_cost` is charged per unit of service fraction downloaded to the
/// edge; `capacity` caps how many requests the edge can serve in one slot
/// (overflow is forwarded at unit cost); rents are advertised per slot for
/// the full service and scale with the hosted fraction.
struct CostParams {
    double fetch_cost = 2.0;
    double capacity = kUnboundedCapacity;
    double c_min = 0.1;
    double c_max = 1.0;
    LevelTable levels;
};

/// A finite workload: per-slot request counts and rent costs. Slot indices
/// are 1-based in all I/O and documentation; vectors are 0-based internally.
struct Instance {
    std::vector<std::int64_t> arrivals;
    std::vector<double> rents;

    Instance() = default;
    Instance(std::vector<std::int64_t> x, std::vector<double> c)
        : arrivals(std::move(x)), rents(std::move(c)) {}

    [[nodiscard]] std::size_t horizon() const { return arrivals.size(); }
};

/// Per-slot hosting-level assignment (indices into a LevelTable). The level
/// before slot 1 is implicitly 0, so hosting in slot 1 pays a fetch.
struct HostingSchedule {
    std::vector<int> level_index;

    HostingSchedule() = default;
    explicit HostingSchedule(std::vector<int> levels) : level_index(std::move(levels)) {}

    [[nodiscard]] std::size_t horizon() const { return level_index.size(); }
};

/// One ledger row produced by evaluate_schedule.
struct SlotCost {
    std::size_t t = 0;  ///< 1-based slot index
    double level_fraction = 0.0;
    double fetch = 0.0;
    double rent = 0.0;
    double service = 0.0;

    [[nodiscard]] double total() const { return fetch + rent + service; }
};

/// Cost totals plus the per-slot ledger they are summed from.
struct CostBreakdown {
    double fetch_total = 0.0;
    double rent_total = 0.0;
    double service_total = 0.0;
    std::vector<SlotCost> per_slot;

    [[nodiscard]] double total() const { return fetch_total + rent_total + service_total; }
};

/// Service-cost evaluation mode. `deterministic` charges the forwarding
/// share g(a)·min{x,κ} exactly; `randomized` forwards each servable request
/// independently with probability g(a) at unit cost. Randomized evaluation
/// with the same seed is bit-reproducible.
struct ServiceModel {
    enum class Kind { deterministic, randomized };

    Kind kind = Kind::deterministic;
    std::uint64_t seed = 0;

    [[nodiscard]] static ServiceModel deterministic() { return {}; }
    [[nodiscard]] static ServiceModel randomized(std::uint64_t seed) {
        return {Kind::randomized, seed};
    }
};

/// A single validation finding. Warnings flag unusual-but-allowed setups;
/// errors must stop a run.
struct Violation {
    enum class Grade { warning, error };

    Grade grade = Grade::error;
    std::string message;
};

[[nodiscard]] std::vector<Violation> validate(const CostParams& params);
[[nodiscard]] std::vector<Violation> validate(const Instance& instance,
                                              const CostParams& params);
[[nodiscard]] bool has_errors(const std::vector<Violation>& violations);
[[nodiscard]] std::string describe(const std::vector<Violation>& violations);

/// Requests servable at the edge in one slot: min{x, capacity}.
[[nodiscard]] double capped_requests(std::int64_t x, const CostParams& params);

/// Evaluates a hosting schedule against an instance slot by slot.
///
/// Per slot t: rent = fraction·c_t; service = g(fraction)·min{x_t,κ} plus
/// the overflow (x_t − min{x_t,κ}) forwarded at unit cost (under the
/// randomized model the servable requests are forwarded by independent
/// coin flips instead of the deterministic share). Fetches are charged
/// per unit of fraction gained at each level change; the change taking
/// effect in slot t+1 is booked in slot t's row, and the initial fetch
/// into slot 1 (from the implied empty edge) is booked in row 1.
///
/// Throws ConfigError on horizon mismatch, an invalid level index, or a
/// rent outside [c_min, c_max].
[[nodiscard]] CostBreakdown evaluate_schedule(
    const HostingSchedule& schedule, const Instance& instance,
    const CostParams& params,
    const ServiceModel& model = ServiceModel::deterministic());

/// Shortest decimal text that round-trips the value exactly; used for all
/// CSV/JSON numeric output so reruns are byte-identical.
[[nodiscard]] std::string format_double(double value);

/// Reads a workload trace (CSV header `t,x,c`, 1-based consecutive t).
/// Throws IoError when the file cannot be opened, ConfigError on malformed
/// content.
[[nodiscard]] Instance read_instance_csv(const std::string& path);
[[nodiscard]] Instance parse_instance_csv(std::istream& in);

void write_instance_csv(const Instance& instance, std::ostream& out);
void write_instance_csv(const Instance& instance, const std::string& path);

/// Ledger CSV with header `t,level,fetch,rent,service` (level = fraction).
void write_ledger_csv(const CostBreakdown& breakdown, std::ostream& out);
void write_ledger_csv(const CostBreakdown& breakdown, const std::string& path);

/// FNV-1a digest over an instance's contents; identifies instances in
/// reports without storing them.
[[nodiscard]] std::uint64_t instance_digest(const Instance& instance);

/// Logging verbosity, configured once from the EDGERENT_LOG environment
/// variable (quiet|warn|info|debug; default warn).
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

[[nodiscard]] LogLevel log_level();
void log_warn(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace edgerent
