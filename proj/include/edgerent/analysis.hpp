#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgerent/core.hpp"
#include "edgerent/generators.hpp"
#include "edgerent/policies.hpp"

namespace edgerent {

/// @brief Worst-case cost ratio guarantee for the windowed two-level policy.
///
/// Returns 4 + 2(κ − c_min)/M − 3·c_min/κ, valid when c_max ≤ M + κ (check
/// rr_cr_applicable).
/// @throws ConfigError when capacity ≤ c_min or fetch_cost ≤ 0.
[[nodiscard]] double rr_cr_upper(double fetch_cost, double capacity, double c_min);

/// @brief True when the two-level ratio guarantee's rent cap c_max ≤ M + κ holds.
[[nodiscard]] bool rr_cr_applicable(double fetch_cost, double capacity, double c_max);

/// @brief Worst-case cost ratio guarantee for the three-level retrospective policy.
///
/// Returns max{4 + 2/M, 4 + 1/M + max{1/M, (1 − g_alpha)/(M·alpha)}}.
/// @throws ConfigError when fetch_cost ≤ 0 or alpha ≤ 0.
[[nodiscard]] double alpha_rr_cr_upper(double fetch_cost, double alpha, double g_alpha);

/// @brief True when the three-level guarantee stays at or below 6,
///        i.e. (1 − g_alpha)/alpha ≤ 2·fetch_cost − 1.
[[nodiscard]] bool alpha_rr_six_applicable(double fetch_cost, double alpha,
                                           double g_alpha);

/// @brief Which adversarial opening the deterministic-policy lower bound assumes.
enum class OnlineLbBranch { kNotHostingFirst, kHostingFirst };

/// @brief Cost-ratio lower bound met by every deterministic causal policy.
[[nodiscard]] double online_lb(double fetch_cost, double capacity, double c_min,
                               double c_max, OnlineLbBranch branch);

/// @brief Which regime the countdown-eviction lower bound lands in (1, 2 or 3).
[[nodiscard]] int ttl_lb_case(double fetch_cost, double capacity, double c_max,
                              int ttl_slots);

/// @brief Cost-ratio lower bound for countdown eviction with lifetime `ttl_slots`.
[[nodiscard]] double ttl_lb(double fetch_cost, double capacity, double c_max,
                            int ttl_slots);

/// @brief How the per-slot expected-cost floor treats hosting levels.
enum class OptOnFlavor { kTwoLevel, kAlphaLevel };

/// @brief Per-slot expected-cost floor for any causal policy on an i.i.d. workload.
///
/// kTwoLevel uses min{c + ν − μ, ν}; kAlphaLevel assumes at most one request
/// per slot and minimizes fraction·c + forward_cost·p over the level table.
/// @throws ConfigError when kAlphaLevel is requested without an arrival
///         probability in `stoch`.
[[nodiscard]] double opt_on_lower(const CostParams& params, const StochasticParams& stoch,
                                  OptOnFlavor flavor);

/// @brief General per-slot floor: min over levels of fraction·c + forward_cost·μ,
///        plus the overflow term ν − μ. Reduces to both opt_on_lower flavors.
[[nodiscard]] double opt_on_floor(const CostParams& params, const StochasticParams& stoch);

/// @brief Expected per-slot cost gap of countdown eviction over the causal floor
///        when arrivals are i.i.d. with no-arrival probability p0.
///
/// Returns M(1 − p0)·p0^min{L, t−1} + (c − μ)(1 − p0^min{L, t−1}) for slot t.
[[nodiscard]] double ttl_stochastic_gap(double fetch_cost, double c, double mu, double p0,
                                        int ttl_slots, std::int64_t t);

/// @brief A per-slot expected-cost bound plus the parameter that attained it.
struct GapBound {
    double value = 0.0;
    bool finite = true;
    double lambda = 0.0;  ///< Block-length multiplier attaining the bound; NaN if unused.
};

/// @brief Steady-state expected per-slot cost bound for the windowed two-level
///        policy on an i.i.d. workload, minimized over the block-length
///        multiplier λ ∈ (1, 50].
///
/// The bound only bites when the servable mean μ and mean rent c differ:
/// μ = c returns an infinite, flagged bound. Values are capped at the trivial
/// per-slot worst case M + c + ν.
[[nodiscard]] GapBound rr_stochastic_gap_bound(double fetch_cost, double capacity,
                                               double c_min, double c_max, double mu,
                                               double c, double nu);

/// @brief Whether a recorded bound caps the ratio from above or supports it
///        from below.
enum class BoundDirection { kUpper, kLower };

/// @brief One policy-vs-reference cost comparison on a single instance.
struct RatioReport {
    std::string policy;
    double policy_cost = 0.0;
    double reference_cost = 0.0;
    double ratio = 0.0;
    bool defined = false;  ///< False when the reference cost is zero.
    std::uint64_t digest = 0;
    double bound = std::numeric_limits<double>::quiet_NaN();
    std::string bound_kind;
    BoundDirection direction = BoundDirection::kUpper;
    bool pass = false;  ///< Meaningful only when a bound is attached.
};

/// @brief Simulates `policy` against the hindsight-optimal schedule and
///        divides total costs. Reference costs always use deterministic
///        forwarding.
[[nodiscard]] RatioReport empirical_ratio(Policy& policy, const Instance& instance,
                                          const CostParams& params,
                                          const ServiceModel& model = ServiceModel::deterministic());

/// @brief Simulates `policy` against another policy on the same instance.
[[nodiscard]] RatioReport empirical_ratio(Policy& policy, Policy& reference,
                                          const Instance& instance, const CostParams& params,
                                          const ServiceModel& model = ServiceModel::deterministic());

/// @brief Attaches a bound to a report and records whether the ratio respects it.
void apply_bound(RatioReport& report, double bound, std::string kind,
                 BoundDirection direction);

/// @brief Writes reports as CSV rows
///        `instance_digest,policy,cost,reference_cost,ratio,bound,pass`.
void write_ratio_csv(std::ostream& out, const std::vector<RatioReport>& reports);

/// @brief Same, to a file.
/// @throws IoError when the file cannot be written.
void write_ratio_csv(const std::string& path, const std::vector<RatioReport>& reports);

/// @brief Monte-Carlo estimate of a policy's cost efficiency on a stochastic workload.
struct EfficiencyReport {
    std::string policy;
    std::size_t horizon = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    double mean_policy_cost = 0.0;      ///< Mean total cost per replication.
    double lower_bound_opt_on = 0.0;    ///< Per-slot causal floor used as denominator.
    double sigma_hat = 0.0;             ///< Mean cost / (horizon · floor); upper estimate.
    double sigma_se = 0.0;              ///< Standard error of sigma_hat across replications.
    std::vector<double> rep_costs;      ///< Total cost per replication, by index.
};

/// @brief Runs seeded replications of a policy on generated workloads and
///        reports the cost ratio against the causal per-slot floor.
///
/// Replications fan out over `jobs` worker threads (0 = hardware concurrency);
/// every stream is derived from (seed, replication index), so results are
/// byte-identical regardless of thread count.
/// @throws ConfigError when the floor is zero or the generator configs carry
///         no closed-form moments.
[[nodiscard]] EfficiencyReport efficiency_mc(const Policy& prototype,
                                             const ArrivalConfig& arrivals,
                                             const RentConfig& rents,
                                             const CostParams& params, std::size_t horizon,
                                             std::size_t replications, std::uint64_t seed,
                                             ServiceModel::Kind model_kind = ServiceModel::Kind::deterministic,
                                             unsigned jobs = 0);

/// @brief Slots spent at each level; entries sum to the schedule horizon.
[[nodiscard]] std::vector<std::size_t> hosting_histogram(const HostingSchedule& schedule,
                                                         std::size_t level_count);

}  // namespace edgerent
