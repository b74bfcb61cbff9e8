#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "edgerent/core.hpp"
#include "edgerent/policies.hpp"

namespace edgerent {

/// @brief I.i.d. Bernoulli arrivals: one request with probability p, else none.
struct BernoulliArrivals {
    double p = 0.5;
};

/// @brief I.i.d. Poisson arrivals with the given per-slot mean.
struct PoissonArrivals {
    double mean = 1.0;
};

/// @brief How a Gilbert-Elliot state turns into a request count.
enum class GeEmission { kBernoulli, kPoisson };

/// @brief Two-state (high/low) Markov-modulated arrivals.
///
/// The chain starts in its stationary distribution, emits from the current
/// state, then transitions. With Bernoulli emission the per-state rate is an
/// arrival probability; with Poisson emission it is the per-slot mean.
struct GilbertElliotArrivals {
    double p_high_to_low = 0.1;
    double p_low_to_high = 0.1;
    double rate_high = 1.0;
    double rate_low = 0.0;
    GeEmission emission = GeEmission::kPoisson;
};

/// @brief Fixed arrival counts supplied up front (replayed, not sampled).
struct DeterministicArrivals {
    std::vector<std::int64_t> values;
};

using ArrivalConfig = std::variant<BernoulliArrivals, PoissonArrivals,
                                   GilbertElliotArrivals, DeterministicArrivals>;

/// @brief Constant rent every slot.
struct ConstantRent {
    double value = 0.35;
};

/// @brief I.i.d. uniform rents on [low, high].
struct UniformRent {
    double low = 0.1;
    double high = 1.0;
};

/// @brief ARMA(p, q) rents around a mean, clamped into a band on output.
///
/// The linear recursion runs unclamped (after a burn-in) so the dynamics
/// stay intact; only emitted values are clamped. NaN clamp bounds fall back
/// to the cost parameters' rent band. If the AR polynomial is not
/// stationary a warning is logged and generation proceeds.
struct ArmaRent {
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double mean = 0.5;
    double innovation_sd = 0.1;
    double clamp_low = std::numeric_limits<double>::quiet_NaN();
    double clamp_high = std::numeric_limits<double>::quiet_NaN();
};

/// @brief Rents replayed from the rent column of a workload CSV.
struct TraceRent {
    std::string path;
};

using RentConfig = std::variant<ConstantRent, UniformRent, ArmaRent, TraceRent>;

/// @brief Samples a length-`horizon` arrival sequence.
/// @throws ConfigError on invalid probabilities/rates or a deterministic
///         list shorter than the horizon.
[[nodiscard]] std::vector<std::int64_t> gen_arrivals(const ArrivalConfig& config,
                                                     std::size_t horizon,
                                                     std::uint64_t seed);

/// @brief Samples a length-`horizon` rent sequence.
///
/// Every emitted value must lie inside [params.c_min, params.c_max]; a
/// config (or trace file) that escapes the band is rejected.
[[nodiscard]] std::vector<double> gen_rents(const RentConfig& config,
                                            std::size_t horizon, std::uint64_t seed,
                                            const CostParams& params);

/// @brief True when the AR polynomial's characteristic roots lie strictly
///        inside the unit circle.
[[nodiscard]] bool ar_is_stationary(const std::vector<double>& ar_coeffs);

/// @brief E[min(X, cap)] for X ~ Poisson(mean); `mean` itself when cap is infinite.
[[nodiscard]] double poisson_capped_mean(double mean, double cap);

/// @brief Per-slot moments of a stochastic workload.
struct StochasticParams {
    double nu = 0.0;  ///< E[X_t], the raw arrival mean.
    double mu = 0.0;  ///< E[min(X_t, capacity)], the servable mean.
    double c = 0.0;   ///< E[rent].
    double p = std::numeric_limits<double>::quiet_NaN();  ///< Arrival probability when Bernoulli-like.
};

/// @brief Closed-form per-slot moments for an i.i.d./Markov-modulated workload.
/// @throws ConfigError for replayed (deterministic/trace) configs, which have
///         no model moments.
[[nodiscard]] StochasticParams stochastic_params(const ArrivalConfig& arrivals,
                                                 const RentConfig& rents,
                                                 const CostParams& params);

/// @brief An instance built by probing a policy, plus what the probe saw.
struct ProbeResult {
    Instance instance;
    std::size_t event_slot = 0;  ///< Slot whose observation triggered the event.
    bool triggered = false;
};

/// @brief Builds the worst-case instance that makes a policy fetch late.
///
/// Replays capacity-sized bursts at rent c_min until the policy first moves
/// to the full level (slot t_fetch), then emits that prefix followed by one
/// silent slot. If the policy never fetches within t_max slots the all-burst
/// instance is returned with triggered=false.
///
/// @param t_max probe horizon; 0 picks a cap comfortably past the slot where
///        threshold policies provably act.
/// @throws ConfigError if capacity is infinite or the policy does not start
///         at level 0.
[[nodiscard]] ProbeResult adversary_fetch_probe(Policy& policy, const CostParams& params,
                                                std::size_t t_max = 0);

/// @brief Builds the worst-case instance that makes a hosting policy evict.
///
/// Feeds empty slots at rent c_max until the policy first returns to level 0
/// (slot t_evict), then emits those slots followed by one capacity-sized
/// burst at rent c_min. If the policy never evicts within t_max slots the
/// all-silent instance is returned with triggered=false.
///
/// @throws ConfigError if capacity is infinite or the policy does not start
///         at the full level.
[[nodiscard]] ProbeResult adversary_evict_probe(Policy& policy, const CostParams& params,
                                                std::size_t t_max = 0);

/// @brief Builds the request pattern that a countdown-eviction policy handles worst.
///
/// Case 1: a single request then silence. Case 2: one capacity burst then
/// silence. Case 3: `bursts` capacity bursts spaced so each lands just after
/// the countdown expires. Rent is c_max throughout.
///
/// @throws ConfigError on a bad case selector, bursts < 1, ttl_slots < 1, or
///         (cases 2-3) infinite capacity.
[[nodiscard]] Instance adversary_ttl(const CostParams& params, int ttl_slots,
                                     int case_selector, int bursts = 1);

}  // namespace edgerent
