#pragma once

#include <memory>
#include <string>
#include <vector>

#include "edgerent/core.hpp"

namespace edgerent {

/// Streaming interface shared by every hosting policy: once slot t's request
/// count and rent are known, observe() returns the level index to hold during
/// slot t+1. Policies are causal by construction — they see only the past.
class Policy {
public:
    virtual ~Policy() = default;

    /// Level held during slot 1, before anything is observed.
    [[nodiscard]] virtual int initial_level() const { return 0; }

    /// Consumes slot t's observation and returns the level for slot t+1.
    virtual int observe(std::int64_t x, double c) = 0;

    /// Restores the freshly constructed state.
    virtual void reset() = 0;

    [[nodiscard]] virtual std::string name() const = 0;

    /// Independent copy in its initial state.
    [[nodiscard]] virtual std::unique_ptr<Policy> clone() const = 0;
};

/// Resets the policy and replays the whole instance, returning the level it
/// held in every slot.
[[nodiscard]] HostingSchedule run_policy(Policy& policy, const Instance& instance);

/// Rent-or-buy policy driven by one clamped hindsight sum
///   delta' = min{M, max{0, delta + min{x,κ} − c}}:
/// fetch when delta' reaches M, evict when it reaches 0, keep the current
/// state otherwise. Requires the two-level table.
class ErrPolicy final : public Policy {
public:
    /// `initial_level` 1 starts the policy already hosting (delta seeded to
    /// M), which the eviction probes use.
    explicit ErrPolicy(const CostParams& params, int initial_level = 0);

    [[nodiscard]] int initial_level() const override { return initial_level_; }
    int observe(std::int64_t x, double c) override;
    void reset() override;
    [[nodiscard]] std::string name() const override { return "err"; }
    [[nodiscard]] std::unique_ptr<Policy> clone() const override;

    /// Current value of the hindsight sum (diagnostics and tests).
    [[nodiscard]] double delta() const { return delta_; }

private:
    double fetch_cost_;
    double capacity_;
    int initial_level_;
    int level_;
    double delta_;
};

/// Two-level retrospective policy in its windowed form: it changes state
/// exactly when some suffix of the window since the last change shows that
/// the opposite state would have saved at least the fetch cost (ties
/// included). Decision-equivalent to ErrPolicy; kept separate so the
/// equivalence itself can be tested.
class RrPolicy final : public Policy {
public:
    explicit RrPolicy(const CostParams& params, int initial_level = 0);

    [[nodiscard]] int initial_level() const override { return initial_level_; }
    int observe(std::int64_t x, double c) override;
    void reset() override;
    [[nodiscard]] std::string name() const override { return "rr"; }
    [[nodiscard]] std::unique_ptr<Policy> clone() const override;

private:
    double fetch_cost_;
    double capacity_;
    int initial_level_;
    int level_;
    double best_suffix_;  // largest savings of the opposite state over any
                          // suffix of the window since the last change
    bool window_empty_;
};

/// Retrospective policy over any level table. After each slot it asks, for
/// every level i, what the cheapest hypothetical schedule would have been
/// that keeps the current level from the last change up to some slot and
/// holds i from that slot onwards — charging the switch M·|a_i − a_cur| even
/// when it lowers the level — and moves to the best level when that strictly
/// beats staying put. Ties keep the current level; ties between other levels
/// prefer the larger fraction. The scan over switch slots is folded into one
/// running suffix minimum per level (O(K) per step); `debug_check` re-derives
/// every score from the buffered window each step and throws on divergence.
class RetroLevelPolicy final : public Policy {
public:
    explicit RetroLevelPolicy(const CostParams& params, std::string name = "alpha-rr",
                              bool debug_check = false);

    int observe(std::int64_t x, double c) override;
    void reset() override;
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::unique_ptr<Policy> clone() const override;

private:
    [[nodiscard]] double switch_score(std::size_t i) const;
    void verify_scores() const;

    LevelTable levels_;
    double fetch_cost_;
    double capacity_;
    std::string name_;
    bool debug_check_;
    int level_;
    std::vector<double> suffix_min_;  // per level: cheapest suffix of renting
                                      // it relative to the current level
    bool window_empty_;
    std::vector<std::pair<double, double>> window_;  // (servable, rent); debug only
};

/// Fetch-on-request baseline: hosts after any slot with a request and evicts
/// after `ttl_slots` consecutive empty slots. Requires the two-level table.
class TtlPolicy final : public Policy {
public:
    TtlPolicy(const CostParams& params, int ttl_slots);

    int observe(std::int64_t x, double c) override;
    void reset() override;
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::unique_ptr<Policy> clone() const override;

private:
    int ttl_slots_;
    int countdown_;
};

/// Holds one level forever. Index 0 is the never-host baseline; the top
/// index is the always-host baseline.
class StaticPolicy final : public Policy {
public:
    StaticPolicy(const CostParams& params, int level);

    [[nodiscard]] int initial_level() const override { return level_; }
    int observe(std::int64_t x, double c) override;
    void reset() override {}
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::unique_ptr<Policy> clone() const override;

private:
    int level_;
};

/// Builds a policy from its selection string:
///   err | rr | alpha-rr | multi-rr | ttl:L=<int> | always:<idx> | never
/// Throws ConfigError when the spec does not parse or does not fit the level
/// table (e.g. `err` with three levels).
[[nodiscard]] std::unique_ptr<Policy> parse_policy_spec(const std::string& spec,
                                                        const CostParams& params);

/// The selection strings accepted by parse_policy_spec, for help text.
[[nodiscard]] std::string policy_grammar();

}  // namespace edgerent
