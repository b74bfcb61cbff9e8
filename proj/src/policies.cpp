#include "edgerent/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace edgerent {

namespace {

double servable_requests(std::int64_t x, double capacity) {
    const double xd = static_cast<double>(x);
    return std::isfinite(capacity) ? std::min(xd, capacity) : xd;
}

void require_two_level(const CostParams& params, const std::string& who) {
    if (!params.levels.is_two_level()) {
        throw ConfigError(who + " requires the two-level table {0, 1}; got " +
                          std::to_string(params.levels.size()) + " levels");
    }
}

}  // namespace

HostingSchedule run_policy(Policy& policy, const Instance& instance) {
    policy.reset();
    const std::size_t horizon = instance.horizon();
    HostingSchedule schedule;
    schedule.level_index.resize(horizon);
    if (horizon == 0) return schedule;

    schedule.level_index[0] = policy.initial_level();
    for (std::size_t i = 0; i < horizon; ++i) {
        const int next = policy.observe(instance.arrivals[i], instance.rents[i]);
        if (i + 1 < horizon) {
            schedule.level_index[i + 1] = next;
        }
    }
    return schedule;
}

ErrPolicy::ErrPolicy(const CostParams& params, int initial_level)
    : fetch_cost_(params.fetch_cost),
      capacity_(params.capacity),
      initial_level_(initial_level),
      level_(initial_level),
      delta_(initial_level == 0 ? 0.0 : params.fetch_cost) {
    require_two_level(params, "err");
    if (initial_level != 0 && initial_level != 1) {
        throw ConfigError("err initial level must be 0 or 1");
    }
}

int ErrPolicy::observe(std::int64_t x, double c) {
    const double step = delta_ + (servable_requests(x, capacity_) - c);
    delta_ = std::min(fetch_cost_, std::max(0.0, step));
    if (delta_ == fetch_cost_) {
        level_ = 1;
    } else if (delta_ == 0.0) {
        level_ = 0;
    }
    return level_;
}

void ErrPolicy::reset() {
    level_ = initial_level_;
    delta_ = initial_level_ == 0 ? 0.0 : fetch_cost_;
}

std::unique_ptr<Policy> ErrPolicy::clone() const {
    auto copy = std::make_unique<ErrPolicy>(*this);
    copy->reset();
    return copy;
}

RrPolicy::RrPolicy(const CostParams& params, int initial_level)
    : fetch_cost_(params.fetch_cost),
      capacity_(params.capacity),
      initial_level_(initial_level),
      level_(initial_level),
      best_suffix_(0.0),
      window_empty_(true) {
    require_two_level(params, "rr");
    if (initial_level != 0 && initial_level != 1) {
        throw ConfigError("rr initial level must be 0 or 1");
    }
}

int RrPolicy::observe(std::int64_t x, double c) {
    const double servable = servable_requests(x, capacity_);
    // Savings the opposite state would have earned in this slot.
    const double gain = level_ == 0 ? servable - c : c - servable;
    best_suffix_ = window_empty_ ? gain : std::max(best_suffix_ + gain, gain);
    window_empty_ = false;
    if (best_suffix_ >= fetch_cost_) {
        level_ = 1 - level_;
        window_empty_ = true;
        best_suffix_ = 0.0;
    }
    return level_;
}

void RrPolicy::reset() {
    level_ = initial_level_;
    best_suffix_ = 0.0;
    window_empty_ = true;
}

std::unique_ptr<Policy> RrPolicy::clone() const {
    auto copy = std::make_unique<RrPolicy>(*this);
    copy->reset();
    return copy;
}

RetroLevelPolicy::RetroLevelPolicy(const CostParams& params, std::string name,
                                   bool debug_check)
    : levels_(params.levels),
      fetch_cost_(params.fetch_cost),
      capacity_(params.capacity),
      name_(std::move(name)),
      debug_check_(debug_check),
      level_(0),
      suffix_min_(params.levels.size(), 0.0),
      window_empty_(true) {
    if (levels_.size() < 2) {
        throw ConfigError(name_ + " needs a level table with at least 2 levels");
    }
}

double RetroLevelPolicy::switch_score(std::size_t i) const {
    const double move = std::abs(levels_.fraction(i) - levels_.fraction(level_));
    return fetch_cost_ * move + suffix_min_[i];
}

int RetroLevelPolicy::observe(std::int64_t x, double c) {
    const double servable = servable_requests(x, capacity_);
    const double a_cur = levels_.fraction(level_);
    const double g_cur = levels_.forward_cost(level_);

    // Per-slot cost difference of holding level i instead of the current
    // level (the shared overflow term cancels).
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const double diff =
            (levels_.fraction(i) - a_cur) * c + (levels_.forward_cost(i) - g_cur) * servable;
        suffix_min_[i] = window_empty_ ? diff : std::min(suffix_min_[i] + diff, diff);
    }
    if (debug_check_) {
        window_.emplace_back(servable, c);
    }
    window_empty_ = false;

    if (debug_check_) {
        verify_scores();
    }

    // A switch must strictly beat staying put (score 0); among tied
    // alternatives the larger fraction wins, hence the descending scan.
    int best = level_;
    double best_score = 0.0;
    for (int i = levels_.top(); i >= 0; --i) {
        if (i == level_) continue;
        const double score = switch_score(static_cast<std::size_t>(i));
        if (score < best_score) {
            best = i;
            best_score = score;
        }
    }

    if (best != level_) {
        level_ = best;
        window_empty_ = true;
        window_.clear();
    }
    return level_;
}

void RetroLevelPolicy::verify_scores() const {
    const double a_cur = levels_.fraction(level_);
    const double g_cur = levels_.forward_cost(level_);
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        double suffix = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (auto it = window_.rbegin(); it != window_.rend(); ++it) {
            const auto& [servable, rent] = *it;
            suffix += (levels_.fraction(i) - a_cur) * rent +
                      (levels_.forward_cost(i) - g_cur) * servable;
            best = std::min(best, suffix);
        }
        const double scale = std::max(1.0, std::abs(best));
        if (std::abs(best - suffix_min_[i]) > 1e-9 * scale) {
            throw Error(name_ + ": incremental window score diverged from direct recomputation");
        }
    }
}

void RetroLevelPolicy::reset() {
    level_ = 0;
    std::fill(suffix_min_.begin(), suffix_min_.end(), 0.0);
    window_empty_ = true;
    window_.clear();
}

std::unique_ptr<Policy> RetroLevelPolicy::clone() const {
    auto copy = std::make_unique<RetroLevelPolicy>(*this);
    copy->reset();
    return copy;
}

TtlPolicy::TtlPolicy(const CostParams& params, int ttl_slots)
    : ttl_slots_(ttl_slots), countdown_(0) {
    require_two_level(params, "ttl");
    if (ttl_slots < 1) {
        throw ConfigError("ttl lifetime must be at least 1 slot");
    }
}

int TtlPolicy::observe(std::int64_t x, double) {
    if (x >= 1) {
        countdown_ = ttl_slots_;
        return 1;
    }
    if (countdown_ > 0) {
        --countdown_;
    }
    return countdown_ > 0 ? 1 : 0;
}

void TtlPolicy::reset() { countdown_ = 0; }

std::string TtlPolicy::name() const { return "ttl:L=" + std::to_string(ttl_slots_); }

std::unique_ptr<Policy> TtlPolicy::clone() const {
    auto copy = std::make_unique<TtlPolicy>(*this);
    copy->reset();
    return copy;
}

StaticPolicy::StaticPolicy(const CostParams& params, int level) : level_(level) {
    if (level < 0 || static_cast<std::size_t>(level) >= params.levels.size()) {
        throw ConfigError("static policy level index " + std::to_string(level) +
                          " is outside the level table");
    }
}

int StaticPolicy::observe(std::int64_t, double) { return level_; }

std::string StaticPolicy::name() const {
    return level_ == 0 ? "never" : "always:" + std::to_string(level_);
}

std::unique_ptr<Policy> StaticPolicy::clone() const {
    return std::make_unique<StaticPolicy>(*this);
}

std::unique_ptr<Policy> parse_policy_spec(const std::string& spec,
                                          const CostParams& params) {
    if (spec == "err") return std::make_unique<ErrPolicy>(params);
    if (spec == "rr") return std::make_unique<RrPolicy>(params);
    if (spec == "alpha-rr") return std::make_unique<RetroLevelPolicy>(params, "alpha-rr");
    if (spec == "multi-rr") return std::make_unique<RetroLevelPolicy>(params, "multi-rr");
    if (spec == "never") return std::make_unique<StaticPolicy>(params, 0);

    const auto parse_int_suffix = [&spec](const std::string& prefix) -> int {
        const std::string digits = spec.substr(prefix.size());
        if (digits.empty() ||
            digits.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("malformed policy spec: " + spec);
        }
        try {
            return std::stoi(digits);
        } catch (const std::exception&) {
            throw ConfigError("malformed policy spec: " + spec);
        }
    };

    if (spec.rfind("ttl:L=", 0) == 0) {
        return std::make_unique<TtlPolicy>(params, parse_int_suffix("ttl:L="));
    }
    if (spec.rfind("always:", 0) == 0) {
        return std::make_unique<StaticPolicy>(params, parse_int_suffix("always:"));
    }
    throw ConfigError("unknown policy spec `" + spec + "`; expected " + policy_grammar());
}

std::string policy_grammar() {
    return "err | rr | alpha-rr | multi-rr | ttl:L=<int> | always:<idx> | never";
}

}  // namespace edgerent
