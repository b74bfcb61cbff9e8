#include "edgerent/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "edgerent/offline.hpp"
#include "edgerent/rng.hpp"

namespace edgerent {

namespace {

constexpr double kRatioTolerance = 1e-9;

double guard_positive(double value, const char* what) {
    if (!(value > 0.0)) {
        throw ConfigError(std::string(what) + " must be positive");
    }
    return value;
}

}  // namespace

double rr_cr_upper(double fetch_cost, double capacity, double c_min) {
    guard_positive(fetch_cost, "fetch cost");
    if (!(capacity > c_min)) {
        throw ConfigError("the two-level ratio guarantee needs capacity > c_min");
    }
    return 4.0 + 2.0 * (capacity - c_min) / fetch_cost - 3.0 * c_min / capacity;
}

bool rr_cr_applicable(double fetch_cost, double capacity, double c_max) {
    return c_max <= fetch_cost + capacity;
}

double alpha_rr_cr_upper(double fetch_cost, double alpha, double g_alpha) {
    guard_positive(fetch_cost, "fetch cost");
    guard_positive(alpha, "alpha");
    const double partial_term =
        std::max(1.0 / fetch_cost, (1.0 - g_alpha) / (fetch_cost * alpha));
    return std::max(4.0 + 2.0 / fetch_cost, 4.0 + 1.0 / fetch_cost + partial_term);
}

bool alpha_rr_six_applicable(double fetch_cost, double alpha, double g_alpha) {
    return (1.0 - g_alpha) / alpha <= 2.0 * fetch_cost - 1.0;
}

double online_lb(double fetch_cost, double capacity, double c_min, double c_max,
                 OnlineLbBranch branch) {
    if (branch == OnlineLbBranch::kHostingFirst) {
        return 1.0 + (capacity + c_max - c_min) / (c_min + fetch_cost);
    }
    if (capacity >= c_min * (c_min + fetch_cost) / fetch_cost) {
        return 1.0 + capacity / (c_min + fetch_cost);
    }
    return capacity / c_min;
}

int ttl_lb_case(double fetch_cost, double capacity, double c_max, int ttl_slots) {
    if (capacity < fetch_cost + c_max) return 1;
    if (static_cast<double>(ttl_slots) * c_max > fetch_cost) return 2;
    return 3;
}

double ttl_lb(double fetch_cost, double capacity, double c_max, int ttl_slots) {
    if (ttl_slots < 1) throw ConfigError("ttl lifetime must be at least 1 slot");
    const double lease = static_cast<double>(ttl_slots) * c_max;
    switch (ttl_lb_case(fetch_cost, capacity, c_max, ttl_slots)) {
        case 1:
            return 1.0 + fetch_cost + lease;
        case 2:
            return (capacity + fetch_cost + lease) / (fetch_cost + c_max);
        default:
            return (capacity + lease + fetch_cost) / (lease + c_max);
    }
}

double opt_on_lower(const CostParams& params, const StochasticParams& stoch,
                    OptOnFlavor flavor) {
    if (flavor == OptOnFlavor::kTwoLevel) {
        return std::min(stoch.c + stoch.nu - stoch.mu, stoch.nu);
    }
    if (std::isnan(stoch.p)) {
        throw ConfigError("the single-arrival floor needs a per-slot arrival probability");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.levels.size(); ++i) {
        best = std::min(best, params.levels.fraction(i) * stoch.c +
                                  params.levels.forward_cost(i) * stoch.p);
    }
    return best;
}

double opt_on_floor(const CostParams& params, const StochasticParams& stoch) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.levels.size(); ++i) {
        best = std::min(best, params.levels.fraction(i) * stoch.c +
                                  params.levels.forward_cost(i) * stoch.mu);
    }
    return best + (stoch.nu - stoch.mu);
}

double ttl_stochastic_gap(double fetch_cost, double c, double mu, double p0,
                          int ttl_slots, std::int64_t t) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("p0 must be a probability");
    if (t < 1) throw ConfigError("slot index must be at least 1");
    const auto exponent = static_cast<double>(
        std::min<std::int64_t>(ttl_slots, t - 1));
    const double decay = std::pow(p0, exponent);
    return fetch_cost * (1.0 - p0) * decay + (c - mu) * (1.0 - decay);
}

GapBound rr_stochastic_gap_bound(double fetch_cost, double capacity, double c_min,
                                 double c_max, double mu, double c, double nu) {
    GapBound out;
    out.lambda = std::numeric_limits<double>::quiet_NaN();
    if (mu == c) {
        out.value = std::numeric_limits<double>::infinity();
        out.finite = false;
        return out;
    }

    const double trivial = fetch_cost + c + nu;
    const double spread = capacity + c_max - c_min;
    const double d = spread * spread;

    // The μ < c analysis measures excursions against κ − c; without that gap
    // only the trivial per-slot cap is available.
    if (mu < c && !(capacity > c)) {
        out.value = trivial;
        return out;
    }

    const auto eval = [&](double lambda) {
        if (mu > c) {
            const double drift = mu - c;
            const double per_block = std::exp(-2.0 * drift * drift / d);
            const double first_block =
                std::exp(-2.0 * drift * drift * (fetch_cost / c) / d);
            const double blocks = std::ceil(lambda * fetch_cost / drift);
            const double late_start = std::exp(-2.0 * (lambda - 1.0) * (lambda - 1.0) *
                                               fetch_cost * drift / (lambda * d));
            return c + nu - mu +
                   (fetch_cost + mu) *
                       (blocks * first_block / (1.0 - per_block) + late_start);
        }
        const double drift = c - mu;
        const double per_block = std::exp(-2.0 * drift * drift / d);
        const double first_block =
            std::exp(-2.0 * drift * drift * (fetch_cost / (capacity - c)) / d);
        const double blocks = 2.0 * std::ceil(lambda * fetch_cost / drift);
        const double late_start = std::exp(-2.0 * (lambda - 1.0) * (lambda - 1.0) *
                                           drift * fetch_cost / (lambda * d));
        const double miss_probability =
            std::min(1.0, late_start + blocks * first_block / (1.0 - per_block));
        return nu + (c + fetch_cost) * miss_probability;
    };

    double best_lambda = 1.01;
    double best = eval(best_lambda);
    for (int i = 102; i <= 5000; ++i) {
        const double lambda = static_cast<double>(i) / 100.0;
        const double value = eval(lambda);
        if (value < best) {
            best = value;
            best_lambda = lambda;
        }
    }
    for (int j = -100; j <= 100; ++j) {
        const double lambda = best_lambda + static_cast<double>(j) * 1e-4;
        if (lambda <= 1.0) continue;
        const double value = eval(lambda);
        if (value < best) {
            best = value;
            best_lambda = lambda;
        }
    }

    out.value = std::min(best, trivial);
    out.lambda = best_lambda;
    return out;
}

namespace {

RatioReport make_report(std::string policy_name, double policy_cost,
                        double reference_cost, const Instance& instance) {
    RatioReport report;
    report.policy = std::move(policy_name);
    report.policy_cost = policy_cost;
    report.reference_cost = reference_cost;
    report.defined = reference_cost > 0.0;
    report.ratio = report.defined ? policy_cost / reference_cost
                                  : std::numeric_limits<double>::quiet_NaN();
    report.digest = instance_digest(instance);
    return report;
}

}  // namespace

RatioReport empirical_ratio(Policy& policy, const Instance& instance,
                            const CostParams& params, const ServiceModel& model) {
    const HostingSchedule schedule = run_policy(policy, instance);
    const double policy_cost = evaluate_schedule(schedule, instance, params, model).total();
    const double reference_cost = optimal_schedule(instance, params).cost.total();
    return make_report(policy.name(), policy_cost, reference_cost, instance);
}

RatioReport empirical_ratio(Policy& policy, Policy& reference, const Instance& instance,
                            const CostParams& params, const ServiceModel& model) {
    const HostingSchedule schedule = run_policy(policy, instance);
    const HostingSchedule reference_schedule = run_policy(reference, instance);
    const double policy_cost = evaluate_schedule(schedule, instance, params, model).total();
    const double reference_cost =
        evaluate_schedule(reference_schedule, instance, params, model).total();
    return make_report(policy.name(), policy_cost, reference_cost, instance);
}

void apply_bound(RatioReport& report, double bound, std::string kind,
                 BoundDirection direction) {
    report.bound = bound;
    report.bound_kind = std::move(kind);
    report.direction = direction;
    if (!report.defined) {
        report.pass = false;
        return;
    }
    const double slack = kRatioTolerance * std::max(1.0, std::abs(bound));
    report.pass = direction == BoundDirection::kUpper ? report.ratio <= bound + slack
                                                      : report.ratio >= bound - slack;
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioReport>& reports) {
    out << "instance_digest,policy,cost,reference_cost,ratio,bound,pass\n";
    char digest_hex[17];
    for (const auto& report : reports) {
        std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                      static_cast<unsigned long long>(report.digest));
        out << digest_hex << ',' << report.policy << ','
            << format_double(report.policy_cost) << ','
            << format_double(report.reference_cost) << ','
            << (report.defined ? format_double(report.ratio) : std::string()) << ',';
        if (!std::isnan(report.bound)) {
            out << format_double(report.bound) << ','
                << (report.pass ? "pass" : "fail");
        } else {
            out << ',';
        }
        out << '\n';
    }
}

void write_ratio_csv(const std::string& path, const std::vector<RatioReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open `" + path + "` for writing");
    write_ratio_csv(out, reports);
    if (!out) throw IoError("failed while writing `" + path + "`");
}

EfficiencyReport efficiency_mc(const Policy& prototype, const ArrivalConfig& arrivals,
                               const RentConfig& rents, const CostParams& params,
                               std::size_t horizon, std::size_t replications,
                               std::uint64_t seed, ServiceModel::Kind model_kind,
                               unsigned jobs) {
    if (horizon == 0) throw ConfigError("efficiency estimation needs a positive horizon");
    if (replications == 0) throw ConfigError("efficiency estimation needs replications");
    if (const auto violations = validate(params); has_errors(violations)) {
        throw ConfigError(describe(violations));
    }

    const StochasticParams stoch = stochastic_params(arrivals, rents, params);
    const double floor = opt_on_floor(params, stoch);
    if (!(floor > 0.0)) {
        throw ConfigError("the causal per-slot floor is zero; the ratio is undefined");
    }

    EfficiencyReport report;
    report.policy = prototype.name();
    report.horizon = horizon;
    report.replications = replications;
    report.seed = seed;
    report.lower_bound_opt_on = floor;
    report.rep_costs.assign(replications, 0.0);

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        const auto policy = prototype.clone();
        while (true) {
            const std::size_t r = cursor.fetch_add(1);
            if (r >= replications) break;
            try {
                const auto stream = static_cast<std::uint64_t>(r) * 3;
                Instance instance;
                instance.arrivals = gen_arrivals(arrivals, horizon, derive_seed(seed, stream));
                instance.rents = gen_rents(rents, horizon, derive_seed(seed, stream + 1), params);
                const HostingSchedule schedule = run_policy(*policy, instance);
                const ServiceModel model =
                    model_kind == ServiceModel::Kind::randomized
                        ? ServiceModel::randomized(derive_seed(seed, stream + 2))
                        : ServiceModel::deterministic();
                report.rep_costs[r] =
                    evaluate_schedule(schedule, instance, params, model).total();
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    unsigned worker_count = jobs != 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
    worker_count = static_cast<unsigned>(
        std::min<std::size_t>(worker_count, replications));
    std::vector<std::thread> pool;
    pool.reserve(worker_count > 0 ? worker_count - 1 : 0);
    for (unsigned i = 1; i < worker_count; ++i) pool.emplace_back(worker);
    worker();
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);

    const double denom = static_cast<double>(horizon) * floor;
    report.mean_policy_cost =
        std::accumulate(report.rep_costs.begin(), report.rep_costs.end(), 0.0) /
        static_cast<double>(replications);
    report.sigma_hat = report.mean_policy_cost / denom;
    if (replications > 1) {
        double ss = 0.0;
        for (const double cost : report.rep_costs) {
            const double dev = cost / denom - report.sigma_hat;
            ss += dev * dev;
        }
        report.sigma_se = std::sqrt(ss / static_cast<double>(replications - 1)) /
                          std::sqrt(static_cast<double>(replications));
    }
    return report;
}

std::vector<std::size_t> hosting_histogram(const HostingSchedule& schedule,
                                           std::size_t level_count) {
    std::vector<std::size_t> counts(level_count, 0);
    for (const int level : schedule.level_index) {
        if (level < 0 || static_cast<std::size_t>(level) >= level_count) {
            throw ConfigError("schedule level index outside the level table");
        }
        ++counts[static_cast<std::size_t>(level)];
    }
    return counts;
}

}  // namespace edgerent
