#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "edgerent/core.hpp"
#include "edgerent/generators.hpp"
#include "edgerent/policies.hpp"

namespace {

using namespace edgerent;

CostParams two_level_params(double fetch_cost, double capacity, double c_min,
                            double c_max) {
    CostParams params;
    params.fetch_cost = fetch_cost;
    params.capacity = capacity;
    params.c_min = c_min;
    params.c_max = c_max;
    params.levels = LevelTable::two_level();
    return params;
}

double mean_of(const std::vector<std::int64_t>& values) {
    double total = 0.0;
    for (std::int64_t v : values) total += static_cast<double>(v);
    return total / static_cast<double>(values.size());
}

double mean_of(const std::vector<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

/// RAII scratch file that disappears with the test.
struct ScratchFile {
    std::string path;
    explicit ScratchFile(const std::string& name, const std::string& content)
        : path("edgerent_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~ScratchFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("bernoulli arrivals honour degenerate probabilities") {
    const std::vector<std::int64_t> silent =
        gen_arrivals(BernoulliArrivals{0.0}, 500, 1);
    for (std::int64_t x : silent) CHECK(x == 0);
    const std::vector<std::int64_t> saturated =
        gen_arrivals(BernoulliArrivals{1.0}, 500, 1);
    for (std::int64_t x : saturated) CHECK(x == 1);
    CHECK_THROWS_AS((void)gen_arrivals(BernoulliArrivals{1.5}, 10, 1), ConfigError);
}

TEST_CASE("poisson arrival means concentrate at the configured rate") {
    const std::vector<std::int64_t> sample =
        gen_arrivals(PoissonArrivals{4.0}, 1000000, 99);
    const double mean = mean_of(sample);
    CHECK(mean >= 3.99);
    CHECK(mean <= 4.01);
}

TEST_CASE("markov-modulated arrivals hit the stationary mean") {
    GilbertElliotArrivals config;
    config.p_high_to_low = 0.4;
    config.p_low_to_high = 0.4;
    config.rate_high = 200.0;
    config.rate_low = 10.0;
    config.emission = GeEmission::kPoisson;
    // Symmetric switching -> the chain spends half its time in each state,
    // so the long-run mean is (200 + 10) / 2 = 105.
    const std::vector<std::int64_t> sample = gen_arrivals(config, 200000, 7);
    const double mean = mean_of(sample);
    CHECK(mean >= 104.0);
    CHECK(mean <= 106.0);
}

TEST_CASE("bernoulli-emission state rates must be probabilities") {
    GilbertElliotArrivals config;
    config.rate_high = 1.2;
    config.emission = GeEmission::kBernoulli;
    CHECK_THROWS_AS((void)gen_arrivals(config, 10, 1), ConfigError);
}

TEST_CASE("deterministic arrivals replay verbatim and reject short lists") {
    DeterministicArrivals config;
    config.values = {3, 0, 1, 4};
    CHECK(gen_arrivals(config, 4, 12345) == config.values);
    const std::vector<std::int64_t> prefix = gen_arrivals(config, 2, 0);
    CHECK(prefix == std::vector<std::int64_t>{3, 0});
    CHECK_THROWS_AS((void)gen_arrivals(config, 5, 0), ConfigError);
    config.values = {1, -2};
    CHECK_THROWS_AS((void)gen_arrivals(config, 2, 0), ConfigError);
}

TEST_CASE("arrival generation is seed-stable and seed-sensitive") {
    const PoissonArrivals config{2.5};
    const auto a = gen_arrivals(config, 3000, 17);
    const auto b = gen_arrivals(config, 3000, 17);
    const auto c = gen_arrivals(config, 3000, 18);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("constant and uniform rents respect the configured band") {
    const CostParams params = two_level_params(10.0, 1.0, 0.1, 1.0);
    const std::vector<double> flat =
        gen_rents(ConstantRent{0.35}, 100, 3, params);
    for (double c : flat) CHECK(c == 0.35);

    const std::vector<double> spread =
        gen_rents(UniformRent{0.2, 0.8}, 5000, 3, params);
    for (double c : spread) {
        CHECK(c >= 0.2);
        CHECK(c <= 0.8);
    }
    CHECK(mean_of(spread) == doctest::Approx(0.5).epsilon(0.05));

    CHECK_THROWS_AS((void)gen_rents(ConstantRent{1.5}, 10, 3, params), ConfigError);
    CHECK_THROWS_AS((void)gen_rents(UniformRent{0.05, 0.8}, 10, 3, params),
                    ConfigError);
}

TEST_CASE("white-noise rents keep their mean inside the clamp band") {
    const CostParams params = two_level_params(10.0, 1.0, 4.0, 6.0);
    ArmaRent config;
    config.mean = 5.0;
    config.innovation_sd = 1.0;
    config.clamp_low = 4.0;
    config.clamp_high = 6.0;
    const std::vector<double> sample = gen_rents(config, 100000, 21, params);
    for (double c : sample) {
        CHECK(c >= 4.0);
        CHECK(c <= 6.0);
    }
    const double mean = mean_of(sample);
    CHECK(mean >= 4.9);
    CHECK(mean <= 5.1);
}

TEST_CASE("autoregressive rents stay reproducible and inside the band") {
    const CostParams params = two_level_params(10.0, 1.0, 0.1, 1.0);
    ArmaRent config;
    config.ar_coeffs = {0.6};
    config.ma_coeffs = {0.2};
    config.mean = 0.5;
    config.innovation_sd = 0.05;
    const auto a = gen_rents(config, 2000, 13, params);
    const auto b = gen_rents(config, 2000, 13, params);
    CHECK(a == b);
    for (double c : a) {
        CHECK(c >= 0.1);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("trace rents are replayed and band-checked") {
    const CostParams params = two_level_params(10.0, 1.0, 0.1, 1.0);
    SUBCASE("valid trace replays the rent column") {
        const ScratchFile trace("trace_ok.csv", "t,x,c\n1,1,0.25\n2,0,0.75\n3,2,0.5\n");
        const std::vector<double> rents =
            gen_rents(TraceRent{trace.path}, 3, 0, params);
        REQUIRE(rents.size() == 3);
        CHECK(rents[0] == doctest::Approx(0.25));
        CHECK(rents[1] == doctest::Approx(0.75));
        CHECK(rents[2] == doctest::Approx(0.5));
        // A shorter horizon replays a prefix; a longer one is an error.
        CHECK(gen_rents(TraceRent{trace.path}, 2, 0, params).size() == 2);
        CHECK_THROWS_AS((void)gen_rents(TraceRent{trace.path}, 4, 0, params),
                        ConfigError);
    }
    SUBCASE("rent outside the band is rejected") {
        const ScratchFile trace("trace_band.csv", "t,x,c\n1,1,0.25\n2,0,2.0\n");
        CHECK_THROWS_AS((void)gen_rents(TraceRent{trace.path}, 2, 0, params),
                        ConfigError);
    }
    SUBCASE("missing file is an I/O error") {
        CHECK_THROWS_AS((void)gen_rents(TraceRent{"no_such_trace.csv"}, 2, 0, params),
                        IoError);
    }
}

TEST_CASE("stationarity check classifies characteristic polynomials") {
    CHECK(ar_is_stationary({}));
    CHECK(ar_is_stationary({0.5}));
    CHECK(ar_is_stationary({0.0, 0.0}));
    CHECK(ar_is_stationary({1.2, -0.3}));  // roots 0.84.., 0.35..
    CHECK_FALSE(ar_is_stationary({1.01}));
    CHECK_FALSE(ar_is_stationary({2.0}));
    CHECK_FALSE(ar_is_stationary({0.0, 1.1}));  // roots at +-sqrt(1.1)
}

TEST_CASE("capped poisson means match closed forms") {
    // E[min(X, 1)] = P(X >= 1) = 1 - exp(-mean).
    CHECK(poisson_capped_mean(4.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-4.0)).epsilon(1e-12));
    CHECK(poisson_capped_mean(0.0, 3.0) == doctest::Approx(0.0));
    CHECK(poisson_capped_mean(2.5, kUnboundedCapacity) == doctest::Approx(2.5));
    // E[min(X, 2)] = P(X>=1) + P(X>=2).
    const double lambda = 1.7;
    const double p0 = std::exp(-lambda);
    const double p1 = lambda * p0;
    const double expected = (1.0 - p0) + (1.0 - p0 - p1);
    CHECK(poisson_capped_mean(lambda, 2.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("workload moments reduce to the documented closed forms") {
    const CostParams params = two_level_params(10.0, 1.0, 0.1, 1.0);
    SUBCASE("bernoulli plus constant rent") {
        const StochasticParams s =
            stochastic_params(BernoulliArrivals{0.35}, ConstantRent{0.5}, params);
        CHECK(s.nu == doctest::Approx(0.35));
        CHECK(s.mu == doctest::Approx(0.35));
        CHECK(s.c == doctest::Approx(0.5));
        CHECK(s.p == doctest::Approx(0.35));
    }
    SUBCASE("poisson truncated by capacity") {
        CostParams wide = params;
        wide.capacity = 2.0;
        const StochasticParams s =
            stochastic_params(PoissonArrivals{4.0}, UniformRent{0.2, 0.8}, wide);
        CHECK(s.nu == doctest::Approx(4.0));
        CHECK(s.mu == doctest::Approx(poisson_capped_mean(4.0, 2.0)));
        CHECK(s.c == doctest::Approx(0.5));
        CHECK(std::isnan(s.p));
    }
    SUBCASE("markov modulation mixes by stationary weights") {
        GilbertElliotArrivals config;
        config.p_high_to_low = 0.4;
        config.p_low_to_high = 0.4;
        config.rate_high = 0.9;
        config.rate_low = 0.1;
        config.emission = GeEmission::kBernoulli;
        const StochasticParams s =
            stochastic_params(config, ConstantRent{0.5}, params);
        CHECK(s.nu == doctest::Approx(0.5));
        CHECK(s.p == doctest::Approx(0.5));
    }
    SUBCASE("replayed workloads have no closed-form moments") {
        DeterministicArrivals fixed;
        fixed.values = {1, 2};
        CHECK_THROWS_AS(
            (void)stochastic_params(fixed, ConstantRent{0.5}, params), ConfigError);
        CHECK_THROWS_AS((void)stochastic_params(BernoulliArrivals{0.5},
                                                TraceRent{"x.csv"}, params),
                        ConfigError);
    }
}

TEST_CASE("the fetch probe pins the threshold walk's trigger slot") {
    const CostParams params = two_level_params(3.0, 1.0, 0.5, 1.0);
    ErrPolicy policy(params);
    const ProbeResult probe = adversary_fetch_probe(policy, params);
    REQUIRE(probe.triggered);
    CHECK(probe.event_slot == 6);
    REQUIRE(probe.instance.horizon() == 7);
    for (std::size_t t = 0; t < 6; ++t) CHECK(probe.instance.arrivals[t] == 1);
    CHECK(probe.instance.arrivals[6] == 0);
    for (double c : probe.instance.rents) CHECK(c == 0.5);

    // Replaying the emitted instance reproduces the event slot exactly.
    ErrPolicy replay(params);
    const HostingSchedule schedule = run_policy(replay, probe.instance);
    CHECK(schedule.level_index[5] == 0);
    CHECK(schedule.level_index[6] == 1);
}

TEST_CASE("the fetch probe flags policies that never fetch") {
    const CostParams params = two_level_params(3.0, 1.0, 0.5, 1.0);
    StaticPolicy never(params, 0);
    const ProbeResult probe = adversary_fetch_probe(never, params, 50);
    CHECK_FALSE(probe.triggered);
    CHECK(probe.instance.horizon() == 50);
}

TEST_CASE("the evict probe pins the hosted walk's trigger slot") {
    const CostParams params = two_level_params(3.0, 1.0, 0.5, 1.0);
    ErrPolicy policy(params, 1);
    const ProbeResult probe = adversary_evict_probe(policy, params);
    REQUIRE(probe.triggered);
    CHECK(probe.event_slot == 3);
    REQUIRE(probe.instance.horizon() == 4);
    CHECK(probe.instance.arrivals == std::vector<std::int64_t>{0, 0, 0, 1});
    CHECK(probe.instance.rents == std::vector<double>{1.0, 1.0, 1.0, 0.5});

    // Hosting only for the final burst costs fetch + c_min on this instance.
    HostingSchedule lazy;
    lazy.level_index = {0, 0, 0, 1};
    const double alt = evaluate_schedule(lazy, probe.instance, params).total();
    CHECK(alt == doctest::Approx(3.5));
}

TEST_CASE("the evict probe flags policies that never let go") {
    const CostParams params = two_level_params(3.0, 1.0, 0.5, 1.0);
    StaticPolicy always(params, 1);
    const ProbeResult probe = adversary_evict_probe(always, params, 40);
    CHECK_FALSE(probe.triggered);
}

TEST_CASE("probes reject inconsistent starting levels") {
    const CostParams params = two_level_params(3.0, 1.0, 0.5, 1.0);
    ErrPolicy hosted(params, 1);
    CHECK_THROWS_AS((void)adversary_fetch_probe(hosted, params), ConfigError);
    ErrPolicy idle(params);
    CHECK_THROWS_AS((void)adversary_evict_probe(idle, params), ConfigError);
}

TEST_CASE("countdown stress patterns match their documented shapes") {
    const CostParams params = two_level_params(5.0, 2.0, 0.5, 1.0);
    SUBCASE("single request then silence") {
        const Instance one = adversary_ttl(params, 3, 1);
        CHECK(one.arrivals == std::vector<std::int64_t>{1, 0, 0, 0, 0});
        for (double c : one.rents) CHECK(c == 1.0);
    }
    SUBCASE("capacity burst then silence") {
        const Instance burst = adversary_ttl(params, 3, 2);
        CHECK(burst.arrivals == std::vector<std::int64_t>{2, 0, 0, 0, 0});
    }
    SUBCASE("one cycle of the repeating pattern equals the burst pattern") {
        const Instance once = adversary_ttl(params, 3, 3, 1);
        const Instance burst = adversary_ttl(params, 3, 2);
        CHECK(once.arrivals == burst.arrivals);
        CHECK(once.rents == burst.rents);
    }
    SUBCASE("bursts land just after each countdown expires") {
        const Instance cycle = adversary_ttl(params, 3, 3, 3);
        REQUIRE(cycle.horizon() == 13);  // 3 * (L + 1) + 1
        for (std::size_t t = 0; t < cycle.horizon(); ++t) {
            const bool burst_slot = t % 4 == 0 && t / 4 < 3;
            CHECK(cycle.arrivals[t] == (burst_slot ? 2 : 0));
        }
    }
    SUBCASE("bad selectors are rejected") {
        CHECK_THROWS_AS((void)adversary_ttl(params, 3, 4), ConfigError);
        CHECK_THROWS_AS((void)adversary_ttl(params, 0, 1), ConfigError);
        CHECK_THROWS_AS((void)adversary_ttl(params, 3, 3, 0), ConfigError);
    }
}

TEST_CASE("probe and stress instances pass instance validation") {
    const CostParams params = two_level_params(4.0, 2.0, 0.5, 2.0);
    ErrPolicy fetcher(params);
    const ProbeResult fetch = adversary_fetch_probe(fetcher, params);
    CHECK_FALSE(has_errors(validate(fetch.instance, params)));
    ErrPolicy evicter(params, 1);
    const ProbeResult evict = adversary_evict_probe(evicter, params);
    CHECK_FALSE(has_errors(validate(evict.instance, params)));
    const Instance ttl = adversary_ttl(params, 2, 3, 4);
    CHECK_FALSE(has_errors(validate(ttl, params)));
}
