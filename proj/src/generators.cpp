#include "edgerent/generators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>

#include "edgerent/rng.hpp"

#if defined(EDGERENT_HAVE_EIGEN)
#include <Eigen/Eigenvalues>
#endif

namespace edgerent {

namespace {

constexpr std::size_t kArmaBurnIn = 500;

void require_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string(what) + " must be a probability in [0, 1]");
    }
}

double stationary_high(const GilbertElliotArrivals& cfg) {
    const double denom = cfg.p_high_to_low + cfg.p_low_to_high;
    // A frozen chain (both transition probabilities 0) stays where it
    // starts; split the mass evenly so the long-run mean is well defined.
    return denom > 0.0 ? cfg.p_low_to_high / denom : 0.5;
}

std::int64_t emit(GeEmission emission, double rate, Rng& rng) {
    if (emission == GeEmission::kBernoulli) {
        return rng.bernoulli(rate) ? 1 : 0;
    }
    return rng.poisson(rate);
}

void validate_ge(const GilbertElliotArrivals& cfg) {
    require_probability(cfg.p_high_to_low, "p_high_to_low");
    require_probability(cfg.p_low_to_high, "p_low_to_high");
    if (cfg.rate_high < 0.0 || cfg.rate_low < 0.0) {
        throw ConfigError("Gilbert-Elliot rates must be non-negative");
    }
    if (cfg.emission == GeEmission::kBernoulli &&
        (cfg.rate_high > 1.0 || cfg.rate_low > 1.0)) {
        throw ConfigError("Bernoulli emission needs rates in [0, 1]");
    }
}

/// Falls back to Durand-Kerner root finding when Eigen is unavailable.
std::vector<std::complex<double>> characteristic_roots(const std::vector<double>& ar) {
    const std::size_t order = ar.size();
    std::vector<std::complex<double>> roots(order);
#if defined(EDGERENT_HAVE_EIGEN)
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(order));
    for (std::size_t j = 0; j < order; ++j) {
        companion(0, static_cast<Eigen::Index>(j)) = ar[j];
    }
    for (std::size_t j = 1; j < order; ++j) {
        companion(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = 1.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    for (std::size_t j = 0; j < order; ++j) {
        roots[j] = solver.eigenvalues()(static_cast<Eigen::Index>(j));
    }
#else
    // Monic polynomial z^p - ar[0] z^{p-1} - ... - ar[p-1].
    std::vector<std::complex<double>> coeffs(order + 1);
    coeffs[0] = 1.0;
    for (std::size_t j = 0; j < order; ++j) coeffs[j + 1] = -ar[j];
    const auto eval = [&](std::complex<double> z) {
        std::complex<double> value = 0.0;
        for (const auto& c : coeffs) value = value * z + c;
        return value;
    };
    for (std::size_t j = 0; j < order; ++j) {
        roots[j] = std::pow(std::complex<double>(0.4, 0.9),
                            static_cast<double>(j + 1));
    }
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t j = 0; j < order; ++j) {
            std::complex<double> denom = 1.0;
            for (std::size_t k = 0; k < order; ++k) {
                if (k != j) denom *= roots[j] - roots[k];
            }
            if (std::abs(denom) > 0.0) roots[j] -= eval(roots[j]) / denom;
        }
    }
#endif
    return roots;
}

}  // namespace

std::vector<std::int64_t> gen_arrivals(const ArrivalConfig& config,
                                       std::size_t horizon, std::uint64_t seed) {
    std::vector<std::int64_t> arrivals(horizon);
    Rng rng(seed);

    if (const auto* bern = std::get_if<BernoulliArrivals>(&config)) {
        require_probability(bern->p, "Bernoulli p");
        for (auto& x : arrivals) x = rng.bernoulli(bern->p) ? 1 : 0;
        return arrivals;
    }
    if (const auto* pois = std::get_if<PoissonArrivals>(&config)) {
        if (!(pois->mean >= 0.0) || !std::isfinite(pois->mean)) {
            throw ConfigError("Poisson mean must be finite and non-negative");
        }
        for (auto& x : arrivals) x = rng.poisson(pois->mean);
        return arrivals;
    }
    if (const auto* ge = std::get_if<GilbertElliotArrivals>(&config)) {
        validate_ge(*ge);
        bool high = rng.uniform01() < stationary_high(*ge);
        for (auto& x : arrivals) {
            x = emit(ge->emission, high ? ge->rate_high : ge->rate_low, rng);
            const double flip = high ? ge->p_high_to_low : ge->p_low_to_high;
            if (rng.bernoulli(flip)) high = !high;
        }
        return arrivals;
    }
    const auto& fixed = std::get<DeterministicArrivals>(config);
    if (fixed.values.size() < horizon) {
        throw ConfigError("deterministic arrival list is shorter than the horizon");
    }
    for (std::size_t i = 0; i < horizon; ++i) {
        if (fixed.values[i] < 0) {
            throw ConfigError("deterministic arrivals must be non-negative");
        }
        arrivals[i] = fixed.values[i];
    }
    return arrivals;
}

std::vector<double> gen_rents(const RentConfig& config, std::size_t horizon,
                              std::uint64_t seed, const CostParams& params) {
    std::vector<double> rents(horizon);
    Rng rng(seed);

    if (const auto* constant = std::get_if<ConstantRent>(&config)) {
        std::fill(rents.begin(), rents.end(), constant->value);
    } else if (const auto* uniform = std::get_if<UniformRent>(&config)) {
        if (!(uniform->low <= uniform->high)) {
            throw ConfigError("uniform rent needs low <= high");
        }
        for (auto& c : rents) c = rng.uniform(uniform->low, uniform->high);
    } else if (const auto* arma = std::get_if<ArmaRent>(&config)) {
        if (!(arma->innovation_sd >= 0.0)) {
            throw ConfigError("ARMA innovation sd must be non-negative");
        }
        if (!ar_is_stationary(arma->ar_coeffs)) {
            log_warn("ARMA rent process is not stationary; output is clamped but may drift");
        }
        const double lo = std::isnan(arma->clamp_low) ? params.c_min : arma->clamp_low;
        const double hi = std::isnan(arma->clamp_high) ? params.c_max : arma->clamp_high;
        if (!(lo <= hi)) throw ConfigError("ARMA clamp needs low <= high");
        std::deque<double> past_dev(arma->ar_coeffs.size(), 0.0);
        std::deque<double> past_eps(arma->ma_coeffs.size(), 0.0);
        const auto step = [&]() {
            const double eps = rng.normal() * arma->innovation_sd;
            double dev = eps;
            for (std::size_t j = 0; j < arma->ar_coeffs.size(); ++j) {
                dev += arma->ar_coeffs[j] * past_dev[j];
            }
            for (std::size_t j = 0; j < arma->ma_coeffs.size(); ++j) {
                dev += arma->ma_coeffs[j] * past_eps[j];
            }
            if (!past_dev.empty()) {
                past_dev.pop_back();
                past_dev.push_front(dev);
            }
            if (!past_eps.empty()) {
                past_eps.pop_back();
                past_eps.push_front(eps);
            }
            return arma->mean + dev;
        };
        for (std::size_t i = 0; i < kArmaBurnIn; ++i) step();
        for (auto& c : rents) c = std::clamp(step(), lo, hi);
    } else {
        const auto& trace = std::get<TraceRent>(config);
        const Instance traced = read_instance_csv(trace.path);
        if (traced.horizon() < horizon) {
            throw ConfigError("trace `" + trace.path + "` has fewer slots than the horizon");
        }
        std::copy_n(traced.rents.begin(), horizon, rents.begin());
    }

    for (std::size_t i = 0; i < horizon; ++i) {
        if (!(rents[i] >= params.c_min && rents[i] <= params.c_max)) {
            throw ConfigError("generated rent " + format_double(rents[i]) + " at slot " +
                              std::to_string(i + 1) + " escapes [c_min, c_max]");
        }
    }
    return rents;
}

bool ar_is_stationary(const std::vector<double>& ar_coeffs) {
    // Trailing zero coefficients would make the companion matrix singular in
    // a harmless way; trim them first.
    std::vector<double> ar = ar_coeffs;
    while (!ar.empty() && ar.back() == 0.0) ar.pop_back();
    if (ar.empty()) return true;
    for (const auto& root : characteristic_roots(ar)) {
        if (std::abs(root) >= 1.0) return false;
    }
    return true;
}

double poisson_capped_mean(double mean, double cap) {
    if (!(mean >= 0.0)) throw ConfigError("Poisson mean must be non-negative");
    if (!std::isfinite(cap)) return mean;
    const auto k = static_cast<std::int64_t>(cap);
    if (k <= 0) return 0.0;
    // E[min(X, k)] = sum_{j=0}^{k-1} P(X > j).
    double pmf = std::exp(-mean);
    double cdf = pmf;
    double total = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
        total += 1.0 - cdf;
        pmf *= mean / static_cast<double>(j + 1);
        cdf += pmf;
    }
    return total;
}

StochasticParams stochastic_params(const ArrivalConfig& arrivals,
                                   const RentConfig& rents,
                                   const CostParams& params) {
    StochasticParams out;

    if (const auto* bern = std::get_if<BernoulliArrivals>(&arrivals)) {
        require_probability(bern->p, "Bernoulli p");
        out.nu = bern->p;
        out.mu = bern->p * std::min(1.0, params.capacity);
        out.p = bern->p;
    } else if (const auto* pois = std::get_if<PoissonArrivals>(&arrivals)) {
        out.nu = pois->mean;
        out.mu = poisson_capped_mean(pois->mean, params.capacity);
    } else if (const auto* ge = std::get_if<GilbertElliotArrivals>(&arrivals)) {
        validate_ge(*ge);
        const double pi_high = stationary_high(*ge);
        const double pi_low = 1.0 - pi_high;
        if (ge->emission == GeEmission::kBernoulli) {
            out.nu = pi_high * ge->rate_high + pi_low * ge->rate_low;
            out.mu = pi_high * ge->rate_high * std::min(1.0, params.capacity) +
                     pi_low * ge->rate_low * std::min(1.0, params.capacity);
            out.p = out.nu;
        } else {
            out.nu = pi_high * ge->rate_high + pi_low * ge->rate_low;
            out.mu = pi_high * poisson_capped_mean(ge->rate_high, params.capacity) +
                     pi_low * poisson_capped_mean(ge->rate_low, params.capacity);
        }
    } else {
        throw ConfigError("replayed arrivals have no closed-form moments");
    }

    if (const auto* constant = std::get_if<ConstantRent>(&rents)) {
        out.c = constant->value;
    } else if (const auto* uniform = std::get_if<UniformRent>(&rents)) {
        out.c = 0.5 * (uniform->low + uniform->high);
    } else if (const auto* arma = std::get_if<ArmaRent>(&rents)) {
        out.c = arma->mean;
    } else {
        throw ConfigError("replayed rents have no closed-form moments");
    }
    return out;
}

namespace {

std::int64_t finite_capacity(const CostParams& params, const char* who) {
    if (!std::isfinite(params.capacity)) {
        throw ConfigError(std::string(who) + " needs a finite capacity");
    }
    return static_cast<std::int64_t>(std::llround(params.capacity));
}

std::size_t default_probe_horizon(const CostParams& params) {
    const double gap = params.capacity - params.c_min;
    if (!std::isfinite(gap) || gap <= 0.0) return 1000;
    return 10 * static_cast<std::size_t>(std::ceil(params.fetch_cost / gap)) + 100;
}

}  // namespace

ProbeResult adversary_fetch_probe(Policy& policy, const CostParams& params,
                                  std::size_t t_max) {
    const std::int64_t burst = finite_capacity(params, "fetch probe");
    if (t_max == 0) t_max = default_probe_horizon(params);
    policy.reset();
    if (params.levels.fraction(static_cast<std::size_t>(policy.initial_level())) != 0.0) {
        throw ConfigError("fetch probe expects a policy that starts empty");
    }

    ProbeResult probe;
    for (std::size_t t = 1; t <= t_max; ++t) {
        const int level = policy.observe(burst, params.c_min);
        if (params.levels.fraction(static_cast<std::size_t>(level)) == 1.0) {
            probe.event_slot = t;
            probe.triggered = true;
            break;
        }
    }

    const std::size_t bursts = probe.triggered ? probe.event_slot : t_max;
    const std::size_t horizon = probe.triggered ? probe.event_slot + 1 : t_max;
    probe.instance.arrivals.assign(horizon, 0);
    std::fill_n(probe.instance.arrivals.begin(), bursts, burst);
    probe.instance.rents.assign(horizon, params.c_min);
    return probe;
}

ProbeResult adversary_evict_probe(Policy& policy, const CostParams& params,
                                  std::size_t t_max) {
    const std::int64_t burst = finite_capacity(params, "evict probe");
    if (t_max == 0) t_max = default_probe_horizon(params);
    policy.reset();
    if (params.levels.fraction(static_cast<std::size_t>(policy.initial_level())) != 1.0) {
        throw ConfigError("evict probe expects a policy that starts fully hosted");
    }

    ProbeResult probe;
    for (std::size_t t = 1; t <= t_max; ++t) {
        const int level = policy.observe(0, params.c_max);
        if (params.levels.fraction(static_cast<std::size_t>(level)) == 0.0) {
            probe.event_slot = t;
            probe.triggered = true;
            break;
        }
    }

    if (probe.triggered) {
        const std::size_t horizon = probe.event_slot + 1;
        probe.instance.arrivals.assign(horizon, 0);
        probe.instance.arrivals.back() = burst;
        probe.instance.rents.assign(horizon, params.c_max);
        probe.instance.rents.back() = params.c_min;
    } else {
        probe.instance.arrivals.assign(t_max, 0);
        probe.instance.rents.assign(t_max, params.c_max);
    }
    return probe;
}

Instance adversary_ttl(const CostParams& params, int ttl_slots, int case_selector,
                       int bursts) {
    if (ttl_slots < 1) throw ConfigError("ttl lifetime must be at least 1 slot");
    if (bursts < 1) throw ConfigError("burst count must be at least 1");
    const auto lifetime = static_cast<std::size_t>(ttl_slots);

    Instance instance;
    if (case_selector == 1) {
        instance.arrivals.assign(lifetime + 2, 0);
        instance.arrivals[0] = 1;
    } else if (case_selector == 2) {
        instance.arrivals.assign(lifetime + 2, 0);
        instance.arrivals[0] = finite_capacity(params, "ttl burst builder");
    } else if (case_selector == 3) {
        const std::int64_t burst = finite_capacity(params, "ttl burst builder");
        const auto u = static_cast<std::size_t>(bursts);
        instance.arrivals.assign(u * (lifetime + 1) + 1, 0);
        for (std::size_t k = 0; k < u; ++k) {
            instance.arrivals[k * (lifetime + 1)] = burst;
        }
    } else {
        throw ConfigError("ttl builder case must be 1, 2 or 3");
    }
    instance.rents.assign(instance.horizon(), params.c_max);
    return instance;
}

}  // namespace edgerent
