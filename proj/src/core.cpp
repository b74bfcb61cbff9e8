#include "edgerent/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "edgerent/rng.hpp"

namespace edgerent {

namespace {

void add_error(std::vector<Violation>& out, std::string message) {
    out.push_back({Violation::Grade::error, std::move(message)});
}

void add_warning(std::vector<Violation>& out, std::string message) {
    out.push_back({Violation::Grade::warning, std::move(message)});
}

}  // namespace

std::vector<Violation> validate(const CostParams& params) {
    std::vector<Violation> out;

    if (!(params.fetch_cost > 0.0)) {
        add_error(out, "fetch cost must be positive");
    } else if (params.fetch_cost <= 1.0) {
        add_warning(out,
                    "fetch cost <= 1: fetching is not costlier than forwarding a "
                    "single request, which the model normally assumes");
    }
    if (!(params.capacity > 0.0)) {
        add_error(out, "capacity must be positive");
    } else if (std::isfinite(params.capacity) &&
               params.capacity != std::floor(params.capacity)) {
        add_error(out, "capacity must be a whole number of requests or unbounded");
    }
    if (!(params.c_min > 0.0)) {
        add_error(out, "c_min must be positive");
    }
    if (!(params.c_min <= params.c_max)) {
        add_error(out, "c_min must not exceed c_max");
    }

    const auto& lv = params.levels.entries;
    if (lv.size() < 2) {
        add_error(out, "level table needs at least the levels 0 and 1");
        return out;
    }
    if (lv.front().fraction != 0.0 || lv.front().forward_cost != 1.0) {
        add_error(out, "first level must be (fraction 0, forwarding cost 1)");
    }
    if (lv.back().fraction != 1.0 || lv.back().forward_cost != 0.0) {
        add_error(out, "last level must be (fraction 1, forwarding cost 0)");
    }
    for (std::size_t i = 0; i < lv.size(); ++i) {
        if (lv[i].fraction < 0.0 || lv[i].fraction > 1.0 ||
            lv[i].forward_cost < 0.0 || lv[i].forward_cost > 1.0) {
            add_error(out, "level fractions and forwarding costs must lie in [0, 1]");
            break;
        }
    }
    for (std::size_t i = 1; i < lv.size(); ++i) {
        if (!(lv[i].fraction > lv[i - 1].fraction)) {
            add_error(out, "level fractions must be strictly increasing");
            break;
        }
    }
    for (std::size_t i = 1; i < lv.size(); ++i) {
        if (!(lv[i].forward_cost < lv[i - 1].forward_cost)) {
            add_error(out, "forwarding costs must be strictly decreasing");
            break;
        }
    }
    return out;
}

std::vector<Violation> validate(const Instance& instance, const CostParams& params) {
    std::vector<Violation> out;
    if (instance.horizon() == 0) {
        add_error(out, "instance horizon must be at least 1");
    }
    if (instance.arrivals.size() != instance.rents.size()) {
        add_error(out, "arrival and rent sequences must have the same length");
        return out;
    }
    for (std::size_t i = 0; i < instance.arrivals.size(); ++i) {
        if (instance.arrivals[i] < 0) {
            add_error(out, "arrival count is negative at slot " + std::to_string(i + 1));
            break;
        }
    }
    for (std::size_t i = 0; i < instance.rents.size(); ++i) {
        const double c = instance.rents[i];
        if (!(c >= params.c_min && c <= params.c_max)) {
            add_error(out, "rent " + format_double(c) + " at slot " + std::to_string(i + 1) +
                               " is outside [c_min, c_max]");
            break;
        }
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(), [](const Violation& v) {
        return v.grade == Violation::Grade::error;
    });
}

std::string describe(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        out += (v.grade == Violation::Grade::error ? "error: " : "warning: ");
        out += v.message;
        out += '\n';
    }
    return out;
}

double capped_requests(std::int64_t x, const CostParams& params) {
    const double xd = static_cast<double>(x);
    return std::isfinite(params.capacity) ? std::min(xd, params.capacity) : xd;
}

CostBreakdown evaluate_schedule(const HostingSchedule& schedule, const Instance& instance,
                                const CostParams& params, const ServiceModel& model) {
    const std::size_t horizon = instance.horizon();
    if (schedule.horizon() != horizon) {
        throw ConfigError("schedule horizon " + std::to_string(schedule.horizon()) +
                          " does not match instance horizon " + std::to_string(horizon));
    }
    const auto& levels = params.levels;
    for (const int idx : schedule.level_index) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= levels.size()) {
            throw ConfigError("schedule level index " + std::to_string(idx) +
                              " is outside the level table");
        }
    }
    for (const double c : instance.rents) {
        if (!(c >= params.c_min && c <= params.c_max)) {
            throw ConfigError("instance rent " + format_double(c) +
                              " is outside [c_min, c_max]");
        }
    }

    Rng rng(model.seed);
    CostBreakdown out;
    out.per_slot.resize(horizon);

    for (std::size_t i = 0; i < horizon; ++i) {
        SlotCost& row = out.per_slot[i];
        row.t = i + 1;

        const int level = schedule.level_index[i];
        const double fraction = levels.fraction(level);
        const double g = levels.forward_cost(level);
        row.level_fraction = fraction;

        // The fetch that takes effect in slot i+1 is decided at the end of
        // slot i and booked here; row 1 additionally carries the initial
        // fetch from the implied empty edge.
        double fetched = 0.0;
        if (i == 0) {
            fetched += std::max(fraction - 0.0, 0.0);
        }
        if (i + 1 < horizon) {
            const double next = levels.fraction(schedule.level_index[i + 1]);
            fetched += std::max(next - fraction, 0.0);
        }
        row.fetch = params.fetch_cost * fetched;

        row.rent = fraction * instance.rents[i];

        const double servable = capped_requests(instance.arrivals[i], params);
        const double overflow = static_cast<double>(instance.arrivals[i]) - servable;
        if (model.kind == ServiceModel::Kind::deterministic) {
            row.service = g * servable + overflow;
        } else {
            double forwarded = 0.0;
            if (g >= 1.0) {
                forwarded = servable;
            } else if (g > 0.0) {
                const auto n = static_cast<std::int64_t>(servable);
                for (std::int64_t k = 0; k < n; ++k) {
                    forwarded += rng.bernoulli(g) ? 1.0 : 0.0;
                }
            }
            row.service = forwarded + overflow;
        }

        out.fetch_total += row.fetch;
        out.rent_total += row.rent;
        out.service_total += row.service;
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::string strip_eol(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
        line.pop_back();
    }
    return line;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

Instance parse_instance_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_eol(line) != "t,x,c") {
        throw ConfigError("trace must start with the header `t,x,c`");
    }
    Instance out;
    std::size_t expected_t = 1;
    while (std::getline(in, line)) {
        line = strip_eol(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) {
            throw ConfigError("trace row " + std::to_string(expected_t) +
                              " does not have exactly 3 fields");
        }
        try {
            const auto t = std::stoull(fields[0]);
            const auto x = std::stoll(fields[1]);
            const double c = std::stod(fields[2]);
            if (t != expected_t) {
                throw ConfigError("trace slots must be consecutive starting at 1");
            }
            if (x < 0) {
                throw ConfigError("trace arrival count is negative at slot " +
                                  std::to_string(t));
            }
            out.arrivals.push_back(x);
            out.rents.push_back(c);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("trace row " + std::to_string(expected_t) +
                              " has a malformed number");
        }
        ++expected_t;
    }
    if (out.horizon() == 0) {
        throw ConfigError("trace contains no rows");
    }
    return out;
}

Instance read_instance_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace file: " + path);
    }
    return parse_instance_csv(in);
}

void write_instance_csv(const Instance& instance, std::ostream& out) {
    out << "t,x,c\n";
    for (std::size_t i = 0; i < instance.horizon(); ++i) {
        out << (i + 1) << ',' << instance.arrivals[i] << ','
            << format_double(instance.rents[i]) << '\n';
    }
}

void write_instance_csv(const Instance& instance, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write trace file: " + path);
    }
    write_instance_csv(instance, out);
    if (!out) {
        throw IoError("failed while writing trace file: " + path);
    }
}

void write_ledger_csv(const CostBreakdown& breakdown, std::ostream& out) {
    out << "t,level,fetch,rent,service\n";
    for (const auto& row : breakdown.per_slot) {
        out << row.t << ',' << format_double(row.level_fraction) << ','
            << format_double(row.fetch) << ',' << format_double(row.rent) << ','
            << format_double(row.service) << '\n';
    }
}

void write_ledger_csv(const CostBreakdown& breakdown, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write ledger file: " + path);
    }
    write_ledger_csv(breakdown, out);
    if (!out) {
        throw IoError("failed while writing ledger file: " + path);
    }
}

std::uint64_t instance_digest(const Instance& instance) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    const auto mix = [&hash](const unsigned char* bytes, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001b3ULL;
        }
    };
    for (const auto x : instance.arrivals) {
        mix(reinterpret_cast<const unsigned char*>(&x), sizeof x);
    }
    for (const auto c : instance.rents) {
        mix(reinterpret_cast<const unsigned char*>(&c), sizeof c);
    }
    return hash;
}

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* raw = std::getenv("EDGERENT_LOG");
        if (raw == nullptr) return LogLevel::warn;
        std::string value(raw);
        std::transform(value.begin(), value.end(), value.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (value == "quiet" || value == "off" || value == "0") return LogLevel::quiet;
        if (value == "warn" || value == "warning") return LogLevel::warn;
        if (value == "info") return LogLevel::info;
        if (value == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

namespace {

std::mutex& log_mutex() {
    static std::mutex mtx;
    return mtx;
}

void log_at(LogLevel level, const char* tag, const std::string& message) {
    if (log_level() < level) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << tag << message << '\n';
}

}  // namespace

void log_warn(const std::string& message) { log_at(LogLevel::warn, "[warn] ", message); }
void log_info(const std::string& message) { log_at(LogLevel::info, "[info] ", message); }
void log_debug(const std::string& message) { log_at(LogLevel::debug, "[debug] ", message); }

}  // namespace edgerent
