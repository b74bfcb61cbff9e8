#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

// End-to-end tests drive the installed binary exactly as a user would.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Runs the CLI with `args`, appending a redirect of both streams to `log`.
int run_cli(const std::string& args, const std::string& log = "/dev/null") {
    const std::string command =
        std::string(EDGERENT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

void write_config(const fs::path& path, const json& config) {
    write_text_file(path, config.dump(2) + "\n");
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

json two_level_params(double fetch_cost, double capacity, double c_min, double c_max) {
    json params;
    params["fetch_cost"] = fetch_cost;
    params["capacity"] = capacity;
    params["c_min"] = c_min;
    params["c_max"] = c_max;
    params["levels"] = json::array({{0.0, 1.0}, {1.0, 0.0}});
    return params;
}

json three_level_params(double fetch_cost, double alpha, double g_alpha,
                        double capacity, double c_min, double c_max) {
    json params = two_level_params(fetch_cost, capacity, c_min, c_max);
    params["levels"] = json::array({{0.0, 1.0}, {alpha, g_alpha}, {1.0, 0.0}});
    return params;
}

/// Splits a ratios.csv data row into its seven fields.
std::vector<std::string> split_csv(const std::string& row) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(row);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!row.empty() && row.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

TEST_CASE("simulate writes a ledger per policy and a summary with exact totals") {
    const fs::path dir = scratch_dir("simulate_basic");
    json config;
    config["params"] = two_level_params(2.0, 1.0, 0.1, 1.0);
    config["arrivals"] = {{"kind", "deterministic"}, {"values", {1, 1, 1}}};
    config["rents"] = {{"kind", "constant"}, {"value", 0.4}};
    config["policies"] = {"never", "always:1"};
    config["horizon"] = 3;
    write_config(dir / "config.json", config);

    const int code = run_cli("simulate --config " + (dir / "config.json").string() +
                             " --out " + (dir / "out").string());
    REQUIRE(code == 0);

    const json summary = json::parse(read_text_file(dir / "out" / "summary.json"));
    CHECK(summary["horizon"] == 3);
    CHECK(summary["policies"]["never"]["total"].get<double>() == doctest::Approx(3.0));
    CHECK(summary["policies"]["never"]["fetch"].get<double>() == 0.0);
    CHECK(summary["policies"]["always:1"]["total"].get<double>() ==
          doctest::Approx(3.2));
    CHECK(summary["policies"]["always:1"]["hosting_histogram"] ==
          json::array({0, 3}));

    const auto never_lines = read_lines(dir / "out" / "ledger_never.csv");
    REQUIRE(never_lines.size() == 4);
    CHECK(never_lines[0] == "t,level,fetch,rent,service");
    CHECK(fs::exists(dir / "out" / "ledger_always-1.csv"));
}

TEST_CASE("identical seeds reproduce outputs byte for byte across thread counts") {
    const fs::path dir = scratch_dir("deterministic_outputs");
    json config;
    config["params"] = two_level_params(4.0, 1.0, 0.1, 1.0);
    config["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.5}};
    config["rents"] = {{"kind", "uniform"}, {"low", 0.2}, {"high", 0.9}};
    config["policies"] = {"err", "ttl:L=2"};
    config["horizon"] = 200;
    config["replications"] = 8;
    config["seed"] = 77;
    write_config(dir / "config.json", config);

    const std::string base = " --config " + (dir / "config.json").string();
    REQUIRE(run_cli("compare" + base + " --out " + (dir / "a").string() +
                    " --jobs 1") == 0);
    REQUIRE(run_cli("compare" + base + " --out " + (dir / "b").string() +
                    " --jobs 4") == 0);
    const std::string a = read_text_file(dir / "a" / "ratios.csv");
    const std::string b = read_text_file(dir / "b" / "ratios.csv");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);

    // A different seed must change the sampled instances.
    REQUIRE(run_cli("compare" + base + " --out " + (dir / "c").string() +
                    " --seed 78") == 0);
    CHECK(read_text_file(dir / "c" / "ratios.csv") != a);
}

TEST_CASE("compare lists the hindsight row plus one row per policy and replication") {
    const fs::path dir = scratch_dir("compare_rows");
    json config;
    config["params"] = two_level_params(6.0, 1.0, 0.2, 0.9);
    config["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.6}};
    config["rents"] = {{"kind", "uniform"}, {"low", 0.2}, {"high", 0.9}};
    config["policies"] = {"err", "rr", "never"};
    config["horizon"] = 300;
    config["replications"] = 3;
    config["seed"] = 5;
    write_config(dir / "config.json", config);

    REQUIRE(run_cli("compare --config " + (dir / "config.json").string() + " --out " +
                    (dir / "out").string()) == 0);
    const auto lines = read_lines(dir / "out" / "ratios.csv");
    REQUIRE(lines.size() == 1 + 3 * 4);
    CHECK(lines[0] == "instance_digest,policy,cost,reference_cost,ratio,bound,pass");
    // Each replication leads with the hindsight row at ratio 1.
    for (std::size_t rep = 0; rep < 3; ++rep) {
        const auto fields = split_csv(lines[1 + rep * 4]);
        REQUIRE(fields.size() == 7);
        CHECK(fields[1] == "optimal");
        CHECK(fields[4] == "1");
    }
    // The two threshold policies carry the worst-case guarantee and meet it.
    for (const auto& line : lines) {
        const auto fields = split_csv(line);
        if (fields.size() == 7 && (fields[1] == "err" || fields[1] == "rr")) {
            CHECK(fields[5] != "");
            CHECK(fields[6] == "pass");
        }
        if (fields.size() == 7 && fields[1] == "never") {
            CHECK(fields[5] == "");
        }
    }
}

TEST_CASE("with common random numbers the partial-level policy shadows the full one") {
    // When the intermediate level cannot pay for itself the richer policy
    // should make the same moves as the two-level one on the same draws.
    const fs::path dir = scratch_dir("crn_shadow");
    json coarse;
    coarse["params"] = two_level_params(5.0, 1.0, 0.1, 1.0);
    coarse["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.5}};
    coarse["rents"] = {{"kind", "uniform"}, {"low", 0.1}, {"high", 1.0}};
    coarse["policies"] = {"rr"};
    coarse["horizon"] = 300;
    coarse["replications"] = 5;
    coarse["seed"] = 31;
    json fine = coarse;
    fine["params"] = three_level_params(5.0, 0.5, 0.5, 1.0, 0.1, 1.0);
    fine["policies"] = {"alpha-rr"};
    write_config(dir / "coarse.json", coarse);
    write_config(dir / "fine.json", fine);

    REQUIRE(run_cli("compare --config " + (dir / "coarse.json").string() + " --out " +
                    (dir / "coarse").string()) == 0);
    REQUIRE(run_cli("compare --config " + (dir / "fine.json").string() + " --out " +
                    (dir / "fine").string()) == 0);

    const auto coarse_lines = read_lines(dir / "coarse" / "ratios.csv");
    const auto fine_lines = read_lines(dir / "fine" / "ratios.csv");
    REQUIRE(coarse_lines.size() == fine_lines.size());
    for (std::size_t i = 1; i < coarse_lines.size(); ++i) {
        const auto a = split_csv(coarse_lines[i]);
        const auto b = split_csv(fine_lines[i]);
        // Same seed, same generators: the sampled instances must match.
        CHECK(a[0] == b[0]);
        if (a[1] == "rr") {
            REQUIRE(b[1] == "alpha-rr");
            const double cost_rr = std::stod(a[2]);
            const double cost_alpha = std::stod(b[2]);
            CHECK(std::abs(cost_rr - cost_alpha) <= 2.0 * 5.0 + 1.0);
        }
    }
}

TEST_CASE("sweep tabulates mean per-slot cost per parameter value") {
    const fs::path dir = scratch_dir("sweep_fetch");
    json config;
    config["params"] = two_level_params(10.0, 1.0, 0.1, 1.0);
    config["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.3}};
    config["rents"] = {{"kind", "constant"}, {"value", 0.35}};
    config["policies"] = {"err", "never"};
    config["horizon"] = 400;
    config["replications"] = 2;
    config["seed"] = 9;
    config["sweep"] = {{"parameter", "fetch_cost"}, {"values", {10, 20, 40, 80}}};
    write_config(dir / "config.json", config);

    REQUIRE(run_cli("sweep --config " + (dir / "config.json").string() + " --out " +
                    (dir / "out").string()) == 0);
    const auto lines = read_lines(dir / "out" / "sweep.csv");
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "fetch_cost,err,never");
    const std::vector<std::string> expected_values = {"10", "20", "40", "80"};
    std::string never_column;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv(lines[i]);
        REQUIRE(fields.size() == 3);
        CHECK(fields[0] == expected_values[i - 1]);
        // Never hosting does not pay the fetch cost, so its column cannot
        // move across the sweep (common random numbers per cell).
        if (i == 1) {
            never_column = fields[2];
        } else {
            CHECK(fields[2] == never_column);
        }
    }

    SUBCASE("unknown sweep parameters are rejected") {
        json bad = config;
        bad["sweep"]["parameter"] = "phase_of_moon";
        write_config(dir / "bad.json", bad);
        CHECK(run_cli("sweep --config " + (dir / "bad.json").string() + " --out " +
                      (dir / "bad_out").string()) == 2);
    }
}

TEST_CASE("adversarial probes score the emitted instance against the lower bound") {
    const fs::path dir = scratch_dir("adversarial");
    json config;
    config["params"] = two_level_params(5.0, 2.0, 0.5, 2.0);
    write_config(dir / "config.json", config);
    const std::string base = " --config " + (dir / "config.json").string();

    SUBCASE("threshold policy meets the causal bound") {
        REQUIRE(run_cli("adversarial" + base + " --policy err --out " +
                        (dir / "err").string()) == 0);
        const auto lines = read_lines(dir / "err" / "adversarial.csv");
        REQUIRE(lines.size() == 2);
        const auto fields = split_csv(lines[1]);
        REQUIRE(fields.size() == 7);
        CHECK(fields[1] == "err");
        CHECK(fields[5] != "");
        CHECK(fields[6] == "pass");
        const auto instance_lines = read_lines(dir / "err" / "adversarial_instance.csv");
        REQUIRE(instance_lines.size() >= 2);
        CHECK(instance_lines[0] == "t,x,c");
    }
    SUBCASE("countdown policy meets its dedicated bound") {
        json ttl_config;
        ttl_config["params"] = two_level_params(5.0, 2.0, 0.5, 1.0);
        write_config(dir / "ttl.json", ttl_config);
        REQUIRE(run_cli("adversarial --config " + (dir / "ttl.json").string() +
                        " --policy ttl:L=3 --out " + (dir / "ttl").string()) == 0);
        const auto lines = read_lines(dir / "ttl" / "adversarial.csv");
        REQUIRE(lines.size() == 2);
        const auto fields = split_csv(lines[1]);
        CHECK(fields[1] == "ttl:L=3");
        CHECK(std::stod(fields[5]) == doctest::Approx(9.0));  // 1 + fetch + L*c_max
        CHECK(std::stod(fields[4]) >= 9.0 - 1e-9);
        CHECK(fields[6] == "pass");
    }
    SUBCASE("a policy that never acts is flagged instead of scored") {
        REQUIRE(run_cli("adversarial" + base + " --policy always:1 --out " +
                        (dir / "always").string()) == 0);
        const auto lines = read_lines(dir / "always" / "adversarial.csv");
        REQUIRE(lines.size() == 2);
        const auto fields = split_csv(lines[1]);
        CHECK(fields[5] == "");  // no bound attached
    }
}

TEST_CASE("bounds reports the closed forms for the configured parameters") {
    const fs::path dir = scratch_dir("bounds");
    SUBCASE("two-level worst case") {
        json config;
        config["params"] = two_level_params(10.0, 2.0, 1.0, 1.5);
        config["policies"] = {"ttl:L=3"};
        write_config(dir / "config.json", config);
        REQUIRE(run_cli("bounds --config " + (dir / "config.json").string() +
                        " --out " + (dir / "out").string()) == 0);
        const json report = json::parse(read_text_file(dir / "out" / "bounds.json"));
        CHECK(report["rr_cr_upper"].get<double>() == doctest::Approx(2.7));
        CHECK(report["rr_cr_applicable"] == true);
        CHECK(report["ttl_lb"].contains("L=3"));
        CHECK(report["online_lb"]["not_hosting_first"].get<double>() > 1.0);
    }
    SUBCASE("partial-level worst case, read from stdout") {
        json config;
        config["params"] = three_level_params(10.0, 0.25, 0.5, 1.0, 0.1, 1.0);
        write_config(dir / "config3.json", config);
        const fs::path log = dir / "stdout.txt";
        REQUIRE(run_cli("bounds --config " + (dir / "config3.json").string(),
                        log.string()) == 0);
        const json report = json::parse(read_text_file(log));
        CHECK(report["alpha_rr_cr_upper"].get<double>() == doctest::Approx(4.3));
        CHECK(report["alpha_rr_six_applicable"] == true);
    }
    SUBCASE("stochastic floor appears when generators are configured") {
        json config;
        config["params"] = two_level_params(10.0, 1.0, 0.1, 1.0);
        config["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.3}};
        config["rents"] = {{"kind", "constant"}, {"value", 0.5}};
        write_config(dir / "stoch.json", config);
        const fs::path log = dir / "stoch_stdout.txt";
        REQUIRE(run_cli("bounds --config " + (dir / "stoch.json").string(),
                        log.string()) == 0);
        const json report = json::parse(read_text_file(log));
        CHECK(report["opt_on_lower_two_level"].get<double>() == doctest::Approx(0.3));
        CHECK(report["rr_expected_cost_bound"].contains("finite"));
    }
    SUBCASE("unbounded capacity has no closed forms") {
        json config;
        config["params"] = two_level_params(10.0, 2.0, 1.0, 1.5);
        config["params"]["capacity"] = "unbounded";
        write_config(dir / "unbounded.json", config);
        CHECK(run_cli("bounds --config " + (dir / "unbounded.json").string()) == 2);
    }
}

TEST_CASE("workload traces round-trip through the CLI") {
    const fs::path dir = scratch_dir("trace");
    write_text_file(dir / "trace.csv", "t,x,c\n1,2,0.5\n2,0,0.25\n3,1,0.75\n");
    json config;
    config["params"] = two_level_params(2.0, 1.0, 0.1, 1.0);
    config["arrivals"] = {{"kind", "trace"}, {"path", (dir / "trace.csv").string()}};
    config["rents"] = {{"kind", "trace"}, {"path", (dir / "trace.csv").string()}};
    config["policies"] = {"never"};
    config["horizon"] = 3;
    write_config(dir / "config.json", config);

    REQUIRE(run_cli("simulate --config " + (dir / "config.json").string() + " --out " +
                    (dir / "out").string()) == 0);
    const json summary = json::parse(read_text_file(dir / "out" / "summary.json"));
    CHECK(summary["policies"]["never"]["total"].get<double>() == doctest::Approx(3.0));

    SUBCASE("a missing trace is an I/O failure") {
        json missing = config;
        missing["arrivals"]["path"] = (dir / "nope.csv").string();
        write_config(dir / "missing.json", missing);
        CHECK(run_cli("simulate --config " + (dir / "missing.json").string() +
                      " --out " + (dir / "m_out").string()) == 3);
    }
    SUBCASE("a malformed trace is a config failure") {
        write_text_file(dir / "broken.csv", "slot,x,c\n1,1,0.5\n");
        json broken = config;
        broken["arrivals"]["path"] = (dir / "broken.csv").string();
        write_config(dir / "broken.json", broken);
        CHECK(run_cli("simulate --config " + (dir / "broken.json").string() +
                      " --out " + (dir / "b_out").string()) == 2);
    }
}

TEST_CASE("configuration mistakes map to the documented exit codes") {
    const fs::path dir = scratch_dir("exit_codes");
    json good;
    good["params"] = two_level_params(2.0, 1.0, 0.1, 1.0);
    good["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.5}};
    good["rents"] = {{"kind", "constant"}, {"value", 0.4}};
    good["policies"] = {"never"};
    good["horizon"] = 10;

    SUBCASE("broken parameter invariants") {
        json bad = good;
        bad["params"]["c_min"] = 0.0;
        write_config(dir / "bad_params.json", bad);
        CHECK(run_cli("simulate --config " + (dir / "bad_params.json").string() +
                      " --out " + (dir / "out1").string()) == 2);
    }
    SUBCASE("unknown configuration keys") {
        json bad = good;
        bad["horizont"] = 10;
        write_config(dir / "bad_key.json", bad);
        CHECK(run_cli("simulate --config " + (dir / "bad_key.json").string() +
                      " --out " + (dir / "out2").string()) == 2);
    }
    SUBCASE("unparseable JSON") {
        write_text_file(dir / "broken.json", "{ not json");
        CHECK(run_cli("simulate --config " + (dir / "broken.json").string() +
                      " --out " + (dir / "out3").string()) == 2);
    }
    SUBCASE("missing config file") {
        CHECK(run_cli("simulate --config " + (dir / "ghost.json").string() +
                      " --out " + (dir / "out4").string()) == 3);
    }
    SUBCASE("missing required options") {
        CHECK(run_cli("simulate") == 2);
        write_config(dir / "good.json", good);
        CHECK(run_cli("simulate --config " + (dir / "good.json").string()) == 2);
    }
    SUBCASE("unknown policy spec") {
        json bad = good;
        bad["policies"] = {"teleport"};
        write_config(dir / "bad_policy.json", bad);
        CHECK(run_cli("simulate --config " + (dir / "bad_policy.json").string() +
                      " --out " + (dir / "out5").string()) == 2);
    }
}

TEST_CASE("randomized service simulations are reproducible end to end") {
    const fs::path dir = scratch_dir("model2");
    json config;
    config["params"] = three_level_params(5.0, 0.4, 0.5, 1.0, 0.1, 1.0);
    config["arrivals"] = {{"kind", "bernoulli"}, {"p", 0.6}};
    config["rents"] = {{"kind", "uniform"}, {"low", 0.1}, {"high", 1.0}};
    config["policies"] = {"alpha-rr", "always:2"};
    config["model"] = 2;
    config["horizon"] = 500;
    config["seed"] = 13;
    write_config(dir / "config.json", config);

    const std::string base = "simulate --config " + (dir / "config.json").string();
    REQUIRE(run_cli(base + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli(base + " --out " + (dir / "b").string()) == 0);
    CHECK(read_text_file(dir / "a" / "summary.json") ==
          read_text_file(dir / "b" / "summary.json"));
    const json summary = json::parse(read_text_file(dir / "a" / "summary.json"));
    CHECK(summary["model"] == 2);
    // Fully hosted single requests never hit the randomized forwarding path.
    CHECK(summary["policies"]["always:2"]["service"].get<double>() == 0.0);
}
