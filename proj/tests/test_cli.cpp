#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "heavycoin/cli.hpp"

using namespace heavycoin;
using Catch::Approx;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return CliResult{code, out.str(), err.str()};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

}  // namespace

TEST_CASE("parse_args fills the documented defaults") {
    const RunConfig c = parse_args(
        {"simulate", "--p", "0.5", "--epsilon", "0.1", "--alpha", "0.5", "--delta", "0.1"});
    REQUIRE(c.subcommand == "simulate");
    REQUIRE(c.trials == 10'000);
    REQUIRE(c.seed == 42);
    REQUIRE(c.strategy == "likelihood-toss");
    REQUIRE(c.cap == 10'000'000);
    REQUIRE(c.parallelism == 1);
    REQUIRE(c.format == "json");
    REQUIRE(c.output.empty());
    REQUIRE_FALSE(c.deterministic);
}

TEST_CASE("usage and domain errors exit with code 2") {
    SECTION("p not exceeding epsilon names the violated constraint") {
        const CliResult r = run({"simulate", "--p", "0.1", "--epsilon", "0.1", "--alpha",
                                 "0.5", "--delta", "0.1"});
        REQUIRE(r.code == 2);
        REQUIRE(r.err.find("p must exceed epsilon") != std::string::npos);
    }
    SECTION("unknown strategy is rejected") {
        const CliResult r = run({"simulate", "--p", "0.5", "--epsilon", "0.1", "--alpha",
                                 "0.5", "--delta", "0.1", "--strategy", "greedy"});
        REQUIRE(r.code == 2);
        REQUIRE(r.err.find("--strategy") != std::string::npos);
    }
    SECTION("unknown flags are named in the diagnostic") {
        const CliResult r = run({"simulate", "--p", "0.5", "--epsilon", "0.1", "--alpha",
                                 "0.5", "--delta", "0.1", "--bogus", "3"});
        REQUIRE(r.code == 2);
        REQUIRE(r.err.find("--bogus") != std::string::npos);
    }
    SECTION("a missing required option is an error") {
        REQUIRE(run({"simulate", "--p", "0.5"}).code == 2);
    }
    SECTION("a subcommand is required") {
        REQUIRE(run({}).code == 2);
    }
}

TEST_CASE("bounds subcommand emits the closed-form record") {
    const CliResult r = run({"bounds", "--p", "0.5", "--epsilon", "0.1", "--alpha", "0.5",
                             "--delta", "0.1", "--deterministic"});
    REQUIRE(r.code == 0);
    const auto record = nlohmann::json::parse(r.out);
    REQUIRE(record["record"] == "bounds");
    REQUIRE(record["result"]["likelihood_toss_bound"].get<double>() ==
            Approx(5115.559323737952).epsilon(1e-12));
    REQUIRE(record["result"]["naive_bound"].get<double>() ==
            Approx(1842.0680743952366).epsilon(1e-12));
    REQUIRE(record["result"]["naive_budget"].get<std::uint64_t>() == 922);
    REQUIRE(record["result"]["absorption_bounds"]["pi_lower"].get<double>() ==
            Approx(0.05).epsilon(1e-12));
    REQUIRE(record["result"]["boundary_b"].get<double>() ==
            Approx(2.1972245773362196).epsilon(1e-14));
    REQUIRE(record.contains("timestamp") == false);
    REQUIRE(record["config"]["subcommand"] == "bounds");

    SECTION("a small boundary flags the absorption bounds instead of failing") {
        const CliResult flagged = run({"bounds", "--p", "0.5", "--epsilon", "0.1", "--alpha",
                                       "0.5", "--delta", "0.45", "--deterministic"});
        REQUIRE(flagged.code == 0);
        const auto rec = nlohmann::json::parse(flagged.out);
        REQUIRE(rec["result"]["absorption_bounds"].is_null());
        REQUIRE(rec["result"].contains("absorption_bounds_flag"));
    }
}

TEST_CASE("deterministic reports are byte-identical; timestamps otherwise") {
    const std::vector<std::string> args{"simulate", "--p", "0.5",  "--epsilon", "0.1",
                                        "--alpha",  "0.5", "--delta", "0.1",
                                        "--trials", "50",  "--deterministic"};
    const CliResult a = run(args);
    const CliResult b = run(args);
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);

    std::vector<std::string> stamped(args.begin(), args.end() - 1);
    const CliResult c = run(stamped);
    REQUIRE(nlohmann::json::parse(c.out).contains("timestamp"));
}

TEST_CASE("the result payload is independent of the worker count") {
    std::vector<std::string> args{"simulate", "--p", "0.5", "--epsilon", "0.1",
                                  "--alpha", "0.5", "--delta", "0.1", "--trials", "500",
                                  "--deterministic", "--parallelism", "1"};
    const CliResult serial = run(args);
    args.back() = "8";
    const CliResult parallel = run(args);
    REQUIRE(serial.code == 0);
    REQUIRE(parallel.code == 0);
    const auto a = nlohmann::ordered_json::parse(serial.out);
    const auto b = nlohmann::ordered_json::parse(parallel.out);
    // The embedded configs differ in the parallelism field; the summaries
    // must not.
    REQUIRE(a["result"].dump() == b["result"].dump());
}

TEST_CASE("csv is a flattened projection carrying identical values") {
    const std::vector<std::string> base{"bounds", "--p", "0.5", "--epsilon", "0.1",
                                        "--alpha", "0.5", "--delta", "0.1",
                                        "--deterministic"};
    const CliResult as_json = run(base);
    std::vector<std::string> csv_args = base;
    csv_args.insert(csv_args.end(), {"--format", "csv"});
    const CliResult as_csv = run(csv_args);
    REQUIRE(as_csv.code == 0);

    std::istringstream lines(as_csv.out);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    const std::vector<std::string> keys = split_csv_line(header);
    const std::vector<std::string> cells = split_csv_line(row);
    REQUIRE(keys.size() == cells.size());

    const auto record = nlohmann::json::parse(as_json.out);
    const auto cell_for = [&](const std::string& key) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) return cells[i];
        }
        FAIL("missing csv column " + key);
        return std::string{};
    };
    REQUIRE(std::stod(cell_for("result.likelihood_toss_bound")) ==
            record["result"]["likelihood_toss_bound"].get<double>());
    REQUIRE(std::stod(cell_for("result.naive_bound")) ==
            record["result"]["naive_bound"].get<double>());
    REQUIRE(std::stod(cell_for("config.p")) == 0.5);
    REQUIRE(cell_for("record") == "bounds");
}

TEST_CASE("the embedded config reproduces the record") {
    const CliResult first = run({"simulate", "--p", "0.5", "--epsilon", "0.1", "--alpha",
                                 "0.5", "--delta", "0.1", "--trials", "200", "--seed", "9",
                                 "--deterministic"});
    REQUIRE(first.code == 0);
    const auto record = nlohmann::ordered_json::parse(first.out);
    const RunConfig replay = config_from_json(record["config"]);
    std::ostringstream out;
    REQUIRE(execute(replay, out) == 0);
    REQUIRE(out.str() == first.out);
}

TEST_CASE("compare reports all three strategies side by side") {
    const CliResult r = run({"compare", "--p", "0.5", "--epsilon", "0.1", "--alpha", "0.3",
                             "--delta", "0.1", "--trials", "150", "--deterministic"});
    REQUIRE(r.code == 0);
    const auto record = nlohmann::json::parse(r.out);
    const auto& strategies = record["result"]["strategies"];
    REQUIRE(strategies.contains("likelihood-toss"));
    REQUIRE(strategies.contains("naive"));
    REQUIRE(strategies.contains("round-robin"));
    REQUIRE(record["result"]["mean_tosses_ratio_naive_over_likelihood"].get<double>() > 0.0);
    for (const auto& [name, summary] : strategies.items()) {
        REQUIRE(summary["trials"].get<std::uint64_t>() == 150);
        REQUIRE(summary["capped_episodes"].get<std::uint64_t>() == 0);
    }
}

TEST_CASE("grade-check emits monotonicity and joint-oracle reports") {
    const CliResult r = run({"grade-check", "--p", "0.5", "--epsilon", "0.1", "--alpha",
                             "0.5", "--delta", "0.1", "--depth", "4", "--joint-depth", "3",
                             "--deterministic"});
    REQUIRE(r.code == 0);
    const auto record = nlohmann::json::parse(r.out);
    REQUIRE(record["result"]["monotone"].get<bool>());
    REQUIRE(record["result"]["violation"].is_null());
    REQUIRE(record["result"]["joint"]["max_x_action_optimal"].get<bool>());
    REQUIRE(record["result"]["joint"]["violations"].get<std::uint64_t>() == 0);
    REQUIRE(record["result"]["pass"].get<bool>());
    REQUIRE(record["result"]["grades"].size() ==
            record["result"]["lattice_states"].get<std::size_t>());
}

TEST_CASE("cap-dominated experiments exit with code 1 but still report") {
    const CliResult r = run({"simulate", "--p", "0.5", "--epsilon", "0.1", "--alpha", "0.5",
                             "--delta", "0.001", "--trials", "20", "--cap", "3",
                             "--deterministic"});
    REQUIRE(r.code == 1);
    const auto record = nlohmann::json::parse(r.out);
    REQUIRE(record["result"]["capped_episodes"].get<std::uint64_t>() == 20);
}

TEST_CASE("reports can be written to a file") {
    const std::string path = "cli_test_report.json";
    const CliResult r = run({"bounds", "--p", "0.5", "--epsilon", "0.1", "--alpha", "0.5",
                             "--delta", "0.1", "--deterministic", "--output", path});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.empty());
    std::ifstream file(path);
    REQUIRE(file.good());
    nlohmann::json record;
    file >> record;
    REQUIRE(record["record"] == "bounds");
    std::remove(path.c_str());
}
