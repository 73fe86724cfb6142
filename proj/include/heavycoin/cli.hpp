#pragma once
/*
Command-line front end: argument parsing, dispatch, and machine-readable
reports. Every report embeds the fully resolved configuration so a run can
be reproduced from its own output. JSON is the canonical format; CSV is a
flattened projection of the same record.
*/

#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavycoin/analysis.hpp"
#include "heavycoin/engine.hpp"
#include "heavycoin/grade.hpp"
#include "heavycoin/model.hpp"
#include "heavycoin/strategy.hpp"

namespace heavycoin {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
    std::string subcommand;
    double p = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    std::string strategy = "likelihood-toss";
    std::uint64_t trials = 10'000;
    std::uint64_t seed = 42;
    unsigned parallelism = 1;
    std::uint64_t cap = 10'000'000;
    double depth = 6.0;
    double tol = 1e-6;
    double joint_depth = 4.0;
    double joint_tol = 1e-8;
    std::string format = "json";
    std::string output;  // empty means stdout
    bool deterministic = false;
};

inline ordered_json config_to_json(const RunConfig& c) {
    return ordered_json{{"subcommand", c.subcommand},
                        {"p", c.p},
                        {"epsilon", c.epsilon},
                        {"alpha", c.alpha},
                        {"delta", c.delta},
                        {"strategy", c.strategy},
                        {"trials", c.trials},
                        {"seed", c.seed},
                        {"parallelism", c.parallelism},
                        {"cap", c.cap},
                        {"depth", c.depth},
                        {"tol", c.tol},
                        {"joint_depth", c.joint_depth},
                        {"joint_tol", c.joint_tol},
                        {"format", c.format},
                        {"output", c.output},
                        {"deterministic", c.deterministic}};
}

inline RunConfig config_from_json(const ordered_json& j) {
    RunConfig c;
    c.subcommand = j.at("subcommand").get<std::string>();
    c.p = j.at("p").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.delta = j.at("delta").get<double>();
    c.strategy = j.at("strategy").get<std::string>();
    c.trials = j.at("trials").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.parallelism = j.at("parallelism").get<unsigned>();
    c.cap = j.at("cap").get<std::uint64_t>();
    c.depth = j.at("depth").get<double>();
    c.tol = j.at("tol").get<double>();
    c.joint_depth = j.at("joint_depth").get<double>();
    c.joint_tol = j.at("joint_tol").get<double>();
    c.format = j.at("format").get<std::string>();
    c.output = j.at("output").get<std::string>();
    c.deterministic = j.at("deterministic").get<bool>();
    return c;
}

namespace detail {

inline void add_common_options(CLI::App* cmd, RunConfig& c, bool with_experiment,
                               bool with_grade) {
    cmd->add_option("--p", c.p, "prior-mean heads parameter p")->required();
    cmd->add_option("--epsilon", c.epsilon, "bias gap epsilon, in (0, 0.5)")->required();
    cmd->add_option("--alpha", c.alpha, "prior heavy probability alpha, in (0, 1)")->required();
    cmd->add_option("--delta", c.delta, "error tolerance delta, in (0, 1)")->required();
    if (with_experiment) {
        cmd->add_option("--trials", c.trials, "number of episodes")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
        cmd->add_option("--parallelism", c.parallelism, "worker threads")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--cap", c.cap, "per-episode toss safety cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
    if (with_grade) {
        cmd->add_option("--depth", c.depth, "lattice truncation depth M")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--tol", c.tol, "grade tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--joint-depth", c.joint_depth, "joint-game truncation depth")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--joint-tol", c.joint_tol, "joint-game tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--output", c.output, "write the report to this path instead of stdout");
    cmd->add_flag("--deterministic", c.deterministic,
                  "omit the timestamp so identical runs emit identical bytes");
}

inline std::unique_ptr<CLI::App> build_app(RunConfig& c) {
    auto app = std::make_unique<CLI::App>(
        "heavycoin: adaptive identification of a most-biased coin", "heavycoin");
    app->require_subcommand(1);

    CLI::App* simulate = app->add_subcommand(
        "simulate", "run seeded Monte Carlo episodes of one strategy");
    add_common_options(simulate, c, true, false);
    simulate->add_option("--strategy", c.strategy,
                         "likelihood-toss | naive | round-robin | uniform-random")
        ->check(CLI::IsMember({"likelihood-toss", "naive", "round-robin", "uniform-random"}))
        ->capture_default_str();

    CLI::App* bounds = app->add_subcommand(
        "bounds", "closed-form toss bounds and walk constants");
    add_common_options(bounds, c, false, false);

    CLI::App* grade = app->add_subcommand(
        "grade-check", "grade monotonicity and joint Bellman verification");
    add_common_options(grade, c, false, true);

    CLI::App* compare = app->add_subcommand(
        "compare", "likelihood-toss vs naive vs round-robin under one seed");
    add_common_options(compare, c, true, false);

    for (CLI::App* cmd : {simulate, bounds, grade, compare}) {
        cmd->callback([&c, cmd] { c.subcommand = cmd->get_name(); });
    }
    return app;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline ordered_json summary_to_json(const ExperimentSummary& s) {
    return ordered_json{{"trials", s.trials},
                        {"seed", s.seed},
                        {"success_rate", s.success_rate},
                        {"se_success", s.se_success},
                        {"mean_tosses", s.mean_tosses},
                        {"se_mean_tosses", s.se_mean_tosses},
                        {"mean_coins_opened", s.mean_coins_opened},
                        {"tosses_min", s.tosses_min},
                        {"tosses_q50", s.tosses_q50},
                        {"tosses_q90", s.tosses_q90},
                        {"tosses_q99", s.tosses_q99},
                        {"tosses_max", s.tosses_max},
                        {"capped_episodes", s.capped_episodes}};
}

inline void flatten_json(const ordered_json& node, const std::string& prefix,
                         std::vector<std::pair<std::string, std::string>>& cells) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            flatten_json(value, prefix.empty() ? key : prefix + "." + key, cells);
        }
    } else if (node.is_array()) {
        std::size_t i = 0;
        for (const auto& value : node) {
            flatten_json(value, prefix + "[" + std::to_string(i++) + "]", cells);
        }
    } else if (node.is_string()) {
        cells.emplace_back(prefix, node.get<std::string>());
    } else {
        cells.emplace_back(prefix, node.dump());
    }
}

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string to_csv(const ordered_json& record) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten_json(record, "", cells);
    std::string header, row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            header += ',';
            row += ',';
        }
        header += csv_escape(cells[i].first);
        row += csv_escape(cells[i].second);
    }
    return header + "\n" + row + "\n";
}

}  // namespace detail

// Parses a full argument list (excluding the program name). Throws
// CLI::ParseError on usage errors and std::invalid_argument on parameter
// domain violations.
inline RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig config;
    auto app = detail::build_app(config);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
    ProblemParams::create(config.p, config.epsilon, config.alpha, config.delta);
    return config;
}

// Runs the configured subcommand and writes the report. Returns 0 on
// success and 1 when more than 1% of any experiment's episodes hit the
// safety cap. Numerical failures propagate as exceptions.
inline int execute(const RunConfig& config, std::ostream& out) {
    const ProblemParams params =
        ProblemParams::create(config.p, config.epsilon, config.alpha, config.delta);

    ordered_json record;
    record["record"] = config.subcommand;
    record["config"] = config_to_json(config);
    if (!config.deterministic) record["timestamp"] = detail::utc_timestamp();

    int exit_code = 0;
    const auto cap_dominated = [&](const ExperimentSummary& s) {
        return static_cast<double>(s.capped_episodes) >
               0.01 * static_cast<double>(s.trials);
    };

    if (config.subcommand == "simulate") {
        const ExperimentSummary summary =
            run_experiment(params, parse_policy(config.strategy), config.trials, config.seed,
                           config.parallelism, config.cap);
        record["result"] = detail::summary_to_json(summary);
        if (cap_dominated(summary)) exit_code = 1;
    } else if (config.subcommand == "compare") {
        ordered_json strategies;
        double lt_mean = 0.0;
        for (PolicyKind kind :
             {PolicyKind::LikelihoodToss, PolicyKind::Naive, PolicyKind::RoundRobin}) {
            const ExperimentSummary summary = run_experiment(
                params, kind, config.trials, config.seed, config.parallelism, config.cap);
            strategies[policy_name(kind)] = detail::summary_to_json(summary);
            if (kind == PolicyKind::LikelihoodToss) lt_mean = summary.mean_tosses;
            if (cap_dominated(summary)) exit_code = 1;
        }
        record["result"] = ordered_json{
            {"strategies", strategies},
            {"mean_tosses_ratio_naive_over_likelihood",
             strategies["naive"]["mean_tosses"].get<double>() / lt_mean},
            {"mean_tosses_ratio_round_robin_over_likelihood",
             strategies["round-robin"]["mean_tosses"].get<double>() / lt_mean}};
    } else if (config.subcommand == "bounds") {
        ordered_json result{{"delta_h", params.delta_h},
                            {"delta_t", params.delta_t},
                            {"boundary_b", params.boundary_b},
                            {"naive_budget", naive_toss_budget(params)},
                            {"naive_bound", naive_toss_bound(params)},
                            {"likelihood_toss_bound", likelihood_toss_bound(params)},
                            {"composite_bound", composite_toss_bound(params)}};
        try {
            const AbsorptionBounds ab = absorption_bounds(params);
            result["absorption_bounds"] = ordered_json{{"pi_lower", ab.pi_lower},
                                                       {"d_over_pi_upper", ab.d_over_pi_upper},
                                                       {"c_upper", ab.c_upper}};
        } catch (const std::invalid_argument& e) {
            result["absorption_bounds"] = nullptr;
            result["absorption_bounds_flag"] = e.what();
        }
        for (CoinNature nature : {CoinNature::Heavy, CoinNature::Light}) {
            const WalkSpec walk = conditioned_coin_walk(params, nature);
            ordered_json w{{"up_prob", walk.up_prob}, {"drift", walk.drift()}};
            if (walk.drift() != 0.0 && walk.upper_barrier > 0.0) {
                w["rho0"] = solve_rho0(walk);
                w["rho_min"] = rho_min(walk);
            }
            result[nature == CoinNature::Heavy ? "heavy_walk" : "light_walk"] = w;
        }
        record["result"] = result;
    } else if (config.subcommand == "grade-check") {
        const GradeTable table = compute_grade_table(params, config.depth, config.tol);
        const MonotonicityReport mono = check_monotonicity(table, config.tol);
        ordered_json grades = ordered_json::array();
        for (const GradeEntry& e : table.entries) {
            grades.push_back(ordered_json{{"x", e.state.x},
                                          {"heads", e.state.heads},
                                          {"tails", e.state.tails},
                                          {"gamma", e.gamma}});
        }
        ordered_json result{{"depth", config.depth},
                            {"tol", config.tol},
                            {"start_is_target", table.start_is_target},
                            {"lattice_states", table.entries.size()},
                            {"grades", grades},
                            {"monotone", mono.monotone},
                            {"max_excess", mono.max_excess}};
        if (mono.violation) {
            const auto& [i, j] = *mono.violation;
            result["violation"] = ordered_json{{"low_x", table.entries[i].state.x},
                                               {"low_gamma", table.entries[i].gamma},
                                               {"high_x", table.entries[j].state.x},
                                               {"high_gamma", table.entries[j].gamma}};
        } else {
            result["violation"] = nullptr;
        }
        const JointOracleReport joint =
            joint_bellman_oracle(params, config.joint_depth, config.joint_tol);
        result["joint"] = ordered_json{{"depth", config.joint_depth},
                                       {"tol", config.joint_tol},
                                       {"joint_states", joint.joint_states},
                                       {"max_x_action_optimal", joint.max_x_action_optimal},
                                       {"violations", joint.violations},
                                       {"max_gap", joint.max_gap},
                                       {"tie_states", joint.tie_states},
                                       {"reduction_note", joint.reduction_note}};
        result["pass"] = mono.monotone && joint.max_x_action_optimal;
        record["result"] = result;
    } else {
        throw std::logic_error("unknown subcommand: " + config.subcommand);
    }

    const std::string text =
        config.format == "csv" ? detail::to_csv(record) : record.dump(2) + "\n";
    if (config.output.empty()) {
        out << text;
    } else {
        std::ofstream file(config.output, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open output file: " + config.output);
        file << text;
    }
    return exit_code;
}

// Entry point shared by the binary and the tests: maps usage errors to exit
// code 2 and numerical failures to exit code 1.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    RunConfig config;
    auto app = detail::build_app(config);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app->parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app->exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app->exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app->exit(e, out, err);
        return 2;
    }
    try {
        ProblemParams::create(config.p, config.epsilon, config.alpha, config.delta);
    } catch (const std::invalid_argument& e) {
        err << "parameter error: " << e.what() << "\n";
        return 2;
    }
    try {
        return execute(config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace heavycoin
