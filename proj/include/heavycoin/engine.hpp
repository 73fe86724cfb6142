#pragma once
/*
Seeded Monte Carlo engine. Natures are sampled lazily when a coin is first
tossed, episodes run a policy to termination (or a safety cap), and
experiments derive one independent random stream per trial from
(master_seed, trial index), so summaries are bit-identical for any level of
parallelism.
*/

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "heavycoin/analysis.hpp"
#include "heavycoin/model.hpp"
#include "heavycoin/random.hpp"
#include "heavycoin/strategy.hpp"

namespace heavycoin {

inline CoinNature sample_nature(RandomStream& rng, double alpha) {
    return rng.bernoulli(alpha) ? CoinNature::Heavy : CoinNature::Light;
}

inline TossOutcome toss(RandomStream& rng, CoinNature nature, const ProblemParams& params) {
    return rng.bernoulli(heads_probability(nature, params)) ? TossOutcome::Heads
                                                            : TossOutcome::Tails;
}

struct EpisodeResult {
    CoinNature winner_nature = CoinNature::Light;  // meaningful iff !capped
    std::uint64_t tosses = 0;
    std::uint64_t coins_opened = 0;
    bool correct = false;
    bool capped = false;

    bool operator==(const EpisodeResult&) const = default;
};

inline EpisodeResult run_episode(const ProblemParams& params, PolicyKind policy,
                                 RandomStream& rng, std::uint64_t cap = 10'000'000) {
    if (cap == 0) throw std::invalid_argument("toss cap must be positive");
    StrategyState state(policy, params);
    std::vector<CoinNature> natures;
    std::uint64_t tosses = 0;
    while (!state.winner() && tosses < cap) {
        const CoinChoice choice = state.select_next(rng);
        if (choice.is_fresh) natures.push_back(sample_nature(rng, params.alpha));
        const CoinNature nature = choice.is_fresh ? natures.back() : natures[choice.index];
        state.record_outcome(choice, toss(rng, nature, params));
        ++tosses;
    }
    if (tosses != state.total_tosses()) throw std::logic_error("toss accounting mismatch");

    EpisodeResult result;
    result.tosses = tosses;
    result.coins_opened = natures.size();
    result.capped = !state.winner().has_value();
    if (!result.capped) {
        result.winner_nature = natures[*state.winner()];
        result.correct = result.winner_nature == CoinNature::Heavy;
    }
    return result;
}

struct ExperimentSummary {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double success_rate = 0.0;
    double se_success = 0.0;
    double mean_tosses = 0.0;
    double se_mean_tosses = 0.0;
    double mean_coins_opened = 0.0;
    std::uint64_t tosses_min = 0;
    std::uint64_t tosses_q50 = 0;
    std::uint64_t tosses_q90 = 0;
    std::uint64_t tosses_q99 = 0;
    std::uint64_t tosses_max = 0;
    std::uint64_t capped_episodes = 0;

    bool operator==(const ExperimentSummary&) const = default;
};

namespace detail {

// Nearest-rank quantile of a sorted sample.
inline std::uint64_t quantile(const std::vector<std::uint64_t>& sorted, double fraction) {
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    if (rank > 0) --rank;
    return sorted[std::min(rank, n - 1)];
}

}  // namespace detail

// Runs `trials` independent episodes. Episode i draws from a stream seeded
// by (master_seed, i) alone and results are reduced in index order, so the
// summary does not depend on how trials are scheduled across workers.
inline ExperimentSummary run_experiment(const ProblemParams& params, PolicyKind policy,
                                        std::uint64_t trials, std::uint64_t master_seed,
                                        unsigned parallelism = 1,
                                        std::uint64_t cap = 10'000'000) {
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    std::vector<EpisodeResult> results(trials);
    const auto run_trial = [&](std::uint64_t i) {
        RandomStream rng(derive_stream_seed(master_seed, i));
        results[i] = run_episode(params, policy, rng, cap);
    };
    if (parallelism <= 1) {
        for (std::uint64_t i = 0; i < trials; ++i) run_trial(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(parallelism);
        for (unsigned w = 0; w < parallelism; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= trials) return;
                    run_trial(i);
                }
            });
        }
        for (std::thread& t : workers) t.join();
    }

    ExperimentSummary s;
    s.trials = trials;
    s.seed = master_seed;
    std::uint64_t successes = 0;
    double sum_tosses = 0.0;
    double sum_opened = 0.0;
    std::vector<std::uint64_t> tosses;
    tosses.reserve(trials);
    for (const EpisodeResult& r : results) {
        successes += r.correct ? 1 : 0;
        s.capped_episodes += r.capped ? 1 : 0;
        sum_tosses += static_cast<double>(r.tosses);
        sum_opened += static_cast<double>(r.coins_opened);
        tosses.push_back(r.tosses);
    }
    const double n = static_cast<double>(trials);
    s.success_rate = static_cast<double>(successes) / n;
    s.se_success = std::sqrt(s.success_rate * (1.0 - s.success_rate) / n);
    s.mean_tosses = sum_tosses / n;
    s.mean_coins_opened = sum_opened / n;
    if (trials > 1) {
        double ss = 0.0;
        for (const EpisodeResult& r : results) {
            const double d = static_cast<double>(r.tosses) - s.mean_tosses;
            ss += d * d;
        }
        s.se_mean_tosses = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    std::sort(tosses.begin(), tosses.end());
    s.tosses_min = tosses.front();
    s.tosses_q50 = detail::quantile(tosses, 0.50);
    s.tosses_q90 = detail::quantile(tosses, 0.90);
    s.tosses_q99 = detail::quantile(tosses, 0.99);
    s.tosses_max = tosses.back();
    return s;
}

struct WalkOutcome {
    bool absorbed_at_upper = false;
    std::uint64_t steps = 0;
};

// Simulates a two-step walk from 0 until it is absorbed at or beyond a
// barrier (<= -L or >= W).
inline WalkOutcome simulate_walk(const WalkSpec& walk, RandomStream& rng,
                                 std::uint64_t max_steps = 100'000'000) {
    validate(walk);
    double x = 0.0;
    WalkOutcome out;
    while (x > -walk.lower_barrier && x < walk.upper_barrier) {
        if (out.steps >= max_steps) throw ConvergenceError("walk did not absorb");
        x += rng.bernoulli(walk.up_prob) ? walk.up_step : -walk.down_step;
        ++out.steps;
    }
    out.absorbed_at_upper = x >= walk.upper_barrier;
    return out;
}

// Simulates the log-likelihood walk of a coin with known nature: absorbed at
// B from above and at any state strictly below 0.
inline WalkOutcome simulate_coin_walk(const ProblemParams& params, CoinNature nature,
                                      double start_x, RandomStream& rng,
                                      std::uint64_t max_steps = 100'000'000) {
    const double up_prob = heads_probability(nature, params);
    double x = start_x;
    WalkOutcome out;
    while (x >= 0.0 && x < params.boundary_b) {
        if (out.steps >= max_steps) throw ConvergenceError("coin walk did not absorb");
        x += rng.bernoulli(up_prob) ? params.delta_h : -params.delta_t;
        ++out.steps;
    }
    out.absorbed_at_upper = x >= params.boundary_b;
    return out;
}

}  // namespace heavycoin
