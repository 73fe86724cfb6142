#pragma once
/*
Selection policies: which coin to toss next, and when to stop.

likelihood-toss  toss the coin with maximal log-likelihood; a fresh coin
                 counts as a candidate at X = 0. Stop as soon as a coin's
                 log-likelihood reaches the boundary B. Selection uses an
                 addressable max-heap, so each step costs O(log n_opened).
round-robin      cycle through the opened coins in order, then open a fresh
                 one; same stopping rule.
naive            toss one coin k = ceil((4/eps^2) log(1/delta)) times; accept
                 it if its empirical heads fraction is at least p - eps/2,
                 otherwise discard it and start a fresh coin.
uniform-random   toss a uniformly random coin among opened + fresh; same
                 stopping rule as likelihood-toss.
*/

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavycoin/indexed_max_heap.hpp"
#include "heavycoin/model.hpp"
#include "heavycoin/random.hpp"

namespace heavycoin {

enum class PolicyKind { LikelihoodToss, RoundRobin, Naive, UniformRandom };

inline std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::LikelihoodToss: return "likelihood-toss";
        case PolicyKind::RoundRobin: return "round-robin";
        case PolicyKind::Naive: return "naive";
        case PolicyKind::UniformRandom: return "uniform-random";
    }
    throw std::logic_error("unknown policy kind");
}

inline PolicyKind parse_policy(const std::string& name) {
    if (name == "likelihood-toss") return PolicyKind::LikelihoodToss;
    if (name == "round-robin") return PolicyKind::RoundRobin;
    if (name == "naive") return PolicyKind::Naive;
    if (name == "uniform-random") return PolicyKind::UniformRandom;
    throw std::invalid_argument("unknown strategy: " + name);
}

// Per-coin toss budget of the naive policy.
inline std::uint64_t naive_toss_budget(const ProblemParams& params) {
    const double k = (4.0 / (params.epsilon * params.epsilon)) * std::log(1.0 / params.delta);
    return static_cast<std::uint64_t>(std::ceil(k));
}

// Either an already-opened coin or a fresh one from the infinite supply.
// The supply is realized lazily: a single virtual candidate at X = 0 that is
// materialized the first time it is tossed.
struct CoinChoice {
    static CoinChoice fresh() { return CoinChoice{true, 0}; }
    static CoinChoice opened(std::size_t index) { return CoinChoice{false, index}; }

    bool is_fresh = true;
    std::size_t index = 0;
};

// State of one episode under one policy. Owns the opened coins' histories
// and the policy bookkeeping; confined to a single episode.
class StrategyState {
public:
    StrategyState(PolicyKind policy, const ProblemParams& params)
        : policy_(policy), params_(params) {
        if (policy_ == PolicyKind::Naive) naive_budget_ = naive_toss_budget(params_);
    }

    PolicyKind policy() const { return policy_; }
    const ProblemParams& params() const { return params_; }
    const std::vector<CoinState>& opened() const { return coins_; }
    std::uint64_t total_tosses() const { return tosses_; }

    // Identifier of the first coin whose log-likelihood reached the boundary
    // (or that the naive policy accepted), if any.
    std::optional<std::size_t> winner() const { return winner_; }

    // Log-likelihood of the winner at the moment it won. For B <= 0 this is
    // the materialization value 0, not the post-toss value.
    double winner_log_likelihood() const {
        if (!winner_) throw std::logic_error("no winner yet");
        return winner_x_;
    }

    CoinChoice select_next(RandomStream& rng) const {
        if (winner_) throw std::logic_error("select_next() after winner is set");
        switch (policy_) {
            case PolicyKind::LikelihoodToss:
                // A fresh coin sits at X = 0; an opened coin wins ties.
                if (heap_.empty() || heap_.top_key() < 0.0) return CoinChoice::fresh();
                return CoinChoice::opened(heap_.top());
            case PolicyKind::RoundRobin:
                if (rr_cursor_ < coins_.size()) return CoinChoice::opened(rr_cursor_);
                return CoinChoice::fresh();
            case PolicyKind::Naive:
                if (coins_.empty() || naive_rejected_) return CoinChoice::fresh();
                return CoinChoice::opened(coins_.size() - 1);
            case PolicyKind::UniformRandom: {
                const std::uint64_t j = rng.below(coins_.size() + 1);
                if (j == coins_.size()) return CoinChoice::fresh();
                return CoinChoice::opened(static_cast<std::size_t>(j));
            }
        }
        throw std::logic_error("unknown policy kind");
    }

    void record_outcome(CoinChoice choice, TossOutcome outcome) {
        if (winner_) throw std::logic_error("record_outcome() after winner is set");
        std::size_t idx;
        bool materialized = false;
        if (choice.is_fresh) {
            idx = coins_.size();
            coins_.push_back(CoinState{});
            materialized = true;
            if (policy_ == PolicyKind::LikelihoodToss) heap_.push(idx, 0.0);
        } else {
            if (choice.index >= coins_.size()) {
                throw std::logic_error("record_outcome() for unopened coin");
            }
            idx = choice.index;
        }

        coins_[idx] = update_on_toss(coins_[idx], outcome, params_);
        ++tosses_;
        if (policy_ == PolicyKind::LikelihoodToss) {
            heap_.update(idx, coins_[idx].log_likelihood);
        }

        if (policy_ == PolicyKind::Naive) {
            if (materialized) naive_rejected_ = false;
            const CoinState& c = coins_[idx];
            if (c.heads + c.tails >= naive_budget_) {
                const double fraction =
                    static_cast<double>(c.heads) / static_cast<double>(c.heads + c.tails);
                if (fraction >= params_.p - params_.epsilon / 2.0) {
                    winner_ = idx;
                    winner_x_ = c.log_likelihood;
                } else {
                    naive_rejected_ = true;
                }
            }
        } else {
            if (coins_[idx].log_likelihood >= params_.boundary_b) {
                winner_ = idx;
                winner_x_ = coins_[idx].log_likelihood;
            } else if (materialized && 0.0 >= params_.boundary_b) {
                // Degenerate B <= 0: the coin was already at the boundary the
                // moment it was opened; the prior alone meets the target.
                winner_ = idx;
                winner_x_ = 0.0;
            }
        }

        if (policy_ == PolicyKind::RoundRobin) {
            rr_cursor_ = choice.is_fresh ? 0 : idx + 1;
        }
    }

    // Audit hook: the selection structure's maximum must agree with a linear
    // scan over the opened coins. Trivially true for policies that do not
    // keep a heap.
    bool selection_max_consistent() const {
        if (policy_ != PolicyKind::LikelihoodToss) return true;
        if (!heap_.audit()) return false;
        if (heap_.size() != coins_.size()) return false;
        if (coins_.empty()) return true;
        double best = coins_[0].log_likelihood;
        for (const CoinState& c : coins_) {
            if (c.log_likelihood > best) best = c.log_likelihood;
        }
        return heap_.top_key() == best && heap_.max_key_by_scan() == best;
    }

private:
    PolicyKind policy_;
    ProblemParams params_;
    std::vector<CoinState> coins_;
    IndexedMaxHeap heap_;
    std::uint64_t tosses_ = 0;
    std::size_t rr_cursor_ = 0;
    std::uint64_t naive_budget_ = 0;
    bool naive_rejected_ = false;
    std::optional<std::size_t> winner_;
    double winner_x_ = 0.0;
};

}  // namespace heavycoin
