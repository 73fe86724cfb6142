#pragma once
/*
Numerical grade function of the log-likelihood Markov system.

The system's states are the reachable log-likelihood values below the
boundary B; from x the walk moves to min{x + delta_h, B} with probability
P(Heads | x) and to x - delta_t otherwise, at cost 1 per step, and B is the
target. The grade gamma(x) is the smallest quit cost g at which playing on
from x is optimal in the play-or-quit game; the optimal multi-coin strategy
tosses the coin of minimal grade.

The unbounded negative tail is truncated at a depth -M: a transition below
-M is treated as quitting at cost g. The truncation error at the states that
matter is controlled empirically by recomputing with 2M (quitting is optimal
well above the cutoff for every quit cost near those states' grades).

quit_game_value   value of the play-or-quit game at fixed quit cost g, by
                  synchronous value iteration.
grade_of          gamma(x) by bisection on g for the crossover where playing
                  first becomes optimal.
joint_bellman_oracle
                  solves the two-coins-plus-fresh joint game by value
                  iteration and reports whether tossing the coin of maximal
                  log-likelihood (a fresh coin counting as 0) attains the
                  Bellman minimum at every joint state.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "heavycoin/analysis.hpp"
#include "heavycoin/model.hpp"

namespace heavycoin {

struct LatticeState {
    std::uint64_t heads = 0;  // representative history reaching x
    std::uint64_t tails = 0;
    double x = 0.0;
};

// Reachable interior states of the truncated system, sorted by x.
// States whose log-likelihoods agree within 1e-9 are merged: the value
// function depends on x only, and for commensurate steps (delta_h == delta_t)
// the (h, t) histories collapse onto multiples of the common step.
class Lattice {
public:
    static constexpr std::int32_t kTarget = -1;  // absorbed at B
    static constexpr std::int32_t kCutoff = -2;  // truncated below -M

    static Lattice build(const ProblemParams& params, double depth,
                         std::size_t max_states = 200'000) {
        if (!(depth > 0.0)) throw std::invalid_argument("lattice depth must be positive");
        Lattice lat;
        lat.params_ = params;
        lat.depth_ = depth;
        if (params.boundary_b <= 0.0) return lat;  // the start is already the target

        std::unordered_map<std::int64_t, std::size_t> seen;
        std::vector<LatticeState> found;
        std::queue<std::size_t> frontier;
        const auto visit = [&](std::uint64_t h, std::uint64_t t, double x) {
            if (lookup(seen, found, x) != kNotFound) return;
            if (found.size() >= max_states) {
                // TODO: an interpolating value iteration over a fixed x-grid
                // would support incommensurate steps; for now only step pairs
                // that collapse to a common lattice (p = 1/2) scale to useful
                // depths.
                throw std::runtime_error(
                    "lattice overflow: incommensurate steps fill the truncation window; "
                    "reduce the depth");
            }
            seen.emplace(key_of(x), found.size());
            found.push_back(LatticeState{h, t, x});
            frontier.push(found.size() - 1);
        };
        visit(0, 0, 0.0);
        while (!frontier.empty()) {
            const LatticeState s = found[frontier.front()];
            frontier.pop();
            const double up = s.x + params.delta_h;
            if (up < params.boundary_b) visit(s.heads + 1, s.tails, up);
            const double down = s.x - params.delta_t;
            if (down > -depth) visit(s.heads, s.tails + 1, down);
        }

        std::sort(found.begin(), found.end(),
                  [](const LatticeState& a, const LatticeState& b) { return a.x < b.x; });
        lat.states_ = std::move(found);
        seen.clear();
        for (std::size_t i = 0; i < lat.states_.size(); ++i) {
            seen.emplace(key_of(lat.states_[i].x), i);
        }
        lat.up_.resize(lat.states_.size());
        lat.down_.resize(lat.states_.size());
        lat.heads_prob_.resize(lat.states_.size());
        for (std::size_t i = 0; i < lat.states_.size(); ++i) {
            const double x = lat.states_[i].x;
            lat.heads_prob_[i] = heads_prob_given_state(x, params);
            const double up = x + params.delta_h;
            if (up >= params.boundary_b) {
                lat.up_[i] = kTarget;
            } else {
                const std::int32_t j = lookup(seen, lat.states_, up);
                if (j == kNotFound) throw std::logic_error("lattice not closed under up-step");
                lat.up_[i] = j;
            }
            const double down = x - params.delta_t;
            if (down <= -depth) {
                lat.down_[i] = kCutoff;
            } else {
                const std::int32_t j = lookup(seen, lat.states_, down);
                if (j == kNotFound) throw std::logic_error("lattice not closed under down-step");
                lat.down_[i] = j;
            }
        }
        lat.start_ = static_cast<std::size_t>(lookup(seen, lat.states_, 0.0));
        lat.index_ = std::move(seen);
        return lat;
    }

    const ProblemParams& params() const { return params_; }
    double depth() const { return depth_; }
    const std::vector<LatticeState>& states() const { return states_; }
    bool start_is_target() const { return params_.boundary_b <= 0.0; }
    std::size_t start_index() const { return start_; }
    std::int32_t up(std::size_t i) const { return up_[i]; }
    std::int32_t down(std::size_t i) const { return down_[i]; }
    double heads_prob(std::size_t i) const { return heads_prob_[i]; }

    std::optional<std::size_t> index_of(double x) const {
        const std::int32_t j = lookup(index_, states_, x);
        if (j == kNotFound) return std::nullopt;
        return static_cast<std::size_t>(j);
    }

private:
    static constexpr double kMergeTol = 1e-9;
    static constexpr std::int32_t kNotFound = -3;

    static std::int64_t key_of(double x) {
        return static_cast<std::int64_t>(std::llround(x / kMergeTol));
    }

    // Tolerance-aware hash lookup: checks the key bucket and both neighbours
    // so values within kMergeTol of each other always collide.
    static std::int32_t lookup(const std::unordered_map<std::int64_t, std::size_t>& seen,
                               const std::vector<LatticeState>& states, double x) {
        const std::int64_t k = key_of(x);
        for (std::int64_t probe : {k, k - 1, k + 1}) {
            const auto it = seen.find(probe);
            if (it != seen.end() && std::fabs(states[it->second].x - x) <= kMergeTol) {
                return static_cast<std::int32_t>(it->second);
            }
        }
        return kNotFound;
    }

    ProblemParams params_;
    double depth_ = 0.0;
    std::vector<LatticeState> states_;
    std::vector<std::int32_t> up_;
    std::vector<std::int32_t> down_;
    std::vector<double> heads_prob_;
    std::unordered_map<std::int64_t, std::size_t> index_;
    std::size_t start_ = 0;
};

namespace detail {

constexpr std::uint64_t kValueIterationCap = 1'000'000;

// One synchronous sweep of the play-or-quit Bellman operator at quit cost g.
// V(target) = 0 and V(below cutoff) = g are implicit.
inline double quit_game_sweep(double g, const Lattice& lattice, std::vector<double>& value,
                              std::vector<double>& scratch) {
    const std::size_t n = lattice.states().size();
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t up = lattice.up(i);
        const std::int32_t down = lattice.down(i);
        const double vu = up == Lattice::kTarget ? 0.0 : value[static_cast<std::size_t>(up)];
        const double vd = down == Lattice::kCutoff ? g : value[static_cast<std::size_t>(down)];
        const double h = lattice.heads_prob(i);
        const double play = 1.0 + h * vu + (1.0 - h) * vd;
        const double next = std::min(g, play);
        change = std::max(change, std::fabs(next - value[i]));
        scratch[i] = next;
    }
    value.swap(scratch);
    return change;
}

inline void quit_game_solve(double g, const Lattice& lattice, double value_tol,
                            std::vector<double>& value) {
    const std::size_t n = lattice.states().size();
    value.resize(n);
    for (double& v : value) v = std::min(v, g);  // keep warm starts feasible
    std::vector<double> scratch(n);
    for (std::uint64_t iter = 0; iter < kValueIterationCap; ++iter) {
        if (quit_game_sweep(g, lattice, value, scratch) <= value_tol) return;
    }
    throw ConvergenceError(
        "quit-game value iteration did not converge; depth or tolerance too demanding");
}

// Cost of playing one step from state i and continuing optimally under V.
inline double play_value(double g, std::size_t i, const Lattice& lattice,
                         const std::vector<double>& value) {
    const std::int32_t up = lattice.up(i);
    const std::int32_t down = lattice.down(i);
    const double vu = up == Lattice::kTarget ? 0.0 : value[static_cast<std::size_t>(up)];
    const double vd = down == Lattice::kCutoff ? g : value[static_cast<std::size_t>(down)];
    const double h = lattice.heads_prob(i);
    return 1.0 + h * vu + (1.0 - h) * vd;
}

}  // namespace detail

// Converged value table of the play-or-quit game at quit cost g, one entry
// per lattice state, to `tol` in sup norm.
inline std::vector<double> quit_game_values(double g, const Lattice& lattice, double tol) {
    if (!(g >= 0.0)) throw std::invalid_argument("quit cost must be >= 0");
    std::vector<double> value(lattice.states().size(), 0.0);
    detail::quit_game_solve(g, lattice, tol, value);
    return value;
}

// Value of the play-or-quit game started at `state` with quit cost g,
// converged to `tol` in sup norm.
inline double quit_game_value(double g, std::size_t state, const Lattice& lattice,
                              double tol) {
    if (lattice.start_is_target()) return 0.0;
    return quit_game_values(g, lattice, tol)[state];
}

// 1 + E[V_g(next from state)]: the cost of playing the first step and then
// continuing optimally at quit cost g. The grade of `state` is the smallest
// g at which this does not exceed g.
inline double play_first_value(double g, std::size_t state, const Lattice& lattice,
                               double tol) {
    const std::vector<double> value = quit_game_values(g, lattice, tol);
    return detail::play_value(g, state, lattice, value);
}

// gamma(state): bisection on g for the smallest quit cost at which playing
// the first step is optimal, i.e. 1 + E[V_g(next)] <= g. The bracket starts
// at 4x the closed-form toss bound and doubles until it contains the
// crossover (deep states' grades can exceed any fixed multiple of it).
inline double grade_of(std::size_t state, const Lattice& lattice, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (lattice.start_is_target()) return 0.0;
    const double value_tol = tol / 10.0;
    std::vector<double> value(lattice.states().size(), 0.0);
    const auto play_minus_quit = [&](double g) {
        detail::quit_game_solve(g, lattice, value_tol, value);
        return detail::play_value(g, state, lattice, value) - g;
    };
    double lo = 0.0;
    double hi = std::max(2.0, 4.0 * likelihood_toss_bound(lattice.params()));
    int doublings = 0;
    while (play_minus_quit(hi) > 0.0) {
        hi *= 2.0;
        if (++doublings > 64) throw ConvergenceError("grade bracket expansion failed");
    }
    while (hi - lo > tol / 4.0) {
        const double mid = 0.5 * (lo + hi);
        (play_minus_quit(mid) <= 0.0 ? hi : lo) = mid;
    }
    return hi;
}

struct GradeEntry {
    LatticeState state;
    double gamma = 0.0;
};

struct GradeTable {
    std::vector<GradeEntry> entries;  // ascending x
    double depth = 0.0;
    double tol = 0.0;
    bool start_is_target = false;
};

inline GradeTable compute_grade_table(const ProblemParams& params, double depth, double tol,
                                      std::size_t max_states = 200'000) {
    const Lattice lattice = Lattice::build(params, depth, max_states);
    GradeTable table;
    table.depth = depth;
    table.tol = tol;
    table.start_is_target = lattice.start_is_target();
    table.entries.reserve(lattice.states().size());
    for (std::size_t i = 0; i < lattice.states().size(); ++i) {
        table.entries.push_back(GradeEntry{lattice.states()[i], grade_of(i, lattice, tol)});
    }
    return table;
}

struct MonotonicityReport {
    bool monotone = true;
    double max_excess = 0.0;  // largest gamma(x_j) - gamma(x_i) over x_i < x_j
    // First offending pair of entry indices (lower x first), if any.
    std::optional<std::pair<std::size_t, std::size_t>> violation;
};

// gamma must be non-increasing in x: for every pair x_i < x_j we need
// gamma(x_j) <= gamma(x_i) + tol. Scanning against the prefix minimum covers
// all pairs.
inline MonotonicityReport check_monotonicity(const GradeTable& table, double tol) {
    MonotonicityReport report;
    if (table.entries.size() < 2) return report;
    std::size_t argmin = 0;
    for (std::size_t j = 1; j < table.entries.size(); ++j) {
        const double excess = table.entries[j].gamma - table.entries[argmin].gamma;
        if (excess > report.max_excess) report.max_excess = excess;
        if (excess > tol && !report.violation) {
            report.monotone = false;
            report.violation = std::make_pair(argmin, j);
        }
        if (table.entries[j].gamma < table.entries[argmin].gamma) argmin = j;
    }
    return report;
}

struct JointViolation {
    double x_high = 0.0;  // -inf encodes a dead coordinate
    double x_low = 0.0;
    double gap = 0.0;
};

struct JointOracleReport {
    bool max_x_action_optimal = false;
    std::uint64_t joint_states = 0;
    std::uint64_t violations = 0;
    double max_gap = 0.0;
    std::uint64_t tie_states = 0;  // states where several actions attain the minimum
    double value_fresh_only = 0.0;  // game value with no tracked coins: the
                                    // expected cost of identification from scratch
    std::vector<JointViolation> worst;  // capped sample of violations
    std::string reduction_note;
};

// Solves the joint game of two tracked coins plus the fresh supply. A
// coordinate is a single-coin lattice state or "dead" (fell below the
// cutoff; never worth tossing). Tossing a fresh coin materializes it at
// x = 0 and its result replaces the lower coordinate; this two-coin
// reduction is what makes the oracle finite.
inline JointOracleReport joint_bellman_oracle(const ProblemParams& params, double depth,
                                              double tol,
                                              std::size_t max_joint_states = 100'000) {
    const Lattice lattice = Lattice::build(params, depth);
    JointOracleReport report;
    report.reduction_note =
        "two tracked coins plus fresh supply; a fresh toss replaces the lower coordinate";
    if (lattice.start_is_target()) {
        report.max_x_action_optimal = true;
        return report;
    }

    const std::size_t n = lattice.states().size();
    constexpr std::int32_t kDead = -1;
    const std::size_t num_coords = n + 1;  // lattice states + dead
    const std::size_t num_pairs = num_coords * (num_coords + 1) / 2;
    if (num_pairs > max_joint_states) {
        throw std::runtime_error("joint lattice overflow: reduce the depth");
    }
    report.joint_states = num_pairs;

    // Canonical pair (a >= b by lattice index, dead lowest); lattice order is
    // ascending in x, so index order is x order.
    const auto pair_id = [](std::int32_t a, std::int32_t b) {
        const std::size_t u = static_cast<std::size_t>(std::max(a, b) + 1);
        const std::size_t v = static_cast<std::size_t>(std::min(a, b) + 1);
        return u * (u + 1) / 2 + v;
    };

    std::vector<double> value(num_pairs, 0.0);
    const std::size_t zero = lattice.start_index();

    // Expected continuation of tossing coordinate `i` while `other` stays.
    const auto toss_coord = [&](const std::vector<double>& v, std::int32_t i,
                                std::int32_t other) {
        const auto idx = static_cast<std::size_t>(i);
        const double h = lattice.heads_prob(idx);
        double q = 1.0;
        const std::int32_t up = lattice.up(idx);
        if (up != Lattice::kTarget) q += h * v[pair_id(up, other)];
        const std::int32_t down = lattice.down(idx);
        const std::int32_t d = down == Lattice::kCutoff ? kDead : down;
        q += (1.0 - h) * v[pair_id(d, other)];
        return q;
    };
    // Tossing a fresh coin: it starts at x = 0 and replaces the lower
    // coordinate b; the higher coordinate a is kept.
    const auto toss_fresh = [&](const std::vector<double>& v, std::int32_t a) {
        const double h = lattice.heads_prob(zero);
        double q = 1.0;
        const std::int32_t up = lattice.up(zero);
        if (up != Lattice::kTarget) q += h * v[pair_id(a, up)];
        const std::int32_t down = lattice.down(zero);
        const std::int32_t d = down == Lattice::kCutoff ? kDead : down;
        q += (1.0 - h) * v[pair_id(a, d)];
        return q;
    };
    const auto bellman_min = [&](const std::vector<double>& v, std::int32_t a, std::int32_t b) {
        double best = toss_fresh(v, a);
        if (a != kDead) best = std::min(best, toss_coord(v, a, b));
        if (b != kDead) best = std::min(best, toss_coord(v, b, a));
        return best;
    };

    const double value_tol = tol / 10.0;
    std::vector<double> scratch(num_pairs, 0.0);
    bool converged = false;
    for (std::uint64_t iter = 0; iter < detail::kValueIterationCap && !converged; ++iter) {
        double change = 0.0;
        for (std::int32_t a = kDead; a < static_cast<std::int32_t>(n); ++a) {
            for (std::int32_t b = kDead; b <= a; ++b) {
                const std::size_t s = pair_id(a, b);
                const double next = bellman_min(value, a, b);
                change = std::max(change, std::fabs(next - value[s]));
                scratch[s] = next;
            }
        }
        value.swap(scratch);
        converged = change <= value_tol;
    }
    if (!converged) throw ConvergenceError("joint value iteration did not converge");
    report.value_fresh_only = value[pair_id(kDead, kDead)];

    for (std::int32_t a = kDead; a < static_cast<std::int32_t>(n); ++a) {
        for (std::int32_t b = kDead; b <= a; ++b) {
            const double best = bellman_min(value, a, b);
            // Candidate action: toss the maximal coordinate if its x >= 0
            // (an opened coin wins the tie against fresh), else toss fresh.
            const double x_high =
                a == kDead ? -std::numeric_limits<double>::infinity() : lattice.states()[a].x;
            const double candidate =
                x_high >= 0.0 ? toss_coord(value, a, b) : toss_fresh(value, a);
            const double gap = candidate - best;
            report.max_gap = std::max(report.max_gap, gap);
            if (gap > tol) {
                ++report.violations;
                if (report.worst.size() < 50) {
                    const double x_low = b == kDead
                                             ? -std::numeric_limits<double>::infinity()
                                             : lattice.states()[b].x;
                    report.worst.push_back(JointViolation{x_high, x_low, gap});
                }
            }
            int close = 0;
            if (toss_fresh(value, a) <= best + tol) ++close;
            if (a != kDead && toss_coord(value, a, b) <= best + tol) ++close;
            if (b != kDead && toss_coord(value, b, a) <= best + tol) ++close;
            if (close > 1) ++report.tie_states;
        }
    }
    report.max_x_action_optimal = report.violations == 0;
    return report;
}

}  // namespace heavycoin
