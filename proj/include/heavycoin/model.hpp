#pragma once
/*
Bayesian model for identifying a heavy coin from an infinite supply.

Every coin is heavy (heads probability p+eps) with prior alpha, otherwise
light (heads probability p-eps). The log-likelihood ratio X of a coin's
history performs a two-step random walk: +delta_h on heads, -delta_t on
tails, where

  delta_h = log((p+eps)/(p-eps)),   delta_t = log((q+eps)/(q-eps)),  q = 1-p.

The posterior P(heavy | X) = alpha*e^X / (alpha*e^X + 1-alpha) reaches 1-delta
exactly when X crosses the stopping boundary

  B = log((1-alpha)(1-delta) / (alpha*delta)).
*/

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace heavycoin {

enum class CoinNature { Heavy, Light };
enum class TossOutcome { Heads, Tails };

struct ProblemParams {
    double p = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    // Derived constants, filled in by create().
    double delta_h = 0.0;
    double delta_t = 0.0;
    double boundary_b = 0.0;

    // Validates the parameter domain and computes the derived constants.
    // p must lie strictly inside (epsilon, 1-epsilon): at the endpoints one
    // of the likelihood ratios degenerates and the log step is infinite.
    static ProblemParams create(double p, double epsilon, double alpha, double delta) {
        if (!(std::isfinite(p) && std::isfinite(epsilon) && std::isfinite(alpha) &&
              std::isfinite(delta))) {
            throw std::invalid_argument("parameters must be finite");
        }
        if (!(epsilon > 0.0 && epsilon < 0.5)) {
            throw std::invalid_argument("epsilon must lie in (0, 0.5)");
        }
        if (!(p > epsilon)) {
            throw std::invalid_argument("p must exceed epsilon");
        }
        if (!(p < 1.0 - epsilon)) {
            throw std::invalid_argument("p must be below 1 - epsilon");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("alpha must lie in (0, 1)");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw std::invalid_argument("delta must lie in (0, 1)");
        }
        ProblemParams out;
        out.p = p;
        out.epsilon = epsilon;
        out.alpha = alpha;
        out.delta = delta;
        const double q = 1.0 - p;
        out.delta_h = std::log((p + epsilon) / (p - epsilon));
        out.delta_t = std::log((q + epsilon) / (q - epsilon));
        out.boundary_b = stopping_boundary(alpha, delta);
        return out;
    }

    static double stopping_boundary(double alpha, double delta) {
        if (!(alpha > 0.0 && alpha < 1.0) || !(delta > 0.0 && delta < 1.0)) {
            throw std::invalid_argument("alpha and delta must lie in (0, 1)");
        }
        return std::log(((1.0 - alpha) * (1.0 - delta)) / (alpha * delta));
    }
};

inline double stopping_boundary(double alpha, double delta) {
    return ProblemParams::stopping_boundary(alpha, delta);
}

// Heads probability of a coin with known nature.
inline double heads_probability(CoinNature nature, const ProblemParams& params) {
    return nature == CoinNature::Heavy ? params.p + params.epsilon : params.p - params.epsilon;
}

// History of one coin. The integer counts are the ground truth; the
// log-likelihood is an incrementally maintained cache of
// heads*delta_h - tails*delta_t.
struct CoinState {
    std::uint64_t heads = 0;
    std::uint64_t tails = 0;
    double log_likelihood = 0.0;
};

inline CoinState update_on_toss(CoinState state, TossOutcome outcome,
                                const ProblemParams& params) {
    if (outcome == TossOutcome::Heads) {
        ++state.heads;
        state.log_likelihood += params.delta_h;
    } else {
        ++state.tails;
        state.log_likelihood -= params.delta_t;
    }
    return state;
}

inline double recompute_log_likelihood(const CoinState& state, const ProblemParams& params) {
    return static_cast<double>(state.heads) * params.delta_h -
           static_cast<double>(state.tails) * params.delta_t;
}

// P(coin is heavy | log-likelihood x) = alpha*e^x / (alpha*e^x + 1-alpha),
// written so that large |x| cannot overflow.
inline double posterior_heavy(double x, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    return 1.0 / (1.0 + ((1.0 - alpha) / alpha) * std::exp(-x));
}

// State-dependent heads probability of the log-likelihood walk:
// the posterior mixture of the heavy and light heads probabilities.
inline double heads_prob_given_state(double x, const ProblemParams& params) {
    const double w = posterior_heavy(x, params.alpha);
    return w * (params.p + params.epsilon) + (1.0 - w) * (params.p - params.epsilon);
}

}  // namespace heavycoin
