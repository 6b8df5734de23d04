#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bsvbs/rng.hpp"

namespace bsvbs {

// Exp3 with uniform exploration over K arms and rewards in [0, 1]:
//   y(x)     = gamma/K + (1 - gamma) * w(x) / sum(w)
//   Phi(x)   = f(x_t) / y(x_t) if x == x_t, else 0
//   w'(x)    = w(x) * exp(gamma * Phi(x) / K)
// Weights are kept as natural logs and y is computed through a max-shifted
// exponentiation: Phi can reach K/gamma per slot, so the direct w
// representation overflows within a few thousand slots on long runs.

struct ArmDistribution {
    std::vector<double> p;
};

// gamma = min{1, sqrt(K ln K / ((e - 1) T))}
inline double exp3_gamma(std::size_t arm_count, std::uint64_t horizon) {
    const double k = static_cast<double>(arm_count);
    const double t = static_cast<double>(horizon);
    return std::min(1.0, std::sqrt(k * std::log(k) / ((std::numbers::e - 1.0) * t)));
}

// Time-adaptive variant: the fixed-horizon formula evaluated at the current
// slot, for runs whose horizon is not known in advance.
inline double adaptive_gamma(std::size_t arm_count, std::uint64_t t) {
    return exp3_gamma(arm_count, t);
}

// Expected-regret bound: 2 sqrt(e - 1) sqrt(T K ln K).
inline double exp3_regret_bound(std::size_t arm_count, std::uint64_t horizon) {
    const double k = static_cast<double>(arm_count);
    const double t = static_cast<double>(horizon);
    return 2.0 * std::sqrt(std::numbers::e - 1.0) * std::sqrt(t * k * std::log(k));
}

// The explore/exploit mixture for a given weight vector, in the log domain.
// Subtracting the max log-weight before exponentiating keeps the ratio exact
// under any common shift and cannot overflow.
inline ArmDistribution exp3_distribution(const std::vector<double>& log_weights, double gamma) {
    ArmDistribution dist;
    dist.p.resize(log_weights.size());
    double max_lw = log_weights[0];
    for (double lw : log_weights) max_lw = std::max(max_lw, lw);
    double sum = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        dist.p[i] = std::exp(log_weights[i] - max_lw);
        sum += dist.p[i];
    }
    const double uniform = gamma / static_cast<double>(log_weights.size());
    for (double& v : dist.p) v = uniform + (1.0 - gamma) * (v / sum);
    return dist;
}

class Exp3 {
public:
    // horizon == 0 selects anytime mode: gamma is recomputed from the slot
    // counter after every update instead of being fixed from T.
    Exp3(std::size_t arm_count, std::uint64_t horizon, SplitMix64 rng)
        : log_weights_(arm_count, 0.0), arm_count_(arm_count), horizon_(horizon), rng_(rng) {
        if (arm_count < 2)
            throw std::invalid_argument("Exp3 needs at least 2 arms; a 1-arm space is vacuous");
        gamma_ = horizon_ == 0 ? adaptive_gamma(arm_count_, t_) : exp3_gamma(arm_count_, horizon_);
    }

    ArmDistribution distribution() const { return exp3_distribution(log_weights_, gamma_); }

    // Inverse-CDF draw; advances the generator.
    std::size_t sample(const ArmDistribution& dist) {
        const double u = rng_.next_double();
        double cum = 0.0;
        for (std::size_t i = 0; i < dist.p.size(); ++i) {
            cum += dist.p[i];
            if (u < cum) return i;
        }
        return dist.p.size() - 1;
    }

    // Importance-weighted estimator: reward / y(chosen) on the chosen arm, 0 elsewhere.
    static double estimate(double reward, const ArmDistribution& dist, std::size_t chosen,
                           std::size_t arm) {
        if (!(reward >= 0.0) || reward > 1.0)
            throw std::domain_error("reward outside [0, 1]: normalization contract violated");
        if (arm != chosen) return 0.0;
        return reward / dist.p[chosen];
    }

    void update(std::size_t chosen, double reward) {
        if (chosen >= arm_count_) throw std::out_of_range("arm index out of range");
        const ArmDistribution dist = distribution();
        const double phi = estimate(reward, dist, chosen, chosen);
        log_weights_[chosen] += gamma_ * phi / static_cast<double>(arm_count_);
        ++t_;
        if (horizon_ == 0) gamma_ = adaptive_gamma(arm_count_, t_);
    }

    double gamma() const { return gamma_; }
    std::uint64_t slot() const { return t_; }
    std::size_t arm_count() const { return arm_count_; }
    std::uint64_t horizon() const { return horizon_; }
    const std::vector<double>& log_weights() const { return log_weights_; }

private:
    std::vector<double> log_weights_;
    std::size_t arm_count_;
    std::uint64_t horizon_;
    double gamma_;
    std::uint64_t t_ = 1;
    SplitMix64 rng_;
};

} // namespace bsvbs
