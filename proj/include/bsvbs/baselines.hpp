#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bsvbs/environment.hpp"
#include "bsvbs/learner.hpp"
#include "bsvbs/rng.hpp"

namespace bsvbs {

// Common contract for every online policy, including the Exp3 scheduler.
// select() sees only the slot index; the current slot's reward row is never
// visible before the choice (bandit feedback). feedback() delivers the
// realized normalized reward together with the context bucket reported for
// that slot.
class Learner {
public:
    virtual ~Learner() = default;
    virtual std::size_t select(std::uint64_t t) = 0;
    virtual void feedback(std::size_t arm, double reward, Regime observed) = 0;
    virtual std::string_view name() const = 0;
};

class BsvbsAgent final : public Learner {
public:
    BsvbsAgent(std::size_t arms, std::uint64_t horizon, SplitMix64 rng)
        : exp3_(arms, horizon, rng) {}

    std::size_t select(std::uint64_t) override {
        last_dist_ = exp3_.distribution();
        return exp3_.sample(last_dist_);
    }

    void feedback(std::size_t arm, double reward, Regime) override { exp3_.update(arm, reward); }

    std::string_view name() const override { return "bsvbs"; }

    const Exp3& exp3() const { return exp3_; }
    const ArmDistribution& last_distribution() const { return last_dist_; }

private:
    Exp3 exp3_;
    ArmDistribution last_dist_;
};

namespace detail {

struct ArmStats {
    std::vector<double> mean;
    std::vector<std::uint64_t> count;
    std::uint64_t total = 0;

    explicit ArmStats(std::size_t arms) : mean(arms, 0.0), count(arms, 0) {}

    void observe(std::size_t arm, double reward) {
        ++count[arm];
        ++total;
        mean[arm] += (reward - mean[arm]) / static_cast<double>(count[arm]);
    }

    // First unplayed arm in index order, or the arm count if all seeded.
    std::size_t unplayed() const {
        for (std::size_t i = 0; i < count.size(); ++i)
            if (count[i] == 0) return i;
        return count.size();
    }

    std::size_t argmax_mean() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < mean.size(); ++i)
            if (mean[i] > mean[best]) best = i;
        return best;
    }
};

} // namespace detail

class EpsilonGreedy final : public Learner {
public:
    EpsilonGreedy(std::size_t arms, double epsilon, SplitMix64 rng)
        : stats_(arms), epsilon_(epsilon), rng_(rng) {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("baseline.epsilon must be in [0, 1]");
    }

    std::size_t select(std::uint64_t) override {
        if (auto arm = stats_.unplayed(); arm < stats_.mean.size()) return arm;
        if (rng_.next_double() < epsilon_)
            return static_cast<std::size_t>(rng_.next_double() * stats_.mean.size());
        return stats_.argmax_mean();
    }

    void feedback(std::size_t arm, double reward, Regime) override { stats_.observe(arm, reward); }

    std::string_view name() const override { return "epsilon_greedy"; }

private:
    detail::ArmStats stats_;
    double epsilon_;
    SplitMix64 rng_;
};

class Ucb1 final : public Learner {
public:
    Ucb1(std::size_t arms, double confidence) : stats_(arms), c_(confidence) {}

    std::size_t select(std::uint64_t t) override {
        if (auto arm = stats_.unplayed(); arm < stats_.mean.size()) return arm;
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t i = 0; i < stats_.mean.size(); ++i) {
            const double bonus =
                c_ * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(stats_.count[i]));
            const double score = stats_.mean[i] + bonus;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return best;
    }

    void feedback(std::size_t arm, double reward, Regime) override { stats_.observe(arm, reward); }

    std::string_view name() const override { return "ucb1"; }

private:
    detail::ArmStats stats_;
    double c_;
};

// Contextual UCB whose decision context is one slot stale: it keeps per-bucket
// statistics, but at slot t it can only consult the bucket observed at t-1.
// The realized reward arrives with the slot's own bucket label via feedback.
// Stationary traffic makes the staleness harmless; a ping-pong environment
// makes it consult the opposite regime's statistics at every slot.
class StaleContextUcb final : public Learner {
public:
    StaleContextUcb(std::size_t arms, double confidence)
        : stats_{detail::ArmStats(arms), detail::ArmStats(arms)}, c_(confidence) {}

    std::size_t select(std::uint64_t) override {
        const detail::ArmStats& s = stats_[bucket_index(stale_)];
        if (auto arm = s.unplayed(); arm < s.mean.size()) return arm;
        std::size_t best = 0;
        double best_score = -1.0;
        const double logt = std::log(static_cast<double>(s.total + 1));
        for (std::size_t i = 0; i < s.mean.size(); ++i) {
            const double score = s.mean[i] + c_ * std::sqrt(logt / static_cast<double>(s.count[i]));
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        return best;
    }

    void feedback(std::size_t arm, double reward, Regime observed) override {
        stats_[bucket_index(observed)].observe(arm, reward);
        stale_ = observed; // becomes the decision bucket for the next slot
    }

    std::string_view name() const override { return "stale_ctx_ucb"; }

    Regime stale_bucket() const { return stale_; }

private:
    static std::size_t bucket_index(Regime r) { return r == Regime::high ? 0 : 1; }

    std::array<detail::ArmStats, 2> stats_;
    double c_;
    Regime stale_ = Regime::low; // fixed start; any choice works for slot 1
};

// Hindsight best fixed arm over full reward rows: argmax of the column sums,
// ties to the lowest index. This is the benchmark side of the regret metric
// and is never part of the online loop.
inline std::pair<std::size_t, double> oracle_best_fixed(
    const std::vector<std::vector<double>>& reward_rows) {
    if (reward_rows.empty()) throw std::invalid_argument("oracle needs at least one reward row");
    const std::size_t arms = reward_rows.front().size();
    std::vector<double> sums(arms, 0.0);
    for (const auto& row : reward_rows) {
        if (row.size() != arms)
            throw std::invalid_argument("reward rows have inconsistent arm dimension");
        for (std::size_t i = 0; i < arms; ++i) sums[i] += row[i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < arms; ++i)
        if (sums[i] > sums[best]) best = i;
    return {best, sums[best]};
}

struct BaselineParams {
    double epsilon = 0.1;
    double ucb_c = std::sqrt(2.0);
    double stale_confidence = 1.0;
};

inline std::unique_ptr<Learner> make_learner(std::string_view kind, std::size_t arms,
                                             std::uint64_t horizon, SplitMix64 rng,
                                             const BaselineParams& params = {}) {
    if (kind == "bsvbs") return std::make_unique<BsvbsAgent>(arms, horizon, rng);
    if (kind == "epsilon_greedy")
        return std::make_unique<EpsilonGreedy>(arms, params.epsilon, rng);
    if (kind == "ucb1") return std::make_unique<Ucb1>(arms, params.ucb_c);
    if (kind == "stale_ctx_ucb")
        return std::make_unique<StaleContextUcb>(arms, params.ucb_c * params.stale_confidence);
    throw std::invalid_argument("unknown learner '" + std::string(kind) + "'");
}

} // namespace bsvbs
