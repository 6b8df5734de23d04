#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace bsvbs {

// Delivered vs demanded traffic for one slot, Mbit (unitary slot length, so
// Mbit per slot and Mbps coincide).
struct TrafficOutcome {
    double r_dl = 0.0;
    double r_ul = 0.0;
    double d_dl = 0.0;
    double d_ul = 0.0;
};

struct PowerReading {
    double total_w = 0.0; // whole vBS (BBU + radio)
    double cpu_w = 0.0;   // BBU/CPU share
};

enum class PowerSource { total, cpu };

// Effective-throughput utility: ln(1 + r_dl/d_dl) + ln(1 + r_ul/d_ul),
// and exactly 0 when either backlog is 0. Natural log throughout; the base
// only rescales the utility and is absorbed by the reward normalization.
inline double utility(const TrafficOutcome& o) {
    if (o.d_dl <= 0.0 || o.d_ul <= 0.0) return 0.0;
    return std::log1p(o.r_dl / o.d_dl) + std::log1p(o.r_ul / o.d_ul);
}

// Precomputed normalization bounds for the raw reward u - delta * power:
//   f_max = u_max - delta * p_min   (best utility at the cheapest power)
//   f_min = 0     - delta * p_max   (utility floor is 0)
inline std::pair<double, double> scaler_bounds(double delta, double u_max, double p_min,
                                               double p_max) {
    if (!(delta > 0.0)) throw std::invalid_argument("reward.delta must be > 0");
    if (!(u_max > 0.0)) throw std::invalid_argument("utility upper bound must be > 0");
    if (p_min < 0.0 || p_max < p_min)
        throw std::invalid_argument("power bounds must satisfy 0 <= p_min <= p_max");
    const double f_max = u_max - delta * p_min;
    const double f_min = -delta * p_max;
    if (!(f_max > f_min))
        throw std::invalid_argument("degenerate reward bounds: f_max <= f_min");
    return {f_min, f_max};
}

// Maps raw rewards affinely onto [0, 1]. Out-of-range inputs are clamped to
// the boundary and counted, so a mis-sized envelope shows up in run stats
// instead of killing a long experiment.
class RewardScaler {
public:
    RewardScaler(double delta, double f_min, double f_max, PowerSource source)
        : delta_(delta), f_min_(f_min), f_max_(f_max), source_(source) {
        if (!(delta_ > 0.0)) throw std::invalid_argument("reward.delta must be > 0");
        if (!(f_max_ > f_min_))
            throw std::invalid_argument("reward bounds must satisfy f_max > f_min");
    }

    static RewardScaler from_bounds(double delta, double u_max, double p_min, double p_max,
                                    PowerSource source) {
        auto [lo, hi] = scaler_bounds(delta, u_max, p_min, p_max);
        return RewardScaler(delta, lo, hi, source);
    }

    double power_of(const PowerReading& p) const {
        return source_ == PowerSource::total ? p.total_w : p.cpu_w;
    }

    double raw(double u, const PowerReading& p) const { return u - delta_ * power_of(p); }

    double normalize(double f_raw) {
        if (f_raw < f_min_) {
            ++clamp_count_;
            return 0.0;
        }
        if (f_raw > f_max_) {
            ++clamp_count_;
            return 1.0;
        }
        return (f_raw - f_min_) / (f_max_ - f_min_);
    }

    double delta() const { return delta_; }
    double f_min() const { return f_min_; }
    double f_max() const { return f_max_; }
    PowerSource source() const { return source_; }
    std::uint64_t clamp_count() const { return clamp_count_; }

private:
    double delta_;
    double f_min_;
    double f_max_;
    PowerSource source_;
    std::uint64_t clamp_count_ = 0;
};

inline double raw_reward(double u, const PowerReading& p, const RewardScaler& s) {
    return s.raw(u, p);
}

} // namespace bsvbs
