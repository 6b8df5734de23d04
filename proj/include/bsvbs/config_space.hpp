#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsvbs {

// One radio policy: caps handed to the real-time schedulers for a slot.
struct RadioPolicy {
    double tx_power_dl = 0.0; // dBm cap
    int mcs_dl = 0;           // highest eligible DL MCS, 0..28
    double airtime_dl = 1.0;  // DL duty-cycle cap, (0, 1]
    int mcs_ul = 0;
    double airtime_ul = 1.0;

    friend bool operator==(const RadioPolicy&, const RadioPolicy&) = default;
};

// The finite policy set: Cartesian product of five axes
// (DL TX power, DL MCS cap, DL airtime, UL MCS cap, UL airtime).
// Arms are indexed lexicographically with the TX-power axis outermost and the
// UL-airtime axis innermost, each axis ascending. The ordering is fixed so
// that seeds, trace files and golden outputs stay comparable across runs.
class ConfigurationSpace {
public:
    ConfigurationSpace(std::vector<double> p_d, std::vector<int> m_d, std::vector<double> a_d,
                       std::vector<int> m_u, std::vector<double> a_u)
        : p_d_(std::move(p_d)), m_d_(std::move(m_d)), a_d_(std::move(a_d)),
          m_u_(std::move(m_u)), a_u_(std::move(a_u)) {
        check_axis(p_d_, "space.p_d");
        check_axis(m_d_, "space.m_d");
        check_axis(a_d_, "space.a_d");
        check_axis(m_u_, "space.m_u");
        check_axis(a_u_, "space.a_u");
        for (int m : m_d_) check_mcs(m, "space.m_d");
        for (int m : m_u_) check_mcs(m, "space.m_u");
        for (double a : a_d_) check_airtime(a, "space.a_d");
        for (double a : a_u_) check_airtime(a, "space.a_u");
    }

    std::size_t cardinality() const {
        return p_d_.size() * m_d_.size() * a_d_.size() * m_u_.size() * a_u_.size();
    }

    RadioPolicy policy_at(std::size_t index) const {
        if (index >= cardinality())
            throw std::out_of_range("policy index " + std::to_string(index) +
                                    " out of range, |X| = " + std::to_string(cardinality()));
        std::size_t i = index;
        const std::size_t au = i % a_u_.size(); i /= a_u_.size();
        const std::size_t mu = i % m_u_.size(); i /= m_u_.size();
        const std::size_t ad = i % a_d_.size(); i /= a_d_.size();
        const std::size_t md = i % m_d_.size(); i /= m_d_.size();
        const std::size_t pd = i;
        return RadioPolicy{p_d_[pd], m_d_[md], a_d_[ad], m_u_[mu], a_u_[au]};
    }

    std::size_t index_of(const RadioPolicy& pol) const {
        std::size_t i = axis_pos(p_d_, pol.tx_power_dl, "tx_power_dl");
        i = i * m_d_.size() + axis_pos(m_d_, pol.mcs_dl, "mcs_dl");
        i = i * a_d_.size() + axis_pos(a_d_, pol.airtime_dl, "airtime_dl");
        i = i * m_u_.size() + axis_pos(m_u_, pol.mcs_ul, "mcs_ul");
        i = i * a_u_.size() + axis_pos(a_u_, pol.airtime_ul, "airtime_ul");
        return i;
    }

    const std::vector<double>& p_d() const { return p_d_; }
    const std::vector<int>& m_d() const { return m_d_; }
    const std::vector<double>& a_d() const { return a_d_; }
    const std::vector<int>& m_u() const { return m_u_; }
    const std::vector<double>& a_u() const { return a_u_; }

private:
    template <typename T>
    static void check_axis(const std::vector<T>& axis, const char* name) {
        if (axis.empty())
            throw std::invalid_argument(std::string(name) + " must be non-empty");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i - 1] < axis[i]))
                throw std::invalid_argument(std::string(name) +
                                            " must be strictly increasing and duplicate-free");
    }

    static void check_mcs(int m, const char* name) {
        if (m < 0 || m > 28)
            throw std::invalid_argument(std::string(name) + ": MCS index " + std::to_string(m) +
                                        " outside [0, 28]");
    }

    static void check_airtime(double a, const char* name) {
        if (!(a > 0.0) || a > 1.0)
            throw std::invalid_argument(std::string(name) + ": airtime " + std::to_string(a) +
                                        " outside (0, 1]");
    }

    template <typename T>
    static std::size_t axis_pos(const std::vector<T>& axis, T value, const char* field) {
        auto it = std::find(axis.begin(), axis.end(), value);
        if (it == axis.end())
            throw std::invalid_argument(std::string("policy field ") + field +
                                        " value is not on its axis");
        return static_cast<std::size_t>(it - axis.begin());
    }

    std::vector<double> p_d_;
    std::vector<int> m_d_;
    std::vector<double> a_d_;
    std::vector<int> m_u_;
    std::vector<double> a_u_;
};

} // namespace bsvbs
