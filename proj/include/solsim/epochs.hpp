#pragma once
/*
Recursive epoch schedule.

Depth P covers (0,T] as one epoch; each depth-p epoch (T0,T1] splits into
(T0,mid] and (mid,T1] with mid = floor((T0+T1)/2). Depth p therefore has
N_p = 2^(P-p) epochs whose lengths are floor(T/N_p) or floor(T/N_p)+1.
Requires T >= 2^P.
*/
#include <vector>

#include "common.hpp"

namespace solsim {

class EpochSchedule {
public:
    EpochSchedule() = default;
    EpochSchedule(long T, int P) : T_(T), P_(P) {
        if (P < 0) throw config_error("depth must be >= 0");
        if (T < (1L << P)) throw config_error("schedule needs T >= 2^P");
        bounds_.assign(static_cast<size_t>(P + 1), {});
        bounds_[static_cast<size_t>(P)] = {0, T};
        for (int p = P - 1; p >= 0; --p) {
            const auto& up = bounds_[static_cast<size_t>(p + 1)];
            auto& cur = bounds_[static_cast<size_t>(p)];
            cur.push_back(0);
            for (size_t k = 0; k + 1 < up.size(); ++k) {
                long a = up[k], b = up[k + 1];
                cur.push_back((a + b) / 2);
                cur.push_back(b);
            }
        }
    }

    long horizon() const { return T_; }
    int depth() const { return P_; }
    long epoch_count(int p) const { return static_cast<long>(bounds_[static_cast<size_t>(p)].size()) - 1; }
    // Depth-p epoch k (1-based) is (start, end].
    long start(int p, long k) const { return bounds_[static_cast<size_t>(p)][static_cast<size_t>(k - 1)]; }
    long end(int p, long k) const { return bounds_[static_cast<size_t>(p)][static_cast<size_t>(k)]; }
    // 1-based epoch index at depth p containing round t.
    long epoch_of(int p, long t) const {
        const auto& b = bounds_[static_cast<size_t>(p)];
        long lo = 0, hi = static_cast<long>(b.size()) - 1;
        while (lo + 1 < hi) {
            long mid = (lo + hi) / 2;
            if (b[static_cast<size_t>(mid)] < t) lo = mid;
            else hi = mid;
        }
        return lo + 1;
    }

private:
    long T_ = 0;
    int P_ = 0;
    std::vector<std::vector<long>> bounds_;  // bounds_[p] has N_p+1 entries
};

inline int default_depth(long T) {
    int p = 0;
    while ((2L << p) <= T) ++p;  // largest p with 2^p <= T
    return p;
}

} // namespace solsim
