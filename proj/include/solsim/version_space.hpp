#pragma once
/*
Version spaces, realizable labelings, and empirical covers.

For threshold kinds the set of parameters consistent with labeled data is a
product of per-coordinate intervals (lo, hi], where the lower end is closed
only for the unconstrained 0. With 1[x >= theta], a point labeled 1 caps the
threshold above (theta <= x) and a point labeled 0 pushes it strictly up
(theta > x). Finite classes keep an explicit member subset.

The canonical representative is the lexicographically smallest parameter
vector that is actually a member: the interval's closed lower end, or the
smallest double above a strict one.

Restriction is idempotent and monotone under intersection; an empty result
throws infeasible_error.
*/
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "common.hpp"
#include "function_class.hpp"
#include "instance.hpp"

namespace solsim {

inline double next_above(double x) { return std::nextafter(x, 2.0); }

struct CoordInterval {
    double lo = 0.0;
    bool lo_strict = false;  // false: theta >= lo allowed; true: theta > lo
    double hi = 1.0;

    bool empty() const { return lo > hi || (lo == hi && lo_strict); }
    double smallest() const { return lo_strict ? next_above(lo) : lo; }
    bool contains(double theta) const {
        if (theta > hi) return false;
        return lo_strict ? theta > lo : theta >= lo;
    }
    // Does some pair of members disagree at this position?
    bool splits_at(double pos) const { return !empty() && smallest() <= pos && pos < hi; }
    bool operator==(const CoordInterval& o) const {
        return lo == o.lo && lo_strict == o.lo_strict && hi == o.hi;
    }
};

struct Labeling {
    std::vector<Instance> points;
    std::vector<double> values;
    Member representative;  // smallest consistent member
};

class VersionSpace {
public:
    VersionSpace() = default;

    static VersionSpace full(const FunctionClassSpec& cls, double eps = 0.0) {
        VersionSpace vs;
        vs.cls_ = &cls;
        vs.eps_ = eps;
        if (cls.is_threshold_kind()) {
            vs.intervals_.assign(static_cast<size_t>(cls.dimension()), CoordInterval{});
        } else {
            vs.subset_.resize(static_cast<size_t>(cls.finite_size()));
            for (int i = 0; i < cls.finite_size(); ++i) vs.subset_[static_cast<size_t>(i)] = i;
        }
        return vs;
    }

    const FunctionClassSpec& cls() const { return *cls_; }
    double eps() const { return eps_; }
    const std::vector<CoordInterval>& intervals() const { return intervals_; }
    CoordInterval& interval_mut(int k) { return intervals_.at(static_cast<size_t>(k)); }
    const std::vector<int>& subset() const { return subset_; }

    bool empty() const {
        if (cls_->is_threshold_kind()) {
            for (const CoordInterval& iv : intervals_)
                if (iv.empty()) return true;
            return false;
        }
        return subset_.empty();
    }

    Member canonical_member() const {
        if (empty()) throw infeasible_error("canonical member of empty version space");
        if (cls_->is_threshold_kind()) {
            std::vector<double> th(intervals_.size());
            for (size_t k = 0; k < intervals_.size(); ++k) th[k] = intervals_[k].smallest();
            return Member::of_theta(std::move(th));
        }
        return Member::of_id(subset_.front());
    }

    bool contains(const Member& m) const {
        if (cls_->is_threshold_kind()) {
            if (m.theta.size() != intervals_.size()) return false;
            for (size_t k = 0; k < intervals_.size(); ++k)
                if (!intervals_[k].contains(m.theta[k])) return false;
            return true;
        }
        return std::binary_search(subset_.begin(), subset_.end(), m.finite_id);
    }

    // Intersect with { f : |f(points[i]) - labels[i]| <= eps for all i }.
    VersionSpace restricted(const std::vector<Instance>& points,
                            const std::vector<double>& labels, double eps) const {
        if (points.size() != labels.size())
            throw dimension_error("points/labels length mismatch");
        VersionSpace out = *this;
        if (cls_->is_threshold_kind()) {
            for (size_t i = 0; i < points.size(); ++i) {
                const Instance& x = points[i];
                double y = labels[i];
                bool ok1 = std::abs(1.0 - y) <= eps;
                bool ok0 = y <= eps;
                CoordInterval& iv = out.intervals_[static_cast<size_t>(x.coordinate - 1)];
                if (ok1 && ok0) continue;
                if (!ok1 && !ok0) throw infeasible_error("label reachable by no binary value");
                if (ok1) {
                    // force f(x)=1: theta <= position
                    iv.hi = std::min(iv.hi, x.position);
                } else {
                    // force f(x)=0: theta > position
                    if (x.position > iv.lo || (x.position == iv.lo && !iv.lo_strict)) {
                        iv.lo = x.position;
                        iv.lo_strict = true;
                    }
                }
            }
        } else {
            std::vector<int> keep;
            for (int id : out.subset_) {
                bool ok = true;
                for (size_t i = 0; i < points.size(); ++i) {
                    double v = cls_->evaluate(Member::of_id(id), points[i]);
                    if (std::abs(v - labels[i]) > eps) { ok = false; break; }
                }
                if (ok) keep.push_back(id);
            }
            out.subset_ = std::move(keep);
        }
        if (out.empty()) throw infeasible_error("restriction emptied the version space");
        return out;
    }

    // Intersect with the tube B_f0 = { f : |f(x_t) - f0(x_t)| <= eps on the prefix }.
    VersionSpace restricted_to_reference(const Member& f0,
                                         const std::vector<Instance>& prefix,
                                         double eps) const {
        std::vector<double> labels(prefix.size());
        for (size_t i = 0; i < prefix.size(); ++i) labels[i] = cls_->evaluate(f0, prefix[i]);
        return restricted(prefix, labels, eps);
    }

    bool operator==(const VersionSpace& o) const {
        return intervals_ == o.intervals_ && subset_ == o.subset_;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto feed = [&h](std::uint64_t v) {
            h ^= v;
            h *= 0x100000001b3ULL;
        };
        for (const CoordInterval& iv : intervals_) {
            std::uint64_t bits;
            std::memcpy(&bits, &iv.lo, 8); feed(bits);
            feed(iv.lo_strict ? 1 : 0);
            std::memcpy(&bits, &iv.hi, 8); feed(bits);
        }
        for (int id : subset_) feed(static_cast<std::uint64_t>(id) + 0x9e37ULL);
        return h;
    }

private:
    const FunctionClassSpec* cls_ = nullptr;
    double eps_ = 0.0;
    std::vector<CoordInterval> intervals_;  // threshold kinds
    std::vector<int> subset_;               // finite kind, sorted ids
};

// ---------------------------------------------------------------------------
// Realizable labelings and covers on a query set.

namespace detail {

// Distinct positions per coordinate, sorted ascending.
inline std::vector<std::vector<double>> positions_by_coordinate(
    int d, const std::vector<Instance>& points) {
    std::vector<std::vector<double>> pos(static_cast<size_t>(d));
    for (const Instance& x : points) {
        if (x.coordinate < 1 || x.coordinate > d)
            throw dimension_error("query coordinate outside class dimension");
        pos[static_cast<size_t>(x.coordinate - 1)].push_back(x.position);
    }
    for (auto& v : pos) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return pos;
}

// Positions that split `iv` into distinct behaviors: those in [smallest, hi).
// `positions` must be sorted ascending.
inline std::pair<size_t, size_t> splitter_range(const CoordInterval& iv,
                                                const std::vector<double>& positions) {
    if (iv.empty()) return {0, 0};
    auto lo = std::lower_bound(positions.begin(), positions.end(), iv.smallest());
    auto hi = std::lower_bound(lo, positions.end(), iv.hi);
    return {static_cast<size_t>(lo - positions.begin()), static_cast<size_t>(hi - positions.begin())};
}

// Smallest member of every behavior cell of `iv` induced by the positions.
inline std::vector<double> cell_candidates(const CoordInterval& iv,
                                           const std::vector<double>& positions) {
    std::vector<double> cand;
    if (iv.empty()) return cand;
    auto [a, b] = splitter_range(iv, positions);
    cand.reserve(b - a + 1);
    cand.push_back(iv.smallest());
    for (size_t i = a; i < b; ++i) cand.push_back(next_above(positions[i]));
    return cand;
}

} // namespace detail

// All distinct realizable label vectors of `vs` on `points` (in input order).
// Threshold kinds factor over coordinates; Finite classes dedupe value rows.
inline std::vector<Labeling> enumerate_labelings(const VersionSpace& vs,
                                                 const std::vector<Instance>& points) {
    std::vector<Labeling> out;
    const FunctionClassSpec& cls = vs.cls();
    if (cls.is_threshold_kind()) {
        int d = cls.dimension();
        auto pos = detail::positions_by_coordinate(d, points);
        std::vector<std::vector<double>> cands(static_cast<size_t>(d));
        for (int k = 0; k < d; ++k)
            cands[static_cast<size_t>(k)] =
                detail::cell_candidates(vs.intervals()[static_cast<size_t>(k)],
                                        pos[static_cast<size_t>(k)]);
        // Odometer over per-coordinate candidates.
        std::vector<size_t> idx(static_cast<size_t>(d), 0);
        while (true) {
            Labeling lab;
            lab.points = points;
            std::vector<double> th(static_cast<size_t>(d));
            for (int k = 0; k < d; ++k) th[static_cast<size_t>(k)] = cands[static_cast<size_t>(k)][idx[static_cast<size_t>(k)]];
            lab.representative = Member::of_theta(th);
            lab.values.resize(points.size());
            for (size_t i = 0; i < points.size(); ++i)
                lab.values[i] = cls.evaluate(lab.representative, points[i]);
            out.push_back(std::move(lab));
            int k = d - 1;
            while (k >= 0 && ++idx[static_cast<size_t>(k)] == cands[static_cast<size_t>(k)].size()) {
                idx[static_cast<size_t>(k)] = 0;
                --k;
            }
            if (k < 0) break;
        }
    } else {
        std::vector<std::vector<double>> seen;
        for (int id : vs.subset()) {
            std::vector<double> row(points.size());
            for (size_t i = 0; i < points.size(); ++i)
                row[i] = cls.evaluate(Member::of_id(id), points[i]);
            if (std::find(seen.begin(), seen.end(), row) == seen.end()) {
                Labeling lab;
                lab.points = points;
                lab.values = row;
                lab.representative = Member::of_id(id);
                out.push_back(std::move(lab));
                seen.push_back(std::move(row));
            }
        }
    }
    return out;
}

inline std::vector<Labeling> enumerate_labelings(const FunctionClassSpec& cls,
                                                 const std::vector<Instance>& points) {
    return enumerate_labelings(VersionSpace::full(cls), points);
}

// eps-cover of `vs` on `points` in the empirical sup norm: every member of vs
// is within eps of some returned member on every point. At scale 0 on binary
// classes this is exactly one representative per realizable labeling.
inline std::vector<Member> epsilon_cover(const VersionSpace& vs,
                                         const std::vector<Instance>& points,
                                         double eps) {
    if (vs.empty()) throw infeasible_error("cover of empty version space");
    if (eps < 0.0) throw config_error("cover scale must be >= 0");
    const FunctionClassSpec& cls = vs.cls();
    std::vector<Member> reps;
    if (cls.is_threshold_kind()) {
        if (eps >= 1.0) return {vs.canonical_member()};
        // Binary values: within-eps on a point means equal, so the cover is
        // one smallest member per behavior cell.
        for (const Labeling& lab : enumerate_labelings(vs, points))
            reps.push_back(lab.representative);
    } else {
        for (int id : vs.subset()) {
            bool covered = false;
            for (const Member& r : reps) {
                double worst = 0.0;
                for (const Instance& x : points)
                    worst = std::max(worst, std::abs(cls.evaluate(Member::of_id(id), x) -
                                                     cls.evaluate(r, x)));
                if (worst <= eps) { covered = true; break; }
            }
            if (!covered) reps.push_back(Member::of_id(id));
        }
    }
    return reps;
}

} // namespace solsim
