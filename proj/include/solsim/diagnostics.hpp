#pragma once
/*
Analytical quantities as computable statistics.

gamma_exact: worst-case mass under mu_t on which two hypotheses can disagree
while agreeing on every prefix query. For threshold classes a pair confined
to one behavior cell per coordinate disagrees on a half-open position
interval inside that cell, so the supremum is, per coordinate, the largest
interior atom mass of a cell, summed over coordinates (coordinates are
disjoint pieces of the instance space, so a pair may disagree in all of them
at once).

gamma_bruteforce enumerates projected behaviors and takes the exact supremum
over pairs (agreeing on the prefix) or over the 2*eps tube around a reference
member; it is the oracle for gamma_exact and the regression variant.

wills_mc estimates E[exp(sup_f sum_i xi_i f(Z_i) - f(Z_i)^2 / 2)] by Monte
Carlo with the Gaussian tilted to a reference behavior; the tilt cancels the
reference's moment generating factor, so a singleton class gives exactly 1 on
every draw and concentrated classes have low variance.
gaussian_complexity_mc estimates E[sup_f sum_i xi_i f(Z_i)] directly.
*/
#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "common.hpp"
#include "instance.hpp"
#include "rng.hpp"
#include "version_space.hpp"

namespace solsim {

constexpr long kEnumerationCap = 10000;

// Supremum over pairs agreeing on `prefix` of P_{x~mu_t}(f(x) != g(x)).
// The labels only validate realizability; the value depends on positions.
inline double gamma_exact(const FunctionClassSpec& cls,
                          const std::vector<Instance>& prefix,
                          const std::vector<double>& labels,
                          const DiscreteDistribution& mu_t) {
    if (!cls.is_threshold_kind())
        throw config_error("gamma_exact handles threshold kinds; use gamma_bruteforce");
    VersionSpace::full(cls).restricted(prefix, labels, 0.0);  // throws if unrealizable
    int d = cls.dimension();
    auto pos = detail::positions_by_coordinate(d, prefix);
    double total = 0.0;
    for (int k = 1; k <= d; ++k) {
        const auto& ps = pos[static_cast<size_t>(k - 1)];
        // A pair confined to one cell can disagree exactly on the atoms
        // strictly inside it: cells are [0, ps[0]), (ps[j-1], ps[j]),
        // (ps.back(), 1); atoms at 1 are labeled 1 by every member.
        double best = 0.0;
        for (size_t j = 0; j <= ps.size(); ++j) {
            double lo = (j == 0) ? -1.0 : ps[j - 1];
            double hi = (j == ps.size()) ? 1.0 : ps[j];
            double mass = 0.0;
            for (const Atom& a : mu_t.atoms())
                if (a.point.coordinate == k && a.point.position > lo && a.point.position < hi)
                    mass += a.prob;
            best = std::max(best, mass);
        }
        total += best;
    }
    return total;
}

// Exact supremum over enumerated behavior pairs that agree on the prefix of
// the disagreement mass under mu_t; the oracle for gamma_exact.
inline double gamma_bruteforce_pairs(const FunctionClassSpec& cls,
                                     const std::vector<Instance>& prefix,
                                     const std::vector<double>& labels,
                                     const DiscreteDistribution& mu_t) {
    VersionSpace::full(cls).restricted(prefix, labels, 0.0);
    std::vector<Instance> points = prefix;
    std::vector<double> mass;
    for (const Atom& a : mu_t.atoms()) {
        points.push_back(a.point);
        mass.push_back(a.prob);
    }
    auto labs = enumerate_labelings(cls, points);
    if (static_cast<long>(labs.size()) > kEnumerationCap)
        throw size_error("behavior enumeration exceeds cap");
    size_t np = prefix.size();
    // Group by prefix behavior.
    std::map<std::vector<double>, std::vector<size_t>> groups;
    for (size_t i = 0; i < labs.size(); ++i) {
        std::vector<double> key(labs[i].values.begin(),
                                labs[i].values.begin() + static_cast<long>(np));
        groups[key].push_back(i);
    }
    double best = 0.0;
    for (const auto& [key, idx] : groups) {
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t b = a + 1; b < idx.size(); ++b) {
                double dis = 0.0;
                for (size_t i = 0; i < mass.size(); ++i)
                    if (labs[idx[a]].values[np + i] != labs[idx[b]].values[np + i])
                        dis += mass[i];
                best = std::max(best, dis);
            }
    }
    return best;
}

// Regression variant: sup over members within the 2*eps tube around f_star on
// the prefix of E_{x~mu_t} |f(x) - f_star(x)|^r.
inline double gamma_bruteforce_tube(const FunctionClassSpec& cls,
                                    const std::vector<Instance>& prefix,
                                    const Member& f_star, double eps,
                                    const DiscreteDistribution& mu_t, int r) {
    if (r < 1) throw config_error("moment order must be >= 1");
    std::vector<Instance> points = prefix;
    for (const Atom& a : mu_t.atoms()) points.push_back(a.point);
    VersionSpace tube = VersionSpace::full(cls).restricted_to_reference(f_star, prefix, 2.0 * eps);
    auto labs = enumerate_labelings(tube, points);
    if (static_cast<long>(labs.size()) > kEnumerationCap)
        throw size_error("behavior enumeration exceeds cap");
    size_t np = prefix.size();
    double best = 0.0;
    for (const Labeling& lab : labs) {
        double v = 0.0;
        size_t i = np;
        for (const Atom& a : mu_t.atoms()) {
            double diff = std::abs(lab.values[i++] - cls.evaluate(f_star, a.point));
            v += a.prob * std::pow(diff, static_cast<double>(r));
        }
        best = std::max(best, v);
    }
    return best;
}

// | { k : sum_{t in epoch k} gamma_t 1[gamma_t >= q]  >=  w } |
inline long epoch_violation_count(const std::vector<double>& gammas,
                                  const std::vector<long>& epoch_bounds, double q,
                                  double w) {
    long count = 0;
    for (size_t k = 0; k + 1 < epoch_bounds.size(); ++k) {
        double s = 0.0;
        for (long t = epoch_bounds[k] + 1; t <= epoch_bounds[k + 1]; ++t) {
            double g = gammas[static_cast<size_t>(t - 1)];
            if (g >= q) s += g;
        }
        if (s >= w) ++count;
    }
    return count;
}

// ---------------------------------------------------------------------------

struct WillsEstimate {
    long m = 0;
    long draws = 0;
    double estimate = 0.0;
    double se = 0.0;
};

struct GaussianEstimate {
    long m = 0;
    long draws = 0;
    double estimate = 0.0;
    double se = 0.0;
};

namespace detail {

inline std::vector<std::vector<double>> projected_behaviors(const VersionSpace& vs,
                                                            const std::vector<Instance>& z) {
    auto labs = enumerate_labelings(vs, z);
    if (static_cast<long>(labs.size()) > kEnumerationCap)
        throw size_error("behavior enumeration exceeds cap");
    std::vector<std::vector<double>> rows;
    rows.reserve(labs.size());
    for (auto& l : labs) rows.push_back(std::move(l.values));
    return rows;
}

} // namespace detail

inline WillsEstimate wills_mc(const VersionSpace& vs, const std::vector<Instance>& z,
                              long draws, RngStream& rng) {
    if (draws < 1) throw config_error("wills_mc needs draws >= 1");
    auto rows = detail::projected_behaviors(vs, z);
    size_t m = z.size();
    const std::vector<double>& ref = rows.front();
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> zeta(m);
    for (long n = 0; n < draws; ++n) {
        for (size_t i = 0; i < m; ++i) zeta[i] = ref[i] + rng.next_gaussian();
        double ref_score = 0.0;
        for (size_t i = 0; i < m; ++i) ref_score += zeta[i] * ref[i] - 0.5 * ref[i] * ref[i];
        double best = ref_score;
        for (const auto& row : rows) {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += zeta[i] * row[i] - 0.5 * row[i] * row[i];
            best = std::max(best, s);
        }
        double val = std::exp(best - ref_score);
        sum += val;
        sumsq += val * val;
    }
    WillsEstimate est;
    est.m = static_cast<long>(m);
    est.draws = draws;
    est.estimate = sum / static_cast<double>(draws);
    double var = std::max(0.0, sumsq / static_cast<double>(draws) - est.estimate * est.estimate);
    est.se = std::sqrt(var / static_cast<double>(draws));
    return est;
}

inline GaussianEstimate gaussian_complexity_mc(const VersionSpace& vs,
                                               const std::vector<Instance>& z, long draws,
                                               RngStream& rng) {
    if (draws < 1) throw config_error("gaussian_complexity_mc needs draws >= 1");
    auto rows = detail::projected_behaviors(vs, z);
    size_t m = z.size();
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> xi(m);
    for (long n = 0; n < draws; ++n) {
        for (size_t i = 0; i < m; ++i) xi[i] = rng.next_gaussian();
        double best = -1e300;
        for (const auto& row : rows) {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += xi[i] * row[i];
            best = std::max(best, s);
        }
        sum += best;
        sumsq += best * best;
    }
    GaussianEstimate est;
    est.m = static_cast<long>(m);
    est.draws = draws;
    est.estimate = sum / static_cast<double>(draws);
    double var = std::max(0.0, sumsq / static_cast<double>(draws) - est.estimate * est.estimate);
    est.se = std::sqrt(var / static_cast<double>(draws));
    return est;
}

} // namespace solsim
