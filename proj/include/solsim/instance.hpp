#pragma once
/*
Instance space and finitely supported distributions.

The instance space is [d] x [0,1]: a coordinate index plus a position. The
distinguished anchor point is (1, 0). All adversary distributions are
finitely supported so density ratios are exact; an optional rational mass
(num/den) per atom enables exact certification for hand-specified supports.
*/
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace solsim {

struct Instance {
    int coordinate = 1;      // in [1..d]
    double position = 0.0;   // in [0,1]
    bool is_anchor = false;  // marks the distinguished point (1,0)

    Instance() = default;
    Instance(int k, double pos, bool anchor = false)
        : coordinate(k), position(pos), is_anchor(anchor) {
        if (k < 1) throw dimension_error("coordinate must be >= 1");
        if (!(pos >= 0.0 && pos <= 1.0)) throw dimension_error("position outside [0,1]");
        if (anchor && !(k == 1 && pos == 0.0))
            throw dimension_error("anchor must be (1,0)");
    }

    static Instance anchor() { return Instance(1, 0.0, true); }

    bool operator==(const Instance& o) const {
        return coordinate == o.coordinate && position == o.position;
    }
    bool operator<(const Instance& o) const {
        if (coordinate != o.coordinate) return coordinate < o.coordinate;
        return position < o.position;
    }
};

// Exact nonnegative rational, for the optional exact-certification mode.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (d <= 0 || n < 0) throw config_error("fraction must be nonnegative with positive denominator");
        reduce();
    }
    void reduce() {
        std::int64_t g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    // a/b <= c/d, exact.
    static bool leq(const Fraction& a, const Fraction& b) {
        return (__int128)a.num * b.den <= (__int128)b.num * a.den;
    }
};

struct Atom {
    Instance point;
    double prob = 0.0;
    bool has_exact = false;
    Fraction exact;
};

class DiscreteDistribution {
public:
    DiscreteDistribution() = default;

    // Atoms are merged by point; probabilities must sum to 1 within 1e-12.
    explicit DiscreteDistribution(std::vector<Atom> atoms) {
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.point < b.point; });
        for (const Atom& a : atoms) {
            if (a.prob < 0.0) throw config_error("negative atom probability");
            if (!atoms_.empty() && atoms_.back().point == a.point) {
                atoms_.back().prob += a.prob;
                if (atoms_.back().has_exact && a.has_exact) {
                    Fraction& f = atoms_.back().exact;
                    Fraction g = a.exact;
                    f = Fraction(f.num * g.den + g.num * f.den, f.den * g.den);
                } else {
                    atoms_.back().has_exact = false;
                }
            } else {
                atoms_.push_back(a);
            }
        }
        double total = 0.0;
        for (const Atom& a : atoms_) total += a.prob;
        if (std::abs(total - 1.0) > 1e-12)
            throw config_error("atom probabilities sum to " + std::to_string(total));
    }

    static DiscreteDistribution point_mass(const Instance& x) {
        Atom a; a.point = x; a.prob = 1.0; a.has_exact = true; a.exact = Fraction(1, 1);
        return DiscreteDistribution({a});
    }

    static DiscreteDistribution uniform(const std::vector<Instance>& pts) {
        if (pts.empty()) throw config_error("uniform distribution over empty support");
        std::vector<Atom> atoms;
        atoms.reserve(pts.size());
        for (const Instance& x : pts) {
            Atom a; a.point = x;
            a.prob = 1.0 / static_cast<double>(pts.size());
            a.has_exact = true;
            a.exact = Fraction(1, static_cast<std::int64_t>(pts.size()));
            atoms.push_back(a);
        }
        return DiscreteDistribution(std::move(atoms));
    }

    // w * this + (1-w) * other, with exact masses kept when both sides have them.
    static DiscreteDistribution mix(const DiscreteDistribution& a, double wa, const Fraction* fa,
                                    const DiscreteDistribution& b, double wb, const Fraction* fb) {
        std::vector<Atom> atoms;
        for (const Atom& at : a.atoms_) {
            Atom c = at;
            c.prob *= wa;
            if (c.has_exact && fa) {
                c.exact = Fraction(c.exact.num * fa->num, c.exact.den * fa->den);
            } else {
                c.has_exact = false;
            }
            atoms.push_back(c);
        }
        for (const Atom& at : b.atoms_) {
            Atom c = at;
            c.prob *= wb;
            if (c.has_exact && fb) {
                c.exact = Fraction(c.exact.num * fb->num, c.exact.den * fb->den);
            } else {
                c.has_exact = false;
            }
            atoms.push_back(c);
        }
        return DiscreteDistribution(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const { return atoms_; }

    double mass_at(const Instance& x) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                   [](const Atom& a, const Instance& p) { return a.point < p; });
        if (it != atoms_.end() && it->point == x) return it->prob;
        return 0.0;
    }
    const Atom* atom_at(const Instance& x) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                   [](const Atom& a, const Instance& p) { return a.point < p; });
        if (it != atoms_.end() && it->point == x) return &*it;
        return nullptr;
    }

    Instance sample(RngStream& rng) const {
        double u = rng.next_double();
        double acc = 0.0;
        for (const Atom& a : atoms_) {
            acc += a.prob;
            if (u < acc) return a.point;
        }
        return atoms_.back().point;
    }

private:
    std::vector<Atom> atoms_;
};

} // namespace solsim
