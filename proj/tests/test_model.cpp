#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "solsim/function_class.hpp"
#include "solsim/hindsight.hpp"
#include "solsim/loss.hpp"
#include "solsim/rng.hpp"
#include "solsim/version_space.hpp"

using namespace solsim;

namespace {

std::vector<Instance> points1d(std::initializer_list<double> ps) {
    std::vector<Instance> out;
    for (double p : ps) out.push_back(Instance(1, p));
    return out;
}

// Brute-force VC dimension of a finite binary class by shattering check.
int brute_vc_dimension(const FunctionClassSpec& cls) {
    const auto& support = cls.finite_support();
    int n = static_cast<int>(support.size());
    int best = 0;
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<Instance> pts;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) pts.push_back(support[static_cast<size_t>(i)]);
        int m = static_cast<int>(pts.size());
        if (m <= best) continue;
        auto labs = enumerate_labelings(cls, pts);
        if (static_cast<int>(labs.size()) == (1 << m)) best = m;
    }
    return best;
}

} // namespace

TEST_CASE("evaluate: closed threshold indicator") {
    auto th = FunctionClassSpec::threshold1d();
    REQUIRE(th.evaluate(Member::of_theta({0.5}), Instance(1, 0.7)) == 1.0);
    REQUIRE(th.evaluate(Member::of_theta({0.5}), Instance(1, 0.5)) == 1.0);  // closed at theta
    REQUIRE(th.evaluate(Member::of_theta({0.5}), Instance(1, 0.4)) == 0.0);

    auto prod = FunctionClassSpec::product_threshold(2);
    REQUIRE(prod.evaluate(Member::of_theta({0.3, 0.9}), Instance(2, 0.5)) == 0.0);
    REQUIRE(prod.evaluate(Member::of_theta({0.3, 0.9}), Instance(1, 0.5)) == 1.0);
    REQUIRE_THROWS_AS(prod.evaluate(Member::of_theta({0.3, 0.9}), Instance(3, 0.5)),
                      dimension_error);
    REQUIRE_THROWS_AS(prod.evaluate(Member::of_theta({0.3}), Instance(1, 0.5)),
                      dimension_error);
}

TEST_CASE("sauer_bound") {
    REQUIRE(sauer_bound(5, 1) == 6);
    REQUIRE(sauer_bound(0, 3) == 1);
    REQUIRE(sauer_bound(0, 0) == 1);
    REQUIRE(sauer_bound(10, 2) == 56);
}

TEST_CASE("enumerate_labelings: threshold examples") {
    auto th = FunctionClassSpec::threshold1d();
    auto labs = enumerate_labelings(th, points1d({0.2, 0.5, 0.8}));
    REQUIRE(labs.size() == 4);
    std::set<std::vector<double>> got;
    for (const auto& l : labs) got.insert(l.values);
    std::set<std::vector<double>> want = {
        {1, 1, 1}, {0, 1, 1}, {0, 0, 1}, {0, 0, 0}};
    REQUIRE(got == want);

    REQUIRE(enumerate_labelings(th, {}).size() == 1);

    auto labs5 = enumerate_labelings(th, points1d({0.1, 0.3, 0.5, 0.7, 0.9}));
    REQUIRE(labs5.size() == sauer_bound(5, 1));
}

TEST_CASE("enumerate_labelings: duplicates and boundary position 1") {
    auto th = FunctionClassSpec::threshold1d();
    // Duplicate positions do not add labelings.
    REQUIRE(enumerate_labelings(th, points1d({0.4, 0.4, 0.8})).size() == 3);
    // A point at 1 cannot be labeled 0 (theta <= 1 always labels it 1).
    auto labs = enumerate_labelings(th, points1d({1.0}));
    REQUIRE(labs.size() == 1);
    REQUIRE(labs.front().values == std::vector<double>{1.0});
}

TEST_CASE("labelings are 0-block then 1-block within a coordinate") {
    auto th = FunctionClassSpec::threshold1d();
    auto pts = points1d({0.1, 0.25, 0.5, 0.75, 0.9});
    for (const auto& l : enumerate_labelings(th, pts)) {
        for (size_t i = 1; i < l.values.size(); ++i)
            REQUIRE(l.values[i] >= l.values[i - 1]);  // sorted input: non-decreasing
    }
}

TEST_CASE("sauer-shelah property across kinds (randomized)") {
    RngStream rng(42);
    for (int iter = 0; iter < 120; ++iter) {
        int d = 1 + static_cast<int>(rng.next_u64() % 3);
        auto cls = d == 1 ? FunctionClassSpec::threshold1d()
                          : FunctionClassSpec::product_threshold(d);
        int n = static_cast<int>(rng.next_u64() % 13);
        std::vector<Instance> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back(Instance(1 + static_cast<int>(rng.next_u64() % d), rng.next_double()));
        auto labs = enumerate_labelings(cls, pts);
        REQUIRE(labs.size() <= sauer_bound(n, d));
        // Labelings are distinct and realizable by their representative.
        std::set<std::vector<double>> seen;
        for (const auto& l : labs) {
            REQUIRE(seen.insert(l.values).second);
            for (size_t i = 0; i < pts.size(); ++i)
                REQUIRE(cls.evaluate(l.representative, pts[i]) == l.values[i]);
        }
    }
}

TEST_CASE("sauer-shelah property for random finite classes") {
    RngStream rng(43);
    for (int iter = 0; iter < 40; ++iter) {
        int n = 3 + static_cast<int>(rng.next_u64() % 4);
        int m = 2 + static_cast<int>(rng.next_u64() % 7);
        std::vector<Instance> support;
        for (int i = 0; i < n; ++i) support.push_back(Instance(1, (i + 1.0) / (n + 1.0)));
        std::vector<std::vector<double>> members;
        for (int j = 0; j < m; ++j) {
            std::vector<double> row;
            for (int i = 0; i < n; ++i) row.push_back(rng.next_bernoulli(0.5) ? 1.0 : 0.0);
            members.push_back(row);
        }
        auto cls = FunctionClassSpec::finite(support, members);
        int vc = brute_vc_dimension(cls);
        auto labs = enumerate_labelings(cls, support);
        REQUIRE(labs.size() <= sauer_bound(n, vc));
    }
}

TEST_CASE("epsilon_cover: scale-0 equals labeling enumeration") {
    auto th = FunctionClassSpec::threshold1d();
    auto vs = VersionSpace::full(th);
    auto pts = points1d({0.2, 0.5, 0.8});
    auto reps = epsilon_cover(vs, pts, 0.0);
    REQUIRE(reps.size() == 4);

    REQUIRE(epsilon_cover(vs, {}, 0.0).size() == 1);

    // Brute-force validity: every theta on a fine grid (plus just-above each
    // point) is matched exactly by some representative.
    RngStream rng(7);
    for (int iter = 0; iter < 30; ++iter) {
        int n = static_cast<int>(rng.next_u64() % 9);
        std::vector<Instance> qs;
        for (int i = 0; i < n; ++i) qs.push_back(Instance(1, rng.next_double()));
        auto cover = epsilon_cover(vs, qs, 0.0);
        std::vector<double> probes = {0.0, 1.0, 0.5};
        for (const auto& q : qs) {
            probes.push_back(q.position);
            probes.push_back(next_above(q.position));
        }
        for (int g = 0; g <= 64; ++g) probes.push_back(g / 64.0);
        for (double theta : probes) {
            bool hit = false;
            for (const Member& r : cover) {
                bool same = true;
                for (const auto& q : qs)
                    if (th.evaluate(r, q) != th.evaluate(Member::of_theta({theta}), q)) {
                        same = false;
                        break;
                    }
                if (same) { hit = true; break; }
            }
            REQUIRE(hit);
        }
    }
}

TEST_CASE("epsilon_cover: finite class sizes") {
    std::vector<Instance> support = points1d({0.1, 0.5, 0.9});
    auto cls = FunctionClassSpec::finite(
        support, {{0, 0, 0}, {0, 0, 1}, {1, 1, 1}, {0, 0, 1}});  // one duplicate behavior
    auto vs = VersionSpace::full(cls);
    auto cover0 = epsilon_cover(vs, support, 0.0);
    REQUIRE(cover0.size() == 3);  // distinct behaviors
    REQUIRE(epsilon_cover(vs, support, 1.0).size() == 1);
    REQUIRE(epsilon_cover(vs, support, 0.0).size() <= 4);
}

TEST_CASE("restrict: threshold interval arithmetic") {
    auto th = FunctionClassSpec::threshold1d();
    auto vs = VersionSpace::full(th);

    auto r1 = vs.restricted(points1d({0.5}), {1.0}, 0.0);
    REQUIRE(r1.intervals()[0].lo == 0.0);
    REQUIRE_FALSE(r1.intervals()[0].lo_strict);
    REQUIRE(r1.intervals()[0].hi == 0.5);
    REQUIRE(r1.canonical_member().theta[0] == 0.0);

    auto r2 = vs.restricted(points1d({0.5, 0.3}), {1.0, 0.0}, 0.0);
    REQUIRE(r2.intervals()[0].lo == 0.3);
    REQUIRE(r2.intervals()[0].lo_strict);
    REQUIRE(r2.intervals()[0].hi == 0.5);
    // Canonical member is the smallest double strictly above 0.3.
    REQUIRE(r2.canonical_member().theta[0] == next_above(0.3));
    REQUIRE(th.evaluate(r2.canonical_member(), Instance(1, 0.3)) == 0.0);
    REQUIRE(th.evaluate(r2.canonical_member(), Instance(1, 0.5)) == 1.0);

    // Restricting by the empty dataset is the identity.
    auto r3 = vs.restricted({}, {}, 0.0);
    REQUIRE(r3 == vs);

    // Infeasible: same point labeled both ways.
    REQUIRE_THROWS_AS(vs.restricted(points1d({0.5, 0.5}), {1.0, 0.0}, 0.0), infeasible_error);
}

TEST_CASE("restrict: idempotent, monotone, reproduces labels") {
    RngStream rng(11);
    auto th = FunctionClassSpec::threshold1d();
    auto full = VersionSpace::full(th);
    for (int iter = 0; iter < 60; ++iter) {
        int n = 1 + static_cast<int>(rng.next_u64() % 6);
        std::vector<Instance> pts;
        for (int i = 0; i < n; ++i) pts.push_back(Instance(1, rng.next_double()));
        // Pick a realizable labeling by evaluating a random member.
        double theta = rng.next_double();
        std::vector<double> labels;
        for (const auto& p : pts) labels.push_back(th.evaluate(Member::of_theta({theta}), p));

        auto once = full.restricted(pts, labels, 0.0);
        auto twice = once.restricted(pts, labels, 0.0);
        REQUIRE(once == twice);  // idempotent
        REQUIRE(once.contains(Member::of_theta({theta})));
        // Monotone: adding a constraint never widens the interval.
        REQUIRE(once.intervals()[0].lo >= full.intervals()[0].lo);
        REQUIRE(once.intervals()[0].hi <= full.intervals()[0].hi);
        // Surviving members reproduce the labels exactly.
        Member canon = once.canonical_member();
        for (size_t i = 0; i < pts.size(); ++i)
            REQUIRE(th.evaluate(canon, pts[i]) == labels[i]);
    }
}

TEST_CASE("restrict: reference tube on finite class") {
    std::vector<Instance> support = points1d({0.2, 0.6});
    auto cls = FunctionClassSpec::finite(
        support, {{0.1, 0.2}, {0.15, 0.25}, {0.9, 0.8}});
    auto vs = VersionSpace::full(cls);
    auto tube = vs.restricted_to_reference(Member::of_id(0), support, 0.1);
    REQUIRE(tube.subset() == std::vector<int>{0, 1});
    auto tight = vs.restricted_to_reference(Member::of_id(0), support, 0.0);
    REQUIRE(tight.subset() == std::vector<int>{0});
}

TEST_CASE("best_in_hindsight: examples") {
    auto th = FunctionClassSpec::threshold1d();
    {
        std::vector<std::pair<Instance, LossSpec>> trace = {
            {Instance(1, 0.4), LossSpec::absolute(1.0)},
            {Instance(1, 0.6), LossSpec::absolute(1.0)},
        };
        auto r = best_in_hindsight(th, trace);
        REQUIRE(r.total_loss == 0.0);
        REQUIRE(r.member.theta[0] == 0.0);  // canonical tie-break
        REQUIRE(r.exact);
    }
    {
        auto r = best_in_hindsight(th, {});
        REQUIRE(r.total_loss == 0.0);
        REQUIRE(r.member.theta[0] == 0.0);
    }
    {
        std::vector<std::pair<Instance, LossSpec>> trace = {
            {Instance(1, 0.5), LossSpec::absolute(1.0)},
            {Instance(1, 0.5), LossSpec::absolute(0.0)},
        };
        auto r = best_in_hindsight(th, trace);
        REQUIRE(r.total_loss == 1.0);  // contradictory labels at one point
    }
}

TEST_CASE("best_in_hindsight: matches a 10^4-point grid scan") {
    RngStream rng(99);
    auto th = FunctionClassSpec::threshold1d();
    for (int iter = 0; iter < 25; ++iter) {
        int n = 1 + static_cast<int>(rng.next_u64() % 50);
        std::vector<std::pair<Instance, LossSpec>> trace;
        for (int i = 0; i < n; ++i) {
            double pos = rng.next_double();
            double y = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
            trace.push_back({Instance(1, pos), LossSpec::absolute(y)});
        }
        auto r = best_in_hindsight(th, trace);
        double grid_best = 1e300;
        for (int g = 0; g <= 10000; ++g) {
            Member m = Member::of_theta({g / 10000.0});
            double total = 0.0;
            for (const auto& [x, loss] : trace) total += loss(th.evaluate(m, x));
            grid_best = std::min(grid_best, total);
        }
        // The exact scan can only be at least as good as any grid point.
        REQUIRE(r.total_loss <= grid_best + 1e-12);
        REQUIRE(grid_best <= r.total_loss + 1e-12 + 1.0 * n * 1e-4);
    }
}

TEST_CASE("best_in_hindsight: product class decomposes by coordinate") {
    RngStream rng(5);
    auto prod = FunctionClassSpec::product_threshold(2);
    std::vector<std::pair<Instance, LossSpec>> trace;
    for (int i = 0; i < 40; ++i) {
        int k = 1 + static_cast<int>(rng.next_u64() % 2);
        trace.push_back({Instance(k, rng.next_double()),
                         LossSpec::absolute(rng.next_bernoulli(0.5) ? 1.0 : 0.0)});
    }
    auto r = best_in_hindsight(prod, trace);
    // Independent scans of the per-coordinate subtraces agree.
    auto th = FunctionClassSpec::threshold1d();
    double total = 0.0;
    for (int k = 1; k <= 2; ++k) {
        std::vector<std::pair<Instance, LossSpec>> sub;
        for (const auto& [x, loss] : trace)
            if (x.coordinate == k) sub.push_back({Instance(1, x.position), loss});
        total += best_in_hindsight(th, sub).total_loss;
    }
    REQUIRE(r.total_loss == Catch::Approx(total).margin(1e-12));
}

TEST_CASE("loss specs: range and Lipschitz on a grid") {
    std::vector<LossSpec> losses = {LossSpec::absolute(0.3), LossSpec::squared(0.8),
                                    LossSpec::tabulated({0.2, 0.4, 0.3, 0.5, 0.45})};
    for (const auto& loss : losses) {
        double prev = loss(0.0);
        for (int g = 1; g <= 1000; ++g) {
            double p = g / 1000.0;
            double v = loss(p);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            REQUIRE(std::abs(v - prev) <= 1.0 / 1000.0 + 1e-12);
            prev = v;
        }
    }
    REQUIRE_THROWS_AS(LossSpec::tabulated({0.0, 0.9, 0.0}), config_error);  // slope > 1
    REQUIRE_THROWS_AS(LossSpec::absolute(1.5), config_error);
}

TEST_CASE("loss specs: squared is the halved parabola") {
    auto sq = LossSpec::squared(1.0);
    REQUIRE(sq(0.0) == Catch::Approx(0.5));
    REQUIRE(sq(1.0) == 0.0);
    REQUIRE(sq(0.5) == Catch::Approx(0.125));
}
