#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "solsim/adversary.hpp"
#include "solsim/diagnostics.hpp"
#include "solsim/rng.hpp"

using namespace solsim;

namespace {

std::vector<Instance> points1d(std::initializer_list<double> ps) {
    std::vector<Instance> out;
    for (double p : ps) out.push_back(Instance(1, p));
    return out;
}

DiscreteDistribution uniform1d(std::initializer_list<double> ps) {
    return DiscreteDistribution::uniform(points1d(ps));
}

// Random tube/pair configuration for the oracle equivalence tests.
struct GammaConfig {
    FunctionClassSpec cls;
    std::vector<Instance> prefix;
    std::vector<double> labels;
    DiscreteDistribution mu;
};

GammaConfig random_gamma_config(RngStream& rng) {
    int d = 1 + static_cast<int>(rng.next_u64() % 3);
    GammaConfig cfg{d == 1 ? FunctionClassSpec::threshold1d()
                           : FunctionClassSpec::product_threshold(d),
                    {}, {}, DiscreteDistribution::point_mass(Instance(1, 0.5))};
    // Realizable prefix: evaluate a random member.
    std::vector<double> theta;
    for (int k = 0; k < d; ++k) theta.push_back(rng.next_double());
    Member m = Member::of_theta(theta);
    int n = static_cast<int>(rng.next_u64() % 6);
    for (int i = 0; i < n; ++i) {
        Instance x(1 + static_cast<int>(rng.next_u64() % d), rng.next_double());
        cfg.prefix.push_back(x);
        cfg.labels.push_back(cfg.cls.evaluate(m, x));
    }
    int atoms = 1 + static_cast<int>(rng.next_u64() % 6);
    std::vector<Instance> pts;
    for (int i = 0; i < atoms; ++i)
        pts.push_back(Instance(1 + static_cast<int>(rng.next_u64() % d), rng.next_double()));
    cfg.mu = DiscreteDistribution::uniform(pts);
    return cfg;
}

} // namespace

TEST_CASE("gamma_exact: worked examples") {
    auto cls = FunctionClassSpec::threshold1d();
    auto mu = uniform1d({0.1, 0.5, 0.9});

    // Two prefix queries carve three cells holding one atom each.
    REQUIRE(gamma_exact(cls, points1d({0.3, 0.7}), {0.0, 1.0}, mu) ==
            Catch::Approx(1.0 / 3.0));
    // No prefix: a pair may disagree on everything below 1.
    REQUIRE(gamma_exact(cls, {}, {}, mu) == Catch::Approx(1.0));
    // Prefix covering the support pins every atom.
    REQUIRE(gamma_exact(cls, points1d({0.1, 0.5, 0.9}), {0.0, 0.0, 1.0}, mu) == 0.0);
    // Unrealizable prefix labels are rejected.
    REQUIRE_THROWS_AS(gamma_exact(cls, points1d({0.2, 0.8}), {1.0, 0.0}, mu),
                      infeasible_error);
}

TEST_CASE("gamma_exact: atoms exactly at prefix positions or at 1 are pinned") {
    auto cls = FunctionClassSpec::threshold1d();
    auto mu = uniform1d({0.3, 1.0});
    // The atom at 0.3 is a prefix point; the atom at 1 is labeled 1 by every
    // member. Nothing can disagree.
    REQUIRE(gamma_exact(cls, points1d({0.3}), {1.0}, mu) == 0.0);
}

TEST_CASE("gamma oracle equivalence on random configurations") {
    RngStream rng(404);
    for (int iter = 0; iter < 80; ++iter) {
        GammaConfig cfg = random_gamma_config(rng);
        double exact = gamma_exact(cfg.cls, cfg.prefix, cfg.labels, cfg.mu);
        double brute = gamma_bruteforce_pairs(cfg.cls, cfg.prefix, cfg.labels, cfg.mu);
        REQUIRE(exact == Catch::Approx(brute).margin(1e-12));
    }
}

TEST_CASE("gamma is monotone non-increasing in the prefix") {
    RngStream rng(405);
    auto cls = FunctionClassSpec::threshold1d();
    for (int iter = 0; iter < 30; ++iter) {
        double theta = rng.next_double();
        std::vector<Instance> prefix;
        std::vector<double> labels;
        std::vector<Instance> atoms;
        for (int i = 0; i < 5; ++i) atoms.push_back(Instance(1, rng.next_double()));
        auto mu = DiscreteDistribution::uniform(atoms);
        double prev = gamma_exact(cls, prefix, labels, mu);
        for (int i = 0; i < 6; ++i) {
            Instance x(1, rng.next_double());
            prefix.push_back(x);
            labels.push_back(cls.evaluate(Member::of_theta({theta}), x));
            double g = gamma_exact(cls, prefix, labels, mu);
            REQUIRE(g <= prev + 1e-15);
            prev = g;
        }
    }
}

TEST_CASE("gamma tube: singleton is zero, binary moments coincide") {
    std::vector<Instance> support = points1d({0.2, 0.5, 0.8});
    auto single = FunctionClassSpec::finite(support, {{0, 1, 1}});
    auto mu = uniform1d({0.2, 0.5, 0.8});
    REQUIRE(gamma_bruteforce_tube(single, {}, Member::of_id(0), 0.0, mu, 1) == 0.0);

    auto cls = FunctionClassSpec::threshold1d();
    RngStream rng(406);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<Instance> prefix;
        std::vector<double> labels;
        double theta = rng.next_double();
        Member f = Member::of_theta({theta});
        for (int i = 0; i < 3; ++i) {
            Instance x(1, rng.next_double());
            prefix.push_back(x);
        }
        double r1 = gamma_bruteforce_tube(cls, prefix, f, 0.0, mu, 1);
        double r2 = gamma_bruteforce_tube(cls, prefix, f, 0.0, mu, 2);
        REQUIRE(r1 == Catch::Approx(r2).margin(1e-12));  // |.|^2 = |.| on {0,1}
    }
}

TEST_CASE("epoch violation count: definition and monotonicity") {
    REQUIRE(epoch_violation_count({}, {0}, 0.5, 1.0) == 0);

    std::vector<double> gammas = {1.0, 1.0, 0.1, 0.1, 0.6, 0.6, 0.0, 0.0};
    std::vector<long> bounds = {0, 2, 4, 6, 8};
    // Epoch sums with q=0.5: 2.0, 0, 1.2, 0 -> two epochs at w=1.
    REQUIRE(epoch_violation_count(gammas, bounds, 0.5, 1.0) == 2);
    REQUIRE(epoch_violation_count(gammas, bounds, 0.5, 1.5) == 1);
    REQUIRE(epoch_violation_count(gammas, bounds, 0.7, 1.0) == 1);

    // Monotone non-increasing in q and in w.
    RngStream rng(407);
    std::vector<double> g2;
    for (int i = 0; i < 64; ++i) g2.push_back(rng.next_double());
    std::vector<long> b2 = {0, 16, 32, 48, 64};
    for (double q = 0.1; q < 1.0; q += 0.2)
        for (double w = 0.5; w < 4.0; w += 0.5) {
            REQUIRE(epoch_violation_count(g2, b2, q, w) >=
                    epoch_violation_count(g2, b2, q + 0.1, w));
            REQUIRE(epoch_violation_count(g2, b2, q, w) >=
                    epoch_violation_count(g2, b2, q, w + 0.5));
        }
}

TEST_CASE("epoch violation count: iid stream settles after the support is seen") {
    auto cls = FunctionClassSpec::threshold1d();
    std::vector<Instance> atoms;
    for (int i = 0; i < 6; ++i) atoms.push_back(Instance(1, (i + 0.5) / 6.0));
    IidAdversary adv(cls, DiscreteDistribution::uniform(atoms), Member::of_theta({0.5}), 0.0,
                     500);
    std::vector<long> bounds = {0, 25, 50, 75, 100};
    std::vector<double> gammas;
    std::vector<Instance> queries;
    std::vector<double> labels;
    std::vector<Instance> epoch_prefix;
    std::vector<double> epoch_labels;
    size_t epoch = 1;
    for (long t = 1; t <= 100; ++t) {
        if (t > bounds[epoch]) {
            ++epoch;
            epoch_prefix = queries;
            epoch_labels = labels;
        }
        DiscreteDistribution mu_t = adv.round_distribution(t);
        gammas.push_back(gamma_exact(cls, epoch_prefix, epoch_labels, mu_t));
        RngStream rng = RngStream::keyed(500, 0, kStreamAdversary,
                                         static_cast<std::uint64_t>(t));
        Instance x = mu_t.sample(rng);
        LossSpec loss = adv.reveal(t, x);
        queries.push_back(x);
        labels.push_back(loss.label());
    }
    // After the warm-up epoch the support is fully labeled: gamma = 0 there.
    REQUIRE(epoch_violation_count(gammas, bounds, 1.0, 1.0) <= 1);
    for (long t = 26; t <= 100; ++t) REQUIRE(gammas[static_cast<size_t>(t - 1)] <= 1.0 / 6.0 + 1e-12);
}

TEST_CASE("wills: singleton gives exactly 1 per draw") {
    std::vector<Instance> z = points1d({0.1, 0.4, 0.7, 0.95});
    auto single = FunctionClassSpec::finite(points1d({0.1, 0.4, 0.7, 0.95}),
                                            {{0.3, 0.7, 0.2, 1.0}});
    RngStream rng(408);
    auto est = wills_mc(VersionSpace::full(single), z, 200, rng);
    REQUIRE(est.estimate == 1.0);
    REQUIRE(est.se == 0.0);
}

TEST_CASE("wills: finite-class union bound at Monte-Carlo tolerance") {
    RngStream meta(409);
    for (int iter = 0; iter < 8; ++iter) {
        int n = 4;
        int m = 2 + static_cast<int>(meta.next_u64() % 8);
        std::vector<Instance> support;
        for (int i = 0; i < n; ++i) support.push_back(Instance(1, (i + 1.0) / (n + 1.0)));
        std::vector<std::vector<double>> members;
        for (int j = 0; j < m; ++j) {
            std::vector<double> row;
            for (int i = 0; i < n; ++i) row.push_back(meta.next_double());
            members.push_back(row);
        }
        auto cls = FunctionClassSpec::finite(support, members);
        RngStream rng(5000 + static_cast<std::uint64_t>(iter));
        auto est = wills_mc(VersionSpace::full(cls), support, 20000, rng);
        REQUIRE(std::log(est.estimate) <=
                std::log(static_cast<double>(m)) + 3.0 * est.se);
        REQUIRE(est.estimate >= 1.0 - 3.0 * est.se);  // contains the reference member
    }
}

TEST_CASE("wills: non-decreasing in m within Monte-Carlo tolerance") {
    auto cls = FunctionClassSpec::threshold1d();
    auto vs = VersionSpace::full(cls);
    std::vector<Instance> z_small = points1d({0.2, 0.5});
    std::vector<Instance> z_big = points1d({0.2, 0.5, 0.7, 0.9});
    RngStream r1(410), r2(411);
    auto small = wills_mc(vs, z_small, 40000, r1);
    auto big = wills_mc(vs, z_big, 40000, r2);
    REQUIRE(big.estimate >= small.estimate - 3.0 * (small.se + big.se));
}

TEST_CASE("gaussian complexity: half-normal oracle and the log-Wills bound") {
    // Two constant functions {0,1} on m=1: E[max(0,xi)] = 1/sqrt(2 pi).
    auto consts = FunctionClassSpec::finite(points1d({0.5}), {{0.0}, {1.0}});
    std::vector<Instance> z1 = points1d({0.5});
    RngStream rng(412);
    auto g = gaussian_complexity_mc(VersionSpace::full(consts), z1, 100000, rng);
    REQUIRE(g.estimate == Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).margin(4.0 * g.se));

    // Singleton: zero-mean.
    auto single = FunctionClassSpec::finite(points1d({0.5}), {{0.7}});
    RngStream rng2(413);
    auto g0 = gaussian_complexity_mc(VersionSpace::full(single), z1, 50000, rng2);
    REQUIRE(std::abs(g0.estimate) <= 4.0 * g0.se + 1e-12);

    // ln W <= G for a VC-1 class on 8 points.
    auto th = FunctionClassSpec::threshold1d();
    std::vector<Instance> z8;
    for (int i = 0; i < 8; ++i) z8.push_back(Instance(1, (i + 0.5) / 8.0));
    RngStream r3(414), r4(415);
    auto w = wills_mc(VersionSpace::full(th), z8, 50000, r3);
    auto gg = gaussian_complexity_mc(VersionSpace::full(th), z8, 50000, r4);
    REQUIRE(std::log(w.estimate) <= gg.estimate + 3.0 * (gg.se + w.se / w.estimate));
}

TEST_CASE("enumeration caps guard the Monte-Carlo estimators") {
    auto cls = FunctionClassSpec::product_threshold(3);
    std::vector<Instance> z;
    RngStream rng(416);
    for (int k = 1; k <= 3; ++k)
        for (int i = 0; i < 30; ++i) z.push_back(Instance(k, rng.next_double()));
    RngStream draw(417);
    REQUIRE_THROWS_AS(wills_mc(VersionSpace::full(cls), z, 10, draw), size_error);
}

TEST_CASE("epoch violation count: switching adversary affects at most m+1 epochs") {
    auto cls = FunctionClassSpec::threshold1d();
    // Three regions (two switches) at sigma = 1/3.
    std::vector<DiscreteDistribution> regions;
    for (int r = 0; r < 3; ++r) {
        std::vector<Instance> atoms;
        for (int i = 0; i < 3; ++i)
            atoms.push_back(Instance(1, (r + (i + 0.5) / 3.0) / 3.0));
        regions.push_back(DiscreteDistribution::uniform(atoms));
    }
    SwitchingAdversary adv(cls, 1.0 / 3.0, regions, {40, 80}, Member::of_theta({0.5}));
    std::vector<long> bounds = {0, 20, 40, 60, 80, 100, 120};
    std::vector<double> gammas;
    std::vector<Instance> queries;
    std::vector<double> labels;
    std::vector<Instance> epoch_prefix;
    std::vector<double> epoch_labels;
    size_t epoch = 1;
    for (long t = 1; t <= 120; ++t) {
        if (t > bounds[epoch]) {
            ++epoch;
            epoch_prefix = queries;
            epoch_labels = labels;
        }
        DiscreteDistribution mu_t = adv.round_distribution(t);
        gammas.push_back(gamma_exact(cls, epoch_prefix, epoch_labels, mu_t));
        RngStream rng = RngStream::keyed(600, 0, kStreamAdversary,
                                         static_cast<std::uint64_t>(t));
        Instance x = mu_t.sample(rng);
        LossSpec loss = adv.reveal(t, x);
        queries.push_back(x);
        labels.push_back(loss.label());
    }
    // Only the warm-up epoch and the post-switch epochs can be saturated.
    REQUIRE(epoch_violation_count(gammas, bounds, 0.9, 15.0) <= 3);
}
