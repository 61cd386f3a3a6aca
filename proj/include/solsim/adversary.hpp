#pragma once
/*
Smooth instance generators.

Every adversary announces a finitely supported round distribution mu_t,
labels the sampled instance, and declares a fixed base measure mu. The
harness certifies sigma-smoothness each round: max over atoms of
mu_t(x)/mu(x) must be at most 1/sigma (within 1e-9; exactly, in rational
mode, when both sides carry exact masses).

LowerBoundAdversary is the construction that forces
min(sqrt(d T (1-sigma)/sigma)/12, T/24) expected mistakes from any learner:
with probability 1-q it queries the anchor (labeled 0), and with probability
q/d it queries the midpoint of coordinate k's remaining uncertainty interval,
labeled by a fresh random bit that then halves the interval. The base
measure sigma*delta_anchor + (1-sigma)*uniform(midpoints) certifies it. The
bit depth per coordinate is capped at 50 so every midpoint is an exact dyadic
double; the cap only matters for N > 50 and never weakens the forced-mistake
count at the scales this project runs.

MixtureAdversary corrupts epochs with mu_k = q nu_k + (1-q) mu_0, where nu_k
is a fresh point mass; the corrupted-epoch budget floor((1-sigma)/(q sigma))
is what sigma-smoothness permits against mu = (1-beta) mu_0 + (beta/m) sum nu_k
with beta = m q sigma. In bisect mode the fresh points halve an uncertainty
interval so the labels stay realizable while carrying one fresh bit each.
*/
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"
#include "function_class.hpp"
#include "instance.hpp"
#include "loss.hpp"
#include "rng.hpp"

namespace solsim {

struct SmoothnessCertificate {
    double max_ratio = 0.0;
    double sigma = 1.0;
    bool pass = false;
    bool exact = false;  // rational comparison was available
};

inline SmoothnessCertificate smoothness_certificate(const DiscreteDistribution& mu_t,
                                                    const DiscreteDistribution& mu,
                                                    double sigma,
                                                    const Fraction* sigma_exact = nullptr) {
    SmoothnessCertificate cert;
    cert.sigma = sigma;
    bool all_exact = sigma_exact != nullptr;
    bool exact_pass = true;
    double worst = 0.0;
    for (const Atom& a : mu_t.atoms()) {
        if (a.prob == 0.0) continue;
        const Atom* base = mu.atom_at(a.point);
        if (base == nullptr || base->prob == 0.0) {
            cert.max_ratio = std::numeric_limits<double>::infinity();
            cert.pass = false;
            return cert;
        }
        worst = std::max(worst, a.prob / base->prob);
        if (all_exact && a.has_exact && base->has_exact) {
            // p_t / p <= 1/sigma  <=>  p_t * sigma <= p, cross-multiplied.
            __int128 lhs = (__int128)a.exact.num * sigma_exact->num * base->exact.den;
            __int128 rhs = (__int128)base->exact.num * a.exact.den * sigma_exact->den;
            if (lhs > rhs) exact_pass = false;
        } else {
            all_exact = false;
        }
    }
    cert.max_ratio = worst;
    cert.exact = all_exact;
    cert.pass = all_exact ? exact_pass : (worst <= 1.0 / sigma + 1e-9);
    return cert;
}

class Adversary {
public:
    virtual ~Adversary() = default;
    virtual int dimension() const = 0;
    virtual double sigma() const = 0;
    // mu_t, a pure function of the adversary state before round t's sample.
    virtual DiscreteDistribution round_distribution(long t) = 0;
    // Label the sampled instance and advance internal state.
    virtual LossSpec reveal(long t, const Instance& x) = 0;
    virtual const DiscreteDistribution& base_measure() const = 0;
    // Oblivious benchmark realizing the labels, when one exists.
    virtual std::optional<Member> benchmark() const { return std::nullopt; }
    virtual const Fraction* exact_sigma() const { return nullptr; }
};

// ---------------------------------------------------------------------------

class IidAdversary final : public Adversary {
public:
    IidAdversary(const FunctionClassSpec& cls, DiscreteDistribution mu, Member f_star,
                 double flip_prob, std::uint64_t rng_key,
                 LossSpec::Kind loss_kind = LossSpec::Kind::Absolute)
        : cls_(&cls), mu_(std::move(mu)), f_star_(std::move(f_star)), flip_(flip_prob),
          rng_key_(rng_key), loss_kind_(loss_kind) {
        if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw config_error("flip prob outside [0,1]");
    }

    int dimension() const override { return cls_->dimension(); }
    double sigma() const override { return 1.0; }
    DiscreteDistribution round_distribution(long) override { return mu_; }
    LossSpec reveal(long t, const Instance& x) override {
        double y = cls_->evaluate(f_star_, x);
        if (flip_ > 0.0) {
            RngStream rng = RngStream::keyed(rng_key_, 0, kStreamLabels,
                                             static_cast<std::uint64_t>(t));
            if (rng.next_bernoulli(flip_)) y = 1.0 - y;
        }
        return loss_kind_ == LossSpec::Kind::Squared ? LossSpec::squared(y)
                                                     : LossSpec::absolute(y);
    }
    const DiscreteDistribution& base_measure() const override { return mu_; }
    std::optional<Member> benchmark() const override {
        if (flip_ == 0.0) return f_star_;
        return std::nullopt;
    }
    const Fraction* exact_sigma() const override { return &one_; }

private:
    const FunctionClassSpec* cls_;
    DiscreteDistribution mu_;
    Member f_star_;
    double flip_;
    std::uint64_t rng_key_;
    LossSpec::Kind loss_kind_;
    Fraction one_{1, 1};
};

// Plays region r's distribution during segment r; the base measure is the
// uniform mixture of the regions, so at most floor(1/sigma) regions fit.
class SwitchingAdversary final : public Adversary {
public:
    SwitchingAdversary(const FunctionClassSpec& cls, double sigma,
                       std::vector<DiscreteDistribution> regions,
                       std::vector<long> switch_times, Member f_star)
        : cls_(&cls), sigma_(sigma), regions_(std::move(regions)),
          switch_times_(std::move(switch_times)), f_star_(std::move(f_star)) {
        if (!(sigma > 0.0 && sigma <= 1.0)) throw config_error("sigma outside (0,1]");
        long budget = static_cast<long>(1.0 / sigma);
        if (static_cast<long>(regions_.size()) > budget)
            throw smoothness_error("region count exceeds floor(1/sigma)");
        if (regions_.empty()) throw config_error("switching adversary needs >= 1 region");
        if (switch_times_.size() != regions_.size() - 1)
            throw config_error("need one switch time per region boundary");
        std::vector<Atom> atoms;
        auto m = static_cast<std::int64_t>(regions_.size());
        for (const auto& region : regions_)
            for (const Atom& a : region.atoms()) {
                Atom b = a;
                b.prob /= static_cast<double>(m);
                if (b.has_exact) b.exact = Fraction(b.exact.num, b.exact.den * m);
                atoms.push_back(b);
            }
        mu_ = DiscreteDistribution(std::move(atoms));
        sigma_exact_ = exact_from_double(sigma);
    }

    int dimension() const override { return cls_->dimension(); }
    double sigma() const override { return sigma_; }
    DiscreteDistribution round_distribution(long t) override {
        size_t r = 0;
        while (r < switch_times_.size() && t > switch_times_[r]) ++r;
        return regions_[r];
    }
    LossSpec reveal(long, const Instance& x) override {
        return LossSpec::absolute(cls_->evaluate(f_star_, x));
    }
    const DiscreteDistribution& base_measure() const override { return mu_; }
    std::optional<Member> benchmark() const override { return f_star_; }
    const Fraction* exact_sigma() const override {
        return sigma_exact_ ? &*sigma_exact_ : nullptr;
    }

private:
    static std::optional<Fraction> exact_from_double(double s) {
        // Recognize simple fractions so uniform-region setups certify exactly.
        for (std::int64_t den = 1; den <= 64; ++den) {
            double num = s * static_cast<double>(den);
            if (num == std::floor(num) && num >= 1.0)
                return Fraction(static_cast<std::int64_t>(num), den);
        }
        return std::nullopt;
    }

    const FunctionClassSpec* cls_;
    double sigma_;
    std::vector<DiscreteDistribution> regions_;
    std::vector<long> switch_times_;
    Member f_star_;
    DiscreteDistribution mu_;
    std::optional<Fraction> sigma_exact_;
};

// ---------------------------------------------------------------------------

enum class MixtureMode { Bisect, Random };

class MixtureAdversary final : public Adversary {
public:
    // requested_corrupted = 0 spends the whole smoothness budget
    // floor((1-sigma)/(q sigma)); asking for more than the budget throws.
    MixtureAdversary(const FunctionClassSpec& cls, double sigma, double q, long T,
                     long epoch_length, MixtureMode mode, std::uint64_t rng_key,
                     long requested_corrupted = 0)
        : cls_(&cls), sigma_(sigma), q_(q), T_(T) {
        if (!(sigma > 0.0 && sigma <= 1.0)) throw config_error("sigma outside (0,1]");
        if (!(q >= 0.0 && q <= 1.0)) throw config_error("q outside [0,1]");
        if (epoch_length < 1) throw config_error("epoch length must be >= 1");
        epoch_len_ = epoch_length;
        anchor_ = Instance::anchor();
        mu0_ = DiscreteDistribution::point_mass(anchor_);
        long epochs = (T + epoch_length - 1) / epoch_length;

        long budget = (q > 0.0) ? static_cast<long>((1.0 - sigma) / (q * sigma)) : epochs;
        if (requested_corrupted > budget)
            throw smoothness_error("corrupted-epoch request exceeds the smoothness budget " +
                                   std::to_string(budget));
        long corrupted = std::min(requested_corrupted > 0 ? requested_corrupted : budget,
                                  epochs);
        if (q == 0.0 || corrupted == 0) {
            mu_ = mu0_;
            theta_star_ = 0.5;
            corrupted_of_epoch_.assign(static_cast<size_t>(epochs), -1);
            return;
        }

        // Spread the corrupted epochs evenly.
        corrupted_of_epoch_.assign(static_cast<size_t>(epochs), -1);
        long placed = 0;
        for (long e = 0; e < epochs && placed < corrupted; ++e) {
            if ((e * corrupted) / epochs != ((e + 1) * corrupted) / epochs || corrupted >= epochs)
                corrupted_of_epoch_[static_cast<size_t>(e)] = placed++;
        }

        // Fresh supports and realizable labels, fixed before the run.
        RngStream rng = RngStream::keyed(rng_key, 0, kStreamLabels, 0x5EEDull);
        double a = 0.0, b = 1.0;
        for (long j = 0; j < placed; ++j) {
            double pos;
            bool bit;
            if (mode == MixtureMode::Bisect && j < 50) {
                pos = (a + b) / 2.0;
                bit = rng.next_bernoulli(0.5);
                if (bit) b = pos; else a = pos;
            } else if (mode == MixtureMode::Bisect) {
                pos = fresh_.back().position;  // depth cap: repeat the last point
                bit = bits_.back();
            } else {
                pos = rng.next_double();
                bit = false;  // labeled by theta* below
            }
            fresh_.push_back(Instance(1, pos));
            bits_.push_back(bit);
        }
        theta_star_ = (mode == MixtureMode::Bisect) ? a + (b - a) / 2.0 : 0.5;
        if (mode == MixtureMode::Random)
            for (size_t j = 0; j < fresh_.size(); ++j)
                bits_[j] = fresh_[j].position >= theta_star_;

        double m = static_cast<double>(placed);
        double beta = m * q * sigma;
        std::vector<Atom> atoms;
        Atom base;
        base.point = anchor_;
        base.prob = 1.0 - beta;
        atoms.push_back(base);
        for (const Instance& x : fresh_) {
            Atom at;
            at.point = x;
            at.prob = beta / m;
            atoms.push_back(at);
        }
        mu_ = DiscreteDistribution(std::move(atoms));
    }

    int dimension() const override { return cls_->dimension(); }
    double sigma() const override { return sigma_; }
    long corrupted_epochs() const {
        long n = 0;
        for (long c : corrupted_of_epoch_)
            if (c >= 0) ++n;
        return n;
    }

    DiscreteDistribution round_distribution(long t) override {
        long e = (t - 1) / epoch_len_;
        long j = (e < static_cast<long>(corrupted_of_epoch_.size()))
                     ? corrupted_of_epoch_[static_cast<size_t>(e)]
                     : -1;
        if (j < 0) return mu0_;
        if (q_ >= 1.0) return DiscreteDistribution::point_mass(fresh_[static_cast<size_t>(j)]);
        std::vector<Atom> atoms;
        Atom a0;
        a0.point = anchor_;
        a0.prob = 1.0 - q_;
        atoms.push_back(a0);
        Atom a1;
        a1.point = fresh_[static_cast<size_t>(j)];
        a1.prob = q_;
        atoms.push_back(a1);
        return DiscreteDistribution(std::move(atoms));
    }

    LossSpec reveal(long, const Instance& x) override {
        if (x == anchor_) return LossSpec::absolute(0.0);
        for (size_t j = 0; j < fresh_.size(); ++j)
            if (fresh_[j] == x) return LossSpec::absolute(bits_[j] ? 1.0 : 0.0);
        throw protocol_error("sample outside the adversary support");
    }
    const DiscreteDistribution& base_measure() const override { return mu_; }
    std::optional<Member> benchmark() const override {
        std::vector<double> th(static_cast<size_t>(cls_->dimension()), theta_star_);
        return Member::of_theta(th);
    }

private:
    const FunctionClassSpec* cls_;
    double sigma_;
    double q_;
    long T_;
    long epoch_len_ = 1;
    Instance anchor_;
    DiscreteDistribution mu0_;
    DiscreteDistribution mu_;
    std::vector<Instance> fresh_;   // one fresh point per corrupted epoch
    std::vector<bool> bits_;        // its realizable label
    std::vector<long> corrupted_of_epoch_;
    double theta_star_ = 0.5;
};

// ---------------------------------------------------------------------------

class LowerBoundAdversary final : public Adversary {
public:
    static constexpr int kMaxBits = 50;  // dyadic positions stay exact doubles

    LowerBoundAdversary(const FunctionClassSpec& cls, double sigma, long T,
                        std::uint64_t rng_key)
        : cls_(&cls), sigma_(sigma), T_(T) {
        if (!(sigma > 0.0 && sigma < 1.0)) throw config_error("sigma outside (0,1)");
        if (T < 1) throw config_error("T must be >= 1");
        d_ = cls.dimension();
        q_ = std::sqrt(static_cast<double>(d_) * (1.0 - sigma) /
                       (sigma * static_cast<double>(T)));
        n_raw_ = static_cast<long>(q_ * static_cast<double>(T) / static_cast<double>(d_));
        n_ = std::min<long>(n_raw_, kMaxBits);
        anchor_ = Instance::anchor();

        RngStream rng = RngStream::keyed(rng_key, 0, kStreamLabels, 0xB175ull);
        bits_.assign(static_cast<size_t>(d_), {});
        mids_.assign(static_cast<size_t>(d_), {});
        theta_star_.assign(static_cast<size_t>(d_), 0.0);
        for (int k = 0; k < d_; ++k) {
            double a = 0.0, b = 1.0;
            for (long j = 0; j < n_; ++j) {
                double mid = (a + b) / 2.0;
                bool bit = rng.next_bernoulli(0.5);
                mids_[static_cast<size_t>(k)].push_back(mid);
                bits_[static_cast<size_t>(k)].push_back(bit);
                if (bit) b = mid; else a = mid;  // label 1: theta <= mid
            }
            theta_star_[static_cast<size_t>(k)] = a + (b - a) / 2.0;
        }
        consumed_.assign(static_cast<size_t>(d_), 0);
        a_cur_.assign(static_cast<size_t>(d_), 0.0);
        b_cur_.assign(static_cast<size_t>(d_), 1.0);

        if (n_ >= 1) {
            std::vector<Atom> atoms;
            Atom a0;
            a0.point = anchor_;
            a0.prob = sigma;
            atoms.push_back(a0);
            double w = (1.0 - sigma) / static_cast<double>(d_ * n_);
            for (int k = 0; k < d_; ++k)
                for (long j = 0; j < n_; ++j) {
                    Atom at;
                    at.point = Instance(k + 1, mids_[static_cast<size_t>(k)][static_cast<size_t>(j)]);
                    at.prob = w;
                    atoms.push_back(at);
                }
            mu_ = DiscreteDistribution(std::move(atoms));
        } else {
            mu_ = DiscreteDistribution::point_mass(anchor_);
        }
    }

    int dimension() const override { return d_; }
    double sigma() const override { return sigma_; }
    double q() const { return q_; }
    long bit_count() const { return n_; }
    long bit_count_uncapped() const { return n_raw_; }
    long consumed(int k) const { return consumed_[static_cast<size_t>(k - 1)]; }
    double interval_lo(int k) const { return a_cur_[static_cast<size_t>(k - 1)]; }
    double interval_hi(int k) const { return b_cur_[static_cast<size_t>(k - 1)]; }

    DiscreteDistribution round_distribution(long) override {
        std::vector<Atom> atoms;
        Atom a0;
        a0.point = anchor_;
        a0.prob = 1.0 - q_;
        atoms.push_back(a0);
        double w = q_ / static_cast<double>(d_);
        for (int k = 0; k < d_; ++k) {
            Atom at;
            if (consumed_[static_cast<size_t>(k)] < n_) {
                at.point = Instance(
                    k + 1,
                    mids_[static_cast<size_t>(k)][static_cast<size_t>(consumed_[static_cast<size_t>(k)])]);
            } else {
                at.point = anchor_;  // exhausted coordinate folds into the anchor
            }
            at.prob = w;
            atoms.push_back(at);
        }
        return DiscreteDistribution(std::move(atoms));
    }

    LossSpec reveal(long, const Instance& x) override {
        if (x == anchor_) return LossSpec::absolute(0.0);
        size_t k = static_cast<size_t>(x.coordinate - 1);
        long j = consumed_[k];
        if (j >= n_ || mids_[k][static_cast<size_t>(j)] != x.position)
            throw protocol_error("lower-bound adversary saw an off-script sample");
        bool bit = bits_[k][static_cast<size_t>(j)];
        double mid = mids_[k][static_cast<size_t>(j)];
        if (bit) b_cur_[k] = mid; else a_cur_[k] = mid;
        consumed_[k] = j + 1;
        return LossSpec::absolute(bit ? 1.0 : 0.0);
    }

    const DiscreteDistribution& base_measure() const override { return mu_; }
    std::optional<Member> benchmark() const override { return Member::of_theta(theta_star_); }

private:
    const FunctionClassSpec* cls_;
    double sigma_;
    long T_;
    int d_ = 1;
    double q_ = 0.0;
    long n_raw_ = 0;
    long n_ = 0;
    Instance anchor_;
    std::vector<std::vector<double>> mids_;  // midpoint j of coordinate k
    std::vector<std::vector<bool>> bits_;
    std::vector<double> theta_star_;
    std::vector<long> consumed_;
    std::vector<double> a_cur_, b_cur_;
    DiscreteDistribution mu_;
};

} // namespace solsim
