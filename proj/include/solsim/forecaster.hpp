#pragma once
/*
Prediction with expert advice.

Forecaster implements the adaptive exponentially weighted forecaster: play
exponential weights p_{t,i} ∝ exp(eta_k R_{t-1,i}) and accumulate
Delta_k += sum_i p_{t,i} r_{t,i}^2 with r_{t,i} = loss(chosen) - loss(i).
When Delta_k exceeds Delta_max,k = 4^{k-1}, quadruple the threshold, retune
eta_{k+1} = sqrt(2 ln K / (Delta_max,k+1 + 1)), and reset the regrets. The
reset happens after the update that breached the threshold. Hedge mode is the
same machinery with a fixed eta and no periods.

The pseudo-regret certificate checks
    PReg(T) <= 8 sqrt(max(Delta_T, 1) ln K),
a deterministic inequality on any loss stream in [0,1].

Weights are maintained as a normalized probability vector updated
multiplicatively with factors anchored at the round's smallest loss, and are
recomputed from the exact regrets in log space (max subtraction) periodically
and whenever a weight is flushed to zero. The recompute keeps experts whose
cumulative regret recovers from a deep deficit able to re-enter the mixture.

CellForecaster is the same forecaster run over the behavior cells of a
product-threshold version space without materializing the product: weights
factor across coordinates because each query touches exactly one coordinate.
Extra experts (the hedging member) sit beside the product block.
*/
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "rng.hpp"
#include "version_space.hpp"

namespace solsim {

enum class ForecasterMode { AExp, Hedge };

namespace detail {

// Doubling-trick bookkeeping shared by both forecaster layouts.
struct AdaptiveSchedule {
    int period = 1;
    double delta_max = 1.0;
    double delta = 0.0;        // accumulator within the current period
    double delta_total = 0.0;  // Delta_T across periods
    double eta = 0.0;
    ForecasterMode mode = ForecasterMode::AExp;
    double log_k = 0.0;

    void init(double K, ForecasterMode m, double fixed_eta) {
        mode = m;
        log_k = std::log(K);
        period = 1;
        delta_max = 1.0;
        delta = 0.0;
        delta_total = 0.0;
        eta = (mode == ForecasterMode::AExp) ? std::sqrt(2.0 * log_k / (delta_max + 1.0))
                                             : fixed_eta;
    }
    // Returns true when the period advanced (caller must reset regrets).
    bool accumulate(double delta_inc) {
        delta += delta_inc;
        delta_total += delta_inc;
        if (mode == ForecasterMode::AExp && delta > delta_max) {
            delta_max *= 4.0;
            eta = std::sqrt(2.0 * log_k / (delta_max + 1.0));
            delta = 0.0;
            ++period;
            return true;
        }
        return false;
    }
};

} // namespace detail

// Flat forecaster over K explicitly indexed experts.
class Forecaster {
public:
    Forecaster() = default;
    Forecaster(int K, ForecasterMode mode, double fixed_eta = 0.0) { init(K, mode, fixed_eta); }

    void init(int K, ForecasterMode mode, double fixed_eta = 0.0) {
        if (K < 1) throw config_error("forecaster needs K >= 1 experts");
        if (mode == ForecasterMode::Hedge && K > 1 && !(fixed_eta > 0.0))
            throw config_error("hedge mode needs eta > 0");
        k_ = K;
        sched_.init(static_cast<double>(K), mode, fixed_eta);
        regrets_.assign(static_cast<size_t>(K), 0.0);
        cum_losses_.assign(static_cast<size_t>(K), 0.0);
        weights_.assign(static_cast<size_t>(K), 1.0 / static_cast<double>(K));
        chosen_loss_sum_ = 0.0;
        pseudo_loss_sum_ = 0.0;
        rounds_ = 0;
        history_.clear();
    }

    int experts() const { return k_; }
    double eta() const { return sched_.eta; }
    int period() const { return sched_.period; }
    double delta_max() const { return sched_.delta_max; }
    double delta_current() const { return sched_.delta; }
    double delta_total() const { return sched_.delta_total; }
    long rounds() const { return rounds_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& regrets() const { return regrets_; }

    void record_history(bool on) { keep_history_ = on; }

    // Exponential weights from regrets, computed in log space.
    static std::vector<double> weights_from_regrets(const std::vector<double>& regrets,
                                                    double eta) {
        double m = *std::max_element(regrets.begin(), regrets.end());
        std::vector<double> w(regrets.size());
        double z = 0.0;
        for (size_t i = 0; i < regrets.size(); ++i) {
            w[i] = std::exp(eta * (regrets[i] - m));
            z += w[i];
        }
        for (double& x : w) x /= z;
        return w;
    }

    // Test hook: install a regret vector directly.
    void set_regrets(std::vector<double> regrets) {
        if (regrets.size() != static_cast<size_t>(k_))
            throw dimension_error("regret vector length != K");
        regrets_ = std::move(regrets);
        weights_ = weights_from_regrets(regrets_, sched_.eta);
    }

    // Sampling is split from the update so the caller can commit to an expert
    // before the round's losses exist.
    int choose(RngStream& rng) const {
        if (k_ == 1) return 0;
        double u = rng.next_double();
        double acc = 0.0;
        for (int i = 0; i < k_; ++i) {
            acc += weights_[static_cast<size_t>(i)];
            if (u < acc) return i;
        }
        return k_ - 1;
    }

    void update(int chosen, const std::vector<double>& losses) {
        if (static_cast<int>(losses.size()) != k_)
            throw dimension_error("loss vector length != K");
        for (double l : losses)
            if (!(l >= 0.0 && l <= 1.0)) throw protocol_error("expert loss outside [0,1]");
        if (chosen < 0 || chosen >= k_) throw dimension_error("chosen expert out of range");

        if (keep_history_) history_.push_back({weights_, losses, chosen});

        double c = losses[static_cast<size_t>(chosen)];
        double delta_inc = 0.0;
        double pseudo = 0.0;
        double lmin = *std::min_element(losses.begin(), losses.end());
        double z = 0.0;
        bool flushed = false;
        // Loss values repeat heavily (binary predictions); memoize the factor.
        double fkey[4], fval[4];
        int fn = 0;
        auto factor = [&](double l) {
            for (int i = 0; i < fn; ++i)
                if (fkey[i] == l) return fval[i];
            double v = std::exp(sched_.eta * (lmin - l));
            if (fn < 4) { fkey[fn] = l; fval[fn] = v; ++fn; }
            return v;
        };
        for (int i = 0; i < k_; ++i) {
            double r = c - losses[static_cast<size_t>(i)];
            double p = weights_[static_cast<size_t>(i)];
            delta_inc += p * r * r;
            pseudo += p * losses[static_cast<size_t>(i)];
            cum_losses_[static_cast<size_t>(i)] += losses[static_cast<size_t>(i)];
            regrets_[static_cast<size_t>(i)] += r;
            double w = p * factor(losses[static_cast<size_t>(i)]);
            weights_[static_cast<size_t>(i)] = w;
            if (w == 0.0) flushed = true;
            z += w;
        }
        for (double& w : weights_) w /= z;
        chosen_loss_sum_ += c;
        pseudo_loss_sum_ += pseudo;
        ++rounds_;
        if (sched_.accumulate(delta_inc)) {
            std::fill(regrets_.begin(), regrets_.end(), 0.0);
            std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(k_));
        } else if (flushed || (rounds_ & 63) == 0) {
            weights_ = weights_from_regrets(regrets_, sched_.eta);
        }
    }

    // Running PReg estimate: sum_t E_{i~p_t}[loss] - min_i cumulative loss.
    double running_pseudo_regret() const {
        if (rounds_ == 0) return 0.0;
        double best = *std::min_element(cum_losses_.begin(), cum_losses_.end());
        return pseudo_loss_sum_ - best;
    }

    struct HistoryRound {
        std::vector<double> p;
        std::vector<double> losses;
        int chosen = 0;
    };
    const std::vector<HistoryRound>& history() const { return history_; }

private:
    int k_ = 0;
    detail::AdaptiveSchedule sched_;
    std::vector<double> regrets_;
    std::vector<double> cum_losses_;  // across periods, for running reports
    std::vector<double> weights_;
    double chosen_loss_sum_ = 0.0;
    double pseudo_loss_sum_ = 0.0;
    long rounds_ = 0;
    bool keep_history_ = false;
    std::vector<HistoryRound> history_;
};

struct RegretCertificate {
    double pseudo_regret = 0.0;
    double delta_total = 0.0;
    double bound = 0.0;
    bool holds = false;
    // Reported, never asserted: the sampled-path regret and its
    // 12 sqrt(max(Delta_T,1) ln K) + 2 ln(1/delta) tail bound at delta = 5%.
    // Failures at the delta level are legitimate sample-path events.
    double realized_regret = 0.0;
    double realized_bound_95 = 0.0;
};

// PReg is recomputed from the retained (p_t, losses_t) history; Delta_T is the
// quantity the forecaster accumulated while running.
inline RegretCertificate pseudo_regret_certificate(const Forecaster& state) {
    RegretCertificate cert;
    cert.delta_total = state.delta_total();
    const auto& hist = state.history();
    if (state.experts() == 1) {
        cert.bound = 0.0;
        cert.holds = true;
        return cert;
    }
    double pseudo = 0.0;
    double sampled = 0.0;
    std::vector<double> cum(static_cast<size_t>(state.experts()), 0.0);
    for (const auto& round : hist) {
        sampled += round.losses[static_cast<size_t>(round.chosen)];
        for (size_t i = 0; i < cum.size(); ++i) {
            pseudo += round.p[i] * round.losses[i];
            cum[i] += round.losses[i];
        }
    }
    double best = hist.empty() ? 0.0 : *std::min_element(cum.begin(), cum.end());
    cert.pseudo_regret = pseudo - best;
    double root = std::sqrt(std::max(cert.delta_total, 1.0) *
                            std::log(static_cast<double>(state.experts())));
    cert.bound = 8.0 * root;
    cert.holds = cert.pseudo_regret <= cert.bound;
    cert.realized_regret = sampled - best;
    cert.realized_bound_95 = 12.0 * root + 2.0 * std::log(20.0);
    return cert;
}

// Classical fixed-eta bound ln K / eta + T eta / 2 for Hedge mode.
inline double hedge_pseudo_regret_bound(int K, double eta, long T) {
    if (K <= 1) return 0.0;
    return std::log(static_cast<double>(K)) / eta + static_cast<double>(T) * eta / 2.0;
}

// ---------------------------------------------------------------------------
// Factorized forecaster over product-threshold behavior cells.

class CellForecaster {
public:
    struct Choice {
        bool is_extra = false;
        int extra_index = 0;
        std::vector<int> cell;  // per-coordinate candidate index
    };

    CellForecaster() = default;

    // candidates[k]: sorted smallest members of coordinate k's cells.
    void init(std::vector<std::vector<double>> candidates, int extras,
              ForecasterMode mode, double fixed_eta = 0.0) {
        cands_ = std::move(candidates);
        extras_ = extras;
        double prod = 1.0;
        for (const auto& c : cands_) {
            if (c.empty()) throw infeasible_error("cell forecaster with empty coordinate");
            prod *= static_cast<double>(c.size());
        }
        if (prod > 2147483000.0) throw size_error("cell product too large");
        product_count_ = prod;
        sched_.init(prod + static_cast<double>(extras), mode, fixed_eta);
        coord_loss_.assign(cands_.size(), {});
        for (size_t k = 0; k < cands_.size(); ++k)
            coord_loss_[k].assign(cands_[k].size(), 0.0);
        extra_loss_.assign(static_cast<size_t>(extras_), 0.0);
        rounds_ = 0;
        recompute_weights();
    }

    double expert_count() const { return product_count_ + extras_; }
    bool single_cell() const { return product_count_ == 1.0; }
    double eta() const { return sched_.eta; }
    int period() const { return sched_.period; }
    double delta_total() const { return sched_.delta_total; }
    double theta_for(const Choice& ch, int coordinate) const {
        return cands_[static_cast<size_t>(coordinate - 1)]
                     [static_cast<size_t>(ch.cell[static_cast<size_t>(coordinate - 1)])];
    }
    const std::vector<std::vector<double>>& candidates() const { return cands_; }

    Choice choose(RngStream& rng) const {
        Choice ch;
        if (extras_ > 0) {
            double u = rng.next_double();
            double acc = 0.0;
            for (int j = 0; j < extras_; ++j) {
                acc += extra_w_[static_cast<size_t>(j)];
                if (u < acc) {
                    ch.is_extra = true;
                    ch.extra_index = j;
                    return ch;
                }
            }
        }
        // Product block: coordinates are independent given the block.
        ch.cell.resize(cands_.size());
        for (size_t k = 0; k < cands_.size(); ++k) {
            double v = rng.next_double();
            double a = 0.0;
            const auto& w = coord_w_[k];
            size_t idx = w.size() - 1;
            for (size_t i = 0; i < w.size(); ++i) {
                a += w[i];
                if (v < a) { idx = i; break; }
            }
            ch.cell[k] = static_cast<int>(idx);
        }
        return ch;
    }

    // One round on coordinate `coordinate`: a cell with candidate theta <= pos
    // predicts 1 (candidates are sorted, so that is the prefix of length
    // `split`), the rest predict 0. extra_losses has one entry per extra.
    void update(const Choice& chosen, int coordinate, int split, double loss_one,
                double loss_zero, const std::vector<double>& extra_losses) {
        for (double l : extra_losses)
            if (!(l >= 0.0 && l <= 1.0)) throw protocol_error("expert loss outside [0,1]");
        if (!(loss_one >= 0.0 && loss_one <= 1.0 && loss_zero >= 0.0 && loss_zero <= 1.0))
            throw protocol_error("expert loss outside [0,1]");
        size_t kq = static_cast<size_t>(coordinate - 1);
        auto& w = coord_w_[kq];

        double c;  // loss of the chosen expert
        if (chosen.is_extra) {
            c = extra_losses[static_cast<size_t>(chosen.extra_index)];
        } else {
            c = (chosen.cell[kq] < split) ? loss_one : loss_zero;
        }

        // Delta increment: E_p[(c - loss)^2] marginalizes over the queried
        // coordinate within the product block.
        double mass_one = 0.0;
        for (int i = 0; i < split; ++i) mass_one += w[static_cast<size_t>(i)];
        double d1 = c - loss_one, d0 = c - loss_zero;
        double delta_inc = block_scale_ * (mass_one * d1 * d1 + (1.0 - mass_one) * d0 * d0);
        for (int j = 0; j < extras_; ++j) {
            double r = c - extra_losses[static_cast<size_t>(j)];
            delta_inc += extra_w_[static_cast<size_t>(j)] * r * r;
        }

        // Exact cumulative losses drive the periodic recompute.
        for (int i = 0; i < static_cast<int>(w.size()); ++i)
            coord_loss_[kq][static_cast<size_t>(i)] += (i < split) ? loss_one : loss_zero;
        for (int j = 0; j < extras_; ++j)
            extra_loss_[static_cast<size_t>(j)] += extra_losses[static_cast<size_t>(j)];

        // Multiplicative update, factors anchored at the round's smallest loss.
        double lmin = std::min(loss_one, loss_zero);
        for (double l : extra_losses) lmin = std::min(lmin, l);
        double f1 = std::exp(sched_.eta * (lmin - loss_one));
        double f0 = std::exp(sched_.eta * (lmin - loss_zero));
        double s = 0.0;
        bool flushed = false;
        for (size_t i = 0; i < w.size(); ++i) {
            w[i] *= (static_cast<int>(i) < split) ? f1 : f0;
            if (w[i] == 0.0) flushed = true;
            s += w[i];
        }
        for (double& x : w) x /= s;
        double total = block_scale_ * s;
        for (int j = 0; j < extras_; ++j) {
            extra_w_[static_cast<size_t>(j)] *=
                std::exp(sched_.eta * (lmin - extra_losses[static_cast<size_t>(j)]));
            if (extra_w_[static_cast<size_t>(j)] == 0.0 && extras_ > 0) flushed = true;
            total += extra_w_[static_cast<size_t>(j)];
        }
        block_scale_ = block_scale_ * s / total;
        for (int j = 0; j < extras_; ++j) extra_w_[static_cast<size_t>(j)] /= total;

        ++rounds_;
        if (sched_.accumulate(delta_inc)) {
            for (size_t k = 0; k < coord_loss_.size(); ++k)
                std::fill(coord_loss_[k].begin(), coord_loss_[k].end(), 0.0);
            std::fill(extra_loss_.begin(), extra_loss_.end(), 0.0);
            recompute_weights();
        } else if (flushed || (rounds_ & 63) == 0) {
            recompute_weights();
        }
    }

private:
    // Rebuild the factored weights from exact cumulative losses in log space.
    void recompute_weights() {
        coord_w_.assign(cands_.size(), {});
        double log_block = 0.0;  // log of the unnormalized product-block mass
        for (size_t k = 0; k < cands_.size(); ++k) {
            const auto& L = coord_loss_[k];
            double lmin = *std::min_element(L.begin(), L.end());
            auto& w = coord_w_[k];
            w.resize(L.size());
            double z = 0.0;
            for (size_t i = 0; i < L.size(); ++i) {
                w[i] = std::exp(sched_.eta * (lmin - L[i]));
                z += w[i];
            }
            for (double& x : w) x /= z;
            log_block += -sched_.eta * lmin + std::log(z);
        }
        // Joint normalization of the block against the extras.
        double max_log = log_block;
        std::vector<double> log_extra(static_cast<size_t>(extras_));
        for (int j = 0; j < extras_; ++j) {
            log_extra[static_cast<size_t>(j)] = -sched_.eta * extra_loss_[static_cast<size_t>(j)];
            max_log = std::max(max_log, log_extra[static_cast<size_t>(j)]);
        }
        double block = std::exp(log_block - max_log);
        double total = block;
        extra_w_.assign(static_cast<size_t>(extras_), 0.0);
        for (int j = 0; j < extras_; ++j) {
            extra_w_[static_cast<size_t>(j)] = std::exp(log_extra[static_cast<size_t>(j)] - max_log);
            total += extra_w_[static_cast<size_t>(j)];
        }
        block_scale_ = block / total;
        for (double& x : extra_w_) x /= total;
    }

    std::vector<std::vector<double>> cands_;
    int extras_ = 0;
    double product_count_ = 1.0;
    detail::AdaptiveSchedule sched_;
    // coord_w_[k] sums to 1; the joint weight of cell (i1..id) is
    // block_scale * prod_k coord_w_[k][ik], and block_scale + sum extra_w = 1.
    std::vector<std::vector<double>> coord_w_;
    std::vector<double> extra_w_;
    double block_scale_ = 1.0;
    std::vector<std::vector<double>> coord_loss_;  // cumulative per cell
    std::vector<double> extra_loss_;
    long rounds_ = 0;
};

} // namespace solsim
