#pragma once
/*
Depth-1 cover learner.

The horizon is cut into K epochs ending at floor(kT/K). At each epoch start
the learner builds the scale-0 empirical cover of the whole class on every
query seen so far (one representative per realizable labeling) and runs a
fresh expert-advice forecaster over it for the epoch. With
K = floor(ln T * (T/d)^(1/3) * sigma^(-2/3)) the regret grows as ~T^(2/3).

Threshold classes use the factorized cell forecaster; finite classes run the
flat forecaster over explicit cover members.
*/
#include <algorithm>
#include <cmath>
#include <vector>

#include "forecaster.hpp"
#include "learner.hpp"
#include "rng.hpp"
#include "version_space.hpp"

namespace solsim {

inline long cover_epoch_count(long T, int d, double sigma) {
    if (T < 1 || d < 1 || !(sigma > 0.0 && sigma <= 1.0))
        throw config_error("cover epoch count needs T>=1, d>=1, sigma in (0,1]");
    double k = std::log(static_cast<double>(T)) *
               std::cbrt(static_cast<double>(T) / static_cast<double>(d)) *
               std::pow(sigma, -2.0 / 3.0);
    long out = static_cast<long>(k);
    return std::max(1L, std::min(out, T));
}

class CoverLearner final : public OnlineLearner {
public:
    CoverLearner(const FunctionClassSpec& cls, long T, long epochs,
                 ForecasterMode mode, std::uint64_t rng_root)
        : cls_(&cls), T_(T), K_(epochs), mode_(mode), rng_root_(rng_root) {
        if (K_ < 1 || K_ > T_) throw config_error("cover learner needs 1 <= K <= T");
        full_ = VersionSpace::full(cls);
        committed_ = cls.canonical_member();
    }

    const FunctionClassSpec& cls() const override { return *cls_; }
    Member committed() const override { return committed_; }
    const char* name() const override { return "cover"; }
    long peak_states() const override { return peak_experts_; }
    long live_states() const override { return live_experts_; }
    long epoch_end(long k) const { return (k * T_) / K_; }

protected:
    void commit(long t) override {
        if (t > epoch_end(epoch_)) start_epoch();
        RngStream rng = RngStream::keyed(rng_root_, 0, kStreamNode, static_cast<std::uint64_t>(t));
        if (use_cells_) {
            choice_ = cells_.choose(rng);
            if (!choice_.is_extra) {
                std::vector<double> th(static_cast<size_t>(cls_->dimension()));
                for (int k = 1; k <= cls_->dimension(); ++k)
                    th[static_cast<size_t>(k - 1)] = cells_.theta_for(choice_, k);
                committed_ = Member::of_theta(std::move(th));
            }
        } else {
            flat_choice_ = flat_.choose(rng);
            committed_ = members_[static_cast<size_t>(flat_choice_)];
        }
    }

    void absorb(const Instance& x, const LossSpec& loss) override {
        if (use_cells_) {
            const auto& cands = cells_.candidates()[static_cast<size_t>(x.coordinate - 1)];
            int split = static_cast<int>(
                std::upper_bound(cands.begin(), cands.end(), x.position) - cands.begin());
            cells_.update(choice_, x.coordinate, split, loss(1.0), loss(0.0), {});
        } else {
            std::vector<double> losses(members_.size());
            for (size_t i = 0; i < members_.size(); ++i)
                losses[i] = loss(cls_->evaluate(members_[i], x));
            flat_.update(flat_choice_, losses);
        }
        queries_.push_back(x);
    }

private:
    void start_epoch() {
        ++epoch_;
        long len = epoch_end(epoch_) - epoch_end(epoch_ - 1);
        if (cls_->is_threshold_kind()) {
            use_cells_ = true;
            int d = cls_->dimension();
            auto pos = detail::positions_by_coordinate(d, queries_);
            std::vector<std::vector<double>> cands(static_cast<size_t>(d));
            double count = 1.0;
            for (int k = 0; k < d; ++k) {
                cands[static_cast<size_t>(k)] = detail::cell_candidates(
                    full_.intervals()[static_cast<size_t>(k)], pos[static_cast<size_t>(k)]);
                count *= static_cast<double>(cands[static_cast<size_t>(k)].size());
            }
            live_experts_ = static_cast<long>(count);
            peak_experts_ = std::max(peak_experts_, live_experts_);
            cells_.init(std::move(cands), 0, mode_, hedge_eta(count, len));
        } else {
            use_cells_ = false;
            members_ = epsilon_cover(full_, queries_, 0.0);
            live_experts_ = static_cast<long>(members_.size());
            peak_experts_ = std::max(peak_experts_, live_experts_);
            flat_.init(static_cast<int>(members_.size()), mode_,
                       hedge_eta(static_cast<double>(members_.size()), len));
        }
    }

    double hedge_eta(double experts, long len) const {
        if (mode_ != ForecasterMode::Hedge) return 0.0;
        double k = std::max(experts, 2.0);
        return std::sqrt(2.0 * std::log(k) / static_cast<double>(std::max(len, 1L)));
    }

    const FunctionClassSpec* cls_;
    long T_;
    long K_;
    ForecasterMode mode_;
    std::uint64_t rng_root_;
    VersionSpace full_;
    std::vector<Instance> queries_;
    long epoch_ = 0;
    bool use_cells_ = false;
    CellForecaster cells_;
    CellForecaster::Choice choice_;
    Forecaster flat_;
    int flat_choice_ = 0;
    std::vector<Member> members_;
    Member committed_;
    long peak_experts_ = 1;
    long live_experts_ = 1;
};

} // namespace solsim
