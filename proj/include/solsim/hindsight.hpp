#pragma once
/*
Exact best-in-hindsight oracles.

For threshold kinds every loss in this project is piecewise constant in the
threshold (predictions are binary), so the exact minimizer is found by a
per-coordinate scan over behavior cells. Cells are keyed by their smallest
member, and ties break toward the smaller parameter. Finite classes are
minimized by direct enumeration in id order.

HindsightTracker is the same computation maintained incrementally so the
harness can report the adaptive regret at every round in O(#cells per round).
*/
#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "function_class.hpp"
#include "loss.hpp"
#include "version_space.hpp"

namespace solsim {

struct HindsightResult {
    Member member;
    double total_loss = 0.0;
    bool exact = true;
    double resolution = 0.0;  // 0 for exact scans
};

class HindsightTracker {
public:
    explicit HindsightTracker(const FunctionClassSpec& cls) : cls_(&cls) {
        if (cls.is_threshold_kind()) {
            coords_.resize(static_cast<size_t>(cls.dimension()));
            for (auto& c : coords_) {
                c.thetas.push_back(0.0);
                c.losses.push_back(0.0);
            }
        } else {
            finite_losses_.assign(static_cast<size_t>(cls.finite_size()), 0.0);
        }
    }

    void observe(const Instance& x, const LossSpec& loss) {
        if (cls_->is_threshold_kind()) {
            Coord& c = coords_.at(static_cast<size_t>(x.coordinate - 1));
            // New behavior cell: smallest theta labeling x as 0. It inherits
            // the accumulated loss of the cell it splits from.
            double cut = next_above(x.position);
            if (cut <= 1.0) {
                auto it = std::lower_bound(c.thetas.begin(), c.thetas.end(), cut);
                if (it == c.thetas.end() || *it != cut) {
                    size_t pos = static_cast<size_t>(it - c.thetas.begin());
                    double inherited = c.losses[pos - 1];  // thetas[0]=0 <= cut always
                    c.thetas.insert(it, cut);
                    c.losses.insert(c.losses.begin() + static_cast<long>(pos), inherited);
                }
            }
            double l1 = loss(1.0);
            double l0 = loss(0.0);
            for (size_t i = 0; i < c.thetas.size(); ++i)
                c.losses[i] += (x.position >= c.thetas[i]) ? l1 : l0;
        } else {
            for (int id = 0; id < cls_->finite_size(); ++id)
                finite_losses_[static_cast<size_t>(id)] +=
                    loss(cls_->evaluate(Member::of_id(id), x));
        }
        ++rounds_;
    }

    HindsightResult best() const {
        HindsightResult r;
        if (cls_->is_threshold_kind()) {
            std::vector<double> th(coords_.size());
            double total = 0.0;
            for (size_t k = 0; k < coords_.size(); ++k) {
                const Coord& c = coords_[k];
                size_t arg = 0;
                for (size_t i = 1; i < c.thetas.size(); ++i)
                    if (c.losses[i] < c.losses[arg]) arg = i;
                th[k] = c.thetas[arg];
                total += c.losses[arg];
            }
            r.member = Member::of_theta(std::move(th));
            r.total_loss = total;
        } else {
            size_t arg = 0;
            for (size_t i = 1; i < finite_losses_.size(); ++i)
                if (finite_losses_[i] < finite_losses_[arg]) arg = i;
            r.member = Member::of_id(static_cast<int>(arg));
            r.total_loss = finite_losses_[arg];
        }
        return r;
    }

    double best_loss() const { return best().total_loss; }
    long rounds() const { return rounds_; }

private:
    struct Coord {
        std::vector<double> thetas;  // sorted cell representatives, starts at 0
        std::vector<double> losses;  // cumulative loss per cell
    };
    const FunctionClassSpec* cls_;
    std::vector<Coord> coords_;
    std::vector<double> finite_losses_;
    long rounds_ = 0;
};

inline HindsightResult best_in_hindsight(
    const FunctionClassSpec& cls,
    const std::vector<std::pair<Instance, LossSpec>>& trace) {
    HindsightTracker tracker(cls);
    for (const auto& [x, loss] : trace) tracker.observe(x, loss);
    return tracker.best();
}

} // namespace solsim
