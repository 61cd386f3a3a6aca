#pragma once
/*
Per-round regret accounting.

Adaptive regret compares the cumulative loss to the best member in hindsight
on the realized prefix; oblivious regret compares it to a declared benchmark
member. The adaptive column dominates the oblivious one at every horizon
whenever a benchmark is declared, since the infimum minorizes any fixed
member.
*/
#include <cmath>
#include <vector>

#include "function_class.hpp"
#include "hindsight.hpp"
#include "instance.hpp"
#include "loss.hpp"

namespace solsim {

class RegretLedger {
public:
    RegretLedger(const FunctionClassSpec& cls, const Member* benchmark)
        : cls_(&cls), tracker_(cls) {
        if (benchmark) {
            benchmark_ = *benchmark;
            has_benchmark_ = true;
        }
    }

    void record(const Instance& x, double yhat, const LossSpec& loss) {
        double l = loss(yhat);
        cum_loss_ += l;
        if (has_benchmark_) bench_loss_ += loss(cls_->evaluate(benchmark_, x));
        tracker_.observe(x, loss);
        if (cls_->is_binary() && loss.has_label() && std::abs(yhat - loss.label()) > 0.5)
            ++mistakes_;
        ++rounds_;
    }

    long rounds() const { return rounds_; }
    double cumulative_loss() const { return cum_loss_; }
    double adaptive_regret() const { return cum_loss_ - tracker_.best_loss(); }
    bool has_oblivious() const { return has_benchmark_; }
    double oblivious_regret() const { return cum_loss_ - bench_loss_; }
    long mistakes() const { return mistakes_; }
    const HindsightTracker& tracker() const { return tracker_; }

private:
    const FunctionClassSpec* cls_;
    HindsightTracker tracker_;
    Member benchmark_;
    bool has_benchmark_ = false;
    double cum_loss_ = 0.0;
    double bench_loss_ = 0.0;
    long mistakes_ = 0;
    long rounds_ = 0;
};

} // namespace solsim
