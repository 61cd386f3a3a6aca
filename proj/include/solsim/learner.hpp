#pragma once
/*
Online learners.

All learners are proper: begin_round(t) commits to a member of the class
before the instance is revealed, predict(x) only evaluates the committed
member, and observe(x, loss) delivers the full loss function afterwards.
The call order is enforced so an out-of-order driver fails loudly.
*/
#include <memory>
#include <vector>

#include "common.hpp"
#include "function_class.hpp"
#include "hindsight.hpp"
#include "instance.hpp"
#include "loss.hpp"

namespace solsim {

class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    void begin_round(long t) {
        require(phase_ == Phase::Idle, "begin_round called out of order");
        require(t == rounds_ + 1, "rounds must be driven sequentially");
        commit(t);
        phase_ = Phase::Committed;
    }
    double predict(const Instance& x) {
        require(phase_ == Phase::Committed, "predict before commitment");
        phase_ = Phase::Predicted;
        return cls().evaluate(committed(), x);
    }
    void observe(const Instance& x, const LossSpec& loss) {
        require(phase_ == Phase::Predicted, "observe before prediction");
        absorb(x, loss);
        phase_ = Phase::Idle;
        ++rounds_;
    }

    virtual const FunctionClassSpec& cls() const = 0;
    // The member committed for the current round; fixed before the instance.
    virtual Member committed() const = 0;
    virtual const char* name() const = 0;
    // Peak and current number of simultaneously live learner states
    // (experts/nodes), for instrumentation.
    virtual long peak_states() const { return 1; }
    virtual long live_states() const { return 1; }

protected:
    virtual void commit(long t) = 0;
    virtual void absorb(const Instance& x, const LossSpec& loss) = 0;

private:
    enum class Phase { Idle, Committed, Predicted };
    Phase phase_ = Phase::Idle;
    long rounds_ = 0;
};

// Plays one member forever; the no-adaptivity control.
class FixedFunctionLearner final : public OnlineLearner {
public:
    FixedFunctionLearner(const FunctionClassSpec& cls, Member member)
        : cls_(&cls), member_(std::move(member)) {}

    const FunctionClassSpec& cls() const override { return *cls_; }
    Member committed() const override { return member_; }
    const char* name() const override { return "fixed"; }

protected:
    void commit(long) override {}
    void absorb(const Instance&, const LossSpec&) override {}

private:
    const FunctionClassSpec* cls_;
    Member member_;
};

// Commits to the best member in hindsight on the prefix, ties toward the
// smaller parameter; round 1 plays the canonical member.
class ErmLearner final : public OnlineLearner {
public:
    explicit ErmLearner(const FunctionClassSpec& cls)
        : cls_(&cls), tracker_(cls), committed_(cls.canonical_member()) {}

    const FunctionClassSpec& cls() const override { return *cls_; }
    Member committed() const override { return committed_; }
    const char* name() const override { return "erm"; }

protected:
    void commit(long) override { committed_ = tracker_.best().member; }
    void absorb(const Instance& x, const LossSpec& loss) override { tracker_.observe(x, loss); }

private:
    const FunctionClassSpec* cls_;
    HindsightTracker tracker_;
    Member committed_;
};

} // namespace solsim
