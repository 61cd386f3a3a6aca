#pragma once
/*
Recursive cover learner.

A depth-P node owns an epoch (T0,T1] and splits it at floor((T0+T1)/2). At
the start of each sub-epoch it restricts its version space to every behavior
consistent with all queries seen so far (scale-eps cover for regression,
realizable labelings for classification) and runs the adaptive exponentially
weighted forecaster over one sub-learner per restriction plus a hedging
expert that plays the node's own representative. Depth-0 nodes play the
representative of their space for the whole epoch.

Nodes are memoized by (depth, epoch, version space): runs whose consistent
sets coincide are behaviorally identical, so they share one state and one
sampled trajectory. Randomness is keyed by the canonical node identity, which
makes the memoized and literal (one node per parent) constructions produce
identical traces; the literal mode stays available for equivalence tests.

For threshold classes the depth-0 layer is kept virtual: a depth-1 node runs
the factorized cell forecaster over the behavior cells of its version space,
which are exactly its depth-0 children.
*/
#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <vector>

#include "epochs.hpp"
#include "forecaster.hpp"
#include "learner.hpp"
#include "rng.hpp"
#include "version_space.hpp"

namespace solsim {

// Cover scale for fat-shattering growth fat(r) <= d ln(1/r): eps = 1/T.
inline double rcover_epsilon_log_type(long T) { return 1.0 / static_cast<double>(T); }
// Cover scale for fat(r) ~ r^-p: eps = (ln T / T)^(1/(p+1)).
inline double rcover_epsilon_poly_type(long T, double p) {
    return std::pow(std::log(static_cast<double>(T)) / static_cast<double>(T), 1.0 / (p + 1.0));
}

struct RCoverOptions {
    int depth = -1;          // -1: floor(log2 T)
    double epsilon = 0.0;    // cover scale; 0 is the classification setting
    bool memoize = true;     // share nodes with identical version spaces
    bool force_cover_route = false;  // build children via cover+tube even when
                                     // the labeling route applies (test hook)
    bool instrument = false;
};

struct RCoverEpochRecord {
    int p = 0;
    long k = 0;
    long real_nodes = 0;
    long virtual_cells = 0;
    double delta_star = 0.0;   // Delta of the trajectory node over its epoch
    double lambda_star = 0.0;  // excess loss of its hedging member vs f*
};

class RCoverLearner final : public OnlineLearner {
public:
    RCoverLearner(const FunctionClassSpec& cls, long T, RCoverOptions opt,
                  std::uint64_t rng_root)
        : cls_(&cls), T_(T), opt_(opt), rng_root_(rng_root) {
        int P = opt.depth < 0 ? default_depth(T) : opt.depth;
        if (T < (1L << P)) throw config_error("recursive learner needs T >= 2^depth");
        sched_ = EpochSchedule(T, P);
        active_.assign(static_cast<size_t>(P + 1), {});
        positions_.assign(static_cast<size_t>(cls.dimension()), {});

    }

    void set_benchmark(const Member& f_star) { f_star_ = f_star; has_star_ = true; }

    const FunctionClassSpec& cls() const override { return *cls_; }
    Member committed() const override {
        return root_ ? *root_->committed_ref : cls_->canonical_member();
    }
    const char* name() const override { return "rcover"; }
    int depth() const { return sched_.depth(); }
    const EpochSchedule& schedule() const { return sched_; }
    long peak_states() const override { return peak_states_; }
    long live_states() const override {
        long live = virtual_cells_;
        for (const auto& a : active_) live += static_cast<long>(a.size());
        return live;
    }
    long real_node_count() const { return static_cast<long>(all_nodes_.size()); }
    long active_real_nodes(int p) const { return static_cast<long>(active_[static_cast<size_t>(p)].size()); }
    long active_virtual_cells() const { return virtual_cells_; }

    // Every internal forecaster must carry the hedging expert beside its
    // sub-learners.
    bool hedging_expert_everywhere() const {
        for (const auto& n : all_nodes_) {
            if (n->p == 0 || !n->started) continue;
            if (n->leaf_cells) {
                if (n->cells_extras != 1) return false;
            } else {
                if (n->flat.experts() != static_cast<int>(n->children.size()) + 1) return false;
            }
        }
        return true;
    }

    const std::vector<RCoverEpochRecord>& instrumentation() {
        finalize_records();
        return records_;
    }

protected:
    void commit(long t) override {
        int P = sched_.depth();
        if (t == 1) {
            root_ = make_node(P, 1, VersionSpace::full(*cls_, opt_.epsilon));
            active_[static_cast<size_t>(P)] = {root_};
        }
        // Epoch transitions, parents before children.
        for (int p = P - 1; p >= 0; --p) {
            long k = sched_.epoch_of(p, t);
            if (t != sched_.start(p, k) + 1) continue;
            record_closed_epoch(p, k - 1);
            if (p == 0 && cls_->is_threshold_kind()) {
                virtual_cells_ = 0;
                for (Node* n : active_[1]) init_leaf_cells(n);
            } else {
                std::vector<Node*> next;
                ++gather_stamp_;
                for (Node* n : active_[static_cast<size_t>(p + 1)])
                    spawn_children(n, p, k, next);
                active_[static_cast<size_t>(p)] = std::move(next);
                if (p == 0) virtual_cells_ = 0;
            }
            long live = virtual_cells_;
            for (const auto& a : active_) live += static_cast<long>(a.size());
            peak_states_ = std::max(peak_states_, live);
        }
        // Sample every internal node's expert for this round, then resolve
        // commitments bottom-up. Nodes whose space no query has split are
        // inert: every expert plays the node's own representative, so no
        // sampling is needed and the forecaster state cannot move.
        for (int p = 1; p <= P; ++p)
            for (Node* n : active_[static_cast<size_t>(p)])
                if (n->sampled_t != t && !(n->leaf_cells && n->inert)) {
                    RngStream rng = RngStream::keyed(n->rng_key, 0, kStreamNode,
                                                     static_cast<std::uint64_t>(t));
                    if (n->leaf_cells) n->cell_choice = n->cells.choose(rng);
                    else n->flat_choice = n->flat.choose(rng);
                    n->sampled_t = t;
                }
        for (Node* n : active_[0]) n->committed_ref = &n->f_s;
        for (int p = 1; p <= P; ++p)
            for (Node* n : active_[static_cast<size_t>(p)]) {
                if (n->leaf_cells) {
                    if (n->inert || n->cell_choice.is_extra) {
                        n->committed_ref = &n->f_s;
                    } else {
                        for (int c = 1; c <= cls_->dimension(); ++c)
                            n->cell_member.theta[static_cast<size_t>(c - 1)] =
                                n->cells.theta_for(n->cell_choice, c);
                        n->committed_ref = &n->cell_member;
                    }
                } else {
                    int nc = static_cast<int>(n->children.size());
                    n->committed_ref =
                        (n->flat_choice >= nc)
                            ? &n->f_s
                            : n->children[static_cast<size_t>(n->flat_choice)]->committed_ref;
                }
            }
    }

    void absorb(const Instance& x, const LossSpec& loss) override {
        int P = sched_.depth();
        long t = rounds_seen_ + 1;
        double loss_one = cls_->is_binary() ? loss(1.0) : 0.0;
        double loss_zero = cls_->is_binary() ? loss(0.0) : 0.0;
        for (Node* n : active_[0]) n->pred_val = cls_->evaluate(n->f_s, x);
        for (int p = 1; p <= P; ++p)
            for (Node* n : active_[static_cast<size_t>(p)]) {
                n->pred_val = cls_->evaluate(*n->committed_ref, x);
                if (n->updated_t == t) continue;
                n->updated_t = t;
                if (n->leaf_cells && n->inert) {
                    // Every expert of an inert node plays f_s: nothing moves.
                    if (opt_.instrument && has_star_ && n->on_trajectory)
                        n->lambda += loss(n->pred_val) - loss(cls_->evaluate(f_star_, x));
                    continue;
                }
                double hedge_loss = loss(cls_->evaluate(n->f_s, x));
                if (opt_.instrument && has_star_ && n->on_trajectory)
                    n->lambda += hedge_loss - loss(cls_->evaluate(f_star_, x));
                if (n->leaf_cells) {
                    const auto& cands =
                        n->cells.candidates()[static_cast<size_t>(x.coordinate - 1)];
                    int split = static_cast<int>(
                        std::upper_bound(cands.begin(), cands.end(), x.position) - cands.begin());
                    scratch_extra_[0] = hedge_loss;
                    n->cells.update(n->cell_choice, x.coordinate, split, loss_one, loss_zero,
                                    scratch_extra_);
                } else {
                    n->loss_buf.resize(n->children.size() + 1);
                    for (size_t i = 0; i < n->children.size(); ++i)
                        n->loss_buf[i] = loss(n->children[i]->pred_val);
                    n->loss_buf.back() = hedge_loss;
                    n->flat.update(n->flat_choice, n->loss_buf);
                }
            }
        queries_.push_back(x);
        auto& pos = positions_[static_cast<size_t>(x.coordinate - 1)];
        auto it = std::lower_bound(pos.begin(), pos.end(), x.position);
        if (it == pos.end() || *it != x.position) pos.insert(it, x.position);
        ++rounds_seen_;
    }

private:
    struct Node {
        int p = 0;
        long k = 0;
        VersionSpace vs;
        Member f_s;
        std::uint64_t rng_key = 0;
        bool on_trajectory = false;
        bool started = false;     // forecaster initialized at least once
        bool leaf_cells = false;  // depth-0 children virtualized as cells
        int cells_extras = 0;
        CellForecaster cells;
        std::vector<Node*> children;
        Forecaster flat;
        bool inert = false;  // single-cell leaf layer: all experts play f_s
        long sampled_t = -1;
        CellForecaster::Choice cell_choice;
        int flat_choice = 0;
        const Member* committed_ref = nullptr;
        Member cell_member;           // scratch for cell-resolved commitments
        std::vector<double> loss_buf; // reused expert-loss buffer
        double pred_val = 0.0;
        long updated_t = -1;
        std::uint64_t gathered = 0;
        double delta_closed = 0.0;  // Delta of finished sub-epoch forecasters
        double lambda = 0.0;

        double delta_with_open() const {
            if (!started) return delta_closed;
            return delta_closed + (leaf_cells ? cells.delta_total() : flat.delta_total());
        }
    };

    Node* make_node(int p, long k, VersionSpace vs) {
        std::uint64_t canon = key_combine(
            key_combine(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k)),
            vs.hash());
        if (opt_.memoize) {
            auto range = table_.equal_range(canon);
            for (auto it = range.first; it != range.second; ++it) {
                Node* n = it->second;
                if (n->p == p && n->k == k && n->vs == vs) return n;
            }
        }
        auto owned = std::make_unique<Node>();
        Node* n = owned.get();
        n->p = p;
        n->k = k;
        n->vs = std::move(vs);
        n->f_s = n->vs.canonical_member();
        n->committed_ref = &n->f_s;
        n->cell_member = n->f_s;
        n->rng_key = key_combine(rng_root_, canon);
        if (has_star_) n->on_trajectory = n->vs.contains(f_star_);
        all_nodes_.push_back(std::move(owned));
        if (opt_.memoize) table_.emplace(canon, n);
        return n;
    }

    // Children of `n` for the depth-p epoch k starting now: one node per
    // behavior of n's version space on all queries so far.
    void spawn_children(Node* n, int p, long k, std::vector<Node*>& out) {
        bank_delta(n);
        n->children.clear();
        std::vector<VersionSpace> kids;
        if (cls_->is_threshold_kind() && opt_.epsilon >= 1.0) {
            kids = {n->vs};  // binary values never separate at this scale
        } else if (cls_->is_threshold_kind() && !opt_.force_cover_route) {
            kids = split_cells(n->vs);
        } else {
            for (const Member& rep : epsilon_cover(n->vs, queries_, opt_.epsilon))
                kids.push_back(n->vs.restricted_to_reference(rep, queries_, opt_.epsilon));
        }
        for (VersionSpace& vs : kids) {
            Node* child = make_node(p, k, std::move(vs));
            n->children.push_back(child);
            if (child->gathered != gather_stamp_) {
                child->gathered = gather_stamp_;
                out.push_back(child);
            }
        }
        n->leaf_cells = false;
        n->inert = false;
        n->started = true;
        n->flat.init(static_cast<int>(n->children.size()) + 1, ForecasterMode::AExp);
        n->sampled_t = -1;
    }

    // Virtual depth-0 layer: the cells of n's space are its children.
    void init_leaf_cells(Node* n) {
        bank_delta(n);
        int d = cls_->dimension();
        std::vector<std::vector<double>> cands(static_cast<size_t>(d));
        double count = 1.0;
        for (int c = 0; c < d; ++c) {
            cands[static_cast<size_t>(c)] = detail::cell_candidates(
                n->vs.intervals()[static_cast<size_t>(c)], positions_[static_cast<size_t>(c)]);
            count *= static_cast<double>(cands[static_cast<size_t>(c)].size());
        }
        virtual_cells_ += static_cast<long>(count);
        n->children.clear();
        n->leaf_cells = true;
        n->started = true;
        n->cells_extras = 1;
        n->cells.init(std::move(cands), 1, ForecasterMode::AExp);
        n->inert = n->cells.single_cell();
        n->sampled_t = -1;
    }

    // Direct per-coordinate cell split; identical to restricting by each
    // realizable labeling of the queries within `vs`.
    std::vector<VersionSpace> split_cells(const VersionSpace& vs) {
        int d = cls_->dimension();
        std::vector<std::vector<CoordInterval>> cells(static_cast<size_t>(d));
        for (int c = 0; c < d; ++c) {
            const CoordInterval& iv = vs.intervals()[static_cast<size_t>(c)];
            const auto& pos = positions_[static_cast<size_t>(c)];
            auto [a, b] = detail::splitter_range(iv, pos);
            auto& cc = cells[static_cast<size_t>(c)];
            CoordInterval cur{iv.lo, iv.lo_strict, iv.hi};
            for (size_t i = a; i < b; ++i) {
                CoordInterval cell = cur;
                cell.hi = pos[i];
                cc.push_back(cell);
                cur.lo = pos[i];
                cur.lo_strict = true;
            }
            cc.push_back(cur);
        }
        std::vector<VersionSpace> out;
        std::vector<size_t> idx(static_cast<size_t>(d), 0);
        while (true) {
            VersionSpace child = vs;
            for (int c = 0; c < d; ++c)
                child.interval_mut(c) = cells[static_cast<size_t>(c)][idx[static_cast<size_t>(c)]];
            out.push_back(std::move(child));
            int c = d - 1;
            while (c >= 0 && ++idx[static_cast<size_t>(c)] == cells[static_cast<size_t>(c)].size()) {
                idx[static_cast<size_t>(c)] = 0;
                --c;
            }
            if (c < 0) break;
        }
        return out;
    }

    void bank_delta(Node* n) {
        if (!n->started) return;
        n->delta_closed += n->leaf_cells ? n->cells.delta_total() : n->flat.delta_total();
    }

    // Depth-p epoch `k` just finished; log its trajectory node.
    void record_closed_epoch(int p, long k) {
        if (!opt_.instrument || !has_star_ || k < 1) return;
        for (Node* n : active_[static_cast<size_t>(p)]) {
            if (!n->on_trajectory || n->k != k) continue;
            RCoverEpochRecord r;
            r.p = p;
            r.k = k;
            r.real_nodes = static_cast<long>(active_[static_cast<size_t>(p)].size());
            r.virtual_cells = (p == 1) ? virtual_cells_ : 0;
            r.delta_star = n->delta_with_open();
            r.lambda_star = n->lambda;
            records_.push_back(r);
        }
    }
    void finalize_records() {
        if (!opt_.instrument || !has_star_ || finalized_) return;
        finalized_ = true;
        for (int p = 0; p <= sched_.depth(); ++p)
            for (Node* n : active_[static_cast<size_t>(p)]) {
                if (!n->on_trajectory) continue;
                RCoverEpochRecord r;
                r.p = p;
                r.k = n->k;
                r.real_nodes = static_cast<long>(active_[static_cast<size_t>(p)].size());
                r.virtual_cells = (p == 1) ? virtual_cells_ : 0;
                r.delta_star = n->delta_with_open();
                r.lambda_star = n->lambda;
                records_.push_back(r);
            }
    }

    const FunctionClassSpec* cls_;
    long T_;
    RCoverOptions opt_;
    std::uint64_t rng_root_;
    EpochSchedule sched_;
    Member f_star_;
    bool has_star_ = false;

    Node* root_ = nullptr;
    std::vector<std::unique_ptr<Node>> all_nodes_;
    std::unordered_multimap<std::uint64_t, Node*> table_;
    std::vector<std::vector<Node*>> active_;
    std::vector<Instance> queries_;
    std::vector<std::vector<double>> positions_;  // sorted distinct, per coordinate
    long rounds_seen_ = 0;
    std::uint64_t gather_stamp_ = 0;
    long virtual_cells_ = 0;
    long peak_states_ = 1;
    std::vector<double> scratch_extra_ = {0.0};
    std::vector<RCoverEpochRecord> records_;
    bool finalized_ = false;
};

} // namespace solsim
