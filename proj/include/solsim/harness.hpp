#pragma once
/*
Experiment orchestration.

A run is a pure function of (config, seed, replication): the adversary
announces mu_t and is certified against its declared base measure, the
learner commits, the instance is sampled from a counter-keyed stream, the
loss is revealed, and both regret ledgers advance. Replications may execute
on a thread pool; results are gathered in replication order so aggregates
and trace files are byte-stable.

Trace files are JSON lines, one record per round; sweep output is CSV with a
fixed column order.
*/
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "config.hpp"
#include "cover_learner.hpp"
#include "diagnostics.hpp"
#include "ledger.hpp"
#include "learner.hpp"
#include "rcover.hpp"
#include "rng.hpp"

namespace solsim {

struct ExperimentSpec {
    // class
    std::string class_kind = "threshold1d";  // threshold1d | product | finite
    int d = 1;
    std::vector<double> finite_support;
    std::vector<std::vector<double>> finite_members;
    // adversary
    std::string adversary = "iid";  // iid | switching | mixture | lowerbound
    double sigma = 1.0;
    double q = -1.0;  // mixture: <0 means 1/sqrt(T)
    long epoch_length = 0;  // mixture: 0 means ceil(sqrt(T))
    long corrupted = 0;     // mixture: 0 means the full smoothness budget
    std::string mixture_mode = "bisect";
    double flip_prob = 0.0;
    std::string loss_kind = "absolute";  // absolute | squared (iid only)
    std::vector<double> iid_atoms;
    long regions = 2;
    long region_atoms = 2;
    std::vector<double> theta_star;
    // learner
    std::string learner = "rcover";  // rcover | cover | erm | fixed
    int depth = -1;
    double epsilon = 0.0;
    long cover_epochs = 0;  // 0: ln T (T/d)^(1/3) sigma^(-2/3)
    std::string cover_forecaster = "hedge";
    bool memoize = true;
    bool force_cover_route = false;
    std::vector<double> fixed_theta;
    // run
    long T = 100;
    std::uint64_t seed = 1;
    long replications = 1;
    bool instrument = false;
    bool exact_rational = false;
    int threads = 1;
    std::string out_dir;

    // Finite-member rows: semicolon-separated; each row either a 0/1 string
    // ("011") or colon-separated reals ("0:0.5:1").
    static std::vector<std::string> parse_rows(const std::string& s) {
        std::vector<std::string> rows;
        std::string cur;
        for (char c : s) {
            if (c == ';') {
                if (!cur.empty()) rows.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) rows.push_back(cur);
        return rows;
    }
    static std::vector<double> parse_row(const std::string& row) {
        std::vector<double> out;
        if (row.find(':') != std::string::npos) {
            std::string cur;
            for (char c : row) {
                if (c == ':') {
                    out.push_back(std::stod(cur));
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            out.push_back(std::stod(cur));
        } else {
            for (char c : row) {
                if (c != '0' && c != '1') throw config_error("finite member row must be 0/1");
                out.push_back(c == '1' ? 1.0 : 0.0);
            }
        }
        return out;
    }

    static ExperimentSpec from_config(const Config& cfg) {
        ExperimentSpec s;
        s.class_kind = cfg.get_string("class.kind", s.class_kind);
        s.d = static_cast<int>(cfg.get_long("class.d", 1));
        s.finite_support = cfg.get_doubles("class.finite.support");
        for (const std::string& row : parse_rows(cfg.get_string("class.finite.members", "")))
            s.finite_members.push_back(parse_row(row));
        s.adversary = cfg.get_string("adversary.kind", s.adversary);
        s.sigma = cfg.get_double("adversary.sigma", s.sigma);
        s.q = cfg.get_double("adversary.q", s.q);
        s.epoch_length = cfg.get_long("adversary.epoch_length", s.epoch_length);
        s.corrupted = cfg.get_long("adversary.corrupted", s.corrupted);
        s.mixture_mode = cfg.get_string("adversary.mode", s.mixture_mode);
        s.flip_prob = cfg.get_double("adversary.flip_prob", s.flip_prob);
        s.loss_kind = cfg.get_string("adversary.loss", s.loss_kind);
        s.iid_atoms = cfg.get_doubles("adversary.atoms");
        s.regions = cfg.get_long("adversary.regions", s.regions);
        s.region_atoms = cfg.get_long("adversary.region_atoms", s.region_atoms);
        s.theta_star = cfg.get_doubles("adversary.theta_star");
        s.learner = cfg.get_string("learner.kind", s.learner);
        s.depth = static_cast<int>(cfg.get_long("learner.depth", s.depth));
        s.epsilon = cfg.get_double("learner.epsilon", s.epsilon);
        s.cover_epochs = cfg.get_long("learner.epochs", s.cover_epochs);
        s.cover_forecaster = cfg.get_string("learner.forecaster", s.cover_forecaster);
        s.memoize = cfg.get_bool("learner.memoize", s.memoize);
        s.force_cover_route = cfg.get_bool("learner.force_cover_route", s.force_cover_route);
        s.fixed_theta = cfg.get_doubles("learner.theta");
        s.T = cfg.get_long("T", s.T);
        s.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
        s.replications = cfg.get_long("replications", s.replications);
        s.instrument = cfg.get_bool("instrument", s.instrument);
        s.exact_rational = cfg.get_bool("exact_rational", s.exact_rational);
        s.threads = static_cast<int>(cfg.get_long("threads", s.threads));
        s.out_dir = cfg.get_string("out", s.out_dir);
        return s;
    }

    FunctionClassSpec make_class() const {
        if (class_kind == "threshold1d") return FunctionClassSpec::threshold1d();
        if (class_kind == "product") return FunctionClassSpec::product_threshold(d);
        if (class_kind == "finite") {
            std::vector<Instance> support;
            for (double p : finite_support) support.push_back(Instance(1, p));
            return FunctionClassSpec::finite(support, finite_members);
        }
        throw config_error("unknown class.kind: " + class_kind);
    }

    Member benchmark_member(const FunctionClassSpec& cls) const {
        if (!theta_star.empty()) {
            if (cls.is_threshold_kind()) {
                std::vector<double> th = theta_star;
                th.resize(static_cast<size_t>(cls.dimension()), theta_star.back());
                return Member::of_theta(th);
            }
            return Member::of_id(static_cast<int>(theta_star.front()));
        }
        if (cls.is_threshold_kind())
            return Member::of_theta(std::vector<double>(static_cast<size_t>(cls.dimension()), 0.5));
        return Member::of_id(0);
    }

    std::unique_ptr<Adversary> make_adversary(const FunctionClassSpec& cls, long rep) const {
        std::uint64_t key = key_combine(seed, static_cast<std::uint64_t>(rep));
        if (adversary == "iid") {
            std::vector<Instance> atoms;
            for (double p : iid_atoms) atoms.push_back(Instance(1, p));
            if (atoms.empty())
                for (int i = 0; i < 8; ++i)
                    atoms.push_back(Instance(1, (2.0 * i + 1.0) / 16.0));
            LossSpec::Kind lk = loss_kind == "squared" ? LossSpec::Kind::Squared
                                                       : LossSpec::Kind::Absolute;
            return std::make_unique<IidAdversary>(cls, DiscreteDistribution::uniform(atoms),
                                                  benchmark_member(cls), flip_prob, key, lk);
        }
        if (adversary == "switching") {
            std::vector<DiscreteDistribution> regs;
            for (long r = 0; r < regions; ++r) {
                std::vector<Instance> atoms;
                for (long i = 0; i < region_atoms; ++i) {
                    double pos = (static_cast<double>(r) +
                                  (static_cast<double>(i) + 0.5) / static_cast<double>(region_atoms)) /
                                 static_cast<double>(regions);
                    atoms.push_back(Instance(1, pos));
                }
                regs.push_back(DiscreteDistribution::uniform(atoms));
            }
            std::vector<long> switches;
            for (long r = 1; r < regions; ++r) switches.push_back(r * T / regions);
            return std::make_unique<SwitchingAdversary>(cls, sigma, std::move(regs),
                                                        std::move(switches), benchmark_member(cls));
        }
        if (adversary == "mixture") {
            double qq = q < 0.0 ? 1.0 / std::sqrt(static_cast<double>(T)) : q;
            long el = epoch_length > 0
                          ? epoch_length
                          : static_cast<long>(std::ceil(std::sqrt(static_cast<double>(T))));
            MixtureMode mode = mixture_mode == "random" ? MixtureMode::Random : MixtureMode::Bisect;
            return std::make_unique<MixtureAdversary>(cls, sigma, qq, T, el, mode, key,
                                                      corrupted);
        }
        if (adversary == "lowerbound")
            return std::make_unique<LowerBoundAdversary>(cls, sigma, T, key);
        throw config_error("unknown adversary.kind: " + adversary);
    }

    std::unique_ptr<OnlineLearner> make_learner(const FunctionClassSpec& cls, long rep,
                                                const Adversary& adv) const {
        std::uint64_t root = key_combine(key_combine(seed, static_cast<std::uint64_t>(rep)),
                                         0x1EA82ull);
        if (learner == "fixed") {
            Member m = fixed_theta.empty()
                           ? cls.canonical_member()
                           : (cls.is_threshold_kind()
                                  ? Member::of_theta([&] {
                                        std::vector<double> th = fixed_theta;
                                        th.resize(static_cast<size_t>(cls.dimension()),
                                                  fixed_theta.back());
                                        return th;
                                    }())
                                  : Member::of_id(static_cast<int>(fixed_theta.front())));
            return std::make_unique<FixedFunctionLearner>(cls, m);
        }
        if (learner == "erm") return std::make_unique<ErmLearner>(cls);
        if (learner == "cover") {
            long K = cover_epochs > 0 ? cover_epochs
                                      : cover_epoch_count(T, cls.dimension(), adv.sigma());
            ForecasterMode mode = cover_forecaster == "aexp" ? ForecasterMode::AExp
                                                             : ForecasterMode::Hedge;
            return std::make_unique<CoverLearner>(cls, T, K, mode, root);
        }
        if (learner == "rcover") {
            RCoverOptions opt;
            opt.depth = depth;
            opt.epsilon = epsilon;
            opt.memoize = memoize;
            opt.force_cover_route = force_cover_route;
            opt.instrument = instrument;
            auto l = std::make_unique<RCoverLearner>(cls, T, opt, root);
            if (auto b = adv.benchmark()) l->set_benchmark(*b);
            return l;
        }
        throw config_error("unknown learner.kind: " + learner);
    }
};

// ---------------------------------------------------------------------------

struct RunResult {
    long rep = 0;
    double adaptive_regret = 0.0;
    double oblivious_regret = 0.0;
    bool has_oblivious = false;
    double cumulative_loss = 0.0;
    long mistakes = 0;
    bool certs_pass = true;
    double max_cert_ratio = 0.0;
    double wall_ms = 0.0;
    long peak_states = 1;
    std::string trace;       // JSONL when requested
    std::string instrument;  // CSV when requested
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}
inline double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}
inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

inline RunResult run_replication(const ExperimentSpec& spec, long rep, bool keep_trace) {
    auto t0 = std::chrono::steady_clock::now();
    FunctionClassSpec cls = spec.make_class();
    std::unique_ptr<Adversary> adv = spec.make_adversary(cls, rep);
    std::unique_ptr<OnlineLearner> learner = spec.make_learner(cls, rep, *adv);
    std::optional<Member> bench = adv->benchmark();
    RegretLedger ledger(cls, bench ? &*bench : nullptr);

    RunResult out;
    out.rep = rep;
    std::string trace;
    const Fraction* sx = spec.exact_rational ? adv->exact_sigma() : nullptr;

    for (long t = 1; t <= spec.T; ++t) {
        DiscreteDistribution mu_t = adv->round_distribution(t);
        SmoothnessCertificate cert =
            smoothness_certificate(mu_t, adv->base_measure(), adv->sigma(), sx);
        out.max_cert_ratio = std::max(out.max_cert_ratio, cert.max_ratio);
        if (!cert.pass) {
            out.certs_pass = false;
            throw smoothness_error("certificate failed at round " + std::to_string(t) +
                                   " with ratio " + detail::fmt_double(cert.max_ratio));
        }
        learner->begin_round(t);
        RngStream xs = RngStream::keyed(spec.seed, static_cast<std::uint64_t>(rep),
                                        kStreamAdversary, static_cast<std::uint64_t>(t));
        Instance x = mu_t.sample(xs);
        LossSpec loss = adv->reveal(t, x);
        double yhat = learner->predict(x);
        learner->observe(x, loss);
        ledger.record(x, yhat, loss);

        if (keep_trace) {
            trace += "{\"t\":" + std::to_string(t) + ",\"x\":{\"k\":" +
                     std::to_string(x.coordinate) + ",\"pos\":" + detail::fmt_double(x.position) +
                     "},\"yhat\":" + detail::fmt_double(yhat) +
                     ",\"loss\":" + detail::fmt_double(loss(yhat)) +
                     ",\"cum_adaptive\":" + detail::fmt_double(ledger.adaptive_regret()) +
                     ",\"cum_oblivious\":" +
                     (ledger.has_oblivious() ? detail::fmt_double(ledger.oblivious_regret())
                                             : "null") +
                     ",\"cert_ratio\":" + detail::fmt_double(cert.max_ratio) +
                     (spec.instrument
                          ? ",\"live_states\":" + std::to_string(learner->live_states())
                          : "") +
                     "}\n";
        }
    }

    out.adaptive_regret = ledger.adaptive_regret();
    out.has_oblivious = ledger.has_oblivious();
    out.oblivious_regret = out.has_oblivious ? ledger.oblivious_regret() : 0.0;
    out.cumulative_loss = ledger.cumulative_loss();
    out.mistakes = ledger.mistakes();
    out.peak_states = learner->peak_states();
    out.trace = std::move(trace);
    if (spec.instrument) {
        if (auto* rc = dynamic_cast<RCoverLearner*>(learner.get())) {
            std::string csv = "p,k,real_nodes,virtual_cells,delta_star,lambda_star\n";
            for (const RCoverEpochRecord& r : rc->instrumentation())
                csv += std::to_string(r.p) + "," + std::to_string(r.k) + "," +
                       std::to_string(r.real_nodes) + "," + std::to_string(r.virtual_cells) +
                       "," + detail::fmt_double(r.delta_star) + "," +
                       detail::fmt_double(r.lambda_star) + "\n";
            out.instrument = std::move(csv);
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return out;
}

struct ExperimentSummary {
    std::vector<RunResult> runs;
    double mean_adaptive = 0.0, se_adaptive = 0.0, median_adaptive = 0.0;
    double mean_oblivious = 0.0, se_oblivious = 0.0;
    double mean_mistakes = 0.0, se_mistakes = 0.0;
    bool all_certs_pass = true;
    double max_cert_ratio = 0.0;
    long peak_states = 1;
    double wall_ms = 0.0;

    void finalize() {
        std::vector<double> ad, ob, mi;
        for (const RunResult& r : runs) {
            ad.push_back(r.adaptive_regret);
            if (r.has_oblivious) ob.push_back(r.oblivious_regret);
            mi.push_back(static_cast<double>(r.mistakes));
            all_certs_pass = all_certs_pass && r.certs_pass;
            max_cert_ratio = std::max(max_cert_ratio, r.max_cert_ratio);
            peak_states = std::max(peak_states, r.peak_states);
            wall_ms += r.wall_ms;
        }
        mean_adaptive = detail::mean_of(ad);
        se_adaptive = detail::stderr_of(ad);
        median_adaptive = detail::median_of(ad);
        mean_oblivious = detail::mean_of(ob);
        se_oblivious = detail::stderr_of(ob);
        mean_mistakes = detail::mean_of(mi);
        se_mistakes = detail::stderr_of(mi);
    }
};

inline ExperimentSummary run_experiment(const ExperimentSpec& spec, bool keep_traces = false) {
    ExperimentSummary summary;
    summary.runs.resize(static_cast<size_t>(spec.replications));
    int threads = std::max(1, spec.threads);
    if (threads == 1) {
        for (long rep = 0; rep < spec.replications; ++rep)
            summary.runs[static_cast<size_t>(rep)] = run_replication(spec, rep, keep_traces);
    } else {
        std::vector<std::future<RunResult>> futs;
        futs.reserve(static_cast<size_t>(spec.replications));
        for (long rep = 0; rep < spec.replications; ++rep)
            futs.push_back(std::async(std::launch::async,
                                      [&spec, rep, keep_traces] {
                                          return run_replication(spec, rep, keep_traces);
                                      }));
        for (long rep = 0; rep < spec.replications; ++rep)
            summary.runs[static_cast<size_t>(rep)] = futs[static_cast<size_t>(rep)].get();
    }
    summary.finalize();
    if (!spec.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(spec.out_dir);
        if (keep_traces)
            for (const RunResult& r : summary.runs) {
                char name[64];
                std::snprintf(name, sizeof(name), "trace_rep%03ld.jsonl", r.rep);
                std::ofstream f(fs::path(spec.out_dir) / name, std::ios::binary);
                f << r.trace;
            }
        if (spec.instrument)
            for (const RunResult& r : summary.runs) {
                if (r.instrument.empty()) continue;
                char name[64];
                std::snprintf(name, sizeof(name), "instrument_rep%03ld.csv", r.rep);
                std::ofstream f(fs::path(spec.out_dir) / name, std::ios::binary);
                f << r.instrument;
            }
    }
    return summary;
}

// ---------------------------------------------------------------------------

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    long used = 0;
    long excluded = 0;
};

// Least squares of log2(value) on log2(size); non-positive values are
// excluded (with a count) rather than poisoning the fit.
inline FitResult fit_scaling_exponent(const std::vector<std::pair<double, double>>& points) {
    std::vector<double> xs, ys;
    FitResult fit;
    for (const auto& [size, value] : points) {
        if (!(size > 0.0) || !(value > 0.0)) {
            ++fit.excluded;
            continue;
        }
        xs.push_back(std::log2(size));
        ys.push_back(std::log2(value));
    }
    fit.used = static_cast<long>(xs.size());
    if (fit.used < 3) throw config_error("scaling fit needs >= 3 positive points");
    double mx = detail::mean_of(xs), my = detail::mean_of(ys);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw config_error("scaling fit needs distinct sizes");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;
    } else {
        double ssres = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            double pred = fit.intercept + fit.slope * xs[i];
            ssres += (ys[i] - pred) * (ys[i] - pred);
        }
        fit.r2 = 1.0 - ssres / syy;
    }
    return fit;
}

// ---------------------------------------------------------------------------

struct SweepCell {
    std::map<std::string, std::string> overrides;
    ExperimentSummary summary;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::string runs_csv;
    std::string summary_csv;
};

// Cross product over every comma-listed key in the config.
inline SweepResult run_sweep(const Config& base, bool keep_traces = false) {
    std::vector<std::string> axes = base.list_keys();
    std::vector<std::vector<std::string>> values;
    bool empty_axis = false;
    for (const std::string& k : axes) {
        values.push_back(base.list_values(k));
        if (values.back().empty()) empty_axis = true;
    }

    SweepResult result;
    result.runs_csv =
        "run_id,seed,learner,T,sigma,d,epsilon,depth,final_adaptive_regret,"
        "final_oblivious_regret,mistakes,wall_ms\n";
    result.summary_csv =
        "cell,learner,T,sigma,d,epsilon,depth,reps,mean_adaptive,se_adaptive,"
        "median_adaptive,mean_oblivious,se_oblivious,mean_mistakes,se_mistakes,"
        "peak_states,wall_ms,all_certs_pass\n";
    if (empty_axis) return result;

    std::vector<size_t> idx(axes.size(), 0);
    long cell_id = 0;
    while (true) {
        Config cfg = base;
        std::string cell_name;
        for (size_t a = 0; a < axes.size(); ++a) {
            cfg.set(axes[a], values[a][idx[a]]);
            if (!cell_name.empty()) cell_name += "|";
            cell_name += axes[a] + "=" + values[a][idx[a]];
        }
        if (cell_name.empty()) cell_name = "base";
        SweepCell cell;
        for (size_t a = 0; a < axes.size(); ++a) cell.overrides[axes[a]] = values[a][idx[a]];
        ExperimentSpec spec = ExperimentSpec::from_config(cfg);
        try {
            cell.summary = run_experiment(spec, keep_traces);
            for (const RunResult& r : cell.summary.runs) {
                result.runs_csv +=
                    std::to_string(cell_id) + "," + std::to_string(spec.seed) + "," +
                    spec.learner + "," + std::to_string(spec.T) + "," +
                    detail::fmt_double(spec.sigma) + "," + std::to_string(spec.d) + "," +
                    detail::fmt_double(spec.epsilon) + "," + std::to_string(spec.depth) + "," +
                    detail::fmt_double(r.adaptive_regret) + "," +
                    (r.has_oblivious ? detail::fmt_double(r.oblivious_regret) : "") + "," +
                    std::to_string(r.mistakes) + "," + detail::fmt_double(r.wall_ms) + "\n";
            }
            const ExperimentSummary& s = cell.summary;
            result.summary_csv +=
                cell_name + "," + spec.learner + "," + std::to_string(spec.T) + "," +
                detail::fmt_double(spec.sigma) + "," + std::to_string(spec.d) + "," +
                detail::fmt_double(spec.epsilon) + "," + std::to_string(spec.depth) + "," +
                std::to_string(spec.replications) + "," + detail::fmt_double(s.mean_adaptive) +
                "," + detail::fmt_double(s.se_adaptive) + "," +
                detail::fmt_double(s.median_adaptive) + "," +
                detail::fmt_double(s.mean_oblivious) + "," + detail::fmt_double(s.se_oblivious) +
                "," + detail::fmt_double(s.mean_mistakes) + "," +
                detail::fmt_double(s.se_mistakes) + "," + std::to_string(s.peak_states) + "," +
                detail::fmt_double(s.wall_ms) + "," + (s.all_certs_pass ? "1" : "0") + "\n";
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
            result.summary_csv += cell_name + ",FAILED: " + e.what() + "\n";
        }
        result.cells.push_back(std::move(cell));
        ++cell_id;
        int a = static_cast<int>(axes.size()) - 1;
        while (a >= 0 && ++idx[static_cast<size_t>(a)] == values[static_cast<size_t>(a)].size()) {
            idx[static_cast<size_t>(a)] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return result;
}

} // namespace solsim
