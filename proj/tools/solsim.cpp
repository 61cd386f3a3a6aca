// Command-line front end for the smoothed online learning simulator.
//
// Subcommands:
//   simulate       one experiment config, optional traces
//   sweep          cross product over comma-listed config keys, CSV out
//   lowerbound     mistake battery against the bisection adversary
//   diagnose-gamma per-round representativeness diagnostics, CSV out
//   estimate-wills Monte-Carlo complexity estimates for a class, CSV out
//   fit            log-log scaling exponent from a summary CSV
//
// Exit codes: 0 ok, 1 usage/config error, 2 certificate failure or
// invariant breach.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "solsim/diagnostics.hpp"
#include "solsim/harness.hpp"

namespace fs = std::filesystem;
using namespace solsim;

namespace {

Config load_config(const std::string& path, const std::vector<std::string>& sets) {
    Config cfg = Config::parse_file(path);
    for (const std::string& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw config_error("--set expects key=value");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    f << text;
}

int cmd_simulate(const std::string& config, const std::vector<std::string>& sets,
                 bool trace) {
    Config cfg = load_config(config, sets);
    ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    cfg.reject_unknown_keys();
    ExperimentSummary s = run_experiment(spec, trace || !spec.out_dir.empty());
    std::printf("learner=%s T=%ld sigma=%g reps=%ld\n", spec.learner.c_str(), spec.T,
                spec.sigma, spec.replications);
    std::printf("adaptive regret: mean=%.6g se=%.6g median=%.6g\n", s.mean_adaptive,
                s.se_adaptive, s.median_adaptive);
    if (!s.runs.empty() && s.runs.front().has_oblivious)
        std::printf("oblivious regret: mean=%.6g se=%.6g\n", s.mean_oblivious, s.se_oblivious);
    std::printf("mistakes: mean=%.6g se=%.6g\n", s.mean_mistakes, s.se_mistakes);
    std::printf("certificates: %s (max ratio %.9g), peak states %ld, wall %.0f ms\n",
                s.all_certs_pass ? "all passed" : "FAILED", s.max_cert_ratio, s.peak_states,
                s.wall_ms);
    return s.all_certs_pass ? 0 : 2;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& sets) {
    Config cfg = load_config(config, sets);
    std::string out = cfg.get_string("out", "out");
    SweepResult r = run_sweep(cfg);
    write_file(out, "runs.csv", r.runs_csv);
    write_file(out, "summary.csv", r.summary_csv);
    long failed = 0;
    for (const SweepCell& c : r.cells)
        if (c.failed) ++failed;
    std::printf("%zu cells (%ld failed) -> %s/{runs,summary}.csv\n", r.cells.size(), failed,
                out.c_str());
    for (const SweepCell& c : r.cells)
        if (!c.failed && !c.summary.all_certs_pass) return 2;
    return 0;
}

int cmd_lowerbound(int d, double sigma, long T, long reps, std::uint64_t seed,
                   const std::string& learners, int rcover_depth, const std::string& out) {
    std::printf("bisection adversary battery: d=%d sigma=%g T=%ld reps=%ld\n", d, sigma, T,
                reps);
    double dd = static_cast<double>(d), tt = static_cast<double>(T);
    double bound = std::min(std::sqrt(dd * tt * (1.0 - sigma) / sigma) / 12.0, tt / 24.0);
    std::printf("forced-mistake bound: %.4f\n", bound);
    std::string csv = "learner,mean_mistakes,se_mistakes,bound,pass\n";
    bool all_ok = true;
    std::istringstream ls(learners);
    std::string name;
    while (std::getline(ls, name, ',')) {
        ExperimentSpec spec;
        spec.class_kind = d == 1 ? "threshold1d" : "product";
        spec.d = d;
        spec.adversary = "lowerbound";
        spec.sigma = sigma;
        spec.T = T;
        spec.seed = seed;
        spec.replications = reps;
        spec.learner = name;
        if (name == "rcover") spec.depth = rcover_depth;
        ExperimentSummary s = run_experiment(spec);
        bool pass = s.mean_mistakes >= bound - 3.0 * s.se_mistakes;
        all_ok = all_ok && pass && s.all_certs_pass;
        std::printf("  %-8s mistakes %.3f +- %.3f  (certs %s, max ratio %.9g)  %s\n",
                    name.c_str(), s.mean_mistakes, s.se_mistakes,
                    s.all_certs_pass ? "ok" : "FAIL", s.max_cert_ratio,
                    pass ? "PASS" : "FAIL");
        csv += name + "," + detail::fmt_double(s.mean_mistakes) + "," +
               detail::fmt_double(s.se_mistakes) + "," + detail::fmt_double(bound) + "," +
               (pass ? "1" : "0") + "\n";
    }
    if (!out.empty()) write_file(out, "lowerbound.csv", csv);
    return all_ok ? 0 : 2;
}

int cmd_diagnose_gamma(const std::string& config, const std::vector<std::string>& sets,
                       long epochs) {
    Config cfg = load_config(config, sets);
    ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    cfg.reject_unknown_keys();
    FunctionClassSpec cls = spec.make_class();
    auto adv = spec.make_adversary(cls, 0);
    auto bench = adv->benchmark();

    std::vector<long> bounds;
    for (long k = 0; k <= epochs; ++k) bounds.push_back(k * spec.T / epochs);
    std::string csv = "t,epoch,gamma,Gamma_epoch_cum,gamma_tube_r1,gamma_tube_r2\n";
    std::vector<Instance> queries;
    std::vector<double> labels;
    std::vector<Instance> epoch_prefix;
    std::vector<double> epoch_labels;
    std::vector<double> gammas;
    double epoch_cum = 0.0;
    long epoch = 1;
    for (long t = 1; t <= spec.T; ++t) {
        if (t > bounds[static_cast<size_t>(epoch)]) {
            ++epoch;
            epoch_prefix = queries;
            epoch_labels = labels;
            epoch_cum = 0.0;
        }
        DiscreteDistribution mu_t = adv->round_distribution(t);
        double g = gamma_exact(cls, epoch_prefix, epoch_labels, mu_t);
        gammas.push_back(g);
        epoch_cum += g;
        double g1 = -1.0, g2 = -1.0;
        if (bench) {
            try {
                g1 = gamma_bruteforce_tube(cls, epoch_prefix, *bench, spec.epsilon, mu_t, 1);
                g2 = gamma_bruteforce_tube(cls, epoch_prefix, *bench, spec.epsilon, mu_t, 2);
            } catch (const size_error&) {
                // enumeration too large; leave the tube columns empty
            }
        }
        csv += std::to_string(t) + "," + std::to_string(epoch) + "," + detail::fmt_double(g) +
               "," + detail::fmt_double(epoch_cum) + "," +
               (g1 >= 0 ? detail::fmt_double(g1) : "") + "," +
               (g2 >= 0 ? detail::fmt_double(g2) : "") + "\n";
        RngStream xs = RngStream::keyed(spec.seed, 0, kStreamAdversary,
                                        static_cast<std::uint64_t>(t));
        Instance x = mu_t.sample(xs);
        LossSpec loss = adv->reveal(t, x);
        queries.push_back(x);
        labels.push_back(loss.has_label() ? loss.label() : 0.0);
    }
    std::string out = spec.out_dir.empty() ? "out" : spec.out_dir;
    write_file(out, "gamma.csv", csv);
    long viol = epoch_violation_count(gammas, bounds, 0.5, 1.0);
    std::printf("%ld rounds, %ld epochs -> %s/gamma.csv (violations at q=0.5,w=1: %ld)\n",
                spec.T, epochs, out.c_str(), viol);
    return 0;
}

int cmd_estimate_wills(const std::string& config, const std::vector<std::string>& sets,
                       long m, long draws) {
    Config cfg = load_config(config, sets);
    ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    cfg.reject_unknown_keys();
    FunctionClassSpec cls = spec.make_class();
    VersionSpace vs = VersionSpace::full(cls);
    std::string csv = "m,wills,wills_se,gaussian,gaussian_se,ln_wills_le_gaussian\n";
    for (long mm = 1; mm <= m; mm *= 2) {
        std::vector<Instance> z;
        RngStream zr = RngStream::keyed(spec.seed, 0, kStreamDiag, static_cast<std::uint64_t>(mm));
        for (long i = 0; i < mm; ++i) z.push_back(Instance(1, zr.next_double()));
        RngStream wr = RngStream::keyed(spec.seed, 1, kStreamDiag, static_cast<std::uint64_t>(mm));
        WillsEstimate w = wills_mc(vs, z, draws, wr);
        RngStream gr = RngStream::keyed(spec.seed, 2, kStreamDiag, static_cast<std::uint64_t>(mm));
        GaussianEstimate g = gaussian_complexity_mc(vs, z, draws, gr);
        bool ok = std::log(w.estimate) <= g.estimate + 3.0 * (g.se + w.se / w.estimate);
        csv += std::to_string(mm) + "," + detail::fmt_double(w.estimate) + "," +
               detail::fmt_double(w.se) + "," + detail::fmt_double(g.estimate) + "," +
               detail::fmt_double(g.se) + "," + (ok ? "1" : "0") + "\n";
        std::printf("m=%-5ld  W=%.5g (se %.2g)  G=%.5g (se %.2g)  lnW<=G %s\n", mm, w.estimate,
                    w.se, g.estimate, g.se, ok ? "ok" : "VIOLATED");
    }
    std::string out = spec.out_dir.empty() ? "out" : spec.out_dir;
    write_file(out, "wills.csv", csv);
    return 0;
}

int cmd_fit(const std::string& csv_path, const std::string& xcol, const std::string& ycol) {
    std::ifstream in(csv_path);
    if (!in) throw config_error("cannot open " + csv_path);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    std::stringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
    auto find_col = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<long>(i);
        throw config_error("column not found: " + name);
    };
    long xi = find_col(xcol), yi = find_col(ycol);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::vector<std::string> vals;
        while (std::getline(ls, tok, ',')) vals.push_back(tok);
        if (static_cast<long>(vals.size()) <= std::max(xi, yi)) continue;
        try {
            pts.push_back({std::stod(vals[static_cast<size_t>(xi)]),
                           std::stod(vals[static_cast<size_t>(yi)])});
        } catch (const std::exception&) {
            continue;
        }
    }
    FitResult fit = fit_scaling_exponent(pts);
    std::printf("slope=%.4f intercept=%.4f R2=%.4f (used %ld, excluded %ld)\n", fit.slope,
                fit.intercept, fit.r2, fit.used, fit.excluded);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"smoothed online learning simulator"};
    app.require_subcommand(1);

    std::string config, out, learners = "rcover,cover,erm,fixed";
    std::vector<std::string> sets;
    bool trace = false;
    long epochs = 16, m = 16, draws = 100000, T = 300, reps = 200;
    int d = 1, rcover_depth = -1;
    double sigma = 0.25;
    std::uint64_t seed = 1;
    std::string fit_csv, fit_x = "T", fit_y = "mean_adaptive";

    // Common flags are sugar for config keys.
    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config, "flat key=value config file")->required();
        c->add_option("--set", sets, "override key=value (repeatable)");
        c->add_option_function<std::string>(
            "--seed", [&](const std::string& v) { sets.push_back("seed=" + v); },
            "override the experiment seed");
        c->add_option_function<std::string>(
            "--reps", [&](const std::string& v) { sets.push_back("replications=" + v); },
            "override the replication count");
        c->add_option_function<std::string>(
            "--out", [&](const std::string& v) { sets.push_back("out=" + v); },
            "output directory");
        c->add_flag_function(
            "--instrument",
            [&](std::int64_t) { sets.push_back("instrument=true"); },
            "emit per-epoch learner instrumentation");
        c->add_flag_function(
            "--exact-rational",
            [&](std::int64_t) { sets.push_back("exact_rational=true"); },
            "certify with exact rational arithmetic when masses allow");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one experiment");
    add_common(sim);
    sim->add_flag("--trace", trace, "keep per-round traces (needs out=)");

    CLI::App* swp = app.add_subcommand("sweep", "cross product over comma-listed keys");
    add_common(swp);

    CLI::App* lb = app.add_subcommand("lowerbound", "forced-mistake battery");
    lb->add_option("--d", d, "coordinate count");
    lb->add_option("--sigma", sigma, "smoothness");
    lb->add_option("--T", T, "horizon");
    lb->add_option("--reps", reps, "replications");
    lb->add_option("--seed", seed, "seed");
    lb->add_option("--learners", learners, "comma list of learners");
    lb->add_option("--rcover-depth", rcover_depth, "recursion depth for rcover (-1: log2 T)");
    lb->add_option("--out", out, "output directory");

    CLI::App* dg = app.add_subcommand("diagnose-gamma", "per-round gamma diagnostics");
    add_common(dg);
    dg->add_option("--epochs", epochs, "fixed epoch count");

    CLI::App* ew = app.add_subcommand("estimate-wills", "Monte-Carlo complexity estimates");
    add_common(ew);
    ew->add_option("--m", m, "largest point count (doubling from 1)");
    ew->add_option("--draws", draws, "Monte-Carlo draws");

    CLI::App* ft = app.add_subcommand("fit", "log-log slope from a summary CSV");
    ft->add_option("--csv", fit_csv, "summary csv")->required();
    ft->add_option("--x", fit_x, "size column");
    ft->add_option("--y", fit_y, "value column");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config, sets, trace);
        if (swp->parsed()) return cmd_sweep(config, sets);
        if (lb->parsed())
            return cmd_lowerbound(d, sigma, T, reps, seed, learners, rcover_depth, out);
        if (dg->parsed()) return cmd_diagnose_gamma(config, sets, epochs);
        if (ew->parsed()) return cmd_estimate_wills(config, sets, m, draws);
        if (ft->parsed()) return cmd_fit(fit_csv, fit_x, fit_y);
    } catch (const smoothness_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
