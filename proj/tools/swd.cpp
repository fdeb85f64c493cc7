// swd: precision analysis and allocation search for stepped wedge designs
// with unequal cluster sizes.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "swd/swd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitNonEstimable = 4;

std::uint64_t resolve_seed(const swd::RunConfig& cfg) {
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("SWD_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw swd::parse_error("environment SWD_SEED is not an integer", 0,
                                   "seed");
        }
    }
    return std::random_device{}();
}

swd::SearchScheme scheme_from(const swd::RunConfig& cfg, std::uint64_t seed) {
    swd::SearchScheme s;
    s.mode = cfg.mode;
    s.reps = cfg.reps;
    s.seed = seed;
    s.mirror_dedup = cfg.mirror_dedup;
    s.extra_cluster_rule = cfg.extra_rule;
    return s;
}

void print_vector(std::ostream& os, const swd::Vector& v, int digits) {
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << std::fixed << std::setprecision(digits) << v[i];
    os << ")";
}

swd::RegressionFit resolve_fit(const swd::RunConfig& cfg) {
    if (cfg.has_sizes()) {
        swd::ClusterSet clusters(cfg.sizes);
        return swd::fit_regression(cfg.trial(), clusters);
    }
    const swd::SizeMoments m(*cfg.mean, *cfg.cv);
    const double lambda = cfg.resolved_lambda();
    const double W =
        swd::approx_W(m, lambda, cfg.periods, swd::MomentOrder::second);
    const double Wb = swd::approx_Wbeta(m, lambda, cfg.periods);
    return swd::RegressionFit::from_values(W, Wb / W);
}

int cmd_analyze(const swd::RunConfig& cfg) {
    const swd::TrialConfig trial = cfg.trial();
    const swd::ClusterSet clusters(cfg.sizes);
    const swd::Allocation alloc{cfg.alloc};
    const swd::PrecisionReport scalar =
        swd::exact_precision_scalar(trial, clusters, alloc);
    if (!scalar.estimable) {
        std::cerr << "allocation is not estimable: treatment is confounded "
                     "with period\n";
        return kExitNonEstimable;
    }
    const swd::SearchContext ctx(trial, clusters);
    const swd::RankedAllocation r = swd::rank_allocation(ctx, alloc);
    const swd::AllocationMetrics m = swd::metrics(alloc, trial, clusters);
    std::cout << "allocation    " << swd::canonical_string(r.canonical) << "\n";
    std::cout << std::fixed << std::setprecision(6);
    std::cout << "W             " << ctx.fit.W << "\n";
    std::cout << "beta          " << ctx.fit.beta << "\n";
    std::cout << "W*beta        " << ctx.fit.wbeta() << "\n";
    std::cout << "corr(q,p)     " << ctx.fit.corr << "\n";
    if (ctx.fit.corr < 0.99)
        std::cerr << "warning: correlation of q with p is below 0.99; the "
                     "regression approximation may be inaccurate\n";
    std::cout << "V_exact       " << scalar.v_exact << "\n";
    std::cout << "V_approx      " << r.v_approx << "\n";
    std::cout << "rel_error     "
              << std::abs(r.v_approx - scalar.v_exact) / scalar.v_exact << "\n";
    std::cout << "efficiency    " << r.efficiency << "\n";
    std::cout << "distance      " << r.distance << "\n";
    std::cout << "imbalance     " << std::setprecision(2) << r.imbalance << "\n";
    std::cout << "mean_size     ";
    for (std::size_t l = 0; l < m.mean_cluster_size.size(); ++l) {
        if (l) std::cout << ", ";
        if (m.mean_cluster_size[l])
            std::cout << std::setprecision(1) << *m.mean_cluster_size[l];
        else
            std::cout << "-";
    }
    std::cout << "\n";
    return kExitOk;
}

int cmd_optimal(const swd::RunConfig& cfg) {
    const swd::RegressionFit fit = resolve_fit(cfg);
    const int S = cfg.periods - 1;
    const swd::SequenceGeometry g = swd::build_geometry(S);
    if (fit.wbeta() > 1.0 / cfg.periods + 1e-9)
        std::cerr << "warning: W*beta exceeds 1/T; inputs are outside the "
                     "usual regime\n";
    swd::Vector K(S, 1.0 / S);
    if (cfg.has_sizes()) {
        // Cluster-balanced disposition with extras placed per extra_rule.
        const std::size_t C = cfg.sizes.size();
        std::vector<double> counts(std::size_t(S), double(C / std::size_t(S)));
        std::vector<int> order;
        int lo = 1, hi = S;
        while (lo <= hi) {
            order.push_back(lo);
            if (hi != lo) order.push_back(hi);
            ++lo;
            --hi;
        }
        if (cfg.extra_rule == swd::ExtraClusterRule::inner_symmetric)
            std::reverse(order.begin(), order.end());
        for (std::size_t x = 0; x < C % std::size_t(S); ++x)
            counts[std::size_t(order[x] - 1)] += 1.0;
        for (int l = 0; l < S; ++l) K[std::size_t(l)] = counts[std::size_t(l)] / double(C);
    }
    const swd::OptimalDesign d = swd::optimal_P(fit, g, K);
    std::cout << std::fixed << std::setprecision(6);
    std::cout << "W       " << fit.W << "\n";
    std::cout << "beta    " << fit.beta << "\n";
    std::cout << "W*beta  " << fit.wbeta() << "\n";
    std::cout << "a       " << d.a << "\n";
    std::cout << "b       " << d.b << "\n";
    std::cout << "P_opt   ";
    print_vector(std::cout, d.p_opt, 4);
    std::cout << "\nV_opt   " << std::setprecision(7) << d.v_opt << "\n";
    if (!d.feasible)
        std::cerr << "warning: closed-form optimum was infeasible; reported "
                     "P_opt is the simplex-constrained maximizer\n";
    return kExitOk;
}

int cmd_search(const swd::RunConfig& cfg, bool exhaustive) {
    const swd::TrialConfig trial = cfg.trial();
    const swd::ClusterSet clusters(cfg.sizes);
    const std::uint64_t seed = resolve_seed(cfg);
    swd::SearchScheme scheme = scheme_from(cfg, seed);
    if (exhaustive) scheme.mode = swd::SearchMode::exhaustive;
    swd::SearchResult res =
        exhaustive ? swd::enumerate_allocations(clusters, trial, scheme)
                   : swd::sample_allocations(clusters, trial, scheme);
    if (!exhaustive) std::cout << "seed " << seed << "\n";
    std::cout << "canonical allocations "
              << (exhaustive ? "" : "visited ") << res.canonical_count
              << ", estimable " << res.estimable_count << "\n";
    if (res.ranked.empty()) {
        std::cerr << "no estimable allocation found\n";
        return kExitEmpty;
    }
    std::cout << swd::emit_report(res.ranked, clusters, cfg.output, cfg.top_k);
    return kExitOk;
}

int cmd_recommend(const swd::RunConfig& cfg) {
    if (!cfg.has_sizes())
        throw swd::parse_error("command 'recommend' needs individual cluster sizes",
                               0, "sizes");
    const swd::TrialConfig trial = cfg.trial();
    const swd::ClusterSet clusters(cfg.sizes);
    const std::uint64_t seed = resolve_seed(cfg);
    const swd::SearchScheme scheme = scheme_from(cfg, seed);
    try {
        const swd::Recommendation rec =
            swd::recommend(clusters, trial, scheme, cfg.threshold);
        std::cout << "seed        " << seed << "\n";
        std::cout << "threshold   " << cfg.threshold << "\n";
        std::cout << "sampled     " << rec.sampled << "\n";
        std::cout << "qualifiers  " << rec.qualifiers << "\n";
        std::cout << "chosen      " << swd::canonical_string(rec.choice.canonical)
                  << "\n";
        std::cout << std::fixed << std::setprecision(6);
        std::cout << "V           " << rec.choice.v_approx << "\n";
        std::cout << "efficiency  " << rec.choice.efficiency << "\n";
        return kExitOk;
    } catch (const swd::no_qualifier_error& e) {
        std::cerr << e.what() << "; best efficiency found "
                  << std::setprecision(6) << e.best_efficiency << " (seed "
                  << seed << ")\n";
        return kExitEmpty;
    }
}

int cmd_moments(const swd::RunConfig& cfg) {
    const double lambda = cfg.resolved_lambda();
    const swd::SizeMoments m = [&] {
        if (cfg.has_sizes()) {
            const swd::ClusterSet clusters(cfg.sizes);
            return swd::SizeMoments(clusters.mean(), clusters.cv(),
                                    int(clusters.count()));
        }
        return swd::SizeMoments(*cfg.mean, *cfg.cv);
    }();
    const double w1 = swd::approx_W(m, lambda, cfg.periods, swd::MomentOrder::first);
    const double w2 = swd::approx_W(m, lambda, cfg.periods, swd::MomentOrder::second);
    const double wb = swd::approx_Wbeta(m, lambda, cfg.periods);
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "M         " << m.mean << "\n";
    std::cout << "CV        " << m.cv << "\n";
    std::cout << "W_first   " << w1 << "\n";
    std::cout << "W_second  " << w2 << "\n";
    std::cout << "Wbeta     " << wb << "\n";
    if (cfg.output == swd::OutputFormat::csv)
        std::cout << "order,W,Wbeta\nfirst," << w1 << ',' << wb << "\nsecond,"
                  << w2 << ',' << wb << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Precision and allocation search for stepped wedge designs"};
    std::string command, config_path, sizes_str, alloc_str, extra_rule_str,
        output_str, mode_str;
    double lambda = -1, icc = -1, mu = -1, mean = -1, cv = -1, threshold = -1;
    int periods = 0;
    long long reps = -1, top_k = -1;
    std::uint64_t seed = 0;
    bool have_seed = false, mirror_dedup = false;

    app.add_option("command", command,
                   "analyze|optimal|enumerate|sample|recommend|moments")
        ->required();
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--periods", periods, "number of periods T");
    app.add_option("--lambda", lambda, "variance ratio (1-rho)/rho");
    app.add_option("--icc", icc, "intra-class correlation rho");
    app.add_option("--mu", mu, "closed-cohort ratio omega^2/tau^2");
    app.add_option("--sizes", sizes_str, "comma-separated cluster sizes");
    app.add_option("--mean", mean, "mean cluster size M");
    app.add_option("--cv", cv, "coefficient of variation of sizes");
    app.add_option("--alloc", alloc_str, "comma-separated sequence per cluster");
    app.add_option("--reps", reps, "random draws for sample/recommend");
    auto* seed_opt =
        app.add_option("--seed", seed, "random seed (SWD_SEED is the fallback)");
    app.add_option("--threshold", threshold, "efficiency threshold for recommend");
    app.add_option("--extra-rule", extra_rule_str,
                   "outer|inner|free placement of leftover clusters");
    app.add_flag("--mirror-dedup", mirror_dedup,
                 "report one member of each mirror pair");
    app.add_option("--top-k", top_k, "rows to report");
    app.add_option("--output", output_str, "table|csv");
    app.add_option("--mode", mode_str,
                   "exhaustive|unrestricted|cluster-balanced sampling mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitParse;
    }

    try {
        swd::RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw swd::parse_error("cannot open config file '" + config_path + "'",
                                       0, "config");
            std::stringstream ss;
            ss << in.rdbuf();
            // Cross-field validation is deferred until flags are applied.
            cfg = swd::parse_config_keys(ss.str());
        }
        if (periods > 0) cfg.periods = periods;
        // A flag replaces the config-file value of its alternative; two
        // conflicting flags are left for validate_config to reject.
        if (lambda >= 0) {
            cfg.lambda = lambda;
            if (icc < 0) cfg.icc.reset();
        }
        if (icc >= 0) {
            cfg.icc = icc;
            if (lambda < 0) cfg.lambda.reset();
        }
        if (mu >= 0) cfg.mu = mu;
        if (!sizes_str.empty()) {
            cfg.sizes = swd::detail::parse_int_list(sizes_str, 0, "sizes");
            if (mean < 0 && cv < 0) {
                cfg.mean.reset();
                cfg.cv.reset();
            }
        }
        if (mean >= 0) cfg.mean = mean;
        if (cv >= 0) cfg.cv = cv;
        if ((mean >= 0 || cv >= 0) && sizes_str.empty()) cfg.sizes.clear();
        if (!alloc_str.empty())
            cfg.alloc = swd::detail::parse_int_list(alloc_str, 0, "alloc");
        if (reps >= 0) cfg.reps = std::uint64_t(reps);
        have_seed = seed_opt->count() > 0;
        if (have_seed) cfg.seed = seed;
        if (threshold >= 0) cfg.threshold = threshold;
        if (!extra_rule_str.empty())
            cfg.extra_rule = swd::detail::parse_extra_rule(extra_rule_str, 0,
                                                           "extra_rule");
        if (mirror_dedup) cfg.mirror_dedup = true;
        if (top_k >= 0) cfg.top_k = std::size_t(top_k);
        if (!output_str.empty()) {
            if (output_str == "table")
                cfg.output = swd::OutputFormat::table;
            else if (output_str == "csv")
                cfg.output = swd::OutputFormat::csv;
            else
                throw swd::parse_error("--output expects table|csv", 0, "output");
        }
        if (!mode_str.empty()) {
            if (mode_str == "exhaustive")
                cfg.mode = swd::SearchMode::exhaustive;
            else if (mode_str == "unrestricted")
                cfg.mode = swd::SearchMode::random_unrestricted;
            else if (mode_str == "cluster-balanced")
                cfg.mode = swd::SearchMode::random_cluster_balanced;
            else
                throw swd::parse_error(
                    "--mode expects exhaustive|unrestricted|cluster-balanced", 0,
                    "mode");
        }
        cfg.command = swd::detail::parse_command(command, 0, "command");
        if ((cfg.command == swd::Command::sample ||
             cfg.command == swd::Command::recommend) &&
            cfg.reps < 1)
            throw swd::parse_error("'reps' must be at least 1", 0, "reps");
        swd::validate_config(cfg);

        switch (*cfg.command) {
            case swd::Command::analyze: return cmd_analyze(cfg);
            case swd::Command::optimal: return cmd_optimal(cfg);
            case swd::Command::enumerate_cmd: return cmd_search(cfg, true);
            case swd::Command::sample: return cmd_search(cfg, false);
            case swd::Command::recommend: return cmd_recommend(cfg);
            case swd::Command::moments: return cmd_moments(cfg);
        }
        return kExitOk;
    } catch (const swd::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const swd::empty_result_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmpty;
    } catch (const swd::non_estimable_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonEstimable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
}
