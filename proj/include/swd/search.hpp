#pragma once
// Enumeration, seeded random sampling, ranking and the recommend
// workflow over allocation space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "swd/approx.hpp"
#include "swd/common.hpp"
#include "swd/exact.hpp"
#include "swd/geometry.hpp"
#include "swd/optimal.hpp"

namespace swd {

enum class SearchMode { exhaustive, random_unrestricted, random_cluster_balanced };
enum class ExtraClusterRule { outer_symmetric, inner_symmetric, free };

struct SearchScheme {
    SearchMode mode = SearchMode::exhaustive;
    std::uint64_t reps = 1;
    std::uint64_t seed = 0;
    bool mirror_dedup = false;
    ExtraClusterRule extra_cluster_rule = ExtraClusterRule::outer_symmetric;
    std::size_t enumeration_cap = 1000000;
    std::size_t exact_top_k = 100;  // v_exact filled lazily for this many
};

struct RankedAllocation {
    Allocation allocation;
    CanonicalForm canonical;
    double v_approx = 0.0;
    std::optional<double> v_exact;
    double efficiency = 0.0;  // v_approx / v_opt(a, b of its K)
    double distance = 0.0;    // ||P - P_opt|| for its cluster disposition
    double imbalance = 0.0;   // 2 N P^T z
    ApproxTerms terms;
    AllocationProfile profile;
};

struct AllocationMetrics {
    double distance = 0.0;
    double imbalance = 0.0;
    // (N p_l)/(C k_l); absent where k_l = 0.
    std::vector<std::optional<double>> mean_cluster_size;
};

// Shared read-only evaluation state for a (clusters, config) pair.
struct SearchContext {
    TrialConfig config;
    ClusterSet clusters;
    SequenceGeometry geometry;
    RegressionFit fit;
    ApproxConstants constants;

    SearchContext(const TrialConfig& cfg, const ClusterSet& cls)
        : config(cfg),
          clusters(cls),
          geometry(build_geometry(cfg.sequences())),
          fit(fit_regression(cfg, cls)),
          constants(make_constants(fit, geometry, cfg.periods)) {}
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Generator for rep r of a run seeded with s; independent of scheduling.
inline std::mt19937_64 rep_rng(std::uint64_t seed, std::uint64_t rep) {
    return std::mt19937_64(mix64(seed ^ mix64(rep)));
}

}  // namespace detail

inline RankedAllocation rank_allocation(const SearchContext& ctx,
                                        const Allocation& alloc) {
    RankedAllocation r;
    r.allocation = alloc;
    r.canonical = alloc.canonical(ctx.clusters, ctx.geometry.S);
    r.profile = derive_profile(ctx.config, ctx.clusters, alloc, ctx.geometry);
    r.terms = precision_approx_terms(r.profile.P, r.profile.K, ctx.fit,
                                     ctx.constants, ctx.geometry);
    r.v_approx = r.terms.value();
    const OptimalDesign opt = optimal_P(ctx.fit, ctx.geometry, r.profile.K);
    r.efficiency = r.v_approx / opt.v_opt;
    double d2 = 0.0;
    for (int i = 0; i < ctx.geometry.S; ++i) {
        const double d = r.profile.P[i] - opt.p_opt[i];
        d2 += d * d;
    }
    r.distance = std::sqrt(d2);
    r.imbalance = 2.0 * double(ctx.clusters.total) *
                  detail::dot(ctx.geometry.z, r.profile.P);
    return r;
}

inline AllocationMetrics metrics(const Allocation& alloc, const TrialConfig& config,
                                 const ClusterSet& clusters) {
    if (!estimability(config, clusters, alloc))
        throw non_estimable_error("allocation is not estimable");
    SearchContext ctx(config, clusters);
    const RankedAllocation r = rank_allocation(ctx, alloc);
    AllocationMetrics m;
    m.distance = r.distance;
    m.imbalance = r.imbalance;
    m.mean_cluster_size.resize(ctx.geometry.S);
    const double C = double(clusters.count());
    const double N = double(clusters.total);
    for (int l = 0; l < ctx.geometry.S; ++l)
        if (r.profile.K[l] > 0.0)
            m.mean_cluster_size[l] = (N * r.profile.P[l]) / (C * r.profile.K[l]);
    return m;
}

namespace detail {

// Representative of a mirror pair: smaller b first; among b = 0 pairs the
// member with z^T P >= 0; fully symmetric pairs fall back to the
// lexicographically larger canonical form (larger sizes leading).
inline bool prefer_over_mirror(const RankedAllocation& r,
                               const RankedAllocation& m) {
    if (r.profile.b != m.profile.b) return r.profile.b < m.profile.b;
    const double zp = r.imbalance;  // proportional to z^T P
    const double zpm = m.imbalance;
    // Summation order can perturb a structurally equal z^T P by an ulp or
    // two; only a real difference should decide.
    if (std::abs(zp - zpm) > 1e-9) return zp > zpm;
    return r.canonical >= m.canonical;
}

inline void sort_ranked(std::vector<RankedAllocation>& out) {
    std::sort(out.begin(), out.end(),
              [](const RankedAllocation& x, const RankedAllocation& y) {
                  if (x.v_approx != y.v_approx) return x.v_approx > y.v_approx;
                  return x.canonical < y.canonical;
              });
}

inline void finalize(const SearchContext& ctx, const SearchScheme& scheme,
                     std::vector<RankedAllocation>& out) {
    if (scheme.mirror_dedup) {
        std::map<CanonicalForm, RankedAllocation> kept;
        for (auto& r : out) {
            const Allocation mirrored = mirror(r.allocation, ctx.geometry.S);
            const CanonicalForm mc = mirrored.canonical(ctx.clusters, ctx.geometry.S);
            const CanonicalForm key = std::min(r.canonical, mc);
            auto it = kept.find(key);
            if (it == kept.end()) {
                kept.emplace(key, std::move(r));
            } else if (prefer_over_mirror(r, it->second)) {
                it->second = std::move(r);
            }
        }
        out.clear();
        for (auto& [key, r] : kept) out.push_back(std::move(r));
    }
    sort_ranked(out);
    for (std::size_t i = 0; i < out.size() && i < scheme.exact_top_k; ++i)
        out[i].v_exact =
            exact_precision_scalar(ctx.config, ctx.clusters, out[i].allocation)
                .v_exact;
}

// Weak compositions of m into S parts, lexicographic.
inline void compositions(int m, int S, std::vector<int>& part,
                         const std::function<void()>& emit) {
    if (S == 1) {
        part.push_back(m);
        emit();
        part.pop_back();
        return;
    }
    for (int c = 0; c <= m; ++c) {
        part.push_back(c);
        compositions(m - c, S - 1, part, emit);
        part.pop_back();
    }
}

}  // namespace detail

struct SearchResult {
    std::vector<RankedAllocation> ranked;
    std::uint64_t seed = 0;
    std::size_t canonical_count = 0;  // distinct canonical allocations seen
    std::size_t estimable_count = 0;
    std::size_t drawn = 0;  // random draws made (random modes)
};

// Complete duplicate-free enumeration of canonical allocations, filtered
// for estimability and ranked.  Identical sizes are interchangeable, so
// the enumeration runs over per-size weak compositions.
inline SearchResult enumerate_allocations(const ClusterSet& clusters,
                                          const TrialConfig& config,
                                          const SearchScheme& scheme = {}) {
    SearchContext ctx(config, clusters);
    const int S = ctx.geometry.S;

    std::map<int, std::vector<std::size_t>> by_size;
    for (std::size_t i = 0; i < clusters.count(); ++i)
        by_size[clusters.sizes[i]].push_back(i);

    // Distinct canonical count is a product of binomials; check the cap first.
    double est = 1.0;
    for (const auto& [size, idx] : by_size) {
        double ways = 1.0;
        const double m = double(idx.size());
        for (int j = 1; j < S; ++j) ways *= (m + j) / double(j);
        est *= ways;
    }
    if (est > double(scheme.enumeration_cap))
        throw too_large_error(
            "canonical allocation count exceeds the enumeration cap; "
            "use a random search mode");

    std::vector<const std::vector<std::size_t>*> groups;
    std::vector<std::vector<int>> chosen;  // composition per group
    for (const auto& [size, idx] : by_size) groups.push_back(&idx);

    SearchResult result;
    Allocation alloc;
    alloc.assignment.assign(clusters.count(), 1);

    std::function<void(std::size_t)> walk = [&](std::size_t gi) {
        if (gi == groups.size()) {
            ++result.canonical_count;
            if (alloc.used_sequences() < 2) return;  // confounded with period
            RankedAllocation r = rank_allocation(ctx, alloc);
            ++result.estimable_count;
            result.ranked.push_back(std::move(r));
            return;
        }
        const std::vector<std::size_t>& idx = *groups[gi];
        std::vector<int> part;
        detail::compositions(int(idx.size()), S, part, [&]() {
            std::size_t at = 0;
            for (int l = 0; l < S; ++l)
                for (int c = 0; c < part[std::size_t(l)]; ++c)
                    alloc.assignment[idx[at++]] = l + 1;
            walk(gi + 1);
        });
    };
    walk(0);
    detail::finalize(ctx, scheme, result.ranked);
    return result;
}

// Seeded random sampling; deterministic for a given (seed, reps) with each
// rep deriving its generator state from (seed, rep index).
inline SearchResult sample_allocations(const ClusterSet& clusters,
                                       const TrialConfig& config,
                                       const SearchScheme& scheme) {
    if (scheme.reps < 1)
        throw invalid_design_error("random search requires reps >= 1");
    SearchContext ctx(config, clusters);
    const int S = ctx.geometry.S;
    const std::size_t C = clusters.count();

    // Extra-cluster slot preference for cluster-balanced sampling.
    std::vector<int> outer_order, inner_order;
    {
        int lo = 1, hi = S;
        while (lo <= hi) {
            outer_order.push_back(lo);
            if (hi != lo) outer_order.push_back(hi);
            ++lo;
            --hi;
        }
        inner_order.assign(outer_order.rbegin(), outer_order.rend());
    }

    SearchResult result;
    result.seed = scheme.seed;
    std::map<CanonicalForm, RankedAllocation> seen;

    for (std::uint64_t rep = 0; rep < scheme.reps; ++rep) {
        std::mt19937_64 rng = detail::rep_rng(scheme.seed, rep);
        Allocation alloc;
        alloc.assignment.resize(C);
        if (scheme.mode == SearchMode::random_unrestricted) {
            std::uniform_int_distribution<int> pick(1, S);
            for (std::size_t i = 0; i < C; ++i) alloc.assignment[i] = pick(rng);
        } else {
            std::vector<std::size_t> order(C);
            std::iota(order.begin(), order.end(), std::size_t(0));
            std::shuffle(order.begin(), order.end(), rng);
            const std::size_t base = C / std::size_t(S);
            const std::size_t extras = C % std::size_t(S);
            std::size_t at = 0;
            for (int l = 1; l <= S; ++l)
                for (std::size_t c = 0; c < base; ++c)
                    alloc.assignment[order[at++]] = l;
            std::vector<int> slots;
            switch (scheme.extra_cluster_rule) {
                case ExtraClusterRule::outer_symmetric:
                    slots.assign(outer_order.begin(), outer_order.end());
                    break;
                case ExtraClusterRule::inner_symmetric:
                    slots.assign(inner_order.begin(), inner_order.end());
                    break;
                case ExtraClusterRule::free: {
                    slots.resize(std::size_t(S));
                    std::iota(slots.begin(), slots.end(), 1);
                    std::shuffle(slots.begin(), slots.end(), rng);
                    break;
                }
            }
            for (std::size_t x = 0; x < extras; ++x)
                alloc.assignment[order[at++]] = slots[x];
        }
        ++result.drawn;
        const CanonicalForm key = alloc.canonical(clusters, S);
        if (seen.count(key)) continue;
        if (alloc.used_sequences() < 2) {
            seen.emplace(key, RankedAllocation{});  // remember, but do not rank
            continue;
        }
        seen.emplace(key, rank_allocation(ctx, alloc));
    }
    result.canonical_count = seen.size();
    for (auto& [key, r] : seen) {
        if (r.allocation.assignment.empty()) continue;
        ++result.estimable_count;
        result.ranked.push_back(std::move(r));
    }
    detail::finalize(ctx, scheme, result.ranked);
    return result;
}

struct Recommendation {
    RankedAllocation choice;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    std::size_t qualifiers = 0;
    std::size_t sampled = 0;
    double best_efficiency = 0.0;
};

// Sample, compare each allocation's V against the Eq.-(9) bound for its
// cluster disposition, keep those at or above the efficiency threshold and
// choose one uniformly at random.
inline Recommendation recommend(const ClusterSet& clusters,
                                const TrialConfig& config,
                                const SearchScheme& scheme, double threshold) {
    SearchResult sr = scheme.mode == SearchMode::exhaustive
                          ? enumerate_allocations(clusters, config, scheme)
                          : sample_allocations(clusters, config, scheme);
    Recommendation rec;
    rec.seed = scheme.seed;
    rec.threshold = threshold;
    rec.sampled = sr.ranked.size();
    std::vector<const RankedAllocation*> qualifiers;
    for (const auto& r : sr.ranked) {
        rec.best_efficiency = std::max(rec.best_efficiency, r.efficiency);
        if (r.efficiency >= threshold) qualifiers.push_back(&r);
    }
    rec.qualifiers = qualifiers.size();
    if (qualifiers.empty())
        throw no_qualifier_error("no allocation met the efficiency threshold",
                                 rec.best_efficiency);
    std::mt19937_64 rng = detail::rep_rng(scheme.seed, 0xc0ffee);
    std::uniform_int_distribution<std::size_t> pick(0, qualifiers.size() - 1);
    rec.choice = *qualifiers[pick(rng)];
    return rec;
}

}  // namespace swd
