#pragma once
// Trial configuration, cluster data, allocations and the fixed
// S-dimensional vectors/matrices the variance formulas are built from.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swd/common.hpp"

namespace swd {

enum class DesignKind { cross_sectional, closed_cohort };

// T periods, S = T-1 sequences, variance ratio lambda = (1-rho)/rho.
// For the closed-cohort design mu = omega^2/tau^2.
struct TrialConfig {
    int periods = 0;
    double lambda = 0.0;
    DesignKind kind = DesignKind::cross_sectional;
    double mu = 0.0;
    double sigma_e2 = 1.0;

    int sequences() const { return periods - 1; }
    double icc() const { return 1.0 / (1.0 + lambda); }
    // Effective per-cluster offset added to N_i in the GLS weights.
    double size_offset() const { return kind == DesignKind::closed_cohort ? mu : 0.0; }

    static TrialConfig from_lambda(int periods, double lambda, double sigma_e2 = 1.0) {
        if (periods < 2) throw invalid_design_error("periods must be at least 2");
        if (lambda < 0.0) throw invalid_design_error("lambda must be nonnegative");
        if (sigma_e2 <= 0.0) throw invalid_design_error("sigma_e2 must be positive");
        return TrialConfig{periods, lambda, DesignKind::cross_sectional, 0.0, sigma_e2};
    }

    static TrialConfig from_icc(int periods, double icc, double sigma_e2 = 1.0) {
        if (icc <= 0.0 || icc > 1.0)
            throw invalid_design_error("icc must lie in (0, 1]");
        return from_lambda(periods, (1.0 - icc) / icc, sigma_e2);
    }

    TrialConfig with_cohort(double mu_) const {
        if (mu_ < 0.0) throw invalid_design_error("mu must be nonnegative");
        TrialConfig c = *this;
        c.kind = DesignKind::closed_cohort;
        c.mu = mu_;
        return c;
    }
};

// Cluster sizes N_1..N_C with derived totals, proportions and moments.
struct ClusterSet {
    std::vector<int> sizes;
    long long total = 0;
    Vector proportions;

    explicit ClusterSet(std::vector<int> sizes_) : sizes(std::move(sizes_)) {
        if (sizes.empty()) throw invalid_design_error("cluster set must be nonempty");
        for (int n : sizes)
            if (n < 1) throw invalid_design_error("cluster sizes must be positive");
        total = std::accumulate(sizes.begin(), sizes.end(), 0LL);
        proportions.reserve(sizes.size());
        for (int n : sizes) proportions.push_back(double(n) / double(total));
    }

    std::size_t count() const { return sizes.size(); }
    double mean() const { return double(total) / double(count()); }

    // Coefficient of variation with the n-1 divisor.
    double cv() const {
        if (count() < 2) return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (int n : sizes) ss += (n - m) * (n - m);
        return std::sqrt(ss / double(count() - 1)) / m;
    }
};

// Per-sequence sorted size multisets; the identity under which two
// allocations related by a size-preserving cluster permutation are equal.
using CanonicalForm = std::vector<std::vector<int>>;

// Cluster -> sequence assignment, entries in 1..S.
struct Allocation {
    std::vector<int> assignment;

    CanonicalForm canonical(const ClusterSet& clusters, int S) const {
        CanonicalForm form;
        form.resize(std::size_t(S));
        for (std::size_t i = 0; i < assignment.size(); ++i)
            form[std::size_t(assignment[i] - 1)].push_back(clusters.sizes[i]);
        for (auto& seq : form) std::sort(seq.begin(), seq.end(), std::greater<int>());
        return form;
    }

    int used_sequences() const {
        std::vector<int> seen;
        for (int a : assignment)
            if (std::find(seen.begin(), seen.end(), a) == seen.end()) seen.push_back(a);
        return int(seen.size());
    }
};

inline void validate_allocation(const Allocation& alloc, const ClusterSet& clusters, int S) {
    if (alloc.assignment.size() != clusters.count())
        throw invalid_design_error("allocation length does not match cluster count");
    for (int a : alloc.assignment)
        if (a < 1 || a > S) throw invalid_design_error("sequence index out of range");
}

inline std::string canonical_string(const CanonicalForm& form) {
    std::ostringstream os;
    for (std::size_t s = 0; s < form.size(); ++s) {
        if (s) os << ';';
        for (std::size_t k = 0; k < form[s].size(); ++k) {
            if (k) os << ',';
            os << form[s][k];
        }
    }
    return os.str();
}

// Cluster on sequence l moves to S+1-l.
inline Allocation mirror(const Allocation& alloc, int S) {
    Allocation m = alloc;
    for (int& a : m.assignment) a = S + 1 - a;
    return m;
}

// Fixed vectors z, y, e, f and matrices Xi, LambdaTilde, Lambda, Delta.
struct SequenceGeometry {
    int S = 0;
    Vector z, y, e, f;
    Matrix Xi, LambdaTilde, Lambda, Delta;
};

inline SequenceGeometry build_geometry(int S) {
    if (S < 2) throw invalid_design_error("geometry requires at least 2 sequences");
    SequenceGeometry g;
    g.S = S;
    g.z.resize(S);
    g.y.resize(S);
    g.e.assign(S, 0.0);
    g.f.assign(S, 0.0);
    for (int l = 0; l < S; ++l) {
        g.z[l] = (l + 1) - 0.5 * (S + 1);
        g.y[l] = g.z[l] * g.z[l];
    }
    g.e[0] = g.e[S - 1] = 1.0;
    g.f[0] = 1.0;
    g.f[S - 1] = -1.0;
    g.Xi.assign(S, Vector(S));
    g.LambdaTilde.assign(S, Vector(S));
    g.Lambda.assign(S, Vector(S));
    g.Delta.assign(S, Vector(S));
    for (int i = 0; i < S; ++i) {
        for (int j = 0; j < S; ++j) {
            g.Xi[i][j] = 0.5 * std::abs(i - j);
            g.LambdaTilde[i][j] = g.y[i];
            g.Lambda[i][j] = 0.5 * (g.y[i] + g.y[j]);
            g.Delta[i][j] = g.z[i] * g.z[j];
        }
    }
    return g;
}

// Per-sequence proportions of individuals (P), clusters (K) and
// q-weights (Q), with W = sum Q, b = K^T z and a = K^T y.
struct AllocationProfile {
    Vector P, K, Q;
    double W = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// GLS weight of cluster i: w_i = (N_i + mu) / (lambda + (N_i + mu) T).
inline double cluster_weight(const TrialConfig& config, double size) {
    const double m = size + config.size_offset();
    return m / (config.lambda + m * config.periods);
}

// q_i = p_i w_i; cross-sectional reduces to p_i^2 / (lambda' + p_i T).
inline Vector cluster_q(const TrialConfig& config, const ClusterSet& clusters) {
    Vector q(clusters.count());
    for (std::size_t i = 0; i < clusters.count(); ++i)
        q[i] = clusters.proportions[i] * cluster_weight(config, clusters.sizes[i]);
    return q;
}

inline AllocationProfile derive_profile(const TrialConfig& config,
                                        const ClusterSet& clusters,
                                        const Allocation& alloc,
                                        const SequenceGeometry& geometry) {
    const int S = config.sequences();
    validate_allocation(alloc, clusters, S);
    AllocationProfile pr;
    pr.P.assign(S, 0.0);
    pr.K.assign(S, 0.0);
    pr.Q.assign(S, 0.0);
    const Vector q = cluster_q(config, clusters);
    for (std::size_t i = 0; i < clusters.count(); ++i) {
        const std::size_t l = std::size_t(alloc.assignment[i] - 1);
        pr.P[l] += clusters.proportions[i];
        pr.K[l] += 1.0 / double(clusters.count());
        pr.Q[l] += q[i];
    }
    KahanSum w;
    for (double v : pr.Q) w.add(v);
    pr.W = w.value();
    pr.b = detail::sym_dot(geometry.z, pr.K);
    pr.a = detail::sym_dot(geometry.y, pr.K);
    return pr;
}

inline AllocationProfile derive_profile(const TrialConfig& config,
                                        const ClusterSet& clusters,
                                        const Allocation& alloc) {
    return derive_profile(config, clusters, alloc, build_geometry(config.sequences()));
}

}  // namespace swd
