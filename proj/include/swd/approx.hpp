#pragma once
// Regression elimination of Q and the central approximation V(P, K),
// with its constants h1, h2, h3, gamma and matrix A.

#include <cmath>
#include <vector>

#include "swd/common.hpp"
#include "swd/exact.hpp"
#include "swd/geometry.hpp"

namespace swd {

// Least-squares fit of q_i on W p_i: q_i = alpha + beta W p_i + r_i.
struct RegressionFit {
    double W = 0.0;
    double beta = 1.0;
    double alpha = 0.0;
    double corr = 1.0;  // correlation of q_i with p_i
    Vector residuals;

    double wbeta() const { return W * beta; }

    // Fit assembled from externally supplied summaries (e.g. the
    // delta-method approximations); residuals unknown.
    static RegressionFit from_values(double W, double beta) {
        RegressionFit f;
        f.W = W;
        f.beta = beta;
        return f;
    }
};

inline RegressionFit fit_regression(const TrialConfig& config,
                                    const ClusterSet& clusters) {
    const Vector q = cluster_q(config, clusters);
    const Vector& p = clusters.proportions;
    const std::size_t C = clusters.count();
    RegressionFit fit;
    KahanSum w;
    for (double v : q) w.add(v);
    fit.W = w.value();

    double pbar = 0.0, qbar = 0.0;
    for (std::size_t i = 0; i < C; ++i) {
        pbar += p[i];
        qbar += q[i];
    }
    pbar /= double(C);
    qbar /= double(C);
    double spp = 0.0, spq = 0.0, sqq = 0.0;
    for (std::size_t i = 0; i < C; ++i) {
        spp += (p[i] - pbar) * (p[i] - pbar);
        spq += (p[i] - pbar) * (q[i] - qbar);
        sqq += (q[i] - qbar) * (q[i] - qbar);
    }
    if (spp / double(C) < 1e-14) {
        // Equal sizes: Q = WP exactly; resolve the degenerate regression.
        fit.beta = 1.0;
        fit.alpha = 0.0;
        fit.corr = 1.0;
        fit.residuals.assign(C, 0.0);
        return fit;
    }
    fit.beta = spq / (fit.W * spp);
    fit.alpha = fit.W * (1.0 - fit.beta) / double(C);
    fit.corr = sqq > 0.0 ? spq / std::sqrt(spp * sqq) : 1.0;
    fit.residuals.resize(C);
    for (std::size_t i = 0; i < C; ++i)
        fit.residuals[i] = q[i] - fit.alpha - fit.beta * fit.W * p[i];
    return fit;
}

// Constants of Eq.-style approximation: A = Xi - beta W Lambda + gamma W Delta.
struct ApproxConstants {
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, gamma = 0.0;
    Matrix A;
};

inline ApproxConstants make_constants(const RegressionFit& fit,
                                      const SequenceGeometry& geometry,
                                      int periods) {
    const double W = fit.W;
    const double beta = fit.beta;
    const double T = periods;
    const double denom = 1.0 - W * T;
    if (denom <= kExactTol)
        throw degenerate_variance_error("WT >= 1: constants are degenerate");
    ApproxConstants c;
    c.h1 = 2.0 * W * (1.0 - beta) * (1.0 - beta * W * T) / denom;
    c.h2 = (1.0 - beta) * (1.0 - beta) * W * W * T / denom;
    c.gamma = (2.0 * beta - 1.0 - beta * beta * W * T) / denom;
    const int S = geometry.S;
    c.h3 = c.h2 - c.h1 * c.h1 * (S - 1) /
                      (4.0 * (1.0 - c.gamma * W * (S - 1)));
    c.A.assign(S, Vector(S));
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j)
            c.A[i][j] = geometry.Xi[i][j] - beta * W * geometry.Lambda[i][j] +
                        c.gamma * W * geometry.Delta[i][j];
    return c;
}

// The exact precision as a function of the profile alone:
// V = P^T Xi P - Q^T LambdaTilde P
//     - (T Q^T Delta Q + W P^T Delta P - 2 Q^T Delta P) / (1 - WT).
inline double precision_PQ(const AllocationProfile& profile,
                           const SequenceGeometry& geometry) {
    const int T = geometry.S + 1;
    const double denom = 1.0 - profile.W * T;
    if (denom <= kExactTol)
        throw degenerate_variance_error("WT >= 1: variance is degenerate");
    const double zP = detail::dot(geometry.z, profile.P);
    const double zQ = detail::dot(geometry.z, profile.Q);
    const double yQ = detail::dot(geometry.y, profile.Q);
    double quad = 0.0;
    for (int i = 0; i < geometry.S; ++i)
        for (int j = 0; j < geometry.S; ++j)
            quad += profile.P[i] * geometry.Xi[i][j] * profile.P[j];
    // LambdaTilde = y 1^T and Delta = z z^T collapse to rank-one contractions.
    return quad - yQ -
           (T * zQ * zQ + profile.W * zP * zP - 2.0 * zQ * zP) / denom;
}

struct ApproxTerms {
    double quadratic = 0.0;  // P^T A P
    double linear = 0.0;     // h1 b z^T P
    double b_term = 0.0;     // -h2 b^2
    double a_term = 0.0;     // -W (1-beta) a
    double value() const { return quadratic + linear + b_term + a_term; }
};

// V(P, K) = P^T A P + h1 b z^T P - h2 b^2 - W (1-beta) a.  Evaluated with
// mirror-orbit summation so V(P, K) = V(RP, RK) bit-for-bit.
inline ApproxTerms precision_approx_terms(const Vector& P, const Vector& K,
                                          const RegressionFit& fit,
                                          const ApproxConstants& constants,
                                          const SequenceGeometry& geometry) {
    const double b = detail::sym_dot(geometry.z, K);
    const double a = detail::sym_dot(geometry.y, K);
    const double zP = detail::sym_dot(geometry.z, P);
    ApproxTerms t;
    t.quadratic = detail::sym_quad(constants.A, P);
    t.linear = constants.h1 * b * zP;
    t.b_term = -constants.h2 * (b * b);
    t.a_term = -fit.W * (1.0 - fit.beta) * a;
    return t;
}

inline double precision_approx(const Vector& P, const Vector& K,
                               const RegressionFit& fit,
                               const ApproxConstants& constants,
                               const SequenceGeometry& geometry) {
    return precision_approx_terms(P, K, fit, constants, geometry).value();
}

// Relative discrepancy |V - V_exact| / V_exact for an estimable allocation.
inline double approximation_error(const TrialConfig& config,
                                  const ClusterSet& clusters,
                                  const Allocation& alloc) {
    const PrecisionReport exact = exact_precision_scalar(config, clusters, alloc);
    if (!exact.estimable)
        throw non_estimable_error("allocation is not estimable");
    const SequenceGeometry g = build_geometry(config.sequences());
    const AllocationProfile pr = derive_profile(config, clusters, alloc, g);
    const RegressionFit fit = fit_regression(config, clusters);
    const ApproxConstants c = make_constants(fit, g, config.periods);
    const double approx = precision_approx(pr.P, pr.K, fit, c, g);
    return std::abs(approx - exact.v_exact) / exact.v_exact;
}

}  // namespace swd
