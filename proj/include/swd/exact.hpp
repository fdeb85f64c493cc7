#pragma once
// Exact GLS precision of the treatment effect, by two independent routes:
// the E,F,G,H scalar reduction and a full information-matrix computation.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "swd/common.hpp"
#include "swd/geometry.hpp"

namespace swd {

struct PrecisionReport {
    // N^{-1} sigma_e^2 var(theta)^{-1}; the scale-free precision.
    double v_exact = 0.0;
    // var(theta) in units of sigma_e^2; infinite when not estimable.
    double var_theta = 0.0;
    bool estimable = false;
};

namespace detail {

inline PrecisionReport make_report(double info, double n) {
    PrecisionReport rep;
    rep.v_exact = info / n;
    rep.estimable = info > kEstimabilityTol * n;
    rep.var_theta = rep.estimable ? 1.0 / info
                                  : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace detail

// Scalar route.  sigma_e^2 var(theta)^{-1} = E - H - G/N
//   - (T F^2 + W E^2 - 2 E F) / (N (1 - WT)),
// rearranged so the removable singularity at lambda = 0 (where WT -> 1)
// causes no cancellation:
//   E - H - G/N + E^2/(NT) - lambda U^2 / (T D),
// with U = sum N_i r_i / d_i, D = sum N_i / d_i, d_i = lambda + (N_i+mu) T.
inline PrecisionReport exact_precision_scalar(const TrialConfig& config,
                                              const ClusterSet& clusters,
                                              const Allocation& alloc) {
    const int S = config.sequences();
    const int T = config.periods;
    validate_allocation(alloc, clusters, S);
    const double n = double(clusters.total);
    KahanSum E, H, U, D, Wsum;
    for (std::size_t i = 0; i < clusters.count(); ++i) {
        const double Ni = clusters.sizes[i];
        const double r = alloc.assignment[i];  // r_l = l for the classic SWD
        const double d = config.lambda + (Ni + config.size_offset()) * T;
        const double w = (Ni + config.size_offset()) / d;
        E.add(Ni * r);
        H.add(Ni * w * r * r);
        U.add(Ni * r / d);
        D.add(Ni / d);
        Wsum.add(Ni * w / n);
    }
    if (Wsum.value() * T >= 1.0 + kExactTol)
        throw degenerate_variance_error("WT >= 1: variance is degenerate");
    KahanSum G;  // sum_ij N_i N_j min(r_i, r_j)
    for (std::size_t i = 0; i < clusters.count(); ++i)
        for (std::size_t j = 0; j < clusters.count(); ++j)
            G.add(double(clusters.sizes[i]) * double(clusters.sizes[j]) *
                  std::min(alloc.assignment[i], alloc.assignment[j]));
    const double info = E.value() - H.value() - G.value() / n +
                        E.value() * E.value() / (n * T) -
                        config.lambda * U.value() * U.value() / (T * D.value());
    return detail::make_report(info, n);
}

// Matrix route.  Builds the (T+1)x(T+1) information matrix from the
// closed-form V_i^{-1} = (N_i/sigma_e^2)(I_T - w_i J_T) and takes the
// Schur complement for theta; the period-effect block is inverted by
// eigendecomposition so the rank-deficient lambda = 0 case is handled.
inline PrecisionReport exact_precision_matrix(const TrialConfig& config,
                                              const ClusterSet& clusters,
                                              const Allocation& alloc) {
    const int S = config.sequences();
    const int T = config.periods;
    validate_allocation(alloc, clusters, S);
    const double n = double(clusters.total);

    Eigen::MatrixXd Ibb = Eigen::MatrixXd::Zero(T, T);
    Eigen::VectorXd Ibt = Eigen::VectorXd::Zero(T);
    double Itt = 0.0;
    for (std::size_t i = 0; i < clusters.count(); ++i) {
        const double Ni = clusters.sizes[i];
        const double w = cluster_weight(config, Ni);
        const int r = alloc.assignment[i];
        Eigen::VectorXd Di = Eigen::VectorXd::Zero(T);
        for (int j = T - r; j < T; ++j) Di(j) = 1.0;  // treated in the last r periods
        Ibb += Ni * (Eigen::MatrixXd::Identity(T, T) -
                     w * Eigen::MatrixXd::Ones(T, T));
        Ibt += Ni * (Di - w * double(r) * Eigen::VectorXd::Ones(T));
        Itt += Ni * (double(r) - w * double(r) * double(r));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ibb);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(T);
    for (int j = 0; j < T; ++j)
        if (ev(j) > cutoff) inv_ev(j) = 1.0 / ev(j);
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * Ibt;
    const double schur = Itt - proj.dot(inv_ev.asDiagonal() * proj);
    return detail::make_report(schur, n);
}

inline bool estimability(const TrialConfig& config, const ClusterSet& clusters,
                         const Allocation& alloc) {
    return exact_precision_matrix(config, clusters, alloc).estimable;
}

}  // namespace swd
