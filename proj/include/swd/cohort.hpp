#pragma once
// Closed-cohort weights.  The cross-sectional machinery applies verbatim
// once q_i is replaced by q~_i = p_i (N_i + mu) / (lambda + (N_i + mu) T);
// every computation here injects the weights through TrialConfig, so the
// cross-sectional case is the mu = 0 special case of the same code path.

#include <vector>

#include "swd/approx.hpp"
#include "swd/common.hpp"
#include "swd/exact.hpp"
#include "swd/geometry.hpp"

namespace swd {

struct CohortWeights {
    double mu = 0.0;
    Vector q;          // q~_i per cluster
    double W = 0.0;    // W~
    double beta = 0.0; // beta~, slope of q~_i on W~ p_i
};

inline CohortWeights cohort_weights(const TrialConfig& config,
                                    const ClusterSet& clusters) {
    if (config.kind != DesignKind::closed_cohort)
        throw invalid_design_error("cohort_weights requires a closed-cohort config");
    CohortWeights cw;
    cw.mu = config.mu;
    cw.q = cluster_q(config, clusters);
    const RegressionFit fit = fit_regression(config, clusters);
    cw.W = fit.W;
    cw.beta = fit.beta;
    return cw;
}

inline PrecisionReport cohort_exact_precision(const TrialConfig& config,
                                              const ClusterSet& clusters,
                                              const Allocation& alloc) {
    if (config.kind != DesignKind::closed_cohort)
        throw invalid_design_error("cohort_exact_precision requires a closed-cohort config");
    return exact_precision_scalar(config, clusters, alloc);
}

}  // namespace swd
