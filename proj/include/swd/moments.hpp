#pragma once
// Delta-method approximations of W and W*beta from the mean and
// coefficient of variation of the cluster sizes.

#include <optional>

#include "swd/common.hpp"

namespace swd {

struct SizeMoments {
    double mean = 0.0;  // M
    double cv = 0.0;    // coefficient of variation
    std::optional<int> count;

    SizeMoments(double mean_, double cv_, std::optional<int> count_ = std::nullopt)
        : mean(mean_), cv(cv_), count(count_) {
        if (mean <= 0.0) throw invalid_design_error("mean cluster size must be positive");
        if (cv < 0.0) throw invalid_design_error("cv must be nonnegative");
    }
};

enum class MomentOrder { first, second };

// E(W) ~ M/(lambda + MT) + lambda^2 M CV^2 / (lambda + MT)^3.
inline double approx_W(const SizeMoments& moments, double lambda, int periods,
                       MomentOrder order) {
    if (lambda < 0.0) throw invalid_design_error("lambda must be nonnegative");
    if (periods < 2) throw invalid_design_error("periods must be at least 2");
    const double d = lambda + moments.mean * periods;
    double w = moments.mean / d;
    if (order == MomentOrder::second)
        w += lambda * lambda * moments.mean * moments.cv * moments.cv / (d * d * d);
    return w;
}

// E(W beta) ~ (1/T)(1 - lambda^2 / (lambda + MT)^2); always in [0, 1/T].
inline double approx_Wbeta(const SizeMoments& moments, double lambda, int periods) {
    if (lambda < 0.0) throw invalid_design_error("lambda must be nonnegative");
    if (periods < 2) throw invalid_design_error("periods must be at least 2");
    const double d = lambda + moments.mean * periods;
    return (1.0 - (lambda / d) * (lambda / d)) / periods;
}

}  // namespace swd
