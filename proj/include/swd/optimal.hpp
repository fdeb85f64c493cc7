#pragma once
// Closed-form optimal individual allocations and attainable optima
// for a fixed cluster disposition.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "swd/approx.hpp"
#include "swd/common.hpp"
#include "swd/geometry.hpp"

namespace swd {

struct OptimalDesign {
    Vector p_opt;
    double v_opt = 0.0;
    double a = 0.0;
    double b = 0.0;
    bool feasible = true;
};

// Eq.-(9)-style optimum for fixed (a, b):
// (1/12)(S-1)(3 - 3(S-1)Wb + S(S-2)W^2 b^2) - h3 b^2 - W(1-beta) a.
inline double optimal_value_formula(const RegressionFit& fit, int S,
                                    double a, double b) {
    const double wb = fit.wbeta();
    const SequenceGeometry g = build_geometry(S);
    const ApproxConstants c = make_constants(fit, g, S + 1);
    const double lead = (S - 1) *
                        (3.0 - 3.0 * (S - 1) * wb + double(S) * (S - 2) * wb * wb) /
                        12.0;
    return lead - c.h3 * b * b - fit.W * (1.0 - fit.beta) * a;
}

namespace detail {

// Euclidean projection onto the probability simplex.
inline Vector project_simplex(Vector v) {
    Vector u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - 1.0) / double(j + 1);
        if (u[j] - t > 0.0) {
            rho = int(j + 1);
            theta = t;
        } else {
            css -= u[j];
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

// Projected-gradient ascent of P^T A P + h1 b z^T P over the simplex;
// fallback for the rare infeasible closed-form case.
inline Vector maximize_on_simplex(const ApproxConstants& c,
                                  const SequenceGeometry& g, double b,
                                  Vector start) {
    const int S = g.S;
    Vector P = project_simplex(std::move(start));
    double lipschitz = 0.0;
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) lipschitz += std::abs(c.A[i][j]);
    const double step = 0.5 / std::max(lipschitz, 1e-8);
    for (int iter = 0; iter < 200000; ++iter) {
        Vector grad(S, 0.0);
        for (int i = 0; i < S; ++i) {
            for (int j = 0; j < S; ++j) grad[i] += 2.0 * c.A[i][j] * P[j];
            grad[i] += c.h1 * b * g.z[i];
        }
        Vector next(S);
        for (int i = 0; i < S; ++i) next[i] = P[i] + step * grad[i];
        next = project_simplex(std::move(next));
        double delta = 0.0;
        for (int i = 0; i < S; ++i) delta = std::max(delta, std::abs(next[i] - P[i]));
        P = std::move(next);
        if (delta < 1e-14) break;
    }
    return P;
}

}  // namespace detail

// P_opt = W beta 1 + (1/2)(1 - W beta S) e - h1 b / (2 [1 - gamma W (S-1)]) f.
inline OptimalDesign optimal_P(const RegressionFit& fit,
                               const SequenceGeometry& geometry,
                               const Vector& K) {
    const int S = geometry.S;
    ApproxConstants c = make_constants(fit, geometry, S + 1);
    OptimalDesign d;
    d.b = detail::sym_dot(geometry.z, K);
    d.a = detail::sym_dot(geometry.y, K);
    const double wb = fit.wbeta();
    const double shift = c.h1 * d.b / (2.0 * (1.0 - c.gamma * fit.W * (S - 1)));
    d.p_opt.resize(S);
    for (int i = 0; i < S; ++i)
        d.p_opt[i] = wb + 0.5 * (1.0 - wb * S) * geometry.e[i] - shift * geometry.f[i];
    d.feasible = std::all_of(d.p_opt.begin(), d.p_opt.end(),
                             [](double x) { return x >= 0.0; });
    if (d.feasible) {
        d.v_opt = optimal_value_formula(fit, S, d.a, d.b);
    } else {
        const Vector P = detail::maximize_on_simplex(c, geometry, d.b, d.p_opt);
        d.p_opt = P;
        d.v_opt = precision_approx(P, K, fit, c, geometry);
    }
    return d;
}

// P = K regime: the maximizer of V(P, P) is W 1 + (1/2)(1 - WS) e.
inline Vector optimal_P_equal_case(const RegressionFit& fit,
                                   const SequenceGeometry& geometry) {
    const int S = geometry.S;
    Vector p(S);
    for (int i = 0; i < S; ++i)
        p[i] = fit.W + 0.5 * (1.0 - fit.W * S) * geometry.e[i];
    return p;
}

}  // namespace swd
