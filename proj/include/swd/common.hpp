#pragma once
// Shared error types and numeric helpers.

#include <stdexcept>
#include <string>
#include <vector>

namespace swd {

// Exact algebraic identities are asserted at this absolute tolerance.
inline constexpr double kExactTol = 1e-12;
// Information scalar at or below kEstimabilityTol * N is treated as zero.
inline constexpr double kEstimabilityTol = 1e-9;

struct invalid_design_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct degenerate_variance_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct non_estimable_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct too_large_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_qualifier_error : std::runtime_error {
    double best_efficiency;
    no_qualifier_error(const std::string& msg, double best)
        : std::runtime_error(msg), best_efficiency(best) {}
};

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

// Kahan compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double t = x - carry;
        double s = sum + t;
        carry = (s - sum) - t;
        sum = s;
    }
    double value() const { return sum; }
};

namespace detail {

// Dot product w.v accumulated over mirror orbits {i, S-1-i} in ascending
// order.  For centrosymmetric w the result is bit-identical under reversal
// of v; for antisymmetric w it negates exactly.
inline double sym_dot(const Vector& w, const Vector& v) {
    const std::size_t n = w.size();
    KahanSum acc;
    for (std::size_t i = 0, j = n - 1; i < j; ++i, --j)
        acc.add(w[i] * v[i] + w[j] * v[j]);
    if (n % 2 == 1) acc.add(w[n / 2] * v[n / 2]);
    return acc.value();
}

// Quadratic form v^T A v for centrosymmetric A, accumulated over mirror
// orbits of index pairs so the value is bit-identical under reversal of v.
inline double sym_quad(const Matrix& A, const Vector& v) {
    const std::size_t n = v.size();
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t im = n - 1 - i;
            const std::size_t jm = n - 1 - j;
            if (im < i || (im == i && jm < j)) continue;  // partner already seen
            const double t = A[i][j] * v[i] * v[j];
            if (im == i && jm == j)
                acc.add(t);
            else
                acc.add(t + A[im][jm] * v[im] * v[jm]);
        }
    }
    return acc.value();
}

inline double dot(const Vector& a, const Vector& b) {
    KahanSum acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

}  // namespace detail

}  // namespace swd
