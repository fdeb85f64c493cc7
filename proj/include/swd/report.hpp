#pragma once
// Rendering of ranked allocations as fixed-width tables or RFC-4180-style
// CSV, plus two-column scatter exports.

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swd/config.hpp"
#include "swd/search.hpp"

namespace swd {

struct empty_result_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string scaled_vector(const Vector& v, double scale) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        const double x = v[i] * scale;
        const double r = std::round(x);
        if (std::abs(x - r) < 1e-9)
            os << (long long)(r);
        else
            os << std::setprecision(4) << x;
    }
    return os.str();
}

inline std::string fixed(double x, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

}  // namespace detail

// Columns mirror the ranked-report layout: allocation, V, distance,
// N-scaled P, C-scaled K, and the four decomposition terms.
inline std::string emit_report(const std::vector<RankedAllocation>& results,
                               const ClusterSet& clusters, OutputFormat output,
                               std::size_t top_k) {
    if (results.empty()) throw empty_result_error("no allocations to report");
    const std::size_t n = std::min(top_k, results.size());
    const double N = double(clusters.total);
    const double C = double(clusters.count());
    std::ostringstream os;
    if (output == OutputFormat::csv) {
        os << "rank,allocation,v_approx,v_exact,efficiency,distance,imbalance,"
              "scaled_P,scaled_K,term_PAP,term_h1bzP,term_h2b2,term_Wba\n";
        for (std::size_t i = 0; i < n; ++i) {
            const RankedAllocation& r = results[i];
            os << (i + 1) << ','
               << detail::csv_field(canonical_string(r.canonical)) << ','
               << detail::fixed(r.v_approx, 6) << ','
               << (r.v_exact ? detail::fixed(*r.v_exact, 6) : std::string()) << ','
               << detail::fixed(r.efficiency, 6) << ','
               << detail::fixed(r.distance, 6) << ','
               << detail::fixed(r.imbalance, 3) << ','
               << detail::csv_field(detail::scaled_vector(r.profile.P, N)) << ','
               << detail::csv_field(detail::scaled_vector(r.profile.K, C)) << ','
               << detail::fixed(r.terms.quadratic, 6) << ','
               << detail::fixed(r.terms.linear, 6) << ','
               << detail::fixed(r.terms.b_term, 6) << ','
               << detail::fixed(r.terms.a_term, 6) << "\n";
        }
        return os.str();
    }
    os << std::left << std::setw(5) << "rank" << std::setw(24) << "allocation"
       << std::setw(9) << "V" << std::setw(9) << "eff" << std::setw(9) << "dist"
       << std::setw(9) << "imbal" << std::setw(16) << "N*P" << std::setw(12)
       << "C*K" << std::setw(9) << "P'AP" << std::setw(10) << "h1bz'P"
       << std::setw(10) << "-h2b2" << std::setw(10) << "-W(1-b)a"
       << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        const RankedAllocation& r = results[i];
        os << std::left << std::setw(5) << (i + 1) << std::setw(24)
           << canonical_string(r.canonical) << std::setw(9)
           << detail::fixed(r.v_approx, 4) << std::setw(9)
           << detail::fixed(r.efficiency, 4) << std::setw(9)
           << detail::fixed(r.distance, 4) << std::setw(9)
           << detail::fixed(r.imbalance, 1) << std::setw(16)
           << detail::scaled_vector(r.profile.P, N) << std::setw(12)
           << detail::scaled_vector(r.profile.K, C) << std::setw(9)
           << detail::fixed(r.terms.quadratic, 4) << std::setw(10)
           << detail::fixed(r.terms.linear, 5) << std::setw(10)
           << detail::fixed(r.terms.b_term, 5) << std::setw(10)
           << detail::fixed(r.terms.a_term, 4) << "\n";
    }
    return os.str();
}

enum class ScatterAxis { distance, imbalance };

// Two-column CSV: chosen axis against V.
inline std::string emit_scatter(const std::vector<RankedAllocation>& results,
                                ScatterAxis axis) {
    if (results.empty()) throw empty_result_error("no allocations to report");
    std::ostringstream os;
    os << (axis == ScatterAxis::distance ? "distance" : "imbalance") << ",v\n";
    for (const RankedAllocation& r : results)
        os << detail::fixed(axis == ScatterAxis::distance ? r.distance : r.imbalance,
                            6)
           << ',' << detail::fixed(r.v_approx, 6) << "\n";
    return os.str();
}

}  // namespace swd
