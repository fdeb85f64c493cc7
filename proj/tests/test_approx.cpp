#include <doctest.h>

#include <random>

#include "swd/approx.hpp"
#include "swd/exact.hpp"

using namespace swd;

namespace {

const ClusterSet kRrt({6, 6, 6, 4, 4, 2});

// Q predicted by the fitted line: Q_hat_l = W(1-beta) K_l + W beta P_l.
AllocationProfile with_fitted_Q(const AllocationProfile& pr,
                                const RegressionFit& fit) {
    AllocationProfile out = pr;
    for (std::size_t l = 0; l < pr.P.size(); ++l)
        out.Q[l] = fit.W * (1.0 - fit.beta) * pr.K[l] + fit.wbeta() * pr.P[l];
    return out;
}

}  // namespace

TEST_CASE("regression fit reproduces published summaries") {
    const TrialConfig c9 = TrialConfig::from_lambda(4, 9.0);
    const RegressionFit f9 = fit_regression(c9, kRrt);
    CHECK(std::abs(f9.W - 0.1710) < 5e-5);
    CHECK(std::abs(f9.beta - 1.2644) < 5e-5);
    CHECK(std::abs(f9.wbeta() - 0.2162) < 5e-5);
    CHECK(f9.corr > 0.999);

    const TrialConfig c19 = TrialConfig::from_lambda(4, 19.0);
    CHECK(std::abs(fit_regression(c19, kRrt).W - 0.1276) < 5e-5);

    // Eight-cluster artificial example: exact rational summaries.
    const ClusterSet art({20, 20, 10, 10, 10, 10, 20, 20});
    const TrialConfig c5 = TrialConfig::from_lambda(5, 50.0);
    const RegressionFit f5 = fit_regression(c5, art);
    CHECK(f5.W == doctest::Approx(11.0 / 90.0).epsilon(1e-13));
    CHECK(f5.beta == doctest::Approx(15.0 / 11.0).epsilon(1e-13));
    CHECK(f5.wbeta() == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("fit identities: alpha, residual sums, equal sizes") {
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    const RegressionFit fit = fit_regression(cfg, kRrt);
    CHECK(fit.alpha ==
          doctest::Approx(fit.W * (1.0 - fit.beta) / 6.0).epsilon(1e-13));
    double rsum = 0.0, rpsum = 0.0;
    for (std::size_t i = 0; i < kRrt.count(); ++i) {
        rsum += fit.residuals[i];
        rpsum += fit.residuals[i] * kRrt.proportions[i];
    }
    CHECK(rsum == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(std::abs(rpsum) < 1e-15);  // residuals orthogonal to the regressor

    const ClusterSet eq({7, 7, 7, 7});
    const RegressionFit feq = fit_regression(cfg, eq);
    CHECK(feq.beta == 1.0);
    CHECK(feq.alpha == 0.0);
    for (double r : feq.residuals) CHECK(r == 0.0);
}

TEST_CASE("beta exceeds 1 whenever sizes are unequal") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(1, 50), c_count(2, 12);
    std::uniform_real_distribution<double> loglam(std::log(0.1), std::log(1e4));
    int unequal_seen = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, std::exp(loglam(rng)));
        const RegressionFit fit = fit_regression(cfg, cs);
        const bool equal =
            std::all_of(sizes.begin(), sizes.end(),
                        [&](int n) { return n == sizes.front(); });
        if (equal) {
            CHECK(fit.beta == 1.0);
        } else {
            ++unequal_seen;
            CHECK(fit.beta > 1.0);
        }
        CHECK(fit.wbeta() <= 1.0 / T + 1e-12);
        CHECK(fit.wbeta() >= 0.0);
    }
    CHECK(unequal_seen > 300);
}

TEST_CASE("constants are well posed across random settings") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> size(1, 50), c_count(2, 12);
    std::uniform_real_distribution<double> loglam(std::log(0.1), std::log(1e4));
    for (int trial = 0; trial < 400; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, std::exp(loglam(rng)));
        const SequenceGeometry g = build_geometry(T - 1);
        const RegressionFit fit = fit_regression(cfg, cs);
        const ApproxConstants c = make_constants(fit, g, T);
        CHECK(1.0 - c.gamma * fit.W * (T - 2) > 0.0);
        CHECK(c.h3 >= -1e-12);
        CHECK(c.h2 >= 0.0);
    }
}

TEST_CASE("profile form of the exact variance matches the scalar route") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> size(1, 50), c_count(2, 12);
    std::uniform_real_distribution<double> loglam(std::log(0.1), std::log(1e3));
    for (int trial = 0; trial < 300; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, std::exp(loglam(rng)));
        Allocation a;
        for (int i = 0; i < C; ++i)
            a.assignment.push_back(1 + int(rng() % std::uint64_t(T - 1)));
        const PrecisionReport exact = exact_precision_scalar(cfg, cs, a);
        if (!exact.estimable) continue;
        const SequenceGeometry g = build_geometry(T - 1);
        const AllocationProfile pr = derive_profile(cfg, cs, a, g);
        CHECK(precision_PQ(pr, g) ==
              doctest::Approx(exact.v_exact).epsilon(1e-10));
    }
}

TEST_CASE("V(P,K) equals the profile variance at the fitted Q") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> size(1, 50), c_count(2, 12);
    std::uniform_real_distribution<double> loglam(std::log(0.1), std::log(1e3));
    for (int trial = 0; trial < 300; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, std::exp(loglam(rng)));
        Allocation a;
        for (int i = 0; i < C; ++i)
            a.assignment.push_back(1 + int(rng() % std::uint64_t(T - 1)));
        const SequenceGeometry g = build_geometry(T - 1);
        const AllocationProfile pr = derive_profile(cfg, cs, a, g);
        const RegressionFit fit = fit_regression(cfg, cs);
        const ApproxConstants c = make_constants(fit, g, T);
        const double v = precision_approx(pr.P, pr.K, fit, c, g);
        const double v_fitted = precision_PQ(with_fitted_Q(pr, fit), g);
        CHECK(v == doctest::Approx(v_fitted).epsilon(1e-10));
    }
}

TEST_CASE("approximate variance is bit-exact under mirroring") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> size(1, 50), c_count(2, 12);
    std::uniform_real_distribution<double> loglam(std::log(0.1), std::log(1e3));
    for (int trial = 0; trial < 300; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, std::exp(loglam(rng)));
        Allocation a;
        for (int i = 0; i < C; ++i)
            a.assignment.push_back(1 + int(rng() % std::uint64_t(T - 1)));
        const SequenceGeometry g = build_geometry(T - 1);
        const RegressionFit fit = fit_regression(cfg, cs);
        const ApproxConstants c = make_constants(fit, g, T);
        const AllocationProfile pr = derive_profile(cfg, cs, a, g);
        const AllocationProfile pm =
            derive_profile(cfg, cs, mirror(a, T - 1), g);
        const double v = precision_approx(pr.P, pr.K, fit, c, g);
        const double vm = precision_approx(pm.P, pm.K, fit, c, g);
        CHECK(v == vm);  // bit-for-bit
    }
}

TEST_CASE("approximation error vanishes for equal sizes") {
    const ClusterSet eq({8, 8, 8, 8, 8, 8});
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    const Allocation a{{1, 1, 2, 2, 3, 3}};
    CHECK(approximation_error(cfg, eq, a) < 1e-12);
}

TEST_CASE("approximation error is small for the RRT example") {
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    const Allocation a{{1, 1, 2, 2, 3, 3}};
    CHECK(approximation_error(cfg, kRrt, a) < 0.01);
    CHECK_THROWS_AS(approximation_error(cfg, kRrt, Allocation{{1, 1, 1, 1, 1, 1}}),
                    non_estimable_error);
}
