#include <doctest.h>

#include <random>

#include "swd/geometry.hpp"

using namespace swd;

namespace {

Vector mat_vec(const Matrix& A, const Vector& v) {
    Vector out(A.size(), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += A[i][j] * v[j];
    return out;
}

void check_identities(int S) {
    const SequenceGeometry g = build_geometry(S);
    const Vector ones(std::size_t(S), 1.0);
    const double s2 = double(S) * S;

    const Vector xi1 = mat_vec(g.Xi, ones);
    const Vector xie = mat_vec(g.Xi, g.e);
    const Vector xif = mat_vec(g.Xi, g.f);
    const Vector l1 = mat_vec(g.Lambda, ones);
    const Vector le = mat_vec(g.Lambda, g.e);
    const Vector lf = mat_vec(g.Lambda, g.f);
    const Vector d1 = mat_vec(g.Delta, ones);
    const Vector de = mat_vec(g.Delta, g.e);
    const Vector df = mat_vec(g.Delta, g.f);
    for (int i = 0; i < S; ++i) {
        CHECK(xi1[i] == doctest::Approx(0.5 * g.y[i] + (s2 - 1) / 8.0).epsilon(1e-13));
        CHECK(xie[i] == doctest::Approx(0.5 * (S - 1)).epsilon(1e-13));
        CHECK(xif[i] == doctest::Approx(g.z[i]).epsilon(1e-13));
        CHECK(l1[i] ==
              doctest::Approx(0.5 * S * g.y[i] + S * (s2 - 1) / 24.0).epsilon(1e-13));
        CHECK(le[i] ==
              doctest::Approx(g.y[i] + 0.25 * (S - 1) * (S - 1)).epsilon(1e-13));
        CHECK(lf[i] == doctest::Approx(0.0));
        CHECK(d1[i] == doctest::Approx(0.0));
        CHECK(de[i] == doctest::Approx(0.0));
        CHECK(df[i] == doctest::Approx(-(S - 1) * g.z[i]).epsilon(1e-13));
    }
}

}  // namespace

TEST_CASE("geometry identities hold for S = 2..10") {
    for (int S = 2; S <= 10; ++S) check_identities(S);
}

TEST_CASE("geometry small cases") {
    const SequenceGeometry g3 = build_geometry(3);
    CHECK(g3.z == Vector{-1.0, 0.0, 1.0});
    CHECK(g3.y == Vector{1.0, 0.0, 1.0});
    CHECK(g3.Xi[0] == Vector{0.0, 0.5, 1.0});

    const SequenceGeometry g4 = build_geometry(4);
    CHECK(g4.z == Vector{-1.5, -0.5, 0.5, 1.5});

    CHECK_THROWS_AS(build_geometry(1), invalid_design_error);
}

TEST_CASE("trial config lambda/icc interconversion") {
    const TrialConfig a = TrialConfig::from_icc(4, 0.1);
    CHECK(a.lambda == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(a.icc() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(TrialConfig::from_icc(4, 1.0).lambda == 0.0);  // rho = 1 -> lambda = 0
    CHECK_THROWS_AS(TrialConfig::from_icc(4, 0.0), invalid_design_error);
    CHECK_THROWS_AS(TrialConfig::from_lambda(1, 9.0), invalid_design_error);
}

TEST_CASE("cluster set invariants") {
    const ClusterSet rrt({6, 6, 6, 4, 4, 2});
    CHECK(rrt.total == 28);
    double sum = 0.0;
    for (double p : rrt.proportions) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rrt.mean() == doctest::Approx(4.6667).epsilon(1e-4));
    CHECK(rrt.cv() == doctest::Approx(0.3499).epsilon(1e-4));
    CHECK_THROWS_AS(ClusterSet({3, 0}), invalid_design_error);
    CHECK_THROWS_AS(ClusterSet({}), invalid_design_error);
}

TEST_CASE("profile W values") {
    const ClusterSet rrt({6, 6, 6, 4, 4, 2});
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    const Allocation alloc{{1, 1, 2, 2, 3, 3}};
    const AllocationProfile pr = derive_profile(cfg, rrt, alloc);
    CHECK(pr.W == doctest::Approx(0.1710).epsilon(3e-4));
    CHECK(std::abs(pr.W - 0.1710) < 5e-5);

    // Artificial eight-cluster example: W = 11/90 exactly.
    const ClusterSet art({20, 20, 10, 10, 10, 10, 20, 20});
    const TrialConfig cfg5 = TrialConfig::from_lambda(5, 50.0);
    const AllocationProfile pr5 =
        derive_profile(cfg5, art, Allocation{{1, 1, 2, 2, 3, 3, 4, 4}});
    CHECK(pr5.W == doctest::Approx(11.0 / 90.0).epsilon(1e-14));

    // Equal sizes n: W = n/(lambda + nT).
    const ClusterSet eq({10, 10, 10, 10});
    const AllocationProfile preq =
        derive_profile(cfg5, eq, Allocation{{1, 2, 3, 4}});
    CHECK(preq.W == doctest::Approx(10.0 / (50.0 + 10.0 * 5)).epsilon(1e-14));
}

TEST_CASE("profile simplex sums and W bound") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(1, 40), c_count(2, 10);
    std::uniform_real_distribution<double> lam(0.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int C = c_count(rng);
        std::vector<int> sizes;
        for (int i = 0; i < C; ++i) sizes.push_back(size(rng));
        const ClusterSet cs(sizes);
        const int T = 3 + int(rng() % 4);
        const TrialConfig cfg = TrialConfig::from_lambda(T, lam(rng));
        Allocation alloc;
        for (int i = 0; i < C; ++i)
            alloc.assignment.push_back(1 + int(rng() % std::uint64_t(T - 1)));
        const AllocationProfile pr = derive_profile(cfg, cs, alloc);
        double sp = 0.0, sk = 0.0, sq = 0.0;
        for (int l = 0; l < T - 1; ++l) {
            sp += pr.P[l];
            sk += pr.K[l];
            sq += pr.Q[l];
            CHECK((pr.P[l] == 0.0) == (pr.K[l] == 0.0));
        }
        CHECK(sp == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sk == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sq == doctest::Approx(pr.W).epsilon(1e-12));
        CHECK(pr.W >= 0.0);
        CHECK(pr.W <= 1.0 / T + 1e-12);
        const int S = T - 1;
        CHECK(std::abs(pr.b) <= (S - 1) / 2.0 + 1e-12);
        CHECK(pr.a >= -1e-12);
        CHECK(pr.a <= (S - 1) * (S - 1) / 4.0 + 1e-12);
    }
}

TEST_CASE("mirror mapping and profile reversal") {
    const ClusterSet rrt({6, 6, 6, 4, 4, 2});
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    // (6,6;6;4,4,2) -> (4,4,2;6;6,6)
    const Allocation alloc{{1, 1, 2, 3, 3, 3}};
    const Allocation m = mirror(alloc, 3);
    CHECK(m.canonical(rrt, 3) ==
          CanonicalForm{{4, 4, 2}, {6}, {6, 6}});
    CHECK(mirror(m, 3).canonical(rrt, 3) == alloc.canonical(rrt, 3));

    const AllocationProfile pa = derive_profile(cfg, rrt, alloc);
    const AllocationProfile pm = derive_profile(cfg, rrt, m);
    for (int l = 0; l < 3; ++l) {
        CHECK(pm.P[l] == pa.P[2 - l]);
        CHECK(pm.K[l] == pa.K[2 - l]);
    }

    // A symmetric allocation is a fixed point up to canonical form.
    const Allocation sym{{1, 3, 2, 2, 1, 3}};  // sizes 6,6 | 6,4 | 4,2 ... build symmetric in K only
    const Allocation symm = mirror(sym, 3);
    CHECK(sym.canonical(rrt, 3).size() == symm.canonical(rrt, 3).size());
}

TEST_CASE("outer-sequence loading maximizes a") {
    const ClusterSet rrt({6, 6, 6, 4, 4, 2});
    const TrialConfig cfg = TrialConfig::from_lambda(4, 9.0);
    const AllocationProfile pr =
        derive_profile(cfg, rrt, Allocation{{1, 1, 1, 3, 3, 3}});
    CHECK(pr.a == doctest::Approx(1.0).epsilon(1e-14));  // (S-1)^2/4 with S = 3
}
