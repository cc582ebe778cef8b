#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specflow/families.hpp"
#include "specflow/metrics.hpp"

using namespace specflow;
using Catch::Approx;
using Op = HermitianOperator<double>;
using Diag = DiagonalOperator<double>;
using Matrix = MatrixC<double>;
using Complexd = std::complex<double>;

TEST_CASE("scalar pair 0 vs 1 hits the closed forms") {
    auto a = hermitian_diag<double>({0.0});
    auto b = hermitian_diag<double>({1.0});
    CHECK(gap_delta(a, b) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(delta_one(a, b) == Approx(1.0).epsilon(1e-12));
    CHECK(gamma(a, b) == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(delta_tilde(a, b) == Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("identical operators are at distance zero") {
    std::mt19937_64 rng(2);
    Op T(oracles::random_hermitian(5, rng, 2.0));
    auto r = metric_report(T, T);
    CHECK(r.delta <= 1e-12);
    CHECK(r.delta1 <= 1e-12);
    CHECK(r.gamma <= 1e-12);
    CHECK(r.delta_tilde <= 1e-12);
    CHECK(r.riesz <= 1e-12);
}

TEST_CASE("Fuglede family distances") {
    SECTION("gamma is exactly 2n/(1+n^2)") {
        for (std::int64_t n : {1, 5, 10}) {
            auto fam = fuglede_family<double>(12, n, 2);
            CHECK(gamma(fam.Tn, fam.T0) ==
                  Approx(2.0 * n / (1.0 + double(n) * n)).epsilon(1e-14));
        }
        auto fam = fuglede_family<double>(12, 1, 2);
        CHECK(gamma(fam.Tn, fam.T0) == 1.0);
    }
    SECTION("riesz distance reaches 2n/sqrt(1+n^2)") {
        auto fam = fuglede_family<double>(12, 5, 2);
        const double bound = 2.0 * 5 / std::sqrt(1.0 + 25.0);
        CHECK(riesz_distance(fam.Tn, fam.T0) >= bound - 1e-12);
        CHECK(riesz_distance(fam.Tn, fam.T0) == Approx(1.96116135138184).epsilon(1e-12));
    }
    SECTION("riesz at n = 1 is sqrt(2)") {
        auto fam = fuglede_family<double>(12, 1, 2);
        CHECK(riesz_distance(fam.Tn, fam.T0) == Approx(std::sqrt(2.0)).epsilon(1e-13));
    }
    SECTION("midpoint lower bound") {
        for (std::int64_t n : {1, 5, 20}) {
            auto fn = fuglede_family<double>(24, n, 2);
            auto fn1 = fuglede_family<double>(24, n + 1, 2);
            auto mid = midpoint(fn.Tn, fn1.Tn);
            const double bound = std::abs(Complexd(0, -1) - 1.0 / Complexd(double(n), 1));
            CHECK(gamma(mid, fn.T0) >= bound - 1e-12);
        }
        auto f1 = fuglede_family<double>(24, 1, 2);
        auto f2 = fuglede_family<double>(24, 2, 2);
        CHECK(gamma(midpoint(f1.Tn, f2.Tn), f1.T0) >= std::sqrt(2.0) / 2.0 - 1e-12);
    }
    SECTION("diagonal riesz sup is attained at index 1 for n = 1") {
        auto fam = fuglede_family<double>(12, 1, 2);
        CHECK(riesz_distance(fam.Tn, fam.T0) ==
              Approx(2.0 / std::sqrt(2.0)).epsilon(1e-13));
    }
}

TEST_CASE("metric equivalences on random pairs") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng() % 16);
        Op a(oracles::random_hermitian(dim, rng, 3.0));
        Op b(oracles::random_hermitian(dim, rng, 3.0));
        auto r = metric_report(a, b);
        const double slack = 1e-12 * std::max(1.0, r.delta1);
        CHECK(std::abs(r.delta_tilde - 2.0 * r.gamma) <= 1e-12 * std::max(1.0, r.delta_tilde));
        CHECK(r.gamma <= r.delta1 + slack);
        CHECK(r.delta1 <= 2.0 * r.gamma + slack);
        CHECK(r.delta <= r.delta1 + slack);
        CHECK(r.delta1 <= 2.0 * r.delta + slack);
    }
}

TEST_CASE("delta_tilde equals 2 gamma on diagonal pairs") {
    auto fam = fuglede_family<double>(16, 3, 2);
    const double g = gamma(fam.Tn, fam.T0);
    CHECK(delta_tilde(fam.Tn, fam.T0) == Approx(2.0 * g).epsilon(1e-13));
}

TEST_CASE("norm backend agrees with an SVD oracle") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix m = oracles::random_hermitian(7, rng, 2.0) +
                   Complexd(0, 1) * oracles::random_hermitian(7, rng, 1.0);
        CHECK(operator_norm(m) == Approx(oracles::norm_oracle(m)).epsilon(1e-10));
    }
}

TEST_CASE("symmetry and triangle inequality") {
    std::mt19937_64 rng(13);
    SECTION("symmetry") {
        for (int rep = 0; rep < 20; ++rep) {
            Op a(oracles::random_hermitian(4, rng, 2.0));
            Op b(oracles::random_hermitian(4, rng, 2.0));
            CHECK(gap_delta(a, b) == Approx(gap_delta(b, a)).epsilon(1e-12));
            CHECK(gamma(a, b) == Approx(gamma(b, a)).epsilon(1e-12));
            CHECK(riesz_distance(a, b) == Approx(riesz_distance(b, a)).epsilon(1e-12));
        }
    }
    SECTION("triangle inequality on sampled triples") {
        for (int rep = 0; rep < 30; ++rep) {
            Op a(oracles::random_hermitian(5, rng, 2.0));
            Op b(oracles::random_hermitian(5, rng, 2.0));
            Op c(oracles::random_hermitian(5, rng, 2.0));
            auto check_triangle = [&](auto dist) {
                CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-9);
            };
            check_triangle([](const Op& x, const Op& y) { return gap_delta(x, y); });
            check_triangle([](const Op& x, const Op& y) { return delta_one(x, y); });
            check_triangle([](const Op& x, const Op& y) { return gamma(x, y); });
            check_triangle([](const Op& x, const Op& y) { return delta_tilde(x, y); });
            check_triangle([](const Op& x, const Op& y) { return riesz_distance(x, y); });
        }
    }
}

TEST_CASE("shape mismatches are rejected") {
    std::mt19937_64 rng(17);
    Op a(oracles::random_hermitian(3, rng));
    Op b(oracles::random_hermitian(4, rng));
    CHECK_THROWS_AS(gamma(a, b), ShapeMismatch);
    CHECK_THROWS_AS(metric_report(a, b), ShapeMismatch);

    auto fam = fuglede_family<double>(8, 1, 2);
    VectorR<double> v(3);
    v << 0.0, 1.0, 2.0;
    Diag bounded(0, v);  // no tail: different lattice
    CHECK_THROWS_AS(gamma(fam.T0, bounded), ShapeMismatch);
}

TEST_CASE("metric_report ratio table") {
    auto a = hermitian_diag<double>({0.0});
    auto b = hermitian_diag<double>({1.0});
    auto r = metric_report(a, b);
    REQUIRE(r.ratios.delta_tilde_over_gamma.has_value());
    CHECK(*r.ratios.delta_tilde_over_gamma == Approx(2.0).epsilon(1e-12));
    REQUIRE(r.ratios.delta1_over_gamma.has_value());
    CHECK(*r.ratios.delta1_over_gamma >= 1.0 - 1e-12);
    CHECK(*r.ratios.delta1_over_gamma <= 2.0 + 1e-12);
    // Identical operators: every distance is zero, ratios are undefined.
    auto zero = metric_report(a, a);
    CHECK_FALSE(zero.ratios.delta_tilde_over_gamma.has_value());
}

TEST_CASE("Fuglede gamma convergence with Riesz divergence") {
    // gamma(T_n, T_0) -> 0 while the Riesz distance approaches 2: the
    // Riesz map is not continuous in the gap topology.
    double prev_gamma = std::numeric_limits<double>::infinity();
    for (std::int64_t n : {2, 4, 8, 16, 32}) {
        auto fam = fuglede_family<double>(40, n, 2);
        const double g = gamma(fam.Tn, fam.T0);
        const double r = riesz_distance(fam.Tn, fam.T0);
        CHECK(g < prev_gamma);
        CHECK(r >= 2.0 * n / std::sqrt(1.0 + double(n) * n) - 1e-12);
        prev_gamma = g;
    }
}
