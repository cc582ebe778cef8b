#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "specflow/cayley.hpp"

using namespace specflow;
using Catch::Approx;
using Op = HermitianOperator<double>;
using Matrix = MatrixC<double>;
using Complexd = std::complex<double>;

namespace {
const double kPi = pi_v<double>;
}

TEST_CASE("cayley on scalars") {
    auto m0 = cayley(hermitian_diag<double>({0.0}));
    CHECK(std::abs(m0.matrix()(0, 0) - Complexd(-1, 0)) < 1e-15);
    auto m1 = cayley(hermitian_diag<double>({1.0}));
    CHECK(std::abs(m1.matrix()(0, 0) - Complexd(0, -1)) < 1e-15);
}

TEST_CASE("cayley spectral mapping") {
    std::mt19937_64 rng(19);
    Op T(oracles::random_hermitian(6, rng, 3.0));
    auto dec = spectral_decompose(T);
    auto phases = eigenphases(cayley(T)).phases;
    std::vector<double> want;
    for (Eigen::Index i = 0; i < 6; ++i) want.push_back(kPi + 2 * std::atan(dec.eigenvalues()(i)));
    std::sort(want.begin(), want.end());
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(phases(i) == Approx(want[static_cast<std::size_t>(i)]).margin(1e-10));
    }
}

TEST_CASE("cayley output stays clear of eigenvalue 1") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        Op T(oracles::random_hermitian(5, rng, 10.0));
        auto phases = eigenphases(cayley(T)).phases;
        double min_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < phases.size(); ++i) {
            min_dist = std::min(min_dist, std::min(phases(i), 2 * kPi - phases(i)));
        }
        CHECK(min_dist > 0.0);
        // Quantitative floor: 2*arctan(1/|T|) up to a sliver of roundoff.
        CHECK(min_dist >= 2 * std::atan(1.0 / T.norm()) * (1.0 - 1e-6));
    }
}

TEST_CASE("inverse_cayley closed forms") {
    Matrix mi = -Matrix::Identity(3, 3);
    CHECK(operator_norm(inverse_cayley(UnitaryOperator<double>(mi)).matrix()) <= 1e-12);

    Matrix mneg = Complexd(0, -1) * Matrix::Identity(3, 3);
    auto T = inverse_cayley(UnitaryOperator<double>(mneg));
    CHECK(operator_norm(T.matrix() - Matrix::Identity(3, 3)) <= 1e-12);
}

TEST_CASE("cayley round trips") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 10; ++rep) {
        Op T(oracles::random_hermitian(6, rng, 4.0));
        Op back = inverse_cayley(cayley(T));
        CHECK(operator_norm(back.matrix() - T.matrix()) <= 1e-9 * std::max(1.0, T.norm()));
        auto U = cayley(T);
        auto round = cayley(inverse_cayley(U));
        CHECK(operator_norm(round.matrix() - U.matrix()) <= 1e-9);
    }
    CHECK_THROWS_AS(inverse_cayley(UnitaryOperator<double>(Matrix::Identity(2, 2))),
                    UnitEigenvalue);
}

TEST_CASE("eigenphases ordering and injectivity flag") {
    VectorC<double> d(2);
    d << Complexd(-1, 0), Complexd(0, 1);
    Matrix m = d.asDiagonal();
    auto ph = eigenphases(UnitaryOperator<double>(m));
    CHECK(ph.phases(0) == Approx(kPi / 2).margin(1e-12));
    CHECK(ph.phases(1) == Approx(kPi).margin(1e-12));

    CHECK_THROWS_AS(eigenphases(UnitaryOperator<double>(Matrix::Identity(2, 2)), true),
                    UnitEigenvalue);

    auto k = eigenphases(cayley(hermitian_diag<double>({-1.0, 0.0, 1.0})));
    CHECK(k.phases(0) == Approx(kPi / 2).margin(1e-12));
    CHECK(k.phases(1) == Approx(kPi).margin(1e-12));
    CHECK(k.phases(2) == Approx(3 * kPi / 2).margin(1e-12));
}

TEST_CASE("CayleyPhases lattice queries") {
    VectorR<double> v(5);
    for (std::int64_t k = -2; k <= 2; ++k) v(k + 2) = double(k);
    DiagonalOperator<double> T(-2, v, DiagonalOperator<double>::Tail{1.0, 0.0},
                               DiagonalOperator<double>::Sides::both);
    auto c = cayley(T);
    CHECK(c.phase_at(0) == Approx(kPi).margin(1e-14));
    CHECK(c.phase_at(1) == Approx(3 * kPi / 2).margin(1e-14));
    // Phases in [pi, pi + eps) pull back to eigenvalues in [0, tan(eps/2)).
    CHECK(*c.count_in_right_open(kPi, kPi + 2 * std::atan(1.5)) == 2);  // k = 0, 1
    CHECK(c.min_distance_to(kPi + 2 * std::atan(0.5)) ==
          Approx(2 * std::atan(0.5)).margin(1e-12));
}

TEST_CASE("connect_to_i_identity deforms onto iI") {
    SECTION("scalar -i rotates through -1") {
        Matrix m = Complexd(0, -1) * Matrix::Identity(1, 1);
        auto path = connect_to_i_identity(UnitaryOperator<double>(m), 100);
        REQUIRE(path.size() == 101);
        // Midpoint of the rotation half sits at phase pi.
        const auto mid = eigenphases(path[75]).phases(0);
        CHECK(mid == Approx(kPi).margin(1e-10));
        const auto end = eigenphases(path.back()).phases(0);
        CHECK(end == Approx(kPi / 2).margin(1e-12));
    }
    SECTION("iI is a fixed point") {
        Matrix m = Complexd(0, 1) * Matrix::Identity(3, 3);
        auto path = connect_to_i_identity(UnitaryOperator<double>(m), 10);
        for (const auto& u : path) {
            CHECK(operator_norm(u.matrix() - m) <= 1e-12);
        }
    }
    SECTION("random Cayley images reach iI with certified samples") {
        std::mt19937_64 rng(31);
        Op T(oracles::random_hermitian(6, rng, 3.0));
        auto U = cayley(T);
        auto path = connect_to_i_identity(U, 200);
        REQUIRE(path.size() == 201);
        CHECK(operator_norm(path.front().matrix() - U.matrix()) <= 1e-10);
        for (const auto& u : path) {
            CHECK(unitarity_defect(u.matrix()) <= 1e-10);
            auto ph = eigenphases(u).phases;
            for (Eigen::Index i = 0; i < ph.size(); ++i) {
                CHECK(std::min(ph(i), 2 * kPi - ph(i)) >= 1e-8);
            }
        }
        Matrix target = Complexd(0, 1) * Matrix::Identity(6, 6);
        CHECK(operator_norm(path.back().matrix() - target) <= 1e-10);
    }
    SECTION("rejects unit eigenvalues and tiny step counts") {
        CHECK_THROWS_AS(connect_to_i_identity(UnitaryOperator<double>(Matrix::Identity(2, 2)), 10),
                        UnitEigenvalue);
        Matrix m = Complexd(0, -1) * Matrix::Identity(1, 1);
        CHECK_THROWS_AS(connect_to_i_identity(UnitaryOperator<double>(m), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("phase convention splits the arcs at pi") {
    // -1 sits on the lower arc [pi, 2pi): it contracts to 3pi/2 before
    // rotating up to pi/2.
    Matrix m = -Matrix::Identity(1, 1);
    auto path = connect_to_i_identity(UnitaryOperator<double>(m), 100);
    const auto half = eigenphases(path[50]).phases(0);
    CHECK(half == Approx(3 * kPi / 2).margin(1e-10));
    const auto end = eigenphases(path.back()).phases(0);
    CHECK(end == Approx(kPi / 2).margin(1e-12));
}

TEST_CASE("non-unitary input is rejected") {
    Matrix m(2, 2);
    m << 1, 1, 0, 1;
    CHECK_THROWS_AS(UnitaryOperator<double>(m), NonUnitaryInput);
}
