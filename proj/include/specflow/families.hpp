#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "specflow/errors.hpp"
#include "specflow/operator_core.hpp"
#include "specflow/spectral_flow.hpp"
#include "specflow/types.hpp"

namespace specflow {

// ------------------------------- linear paths --------------------------------

template <typename Scalar>
OperatorPath<HermitianOperator<Scalar>> linear_path(const HermitianOperator<Scalar>& A,
                                                    const HermitianOperator<Scalar>& B,
                                                    std::int64_t samples,
                                                    std::string tag = "linear") {
    if (A.dim() != B.dim()) throw ShapeMismatch("linear_path: dimension mismatch");
    if (samples < 2) throw std::invalid_argument("linear_path: need >= 2 samples");
    std::vector<Scalar> params;
    std::vector<HermitianOperator<Scalar>> ops;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Scalar t = Scalar(i) / Scalar(samples - 1);
        params.push_back(t);
        ops.push_back(HermitianOperator<Scalar>((Scalar(1) - t) * A.matrix() + t * B.matrix()));
    }
    const Scalar lip = operator_norm(B.matrix() - A.matrix());
    return OperatorPath<HermitianOperator<Scalar>>(std::move(params), std::move(ops),
                                                   std::move(tag), lip);
}

template <typename Scalar>
OperatorPath<DiagonalOperator<Scalar>> linear_path(const DiagonalOperator<Scalar>& A,
                                                   const DiagonalOperator<Scalar>& B,
                                                   std::int64_t samples,
                                                   std::string tag = "linear") {
    if (!DiagonalOperator<Scalar>::same_domain(A, B)) {
        throw ShapeMismatch("linear_path: index lattices differ");
    }
    if (samples < 2) throw std::invalid_argument("linear_path: need >= 2 samples");
    std::vector<Scalar> params;
    std::vector<DiagonalOperator<Scalar>> ops;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Scalar t = Scalar(i) / Scalar(samples - 1);
        params.push_back(t);
        ops.push_back(affine_combine(Scalar(1) - t, A, t, B));
    }
    // Spectral velocity of the linear segment: sup_k |B_k − A_k|.
    Scalar lip = detail::sample_distance(A, B);
    if (!std::isfinite(lip)) throw ShapeMismatch("linear_path: endpoints not comparable");
    return OperatorPath<DiagonalOperator<Scalar>>(std::move(params), std::move(ops),
                                                  std::move(tag), lip);
}

// ------------------------------ Fuglede family --------------------------------

// T₀ has eigenvalues λ_k = k on the basis indices k ≥ 1 (affine tail of slope
// one); Tₙ is equal except index n carries −n. The family converges to T₀ in
// the resolvent metric while the Riesz distance stays near 2: the classical
// witness that the Riesz map is not continuous in the gap topology.
template <typename Scalar = double>
struct FugledeFamily {
    DiagonalOperator<Scalar> T0;
    DiagonalOperator<Scalar> Tn;
    OperatorPath<DiagonalOperator<Scalar>> path;
};

template <typename Scalar = double>
FugledeFamily<Scalar> fuglede_family(std::int64_t horizon, std::int64_t n,
                                     std::int64_t samples = 101) {
    if (horizon < 1) throw BadIndex("fuglede_family: horizon must be >= 1");
    if (n < 1 || n > horizon) throw BadIndex("fuglede_family: need 1 <= n <= horizon");
    // Keep at least one plain entry past n so the handoff to the tail agrees.
    const std::int64_t top = std::max(horizon, n + 1);
    VectorR<Scalar> base(top);
    for (std::int64_t k = 1; k <= top; ++k) base(k - 1) = Scalar(k);
    using Op = DiagonalOperator<Scalar>;
    const typename Op::Tail tail{Scalar(1), Scalar(0)};
    Op T0(1, base, tail, Op::Sides::above);
    VectorR<Scalar> flipped = base;
    flipped(n - 1) = Scalar(-n);
    Op Tn(1, flipped, tail, Op::Sides::above);
    auto path = linear_path(T0, Tn, samples, "fuglede(n=" + std::to_string(n) + ")");
    return {std::move(T0), std::move(Tn), std::move(path)};
}

// ------------------------------- Dirac toy family -----------------------------

// 1-D boundary-condition family realized by its exact eigenvalue lattice:
// λ_k(t) = 2π(k + offset + m·t) for k in [−k_range, k_range], with affine
// tails of slope 2π on both sides. Over t ∈ [0, 1] the lattice shifts by m
// slots, so the endpoint coincides with the start up to an index shift and
// the spectral flow equals m.
template <typename Scalar = double>
OperatorPath<DiagonalOperator<Scalar>> dirac_interval_family(std::int64_t k_range,
                                                             std::int64_t m,
                                                             std::int64_t samples = 201,
                                                             std::int64_t offset = 0,
                                                             std::string tag = "dirac1d") {
    if (k_range < 2) throw BadIndex("dirac_interval_family: need k_range >= 2");
    if (samples < 2) throw std::invalid_argument("dirac_interval_family: need >= 2 samples");
    using Op = DiagonalOperator<Scalar>;
    const Scalar two_pi = 2 * pi_v<Scalar>;
    std::vector<Scalar> params;
    std::vector<Op> ops;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Scalar t = Scalar(i) / Scalar(samples - 1);
        const Scalar shift = Scalar(offset) + Scalar(m) * t;
        VectorR<Scalar> v(2 * k_range + 1);
        for (std::int64_t k = -k_range; k <= k_range; ++k) {
            v(k + k_range) = two_pi * (Scalar(k) + shift);
        }
        params.push_back(t);
        ops.emplace_back(-k_range, v, typename Op::Tail{two_pi, two_pi * shift},
                         Op::Sides::both);
    }
    const Scalar lip = two_pi * Scalar(std::abs(m));
    return OperatorPath<Op>(std::move(params), std::move(ops),
                            tag + "(m=" + std::to_string(m) + ")", lip);
}

// Closed loop (up to index shift) with prescribed spectral flow m; witnesses
// that the winding number is onto the integers.
template <typename Scalar = double>
OperatorPath<DiagonalOperator<Scalar>> flow_loop(std::int64_t k_range, std::int64_t m,
                                                 std::int64_t samples = 201,
                                                 std::int64_t offset = 0) {
    return dirac_interval_family<Scalar>(k_range, m, samples, offset, "flow_loop");
}

// ------------------------------- random families ------------------------------

namespace detail {

// Hermitian draw with entries scaled so the norm stays O(1) at any dimension.
template <typename Scalar>
MatrixC<Scalar> gaussian_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    MatrixC<Scalar> H(dim, dim);
    const Scalar root_half = std::sqrt(Scalar(0.5));
    for (Eigen::Index i = 0; i < dim; ++i) {
        H(i, i) = Complex<Scalar>(gauss(rng), 0);
        for (Eigen::Index j = i + 1; j < dim; ++j) {
            const Complex<Scalar> z(gauss(rng) * root_half, gauss(rng) * root_half);
            H(i, j) = z;
            H(j, i) = std::conj(z);
        }
    }
    return H / std::sqrt(Scalar(dim));
}

}  // namespace detail

// Smooth seeded path A(t) = A₀ + t·A₁ + sin(πt)·A₂ of Gaussian Hermitian
// draws; identical seeds give identical paths.
template <typename Scalar = double>
OperatorPath<HermitianOperator<Scalar>> random_hermitian_path(Eigen::Index dim,
                                                              std::int64_t samples,
                                                              std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("random_hermitian_path: need dim >= 1");
    if (samples < 2) throw std::invalid_argument("random_hermitian_path: need >= 2 samples");
    std::mt19937_64 rng(seed);
    const MatrixC<Scalar> A0 = detail::gaussian_hermitian<Scalar>(dim, rng);
    const MatrixC<Scalar> A1 = detail::gaussian_hermitian<Scalar>(dim, rng);
    const MatrixC<Scalar> A2 = detail::gaussian_hermitian<Scalar>(dim, rng);
    std::vector<Scalar> params;
    std::vector<HermitianOperator<Scalar>> ops;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Scalar t = Scalar(i) / Scalar(samples - 1);
        params.push_back(t);
        ops.push_back(HermitianOperator<Scalar>(A0 + t * A1 + std::sin(pi_v<Scalar> * t) * A2));
    }
    const Scalar lip = operator_norm(A1) + pi_v<Scalar> * operator_norm(A2);
    return OperatorPath<HermitianOperator<Scalar>>(
        std::move(params), std::move(ops), "random(seed=" + std::to_string(seed) + ")", lip);
}

// Closed variant: A(t) = A₀ + sin(2πt)·A₁ + (1 − cos(2πt))·A₂ with the last
// sample forced equal to the first. Finite-dimensional loops have SF = 0.
template <typename Scalar = double>
OperatorPath<HermitianOperator<Scalar>> random_hermitian_loop(Eigen::Index dim,
                                                              std::int64_t samples,
                                                              std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("random_hermitian_loop: need dim >= 1");
    if (samples < 3) throw std::invalid_argument("random_hermitian_loop: need >= 3 samples");
    std::mt19937_64 rng(seed);
    const MatrixC<Scalar> A0 = detail::gaussian_hermitian<Scalar>(dim, rng);
    const MatrixC<Scalar> A1 = detail::gaussian_hermitian<Scalar>(dim, rng);
    const MatrixC<Scalar> A2 = detail::gaussian_hermitian<Scalar>(dim, rng);
    std::vector<Scalar> params;
    std::vector<HermitianOperator<Scalar>> ops;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Scalar t = Scalar(i) / Scalar(samples - 1);
        params.push_back(t);
        if (i == samples - 1) {
            ops.push_back(ops.front());
            break;
        }
        const Scalar phase = 2 * pi_v<Scalar> * t;
        ops.push_back(HermitianOperator<Scalar>(A0 + std::sin(phase) * A1 +
                                                (Scalar(1) - std::cos(phase)) * A2));
    }
    const Scalar lip = 2 * pi_v<Scalar> * (operator_norm(A1) + operator_norm(A2));
    return OperatorPath<HermitianOperator<Scalar>>(
        std::move(params), std::move(ops), "random_loop(seed=" + std::to_string(seed) + ")",
        lip);
}

// --------------------------------- FamilySpec ---------------------------------

// In-memory form of the CLI job-file family block.
template <typename Scalar = double>
struct FamilySpec {
    enum class Kind { fuglede, linear, dirac1d, random, flow_loop };

    Kind kind = Kind::fuglede;
    std::int64_t horizon = 20;  // fuglede
    std::int64_t n = 1;         // fuglede
    std::int64_t k_range = 8;   // dirac1d / flow_loop
    std::int64_t m = 1;         // dirac1d / flow_loop
    Eigen::Index dim = 6;       // random
    std::uint64_t seed = 0;     // random
    bool closed = false;        // random loop variant
    std::vector<Scalar> diag_a, diag_b;  // linear endpoints (real diagonals)
    std::int64_t samples = 201;

    void validate() const {
        if (samples < 2) throw std::invalid_argument("FamilySpec: need >= 2 samples");
        switch (kind) {
            case Kind::fuglede:
                if (horizon < 1) throw std::invalid_argument("FamilySpec: horizon must be >= 1");
                if (n < 1 || n > horizon) {
                    throw BadIndex("FamilySpec: need 1 <= n <= horizon");
                }
                break;
            case Kind::dirac1d:
            case Kind::flow_loop:
                if (k_range < 2) throw BadIndex("FamilySpec: need k_range >= 2");
                break;
            case Kind::random:
                if (dim < 1) throw std::invalid_argument("FamilySpec: need dim >= 1");
                break;
            case Kind::linear:
                if (diag_a.empty() || diag_a.size() != diag_b.size()) {
                    throw ShapeMismatch("FamilySpec: linear endpoints must match");
                }
                break;
        }
    }
};

template <typename Scalar = double>
using PathVariant = std::variant<OperatorPath<HermitianOperator<Scalar>>,
                                 OperatorPath<DiagonalOperator<Scalar>>>;

template <typename Scalar>
PathVariant<Scalar> build_path(const FamilySpec<Scalar>& spec) {
    spec.validate();
    using Kind = typename FamilySpec<Scalar>::Kind;
    switch (spec.kind) {
        case Kind::fuglede:
            return fuglede_family<Scalar>(spec.horizon, spec.n, spec.samples).path;
        case Kind::dirac1d:
            return dirac_interval_family<Scalar>(spec.k_range, spec.m, spec.samples);
        case Kind::flow_loop:
            return flow_loop<Scalar>(spec.k_range, spec.m, spec.samples);
        case Kind::random:
            return spec.closed
                       ? random_hermitian_loop<Scalar>(spec.dim, spec.samples, spec.seed)
                       : random_hermitian_path<Scalar>(spec.dim, spec.samples, spec.seed);
        case Kind::linear: {
            VectorR<Scalar> a(static_cast<Eigen::Index>(spec.diag_a.size()));
            VectorR<Scalar> b(static_cast<Eigen::Index>(spec.diag_b.size()));
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                a(i) = spec.diag_a[static_cast<std::size_t>(i)];
                b(i) = spec.diag_b[static_cast<std::size_t>(i)];
            }
            MatrixC<Scalar> ma = a.template cast<Complex<Scalar>>().asDiagonal();
            MatrixC<Scalar> mb = b.template cast<Complex<Scalar>>().asDiagonal();
            return linear_path(HermitianOperator<Scalar>(ma), HermitianOperator<Scalar>(mb),
                               spec.samples);
        }
    }
    throw std::invalid_argument("build_path: unknown family kind");
}

}  // namespace specflow
