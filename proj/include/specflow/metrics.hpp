#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>

#include "specflow/cayley.hpp"
#include "specflow/errors.hpp"
#include "specflow/operator_core.hpp"
#include "specflow/types.hpp"

namespace specflow {

// Distances between two self-adjoint operators:
//   delta        gap metric  ‖P_{T1} − P_{T2}‖ of graph projections
//   delta1       ‖R_{T1} − R_{T2}‖ + ‖T1 R_{T1} − T2 R_{T2}‖, R_T = (I+T²)⁻¹
//   gamma        resolvent metric ‖(T1+i)⁻¹ − (T2+i)⁻¹‖
//   delta_tilde  Cayley metric ‖Κ(T1) − Κ(T2)‖
//   riesz        ‖F_{T1} − F_{T2}‖, F_T = T(I+T²)^{-1/2}
template <typename Scalar = double>
struct MetricReport {
    Scalar delta{};
    Scalar delta1{};
    Scalar gamma{};
    Scalar delta_tilde{};
    Scalar riesz{};

    struct Ratios {
        std::optional<Scalar> delta_tilde_over_gamma;
        std::optional<Scalar> delta1_over_gamma;
        std::optional<Scalar> delta1_over_delta;
        std::optional<Scalar> riesz_over_delta;
    } ratios;
};

namespace detail {

template <typename Scalar>
void require_same_dim(const HermitianOperator<Scalar>& a, const HermitianOperator<Scalar>& b,
                      const char* who) {
    if (a.dim() != b.dim()) throw ShapeMismatch(std::string(who) + ": dimension mismatch");
}

template <typename Scalar>
void require_same_lattice(const DiagonalOperator<Scalar>& a, const DiagonalOperator<Scalar>& b,
                          const char* who) {
    if (!DiagonalOperator<Scalar>::same_domain(a, b)) {
        throw ShapeMismatch(std::string(who) + ": index lattices differ");
    }
}

template <typename Scalar>
MatrixC<Scalar> resolvent_at_minus_i(const HermitianOperator<Scalar>& T) {
    const Eigen::Index n = T.dim();
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> shifted = T.matrix() + Complex<Scalar>(0, 1) * I;
    return shifted.partialPivLu().solve(I);
}

template <typename Scalar>
MatrixC<Scalar> squared_resolvent(const HermitianOperator<Scalar>& T) {
    const Eigen::Index n = T.dim();
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> iplus = I + T.matrix() * T.matrix();
    return iplus.llt().solve(I);
}

// Scalar kernels for diagonal pairs, with the tail limits folded in: the
// resolvent of an affine tail tends to 0, the Cayley transform to 1, the
// Riesz transform to ±1. Clamped tails carry their finite limit value.
template <typename Scalar>
Complex<Scalar> resolvent_value(Scalar lambda) {
    if (std::isinf(lambda)) return Complex<Scalar>(0, 0);
    return Scalar(1) / Complex<Scalar>(lambda, 1);
}

template <typename Scalar>
Complex<Scalar> cayley_value(Scalar lambda) {
    if (std::isinf(lambda)) return Complex<Scalar>(1, 0);
    return Complex<Scalar>(lambda, -1) / Complex<Scalar>(lambda, 1);
}

template <typename Scalar>
Scalar riesz_value(Scalar lambda) {
    if (std::isinf(lambda)) return lambda > 0 ? Scalar(1) : Scalar(-1);
    return lambda / std::hypot(Scalar(1), lambda);
}

template <typename Scalar>
Scalar rT_value(Scalar lambda) {
    if (std::isinf(lambda)) return Scalar(0);
    return Scalar(1) / (Scalar(1) + lambda * lambda);
}

template <typename Scalar>
Scalar trT_value(Scalar lambda) {
    if (std::isinf(lambda)) return Scalar(0);
    const Scalar denom = Scalar(1) + lambda * lambda;
    return std::isinf(denom) ? Scalar(0) : lambda / denom;
}

// ‖P(λ) − P(μ)‖ for scalar graph projections: the sine of the angle between
// the lines spanned by (1, λ) and (1, μ), which is |λ−μ|/√((1+λ²)(1+μ²)).
// A vertical graph (λ = ±∞) gives 1/√(1+μ²).
template <typename Scalar>
Scalar graph_gap_value(Scalar lambda, Scalar mu) {
    const bool li = std::isinf(lambda), mi = std::isinf(mu);
    if (li && mi) return Scalar(0);
    if (li) return Scalar(1) / std::hypot(Scalar(1), mu);
    if (mi) return Scalar(1) / std::hypot(Scalar(1), lambda);
    return std::abs(lambda - mu) / (std::hypot(Scalar(1), lambda) * std::hypot(Scalar(1), mu));
}

// Supremum of a per-index kernel over a compatible diagonal pair: explicit
// indices, tails expanded to the evaluation horizon, plus the analytic limit
// contribution on each infinite side.
template <typename Scalar, typename Kernel>
Scalar diagonal_sup(const DiagonalOperator<Scalar>& A, const DiagonalOperator<Scalar>& B,
                    Kernel&& kernel) {
    const std::int64_t horizon = std::max(A.eval_horizon(), B.eval_horizon());
    std::int64_t lo = std::min(A.first_index(), B.first_index());
    std::int64_t hi = std::max(A.last_index(), B.last_index());
    if (A.extends_below()) lo -= horizon;
    if (A.extends_above()) hi += horizon;
    Scalar sup(0);
    for (std::int64_t k = lo; k <= hi; ++k) {
        sup = std::max(sup, kernel(A.eigenvalue_at(k), B.eigenvalue_at(k)));
    }
    if (A.extends_below()) sup = std::max(sup, kernel(A.limit_below(), B.limit_below()));
    if (A.extends_above()) sup = std::max(sup, kernel(A.limit_above(), B.limit_above()));
    return sup;
}

}  // namespace detail

// ------------------------------- gap metric ----------------------------------

template <typename Scalar>
Scalar gap_delta(const HermitianOperator<Scalar>& T1, const HermitianOperator<Scalar>& T2) {
    detail::require_same_dim(T1, T2, "gap_delta");
    return operator_norm(graph_projection(T1).matrix() - graph_projection(T2).matrix());
}

template <typename Scalar>
Scalar gap_delta(const DiagonalOperator<Scalar>& T1, const DiagonalOperator<Scalar>& T2) {
    detail::require_same_lattice(T1, T2, "gap_delta");
    return detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return detail::graph_gap_value(a, b);
    });
}

// --------------------------------- delta1 ------------------------------------

template <typename Scalar>
Scalar delta_one(const HermitianOperator<Scalar>& T1, const HermitianOperator<Scalar>& T2) {
    detail::require_same_dim(T1, T2, "delta_one");
    MatrixC<Scalar> R1 = detail::squared_resolvent(T1);
    MatrixC<Scalar> R2 = detail::squared_resolvent(T2);
    return operator_norm(R1 - R2) + operator_norm(T1.matrix() * R1 - T2.matrix() * R2);
}

template <typename Scalar>
Scalar delta_one(const DiagonalOperator<Scalar>& T1, const DiagonalOperator<Scalar>& T2) {
    detail::require_same_lattice(T1, T2, "delta_one");
    const Scalar dr = detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return std::abs(detail::rT_value(a) - detail::rT_value(b));
    });
    const Scalar dtr = detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return std::abs(detail::trT_value(a) - detail::trT_value(b));
    });
    return dr + dtr;
}

// ---------------------------------- gamma ------------------------------------

template <typename Scalar>
Scalar gamma(const HermitianOperator<Scalar>& T1, const HermitianOperator<Scalar>& T2) {
    detail::require_same_dim(T1, T2, "gamma");
    return operator_norm(detail::resolvent_at_minus_i(T1) - detail::resolvent_at_minus_i(T2));
}

template <typename Scalar>
Scalar gamma(const DiagonalOperator<Scalar>& T1, const DiagonalOperator<Scalar>& T2) {
    detail::require_same_lattice(T1, T2, "gamma");
    return detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return std::abs(detail::resolvent_value(a) - detail::resolvent_value(b));
    });
}

// ------------------------------- delta tilde ---------------------------------

template <typename Scalar>
Scalar delta_tilde(const HermitianOperator<Scalar>& T1, const HermitianOperator<Scalar>& T2) {
    detail::require_same_dim(T1, T2, "delta_tilde");
    return operator_norm(cayley(T1).matrix() - cayley(T2).matrix());
}

template <typename Scalar>
Scalar delta_tilde(const DiagonalOperator<Scalar>& T1, const DiagonalOperator<Scalar>& T2) {
    detail::require_same_lattice(T1, T2, "delta_tilde");
    return detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return std::abs(detail::cayley_value(a) - detail::cayley_value(b));
    });
}

// ------------------------------ Riesz distance -------------------------------

template <typename Scalar>
Scalar riesz_distance(const HermitianOperator<Scalar>& T1, const HermitianOperator<Scalar>& T2) {
    detail::require_same_dim(T1, T2, "riesz_distance");
    return operator_norm(riesz_map(T1).matrix() - riesz_map(T2).matrix());
}

template <typename Scalar>
Scalar riesz_distance(const DiagonalOperator<Scalar>& T1, const DiagonalOperator<Scalar>& T2) {
    detail::require_same_lattice(T1, T2, "riesz_distance");
    return detail::diagonal_sup(T1, T2, [](Scalar a, Scalar b) {
        return std::abs(detail::riesz_value(a) - detail::riesz_value(b));
    });
}

// -------------------------------- full report --------------------------------

namespace detail {

template <typename Scalar>
std::optional<Scalar> safe_ratio(Scalar num, Scalar den) {
    if (den == Scalar(0)) return std::nullopt;
    return num / den;
}

}  // namespace detail

template <typename Op>
MetricReport<typename Op::ScalarType> metric_report(const Op& T1, const Op& T2) {
    using Scalar = typename Op::ScalarType;
    MetricReport<Scalar> r;
    r.delta = gap_delta(T1, T2);
    r.delta1 = delta_one(T1, T2);
    r.gamma = gamma(T1, T2);
    r.delta_tilde = delta_tilde(T1, T2);
    r.riesz = riesz_distance(T1, T2);
    r.ratios.delta_tilde_over_gamma = detail::safe_ratio(r.delta_tilde, r.gamma);
    r.ratios.delta1_over_gamma = detail::safe_ratio(r.delta1, r.gamma);
    r.ratios.delta1_over_delta = detail::safe_ratio(r.delta1, r.delta);
    r.ratios.riesz_over_delta = detail::safe_ratio(r.riesz, r.delta);
    return r;
}

}  // namespace specflow
