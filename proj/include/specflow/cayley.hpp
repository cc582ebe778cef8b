#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "specflow/errors.hpp"
#include "specflow/operator_core.hpp"
#include "specflow/types.hpp"

namespace specflow {

// ------------------------------ UnitaryOperator ------------------------------

template <typename Scalar = double>
class UnitaryOperator {
public:
    using ScalarType = Scalar;

    template <typename Derived>
    explicit UnitaryOperator(const Eigen::MatrixBase<Derived>& entries)
        : entries_(entries) {
        if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
            throw NonUnitaryInput("UnitaryOperator: matrix must be square and nonempty");
        }
        const Scalar defect = unitarity_defect(entries_);
        if (defect > Scalar(tol::structural)) {
            throw NonUnitaryInput("UnitaryOperator: unitarity defect " +
                                  std::to_string(defect) + " exceeds tolerance");
        }
    }

    Eigen::Index dim() const { return entries_.rows(); }
    const MatrixC<Scalar>& matrix() const { return entries_; }

private:
    MatrixC<Scalar> entries_;
};

// ------------------------------- EigenphaseSet -------------------------------

// Spectrum of a unitary as phases in (0, 2π], ascending, with multiplicity.
template <typename Scalar = double>
struct EigenphaseSet {
    VectorR<Scalar> phases;
};

// ----------------------------- Cayley transform ------------------------------

// Κ(T) = (T−i)(T+i)⁻¹, computed through Κ(T) = I − 2i(T+i)⁻¹. The image never
// has 1 as an eigenvalue: eigenphases are π + 2·arctan(λ), strictly inside
// (0, 2π).
template <typename Scalar>
UnitaryOperator<Scalar> cayley(const HermitianOperator<Scalar>& T) {
    const Eigen::Index n = T.dim();
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> shifted = T.matrix() + Complex<Scalar>(0, 1) * I;
    MatrixC<Scalar> res = shifted.partialPivLu().solve(I);
    return UnitaryOperator<Scalar>(I - Complex<Scalar>(0, 2) * res);
}

// Cayley transform of a diagonal operator, kept as the phase sequence
// θ_k = π + 2·arctan(λ_k). All circle queries reduce to exact lattice
// arithmetic on the source eigenvalues.
template <typename Scalar = double>
class CayleyPhases {
public:
    using ScalarType = Scalar;

    explicit CayleyPhases(DiagonalOperator<Scalar> source) : source_(std::move(source)) {}

    const DiagonalOperator<Scalar>& source() const { return source_; }

    Scalar phase_at(std::int64_t k) const { return cayley_phase(source_.eigenvalue_at(k)); }

    // Number of eigenphases in [lo, hi) for 0 < lo < hi < 2π. Phases are
    // monotone in λ, so the arc pulls back to the half-open value window
    // [tan((lo−π)/2), tan((hi−π)/2)).
    std::optional<std::int64_t> count_in_right_open(Scalar lo, Scalar hi) const {
        const Scalar llo = std::tan((lo - pi_v<Scalar>) / 2);
        const Scalar lhi = std::tan((hi - pi_v<Scalar>) / 2);
        return source_.count_in(llo, lhi, false);
    }

    // Distance from the spectrum on the circle to the barrier phase.
    Scalar min_distance_to(Scalar barrier) const {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (std::int64_t k = source_.first_index(); k <= source_.last_index(); ++k) {
            d = std::min(d, std::abs(phase_at(k) - barrier));
        }
        const Scalar lb = std::tan((barrier - pi_v<Scalar>) / 2);
        auto probe = [&](std::int64_t k) {
            d = std::min(d, std::abs(cayley_phase(source_.eigenvalue_at(k)) - barrier));
        };
        auto side = [&](bool above) {
            const std::int64_t edge = above ? source_.last_index() + 1
                                            : source_.first_index() - 1;
            const auto& tail = source_.tail();
            const Scalar kx = (lb - tail->offset) / tail->slope;
            const std::int64_t k0 = static_cast<std::int64_t>(std::floor(kx));
            for (std::int64_t k = k0 - 2; k <= k0 + 2; ++k) {
                probe(above ? std::max(k, edge) : std::min(k, edge));
            }
            probe(edge);
            if (source_.clamp_bound()) {
                const Scalar lim = above ? source_.limit_above() : source_.limit_below();
                d = std::min(d, std::abs(cayley_phase(lim) - barrier));
            }
        };
        if (source_.extends_above()) side(true);
        if (source_.extends_below()) side(false);
        return d;
    }

    // Smallest |θ − π| offsets, for barrier-candidate generation; the map
    // |θ − π| = 2·arctan|λ| is monotone, so magnitudes near zero suffice.
    std::vector<Scalar> offsets_near_pi(int max_points) const {
        std::vector<Scalar> out;
        for (Scalar m : source_.magnitudes_near_zero(max_points)) {
            out.push_back(2 * std::atan(m));
        }
        return out;
    }

private:
    DiagonalOperator<Scalar> source_;
};

template <typename Scalar>
CayleyPhases<Scalar> cayley(const DiagonalOperator<Scalar>& T) {
    return CayleyPhases<Scalar>(T);
}

// ------------------------------- eigenphases ---------------------------------

// Numerical access to spec U on the circle. With require_injective set, any
// phase within 1e-8 of 0/2π (eigenvalue 1) is an error.
template <typename Scalar>
EigenphaseSet<Scalar> eigenphases(const UnitaryOperator<Scalar>& U,
                                  bool require_injective = false) {
    Eigen::ComplexEigenSolver<MatrixC<Scalar>> es(U.matrix(), /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw Error("eigenphases: eigensolver failed to converge");
    }
    std::vector<Scalar> phases;
    phases.reserve(static_cast<std::size_t>(U.dim()));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        phases.push_back(principal_phase(Complex<Scalar>(es.eigenvalues()(i))));
    }
    std::sort(phases.begin(), phases.end());
    if (require_injective) {
        for (Scalar theta : phases) {
            if (std::min(theta, 2 * pi_v<Scalar> - theta) < Scalar(tol::decision)) {
                throw UnitEigenvalue("eigenphases: 1 grazes the spectrum");
            }
        }
    }
    EigenphaseSet<Scalar> out;
    out.phases = Eigen::Map<const VectorR<Scalar>>(phases.data(),
                                                   static_cast<Eigen::Index>(phases.size()));
    return out;
}

// ------------------------------ inverse Cayley -------------------------------

// T = i(I+U)(I−U)⁻¹, defined whenever 1 is not in spec U. Satisfies
// Κ(T) = U; the result is Hermitian.
template <typename Scalar>
HermitianOperator<Scalar> inverse_cayley(const UnitaryOperator<Scalar>& U) {
    const auto ph = eigenphases(U);
    for (Eigen::Index i = 0; i < ph.phases.size(); ++i) {
        const Scalar theta = ph.phases(i);
        if (std::min(theta, 2 * pi_v<Scalar> - theta) < Scalar(tol::decision)) {
            throw UnitEigenvalue("inverse_cayley: 1 grazes the spectrum");
        }
    }
    const Eigen::Index n = U.dim();
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> lhs = I - U.matrix();
    MatrixC<Scalar> T = Complex<Scalar>(0, 1) * lhs.partialPivLu().solve(I + U.matrix());
    T = Scalar(0.5) * (T + T.adjoint()).eval();
    return HermitianOperator<Scalar>(T);
}

// ---------------------------- connectedness path -----------------------------

// Discrete deformation of U to i·I inside the unitaries with 1 excluded from
// the spectrum. In the eigenbasis, phases on the upper arc (0, π) move
// affinely to π/2 and phases on the lower arc [π, 2π) to 3π/2 over the first
// half; over the second half the lower block rotates down through π into π/2.
// 1 never becomes an eigenvalue along the way.
template <typename Scalar>
std::vector<UnitaryOperator<Scalar>> connect_to_i_identity(const UnitaryOperator<Scalar>& U,
                                                           int steps) {
    if (steps < 2) throw std::invalid_argument("connect_to_i_identity: need steps >= 2");
    // Schur of a (near-)normal matrix: Q unitary, T nearly diagonal.
    Eigen::ComplexSchur<MatrixC<Scalar>> schur(U.matrix());
    if (schur.info() != Eigen::Success) {
        throw Error("connect_to_i_identity: Schur decomposition failed");
    }
    const Eigen::Index n = U.dim();
    const MatrixC<Scalar>& Q = schur.matrixU();
    std::vector<Scalar> theta(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        theta[static_cast<std::size_t>(i)] = principal_phase(Complex<Scalar>(schur.matrixT()(i, i)));
        const Scalar t = theta[static_cast<std::size_t>(i)];
        if (std::min(t, 2 * pi_v<Scalar> - t) < Scalar(tol::decision)) {
            throw UnitEigenvalue("connect_to_i_identity: 1 grazes the spectrum");
        }
    }
    const Scalar half_pi = pi_v<Scalar> / 2;
    auto phase_at = [&](Scalar t, Scalar th) -> Scalar {
        const bool lower = th >= pi_v<Scalar>;  // arc split (0, π) vs [π, 2π)
        const Scalar mid = lower ? 3 * half_pi : half_pi;
        if (t <= Scalar(0.5)) {
            const Scalar s = 2 * t;
            return (1 - s) * th + s * mid;
        }
        if (!lower) return half_pi;
        return 3 * half_pi - (2 * t - 1) * pi_v<Scalar>;
    };
    std::vector<UnitaryOperator<Scalar>> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j) {
        const Scalar t = Scalar(j) / Scalar(steps);
        VectorC<Scalar> diag(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            diag(i) = std::polar(Scalar(1), phase_at(t, theta[static_cast<std::size_t>(i)]));
        }
        path.emplace_back(Q * diag.asDiagonal() * Q.adjoint());
    }
    return path;
}

}  // namespace specflow
