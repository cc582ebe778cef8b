#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace specflow {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using MatrixC = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorC = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using VectorR = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Tolerance conventions. Structural laws (projections, unitarity) are held to
// 1e-10, decision thresholds (boundary grazing, injectivity bands) to 1e-8,
// hermiticity defects to 1e-12. Every check is applied as the hybrid
// tol * max(1, scale) so small and large operators are treated alike.
namespace tol {
inline constexpr double structural = 1e-10;
inline constexpr double decision = 1e-8;
inline constexpr double symmetry = 1e-12;
inline constexpr double cluster = 1e-9;
}  // namespace tol

template <typename Scalar>
Scalar hybrid(Scalar tolerance, Scalar scale) {
    return tolerance * std::max(Scalar(1), scale);
}

template <typename Scalar>
constexpr Scalar pi_v = std::numbers::pi_v<Scalar>;

// ------------------------------ norms ---------------------------------------

// Operator norm (largest singular value), computed through the Hermitian
// square A†A so the same eigensolver backs every norm in the library.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real operator_norm(
    const Eigen::MatrixBase<Derived>& a) {
    using Entry = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Entry>::Real;
    using Mat = Eigen::Matrix<Entry, Eigen::Dynamic, Eigen::Dynamic>;
    if (a.size() == 0) return Real(0);
    Mat m = a;
    Mat gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(Real(0), es.eigenvalues().maxCoeff()));
}

template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
    return operator_norm((a - a.adjoint()).eval());
}

template <typename Derived>
auto unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
    using Entry = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Entry, Eigen::Dynamic, Eigen::Dynamic>;
    Mat m = u;
    Mat defect = m.adjoint() * m - Mat::Identity(m.rows(), m.cols());
    return operator_norm(defect);
}

// ------------------------------ phases --------------------------------------

// Principal phase in (0, 2π]: 1 maps to 2π, -1 to π, i to π/2.
template <typename Scalar>
Scalar principal_phase(const std::complex<Scalar>& z) {
    Scalar theta = std::atan2(z.imag(), z.real());
    if (theta <= Scalar(0)) theta += 2 * pi_v<Scalar>;
    return theta;
}

// Phase of (λ-i)/(λ+i) on the circle: π + 2·arctan(λ), strictly inside (0, 2π).
template <typename Scalar>
Scalar cayley_phase(Scalar lambda) {
    if (std::isinf(lambda)) return lambda > 0 ? 2 * pi_v<Scalar> : Scalar(0);
    return pi_v<Scalar> + 2 * std::atan(lambda);
}

}  // namespace specflow
