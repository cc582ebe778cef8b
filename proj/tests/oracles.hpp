#pragma once

// Test-only helpers kept independent of the implementation paths they check:
// the norm oracle goes through an SVD instead of the Hermitian square, the
// crossing oracles track scalar curves directly.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "specflow/types.hpp"

namespace oracles {

using Matrix = specflow::MatrixC<double>;
using Vector = specflow::VectorR<double>;
using Complexd = std::complex<double>;

inline double norm_oracle(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline Matrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix h(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        h(i, i) = Complexd(gauss(rng), 0.0);
        for (Eigen::Index j = i + 1; j < dim; ++j) {
            const Complexd z(gauss(rng) * M_SQRT1_2, gauss(rng) * M_SQRT1_2);
            h(i, j) = z;
            h(j, i) = std::conj(z);
        }
    }
    return scale * h / std::sqrt(double(dim));
}

inline Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complexd(gauss(rng), gauss(rng));
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    return q;
}

// Hermitian matrix with prescribed eigenvalues in a random unitary frame.
inline Matrix hermitian_with_spectrum(const std::vector<double>& eigenvalues,
                                      std::mt19937_64& rng) {
    const Eigen::Index n = static_cast<Eigen::Index>(eigenvalues.size());
    Matrix v = random_unitary(n, rng);
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = eigenvalues[static_cast<std::size_t>(i)];
    Matrix m = v * d.cast<Complexd>().asDiagonal() * v.adjoint();
    return 0.5 * (m + m.adjoint()).eval();
}

inline Matrix random_projection(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng) {
    Matrix v = random_unitary(dim, rng);
    Matrix p = v.leftCols(rank) * v.leftCols(rank).adjoint();
    return 0.5 * (p + p.adjoint()).eval();
}

// Net signed zero crossings of a sampled scalar curve; a value exactly at 0
// counts as nonnegative.
inline long crossing_oracle(const std::vector<double>& values) {
    long net = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const bool was = values[i - 1] >= 0.0;
        const bool now = values[i] >= 0.0;
        if (!was && now) ++net;
        if (was && !now) --net;
    }
    return net;
}

// Net signed crossings of a sampled scalar phase curve through π, counted
// with the half-open convention (phase exactly π sits above the barrier).
inline long phase_crossing_oracle(const std::vector<double>& phases) {
    long net = 0;
    const double pi = specflow::pi_v<double>;
    for (std::size_t i = 1; i < phases.size(); ++i) {
        const bool was = phases[i - 1] >= pi;
        const bool now = phases[i] >= pi;
        if (!was && now) ++net;
        if (was && !now) --net;
    }
    return net;
}

}  // namespace oracles
