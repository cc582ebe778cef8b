#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specflow/errors.hpp"
#include "specflow/types.hpp"

namespace specflow {

// ----------------------------- HermitianOperator ----------------------------

// Dense finite-dimensional self-adjoint operator. The hermiticity defect
// ‖A − A†‖ must stay below 1e-12 · max(1, ‖A‖).
template <typename Scalar = double>
class HermitianOperator {
public:
    using ScalarType = Scalar;

    template <typename Derived>
    explicit HermitianOperator(const Eigen::MatrixBase<Derived>& entries)
        : entries_(entries) {
        if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
            throw NonHermitianInput("HermitianOperator: matrix must be square and nonempty");
        }
        const Scalar scale = operator_norm(entries_);
        const Scalar defect = hermiticity_defect(entries_);
        if (defect > hybrid(Scalar(tol::symmetry), scale)) {
            throw NonHermitianInput("HermitianOperator: hermiticity defect " +
                                    std::to_string(defect) + " exceeds tolerance");
        }
    }

    Eigen::Index dim() const { return entries_.rows(); }
    const MatrixC<Scalar>& matrix() const { return entries_; }
    Scalar norm() const { return operator_norm(entries_); }

private:
    MatrixC<Scalar> entries_;
};

// Real diagonal Hermitian operator from a list of eigenvalues.
template <typename Scalar = double>
HermitianOperator<Scalar> hermitian_diag(std::initializer_list<Scalar> values) {
    VectorR<Scalar> v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (Scalar x : values) v(i++) = x;
    MatrixC<Scalar> m = v.template cast<Complex<Scalar>>().asDiagonal();
    return HermitianOperator<Scalar>(m);
}

// ----------------------------- DiagonalOperator ------------------------------

// Operator diagonal in a fixed integer-indexed basis: an explicit block of
// eigenvalues plus an optional affine tail λ_k = α·k + β (α ≠ 0) declaring the
// values beyond the explicit range. This is the desk-scale model of genuinely
// unbounded operators. An optional clamp bound c replaces every value by
// min(max(λ, −c), c); this is how bounded truncations are represented exactly.
template <typename Scalar = double>
class DiagonalOperator {
public:
    using ScalarType = Scalar;

    struct Tail {
        Scalar slope{};
        Scalar offset{};
    };
    enum class Sides { above, below, both };

    DiagonalOperator(std::int64_t first_index, VectorR<Scalar> eigenvalues,
                     std::optional<Tail> tail = std::nullopt, Sides sides = Sides::above,
                     std::optional<Scalar> clamp_bound = std::nullopt,
                     std::int64_t eval_horizon = 32)
        : first_(first_index),
          values_(std::move(eigenvalues)),
          tail_(tail),
          sides_(sides),
          clamp_(clamp_bound),
          horizon_(eval_horizon) {
        if (values_.size() == 0) {
            throw std::invalid_argument("DiagonalOperator: explicit eigenvalue list is empty");
        }
        if (horizon_ < 1) {
            throw std::invalid_argument("DiagonalOperator: eval_horizon must be positive");
        }
        if (clamp_ && *clamp_ <= Scalar(0)) {
            throw std::invalid_argument("DiagonalOperator: clamp bound must be positive");
        }
        if (tail_) {
            if (tail_->slope == Scalar(0)) {
                throw std::invalid_argument("DiagonalOperator: tail slope must be nonzero");
            }
            check_handoff();
        }
    }

    std::int64_t first_index() const { return first_; }
    std::int64_t last_index() const {
        return first_ + static_cast<std::int64_t>(values_.size()) - 1;
    }
    std::int64_t explicit_count() const { return static_cast<std::int64_t>(values_.size()); }
    std::int64_t eval_horizon() const { return horizon_; }
    bool extends_above() const {
        return tail_ && (sides_ == Sides::above || sides_ == Sides::both);
    }
    bool extends_below() const {
        return tail_ && (sides_ == Sides::below || sides_ == Sides::both);
    }
    const std::optional<Tail>& tail() const { return tail_; }
    Sides sides() const { return sides_; }
    const std::optional<Scalar>& clamp_bound() const { return clamp_; }
    const VectorR<Scalar>& explicit_values() const { return values_; }

    // Effective eigenvalue at lattice index k (clamp applied).
    Scalar eigenvalue_at(std::int64_t k) const {
        return clamped(raw_at(k));
    }

    // Spectral limit of the upper tail: ±∞ for an affine tail, ±c when clamped.
    Scalar limit_above() const {
        if (!extends_above()) throw std::invalid_argument("DiagonalOperator: no upper tail");
        const Scalar inf = std::numeric_limits<Scalar>::infinity();
        return clamped(tail_->slope > Scalar(0) ? inf : -inf);
    }
    Scalar limit_below() const {
        if (!extends_below()) throw std::invalid_argument("DiagonalOperator: no lower tail");
        const Scalar inf = std::numeric_limits<Scalar>::infinity();
        return clamped(tail_->slope > Scalar(0) ? -inf : inf);
    }

    // Largest attained |eigenvalue| over the explicit block and clamped tails.
    // For an unclamped tail the explicit block alone sets the working scale.
    Scalar scale() const {
        Scalar m(0);
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            m = std::max(m, std::abs(clamped(values_(i))));
        }
        if (clamp_ && (extends_above() || extends_below())) m = std::max(m, *clamp_);
        return m;
    }

    // Number of eigenvalues in the window [lo, hi] (or [lo, hi) when
    // include_hi is false). Returns nullopt when the count is infinite, which
    // happens only when a clamped tail value sits inside the window.
    std::optional<std::int64_t> count_in(Scalar lo, Scalar hi, bool include_hi) const {
        auto inside = [&](Scalar v) {
            return v >= lo && (include_hi ? v <= hi : v < hi);
        };
        std::int64_t n = 0;
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            if (inside(clamped(values_(i)))) ++n;
        }
        if (extends_above()) {
            auto part = tail_count(lo, hi, include_hi, /*above=*/true);
            if (!part) return std::nullopt;
            n += *part;
        }
        if (extends_below()) {
            auto part = tail_count(lo, hi, include_hi, /*above=*/false);
            if (!part) return std::nullopt;
            n += *part;
        }
        return n;
    }
    std::optional<std::int64_t> count_in_closed(Scalar lo, Scalar hi) const {
        return count_in(lo, hi, true);
    }

    // Eigenvalues inside [lo, hi], ascending. nullopt when the set is infinite
    // (a clamped tail value inside the window) or larger than the cap.
    std::optional<std::vector<Scalar>> values_in_closed(Scalar lo, Scalar hi,
                                                        std::size_t cap = 10000) const {
        auto total = count_in_closed(lo, hi);
        if (!total || static_cast<std::size_t>(*total) > cap) return std::nullopt;
        std::vector<Scalar> out;
        out.reserve(static_cast<std::size_t>(*total));
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            const Scalar v = clamped(values_(i));
            if (v >= lo && v <= hi) out.push_back(v);
        }
        auto sweep_side = [&](bool above) {
            const Scalar s = tail_->slope;
            const Scalar b = tail_->offset;
            Scalar wlo = lo, whi = hi;
            if (clamp_) {
                wlo = std::max(wlo, -*clamp_);
                whi = std::min(whi, *clamp_);
            }
            if (wlo > whi) return;
            Scalar x1 = (wlo - b) / s;
            Scalar x2 = (whi - b) / s;
            if (x1 > x2) std::swap(x1, x2);
            std::int64_t klo = static_cast<std::int64_t>(std::ceil(x1)) - 2;
            std::int64_t khi = static_cast<std::int64_t>(std::floor(x2)) + 2;
            const std::int64_t from = above ? last_index() + 1 : first_ - 1;
            if (above) klo = std::max(klo, from);
            else khi = std::min(khi, from);
            for (std::int64_t k = klo; k <= khi; ++k) {
                const Scalar v = clamped(s * Scalar(k) + b);
                if (v >= lo && v <= hi) out.push_back(v);
            }
        };
        if (extends_above()) sweep_side(true);
        if (extends_below()) sweep_side(false);
        std::sort(out.begin(), out.end());
        return out;
    }

    // Exact distance from the point x to the spectrum.
    Scalar min_distance_to(Scalar x) const {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            d = std::min(d, std::abs(clamped(values_(i)) - x));
        }
        if (extends_above()) d = std::min(d, tail_distance(x, /*above=*/true));
        if (extends_below()) d = std::min(d, tail_distance(x, /*above=*/false));
        return d;
    }

    // Smallest |eigenvalue| magnitudes, for barrier-candidate generation.
    std::vector<Scalar> magnitudes_near_zero(int max_points) const {
        std::vector<Scalar> mags;
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            mags.push_back(std::abs(clamped(values_(i))));
        }
        auto add_side = [&](bool above) {
            for (std::int64_t k : tail_candidates(Scalar(0), above)) {
                mags.push_back(std::abs(eigenvalue_at(k)));
            }
            if (clamp_) mags.push_back(*clamp_);
        };
        if (extends_above()) add_side(true);
        if (extends_below()) add_side(false);
        std::sort(mags.begin(), mags.end());
        if (static_cast<int>(mags.size()) > max_points) mags.resize(max_points);
        return mags;
    }

    // Two diagonal operators are comparable when their index lattices agree.
    static bool same_domain(const DiagonalOperator& a, const DiagonalOperator& b) {
        if (a.extends_above() != b.extends_above()) return false;
        if (a.extends_below() != b.extends_below()) return false;
        if (!a.extends_above() && a.last_index() != b.last_index()) return false;
        if (!a.extends_below() && a.first_index() != b.first_index()) return false;
        return true;
    }

    // Same operator with the explicit block widened to [lo, hi]; the new
    // entries come from the tail formula, so the spectrum is unchanged.
    DiagonalOperator with_explicit_range(std::int64_t lo, std::int64_t hi) const {
        if (lo > first_ || hi < last_index()) {
            throw std::invalid_argument("DiagonalOperator: explicit range can only widen");
        }
        if ((lo < first_ && !extends_below()) || (hi > last_index() && !extends_above())) {
            throw std::invalid_argument("DiagonalOperator: no tail to widen into");
        }
        VectorR<Scalar> v(hi - lo + 1);
        for (std::int64_t k = lo; k <= hi; ++k) v(k - lo) = raw_at(k);
        return DiagonalOperator(lo, std::move(v), tail_, sides_, clamp_, horizon_);
    }

private:
    Scalar raw_at(std::int64_t k) const {
        if (k >= first_ && k <= last_index()) return values_(k - first_);
        if ((k > last_index() && extends_above()) || (k < first_ && extends_below())) {
            return tail_->slope * Scalar(k) + tail_->offset;
        }
        throw std::invalid_argument("DiagonalOperator: index outside the lattice");
    }

    Scalar clamped(Scalar v) const {
        if (!clamp_) return v;
        return std::min(std::max(v, -*clamp_), *clamp_);
    }

    void check_handoff() const {
        auto agree = [&](std::int64_t k) {
            const Scalar declared = values_(k - first_);
            const Scalar formula = tail_->slope * Scalar(k) + tail_->offset;
            if (std::abs(declared - formula) >
                hybrid(Scalar(tol::symmetry), std::abs(declared))) {
                throw std::invalid_argument(
                    "DiagonalOperator: explicit list disagrees with tail at the handoff index");
            }
        };
        if (extends_above()) agree(last_index());
        if (extends_below()) agree(first_);
    }

    // Lattice indices of the unclamped tail nearest to the value x.
    std::vector<std::int64_t> tail_candidates(Scalar x, bool above) const {
        const Scalar s = tail_->slope;
        const Scalar b = tail_->offset;
        const Scalar kx = (x - b) / s;
        const std::int64_t from = above ? last_index() + 1 : first_ - 1;
        std::vector<std::int64_t> out;
        const std::int64_t k0 = static_cast<std::int64_t>(std::floor(kx));
        for (std::int64_t k = k0 - 2; k <= k0 + 2; ++k) {
            std::int64_t kk = above ? std::max(k, from) : std::min(k, from);
            out.push_back(kk);
        }
        out.push_back(from);
        return out;
    }

    Scalar tail_distance(Scalar x, bool above) const {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (std::int64_t k : tail_candidates(x, above)) {
            d = std::min(d, std::abs(eigenvalue_at(k) - x));
        }
        if (clamp_) {
            const Scalar lim = above ? limit_above() : limit_below();
            d = std::min(d, std::abs(lim - x));
        }
        return d;
    }

    // Count tail eigenvalues on one side inside the window. With a clamp the
    // limit value repeats infinitely often, so a window containing it has no
    // finite count.
    std::optional<std::int64_t> tail_count(Scalar lo, Scalar hi, bool include_hi,
                                           bool above) const {
        auto inside = [&](Scalar v) {
            return v >= lo && (include_hi ? v <= hi : v < hi);
        };
        if (clamp_) {
            const Scalar lim = above ? limit_above() : limit_below();
            if (inside(lim)) return std::nullopt;
        }
        const Scalar s = tail_->slope;
        const Scalar b = tail_->offset;
        // Window in raw-value space; with a clamp only the unclamped stretch
        // |raw| < c can land strictly inside the window.
        Scalar wlo = lo, whi = hi;
        if (clamp_) {
            wlo = std::max(wlo, -*clamp_);
            whi = std::min(whi, *clamp_);
        }
        if (wlo > whi) return 0;
        Scalar x1 = (wlo - b) / s;
        Scalar x2 = (whi - b) / s;
        if (x1 > x2) std::swap(x1, x2);
        std::int64_t klo = static_cast<std::int64_t>(std::ceil(x1)) - 2;
        std::int64_t khi = static_cast<std::int64_t>(std::floor(x2)) + 2;
        const std::int64_t from = above ? last_index() + 1 : first_ - 1;
        if (above) {
            klo = std::max(klo, from);
        } else {
            khi = std::min(khi, from);
        }
        if (klo > khi) return 0;
        auto ok = [&](std::int64_t k) { return inside(clamped(s * Scalar(k) + b)); };
        // The ±2 slack absorbs rounding in the continuous bounds; shrink back.
        int step = 0;
        while (klo <= khi && !ok(klo) && step++ < 8) ++klo;
        step = 0;
        while (khi >= klo && !ok(khi) && step++ < 8) --khi;
        if (klo > khi) return 0;
        return khi - klo + 1;
    }

    std::int64_t first_;
    VectorR<Scalar> values_;
    std::optional<Tail> tail_;
    Sides sides_;
    std::optional<Scalar> clamp_;
    std::int64_t horizon_;
};

// Linear combination a·A + b·B of diagonal operators on the same lattice.
// The combined tail must keep a nonzero slope; truncated operands are not
// combinable because a clamp does not commute with affine mixing.
template <typename Scalar>
DiagonalOperator<Scalar> affine_combine(Scalar a, const DiagonalOperator<Scalar>& A,
                                        Scalar b, const DiagonalOperator<Scalar>& B) {
    if (!DiagonalOperator<Scalar>::same_domain(A, B)) {
        throw ShapeMismatch("affine_combine: index lattices differ");
    }
    if (A.clamp_bound() || B.clamp_bound()) {
        throw ShapeMismatch("affine_combine: truncated operators cannot be combined");
    }
    if (static_cast<bool>(A.tail()) != static_cast<bool>(B.tail()) ||
        (A.tail() && A.sides() != B.sides())) {
        throw ShapeMismatch("affine_combine: tail structure differs");
    }
    const std::int64_t lo = std::min(A.first_index(), B.first_index());
    const std::int64_t hi = std::max(A.last_index(), B.last_index());
    const DiagonalOperator<Scalar> Aw = A.with_explicit_range(lo, hi);
    const DiagonalOperator<Scalar> Bw = B.with_explicit_range(lo, hi);
    VectorR<Scalar> v(hi - lo + 1);
    for (std::int64_t k = lo; k <= hi; ++k) {
        v(k - lo) = a * Aw.eigenvalue_at(k) + b * Bw.eigenvalue_at(k);
    }
    std::optional<typename DiagonalOperator<Scalar>::Tail> tail;
    if (A.tail()) {
        const Scalar slope = a * A.tail()->slope + b * B.tail()->slope;
        if (slope == Scalar(0)) {
            throw std::invalid_argument("affine_combine: combined tail slope vanishes");
        }
        tail = {slope, a * A.tail()->offset + b * B.tail()->offset};
    }
    return DiagonalOperator<Scalar>(lo, std::move(v), tail, A.sides(), std::nullopt,
                                    std::max(A.eval_horizon(), B.eval_horizon()));
}

template <typename Scalar>
DiagonalOperator<Scalar> midpoint(const DiagonalOperator<Scalar>& A,
                                  const DiagonalOperator<Scalar>& B) {
    return affine_combine(Scalar(0.5), A, Scalar(0.5), B);
}

template <typename Scalar>
HermitianOperator<Scalar> midpoint(const HermitianOperator<Scalar>& A,
                                   const HermitianOperator<Scalar>& B) {
    if (A.dim() != B.dim()) throw ShapeMismatch("midpoint: dimension mismatch");
    return HermitianOperator<Scalar>(Scalar(0.5) * (A.matrix() + B.matrix()));
}

// -------------------------- SpectralDecomposition ----------------------------

// Eigenvalues in ascending order with a unitary matrix of eigenvectors.
template <typename Scalar = double>
class SpectralDecomposition {
public:
    SpectralDecomposition(VectorR<Scalar> eigenvalues, MatrixC<Scalar> eigenvectors)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
        if (eigenvalues_.size() != eigenvectors_.cols() ||
            eigenvectors_.rows() != eigenvectors_.cols()) {
            throw ShapeMismatch("SpectralDecomposition: inconsistent shapes");
        }
        for (Eigen::Index i = 1; i < eigenvalues_.size(); ++i) {
            if (eigenvalues_(i) < eigenvalues_(i - 1)) {
                throw std::invalid_argument("SpectralDecomposition: eigenvalues not ascending");
            }
        }
        if (unitarity_defect(eigenvectors_) > Scalar(tol::structural)) {
            throw NonUnitaryInput("SpectralDecomposition: eigenvector matrix not unitary");
        }
    }

    const VectorR<Scalar>& eigenvalues() const { return eigenvalues_; }
    const MatrixC<Scalar>& eigenvectors() const { return eigenvectors_; }

private:
    VectorR<Scalar> eigenvalues_;
    MatrixC<Scalar> eigenvectors_;
};

// -------------------------- OrthogonalProjection -----------------------------

// Matrix satisfying P = P† and P² = P within 1e-10; rank is read off the trace.
template <typename Scalar = double>
class OrthogonalProjection {
public:
    template <typename Derived>
    explicit OrthogonalProjection(const Eigen::MatrixBase<Derived>& entries)
        : entries_(entries) {
        if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
            throw NotAProjection("OrthogonalProjection: matrix must be square and nonempty");
        }
        if (hermiticity_defect(entries_) > Scalar(tol::structural)) {
            throw NotAProjection("OrthogonalProjection: P != P†");
        }
        if (operator_norm((entries_ * entries_ - entries_).eval()) > Scalar(tol::structural)) {
            throw NotAProjection("OrthogonalProjection: P² != P");
        }
        const Scalar tr = entries_.trace().real();
        rank_ = static_cast<Eigen::Index>(std::llround(tr));
        if (std::abs(tr - Scalar(rank_)) > Scalar(tol::decision) || rank_ < 0) {
            throw NotAProjection("OrthogonalProjection: trace is not close to an integer");
        }
    }

    Eigen::Index dim() const { return entries_.rows(); }
    Eigen::Index rank() const { return rank_; }
    const MatrixC<Scalar>& matrix() const { return entries_; }

private:
    MatrixC<Scalar> entries_;
    Eigen::Index rank_ = 0;
};

// ----------------------------- IndexedSequence -------------------------------

// Values of a scalar transform applied index-by-index to a diagonal operator,
// over its explicit range, together with the transform's tail limits.
template <typename Scalar, typename Value>
struct IndexedSequence {
    std::int64_t first_index = 0;
    std::vector<Value> values;
    std::optional<Value> limit_below;
    std::optional<Value> limit_above;

    Value at(std::int64_t k) const {
        const std::int64_t i = k - first_index;
        if (i < 0 || i >= static_cast<std::int64_t>(values.size())) {
            throw std::invalid_argument("IndexedSequence: index outside the explicit range");
        }
        return values[static_cast<std::size_t>(i)];
    }
};

// ------------------------------- operations ----------------------------------

template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const HermitianOperator<Scalar>& A) {
    Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(A.matrix());
    if (es.info() != Eigen::Success) {
        throw Error("spectral_decompose: eigensolver failed to converge");
    }
    return SpectralDecomposition<Scalar>(es.eigenvalues(), es.eigenvectors());
}

namespace detail {

// Frobenius norm bounds the operator norm, enough for a cheap safety margin.
template <typename Scalar>
Scalar frobenius(const MatrixC<Scalar>& m) {
    return m.norm();
}

template <typename Scalar>
Scalar spectrum_distance(const HermitianOperator<Scalar>& T, Complex<Scalar> z) {
    Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(T.matrix(), Eigen::EigenvaluesOnly);
    Scalar d = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        d = std::min(d, std::abs(Complex<Scalar>(es.eigenvalues()(i), 0) - z));
    }
    return d;
}

}  // namespace detail

// (T − z)⁻¹ for a dense Hermitian operator.
template <typename Scalar>
MatrixC<Scalar> resolvent(const HermitianOperator<Scalar>& T, Complex<Scalar> z) {
    const Scalar margin = hybrid(Scalar(tol::structural), detail::frobenius<Scalar>(T.matrix()));
    if (std::abs(z.imag()) <= margin) {
        if (detail::spectrum_distance(T, z) <= hybrid(Scalar(tol::structural), T.norm())) {
            throw SingularShift("resolvent: shift grazes the spectrum");
        }
    }
    const Eigen::Index n = T.dim();
    MatrixC<Scalar> shifted = T.matrix() - z * MatrixC<Scalar>::Identity(n, n);
    return shifted.partialPivLu().solve(MatrixC<Scalar>::Identity(n, n));
}

// Scalar resolvent sequence 1/(λ_k − z) with its tail limits (0 for an affine
// tail, 1/(±c − z) for a clamped one).
template <typename Scalar>
IndexedSequence<Scalar, Complex<Scalar>> resolvent(const DiagonalOperator<Scalar>& T,
                                                   Complex<Scalar> z) {
    const Scalar re_dist = T.min_distance_to(z.real());
    const Scalar dist = std::hypot(re_dist, z.imag());
    if (dist <= hybrid(Scalar(tol::structural), T.scale())) {
        throw SingularShift("resolvent: shift grazes the spectrum");
    }
    auto value = [&](Scalar lambda) -> Complex<Scalar> {
        if (std::isinf(lambda)) return Complex<Scalar>(0, 0);
        return Scalar(1) / (Complex<Scalar>(lambda, 0) - z);
    };
    IndexedSequence<Scalar, Complex<Scalar>> out;
    out.first_index = T.first_index();
    for (std::int64_t k = T.first_index(); k <= T.last_index(); ++k) {
        out.values.push_back(value(T.eigenvalue_at(k)));
    }
    if (T.extends_below()) out.limit_below = value(T.limit_below());
    if (T.extends_above()) out.limit_above = value(T.limit_above());
    return out;
}

// Projection onto the graph of T in H × H, per R_T = (I + T²)⁻¹ and the block
// form [[R_T, T·R_T], [T·R_T, T²·R_T]].
template <typename Scalar>
OrthogonalProjection<Scalar> graph_projection(const HermitianOperator<Scalar>& T) {
    const Eigen::Index n = T.dim();
    const MatrixC<Scalar>& M = T.matrix();
    MatrixC<Scalar> iplus = MatrixC<Scalar>::Identity(n, n) + M * M;
    MatrixC<Scalar> R = iplus.llt().solve(MatrixC<Scalar>::Identity(n, n));
    MatrixC<Scalar> TR = M * R;
    MatrixC<Scalar> P(2 * n, 2 * n);
    P.topLeftCorner(n, n) = R;
    P.topRightCorner(n, n) = TR;
    P.bottomLeftCorner(n, n) = TR;
    P.bottomRightCorner(n, n) = M * TR;
    // Symmetrize away solver roundoff before the projection laws are checked.
    P = Scalar(0.5) * (P + P.adjoint()).eval();
    return OrthogonalProjection<Scalar>(P);
}

// Spectral truncation at level n: every eigenvalue is clamped to [−n, n], the
// tail becomes the constant ±n. γ(T, result) ≤ 2/n.
template <typename Scalar>
DiagonalOperator<Scalar> bounded_truncation(const DiagonalOperator<Scalar>& T, Scalar n) {
    if (!(n > Scalar(0))) {
        throw std::invalid_argument("bounded_truncation: level must be positive");
    }
    const Scalar bound = T.clamp_bound() ? std::min(*T.clamp_bound(), n) : n;
    return DiagonalOperator<Scalar>(T.first_index(), T.explicit_values(), T.tail(),
                                    T.sides(), bound, T.eval_horizon());
}

// 1_{[a,b]}(T) with the closed-interval convention; endpoints must stay clear
// of the spectrum.
template <typename Scalar>
OrthogonalProjection<Scalar> spectral_projection_interval(const HermitianOperator<Scalar>& T,
                                                          Scalar a, Scalar b) {
    if (!(a < b)) throw std::invalid_argument("spectral_projection_interval: need a < b");
    const auto dec = spectral_decompose(T);
    const Scalar margin = hybrid(Scalar(tol::structural), T.norm());
    MatrixC<Scalar> P = MatrixC<Scalar>::Zero(T.dim(), T.dim());
    for (Eigen::Index i = 0; i < dec.eigenvalues().size(); ++i) {
        const Scalar lam = dec.eigenvalues()(i);
        if (std::abs(lam - a) <= margin || std::abs(lam - b) <= margin) {
            throw BoundaryOnSpectrum("spectral_projection_interval: endpoint grazes eigenvalue");
        }
        if (lam >= a && lam <= b) {
            P += dec.eigenvectors().col(i) * dec.eigenvectors().col(i).adjoint();
        }
    }
    P = Scalar(0.5) * (P + P.adjoint()).eval();
    return OrthogonalProjection<Scalar>(P);
}

// Rank of 1_{[a,b]} for the diagonal model, by exact lattice counting.
template <typename Scalar>
std::int64_t spectral_count_interval(const DiagonalOperator<Scalar>& T, Scalar a, Scalar b) {
    if (!(a < b)) throw std::invalid_argument("spectral_count_interval: need a < b");
    const Scalar margin = hybrid(Scalar(tol::structural), T.scale());
    if (T.min_distance_to(a) <= margin || T.min_distance_to(b) <= margin) {
        throw BoundaryOnSpectrum("spectral_count_interval: endpoint grazes eigenvalue");
    }
    auto count = T.count_in_closed(a, b);
    if (!count) {
        throw CannotCertify("spectral_count_interval: window holds infinitely many eigenvalues");
    }
    return *count;
}

// Contour quadrature of 1_{[a,b]}(T) = (2πi)⁻¹ ∮_Γ (λ−T)⁻¹ dλ over the circle
// of radius (b−a)/2 centred at (a+b)/2. Uniform nodes converge geometrically.
template <typename Scalar>
MatrixC<Scalar> spectral_projection_contour(const HermitianOperator<Scalar>& T, Scalar a,
                                            Scalar b, int nodes) {
    if (!(a < b)) throw std::invalid_argument("spectral_projection_contour: need a < b");
    if (nodes < 8) throw std::invalid_argument("spectral_projection_contour: need nodes >= 8");
    const Scalar margin = hybrid(Scalar(tol::structural), T.norm());
    if (detail::spectrum_distance(T, Complex<Scalar>(a, 0)) <= margin ||
        detail::spectrum_distance(T, Complex<Scalar>(b, 0)) <= margin) {
        throw BoundaryOnSpectrum("spectral_projection_contour: endpoint grazes eigenvalue");
    }
    const Eigen::Index n = T.dim();
    const Scalar center = (a + b) / 2;
    const Scalar radius = (b - a) / 2;
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> acc = MatrixC<Scalar>::Zero(n, n);
    for (int j = 0; j < nodes; ++j) {
        const Scalar theta = 2 * pi_v<Scalar> * Scalar(j) / Scalar(nodes);
        const Complex<Scalar> w = std::polar(Scalar(1), theta);
        const Complex<Scalar> lambda = Complex<Scalar>(center, 0) + radius * w;
        MatrixC<Scalar> shifted = lambda * I - T.matrix();
        acc += w * shifted.partialPivLu().solve(I);
    }
    return (radius / Scalar(nodes)) * acc;
}

// Bounded transform F_T = T(I+T²)^{-1/2}; eigenvalues map by λ ↦ λ/√(1+λ²).
template <typename Scalar>
HermitianOperator<Scalar> riesz_map(const HermitianOperator<Scalar>& T) {
    const auto dec = spectral_decompose(T);
    VectorR<Scalar> mapped(dec.eigenvalues().size());
    for (Eigen::Index i = 0; i < mapped.size(); ++i) {
        const Scalar lam = dec.eigenvalues()(i);
        mapped(i) = lam / std::hypot(Scalar(1), lam);
    }
    MatrixC<Scalar> S = dec.eigenvectors() *
                        mapped.template cast<Complex<Scalar>>().asDiagonal() *
                        dec.eigenvectors().adjoint();
    S = Scalar(0.5) * (S + S.adjoint()).eval();
    return HermitianOperator<Scalar>(S);
}

// Diagonal case: index-by-index values with tail limits ±1.
template <typename Scalar>
IndexedSequence<Scalar, Scalar> riesz_map(const DiagonalOperator<Scalar>& T) {
    auto value = [](Scalar lambda) -> Scalar {
        if (std::isinf(lambda)) return lambda > 0 ? Scalar(1) : Scalar(-1);
        return lambda / std::hypot(Scalar(1), lambda);
    };
    IndexedSequence<Scalar, Scalar> out;
    out.first_index = T.first_index();
    for (std::int64_t k = T.first_index(); k <= T.last_index(); ++k) {
        out.values.push_back(value(T.eigenvalue_at(k)));
    }
    if (T.extends_below()) out.limit_below = value(T.limit_below());
    if (T.extends_above()) out.limit_above = value(T.limit_above());
    return out;
}

// Inverse bounded transform S ↦ S(I−S²)^{-1/2}. Eigenvalues of S must stay a
// tolerance band away from ±1, the finite-dimensional reading of "S ± I
// injective".
template <typename Scalar>
HermitianOperator<Scalar> riesz_inverse(const HermitianOperator<Scalar>& S) {
    const auto dec = spectral_decompose(S);
    VectorR<Scalar> mapped(dec.eigenvalues().size());
    for (Eigen::Index i = 0; i < mapped.size(); ++i) {
        const Scalar s = dec.eigenvalues()(i);
        if (std::abs(s) >= Scalar(1) - Scalar(tol::decision)) {
            throw NearUnitEigenvalue("riesz_inverse: eigenvalue within tolerance of ±1");
        }
        mapped(i) = s / std::sqrt((Scalar(1) - s) * (Scalar(1) + s));
    }
    MatrixC<Scalar> T = dec.eigenvectors() *
                        mapped.template cast<Complex<Scalar>>().asDiagonal() *
                        dec.eigenvectors().adjoint();
    T = Scalar(0.5) * (T + T.adjoint()).eval();
    return HermitianOperator<Scalar>(T);
}

// Q(P,R) = T(P,R)⁻¹ P with T(P,R) = PR + (I−P)(I−R): the bounded inverse of
// the boundary integral PR: range R → range P.
template <typename Scalar>
MatrixC<Scalar> invertible_pair_inverse(const OrthogonalProjection<Scalar>& P,
                                        const OrthogonalProjection<Scalar>& R) {
    if (P.dim() != R.dim()) throw ShapeMismatch("invertible_pair_inverse: dimension mismatch");
    const Eigen::Index n = P.dim();
    const MatrixC<Scalar> I = MatrixC<Scalar>::Identity(n, n);
    MatrixC<Scalar> T = P.matrix() * R.matrix() + (I - P.matrix()) * (I - R.matrix());
    Eigen::JacobiSVD<MatrixC<Scalar>> svd(T);
    const Scalar smin = svd.singularValues()(svd.singularValues().size() - 1);
    const Scalar smax = svd.singularValues()(0);
    if (!(smin > Scalar(0)) || smax / smin > Scalar(1e8)) {
        throw NonInvertiblePair("invertible_pair_inverse: T(P,R) numerically singular");
    }
    return T.partialPivLu().solve(P.matrix());
}

// dim ker, with eigenvalues clustered at 1e-9 · max(1, scale).
template <typename Scalar>
std::int64_t kernel_dimension(const HermitianOperator<Scalar>& T) {
    Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(T.matrix(), Eigen::EigenvaluesOnly);
    const Scalar thr = hybrid(Scalar(tol::cluster), T.norm());
    std::int64_t n = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (std::abs(es.eigenvalues()(i)) <= thr) ++n;
    }
    return n;
}

template <typename Scalar>
std::int64_t kernel_dimension(const DiagonalOperator<Scalar>& T) {
    const Scalar thr = hybrid(Scalar(tol::cluster), T.scale());
    auto count = T.count_in_closed(-thr, thr);
    return count ? *count : std::numeric_limits<std::int64_t>::max();
}

}  // namespace specflow
