#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specflow/cayley.hpp"
#include "specflow/errors.hpp"
#include "specflow/operator_core.hpp"
#include "specflow/types.hpp"

namespace specflow {

// -------------------------------- OperatorPath -------------------------------

// Sampled path of self-adjoint operators on a strictly increasing parameter
// grid in [0, 1]. Samples are homogeneous in kind and shape. The optional
// Lipschitz bound on the spectral velocity is metadata set by the generating
// family; when present, partition certification uses it to also rule out
// barrier crossings between samples.
template <typename Op>
class OperatorPath {
public:
    using Operator = Op;
    using Scalar = typename Op::ScalarType;

    OperatorPath(std::vector<Scalar> params, std::vector<Op> samples,
                 std::string family_tag = "", std::optional<Scalar> lipschitz = std::nullopt)
        : params_(std::move(params)),
          samples_(std::move(samples)),
          tag_(std::move(family_tag)),
          lipschitz_(lipschitz) {
        if (params_.size() != samples_.size() || params_.size() < 2) {
            throw ShapeMismatch("OperatorPath: need matching params and >= 2 samples");
        }
        if (params_.front() < Scalar(0) || params_.back() > Scalar(1)) {
            throw ShapeMismatch("OperatorPath: parameters must lie in [0, 1]");
        }
        for (std::size_t i = 1; i < params_.size(); ++i) {
            if (!(params_[i] > params_[i - 1])) {
                throw ShapeMismatch("OperatorPath: parameters must be strictly increasing");
            }
        }
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            check_homogeneous(samples_.front(), samples_[i]);
        }
    }

    const std::vector<Scalar>& params() const { return params_; }
    const std::vector<Op>& samples() const { return samples_; }
    const std::string& family_tag() const { return tag_; }
    const std::optional<Scalar>& lipschitz() const { return lipschitz_; }
    std::size_t size() const { return params_.size(); }

    Scalar max_step() const {
        Scalar m(0);
        for (std::size_t i = 1; i < params_.size(); ++i) {
            m = std::max(m, params_[i] - params_[i - 1]);
        }
        return m;
    }

private:
    static void check_homogeneous(const HermitianOperator<Scalar>& a,
                                  const HermitianOperator<Scalar>& b) {
        if (a.dim() != b.dim()) throw ShapeMismatch("OperatorPath: sample dimensions differ");
    }
    static void check_homogeneous(const DiagonalOperator<Scalar>& a,
                                  const DiagonalOperator<Scalar>& b) {
        if (!DiagonalOperator<Scalar>::same_domain(a, b)) {
            throw ShapeMismatch("OperatorPath: sample index lattices differ");
        }
    }

    std::vector<Scalar> params_;
    std::vector<Op> samples_;
    std::string tag_;
    std::optional<Scalar> lipschitz_;
};

// ------------------------------ sample spectra --------------------------------

namespace detail {

// Per-sample spectral view: either the full sorted eigenvalue list of a
// Hermitian sample or the exact lattice of a diagonal one.
template <typename Scalar>
class RealSample {
public:
    static RealSample from_hermitian(const HermitianOperator<Scalar>& T) {
        Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(T.matrix(), Eigen::EigenvaluesOnly);
        RealSample s;
        s.rep_ = es.eigenvalues();
        return s;
    }
    static RealSample from_diagonal(const DiagonalOperator<Scalar>& T) {
        RealSample s;
        s.rep_ = T;
        return s;
    }

    std::optional<std::int64_t> count_in_closed(Scalar lo, Scalar hi) const {
        if (const auto* eig = std::get_if<VectorR<Scalar>>(&rep_)) {
            std::int64_t n = 0;
            for (Eigen::Index i = 0; i < eig->size(); ++i) {
                if ((*eig)(i) >= lo && (*eig)(i) <= hi) ++n;
            }
            return n;
        }
        return std::get<DiagonalOperator<Scalar>>(rep_).count_in_closed(lo, hi);
    }

    // Distance of the spectrum to the nearer of the two barriers ±a.
    Scalar min_distance_to_barriers(Scalar a) const {
        if (const auto* eig = std::get_if<VectorR<Scalar>>(&rep_)) {
            Scalar d = std::numeric_limits<Scalar>::infinity();
            for (Eigen::Index i = 0; i < eig->size(); ++i) {
                d = std::min(d, std::min(std::abs((*eig)(i) - a), std::abs((*eig)(i) + a)));
            }
            return d;
        }
        const auto& diag = std::get<DiagonalOperator<Scalar>>(rep_);
        return std::min(diag.min_distance_to(a), diag.min_distance_to(-a));
    }

    std::vector<Scalar> magnitudes(int max_points) const {
        if (const auto* eig = std::get_if<VectorR<Scalar>>(&rep_)) {
            std::vector<Scalar> m;
            for (Eigen::Index i = 0; i < eig->size(); ++i) m.push_back(std::abs((*eig)(i)));
            std::sort(m.begin(), m.end());
            if (static_cast<int>(m.size()) > max_points) m.resize(max_points);
            return m;
        }
        return std::get<DiagonalOperator<Scalar>>(rep_).magnitudes_near_zero(max_points);
    }

    Scalar scale() const {
        if (const auto* eig = std::get_if<VectorR<Scalar>>(&rep_)) {
            return eig->size() ? eig->cwiseAbs().maxCoeff() : Scalar(0);
        }
        return std::get<DiagonalOperator<Scalar>>(rep_).scale();
    }

private:
    std::variant<VectorR<Scalar>, DiagonalOperator<Scalar>> rep_;
};

template <typename Scalar>
std::vector<RealSample<Scalar>> sample_spectra(
    const OperatorPath<HermitianOperator<Scalar>>& path) {
    std::vector<RealSample<Scalar>> out;
    out.reserve(path.size());
    for (const auto& s : path.samples()) out.push_back(RealSample<Scalar>::from_hermitian(s));
    return out;
}

template <typename Scalar>
std::vector<RealSample<Scalar>> sample_spectra(
    const OperatorPath<DiagonalOperator<Scalar>>& path) {
    std::vector<RealSample<Scalar>> out;
    out.reserve(path.size());
    for (const auto& s : path.samples()) out.push_back(RealSample<Scalar>::from_diagonal(s));
    return out;
}

// Candidate window radii at a segment start: midpoints of gaps in the
// magnitude spectrum around 0 (a barrier pair ±a clears the spectrum exactly
// when a clears the magnitude set), plus the default ladder 1, 2, 4, ... above
// the largest magnitude for the empty-side case.
template <typename Scalar>
std::vector<Scalar> barrier_candidates(const std::vector<Scalar>& magnitudes, Scalar required) {
    std::vector<Scalar> values;
    values.push_back(Scalar(0));
    values.insert(values.end(), magnitudes.begin(), magnitudes.end());
    std::sort(values.begin(), values.end());
    std::vector<Scalar> out;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] - values[i - 1] > 2 * required) {
            out.push_back((values[i] + values[i - 1]) / 2);
        }
    }
    const Scalar top = values.back();
    Scalar rung(1);
    while (rung <= top + 2 * required && std::isfinite(rung)) rung *= 2;
    for (int i = 0; i < 3; ++i, rung *= 2) out.push_back(rung);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// ------------------------------ path partitions -------------------------------

template <typename Scalar = double>
struct SegmentCertificate {
    Scalar min_clearance{};       // smallest barrier distance over the segment
    Scalar required_clearance{};  // guard band, plus the Lipschitz term if used
};

// Breakpoints with per-segment window radii and certification evidence.
template <typename Scalar = double>
struct PathPartition {
    std::vector<std::size_t> breakpoint_indices;  // into the path samples
    std::vector<Scalar> breakpoints;              // parameters at those indices
    std::vector<Scalar> window_radii;             // one per segment
    std::vector<SegmentCertificate<Scalar>> certificates;
    Scalar guard{};

    std::size_t segments() const { return window_radii.size(); }
};

// Circle analogue: barriers at phases π ± ε_j.
template <typename Scalar = double>
struct PhasePartition {
    std::vector<std::size_t> breakpoint_indices;
    std::vector<Scalar> breakpoints;
    std::vector<Scalar> barrier_widths;  // ε_j in (0, π)
    std::vector<SegmentCertificate<Scalar>> certificates;
    Scalar guard{};

    std::size_t segments() const { return barrier_widths.size(); }
};

template <typename Scalar = double>
struct PartitionOptions {
    std::optional<Scalar> guard;   // default 1e-6 · max(1, spectral scale)
    int max_refine = 32;           // candidate retries per segment start
    bool prefer_longest = true;    // false: first viable candidate wins
    std::size_t max_segment = 0;   // cap on samples per segment, 0 = none
    bool use_lipschitz = true;     // consume the path's Lipschitz bound
};

namespace detail {

// Greedy left-to-right certified partition over abstract samples. Sample
// viability and candidate generation are supplied by the caller; the same
// scan drives both the real-line windows and the circle barriers.
template <typename Scalar>
struct GreedyResult {
    std::vector<std::size_t> breakpoint_indices;
    std::vector<Scalar> levels;
    std::vector<SegmentCertificate<Scalar>> certificates;
};

template <typename Scalar, typename Viable, typename Candidates>
GreedyResult<Scalar> greedy_partition(
    std::size_t n_samples, const PartitionOptions<Scalar>& opts, Scalar required,
    Viable&& viable, Candidates&& candidates_at, const char* who) {
    GreedyResult<Scalar> result;
    result.breakpoint_indices.push_back(0);
    std::size_t i = 0;
    while (i + 1 < n_samples) {
        const std::vector<Scalar> candidates = candidates_at(i);
        std::size_t best_reach = i;
        Scalar best_level(0);
        Scalar best_clearance(0);
        int tried = 0;
        for (Scalar level : candidates) {
            if (tried++ >= opts.max_refine) break;
            Scalar clearance = viable(i, level);
            if (!(clearance > required)) continue;
            std::size_t j = i;
            Scalar min_clear = clearance;
            const std::size_t cap =
                opts.max_segment ? std::min(n_samples - 1, i + opts.max_segment)
                                 : n_samples - 1;
            while (j < cap) {
                const Scalar c = viable(j + 1, level);
                if (!(c > required)) break;
                min_clear = std::min(min_clear, c);
                ++j;
            }
            if (j > best_reach) {
                best_reach = j;
                best_level = level;
                best_clearance = min_clear;
            }
            if (!opts.prefer_longest && j > i) break;
            if (j == n_samples - 1) break;  // candidates ascend, keep the smallest full reach
        }
        if (best_reach == i) {
            throw CannotCertify(std::string(who) +
                                ": no barrier clears the guard band at sample " +
                                std::to_string(i));
        }
        result.breakpoint_indices.push_back(best_reach);
        result.levels.push_back(best_level);
        result.certificates.push_back({best_clearance, required});
        i = best_reach;
    }
    return result;
}

}  // namespace detail

// ------------------------------ choose_partition ------------------------------

// Greedy certified partition: at each segment start the candidate radii are
// gap midpoints of the magnitude spectrum (plus the power-of-two ladder), and
// a segment extends while every sample keeps all eigenvalues clear of ±a by
// more than the guard band. Certification is at sample points; a path-level
// Lipschitz bound, when available, extends it between samples.
template <typename Op>
PathPartition<typename Op::ScalarType> choose_partition(
    const OperatorPath<Op>& path,
    PartitionOptions<typename Op::ScalarType> opts = {}) {
    using Scalar = typename Op::ScalarType;
    const auto spectra = detail::sample_spectra(path);
    Scalar scale(0);
    for (const auto& s : spectra) scale = std::max(scale, s.scale());
    const Scalar guard = opts.guard ? *opts.guard : Scalar(1e-6) * std::max(Scalar(1), scale);
    if (!(guard > Scalar(0))) {
        throw std::invalid_argument("choose_partition: guard must be positive");
    }
    Scalar required = guard;
    if (opts.use_lipschitz && path.lipschitz()) {
        required += *path.lipschitz() * path.max_step();
    }
    auto viable = [&](std::size_t i, Scalar a) -> Scalar {
        if (!spectra[i].count_in_closed(-a, a)) return Scalar(0);  // infinite-rank window
        return spectra[i].min_distance_to_barriers(a);
    };
    auto candidates_at = [&](std::size_t i) {
        return detail::barrier_candidates(spectra[i].magnitudes(64), required);
    };
    auto g = detail::greedy_partition<Scalar>(path.size(), opts, required, viable,
                                              candidates_at, "choose_partition");
    PathPartition<Scalar> part;
    part.breakpoint_indices = std::move(g.breakpoint_indices);
    part.window_radii = std::move(g.levels);
    part.certificates = std::move(g.certificates);
    part.guard = guard;
    for (std::size_t idx : part.breakpoint_indices) {
        part.breakpoints.push_back(path.params()[idx]);
    }
    return part;
}

// -------------------------------- sf_phillips ---------------------------------

namespace detail {

template <typename Scalar>
void verify_breakpoints(const std::vector<std::size_t>& idx, std::size_t n_samples,
                        std::size_t n_segments, const char* who) {
    if (idx.size() != n_segments + 1 || idx.front() != 0 || idx.back() != n_samples - 1) {
        throw UncertifiedPartition(std::string(who) + ": breakpoints do not span the path");
    }
    for (std::size_t j = 1; j < idx.size(); ++j) {
        if (!(idx[j] > idx[j - 1]) || idx[j] >= n_samples) {
            throw UncertifiedPartition(std::string(who) + ": breakpoints not increasing");
        }
    }
}

}  // namespace detail

// Phillips window count: dim E^≥ for the window [−a, a] is the number of
// eigenvalues in [0, a]; an eigenvalue exactly at 0 counts as nonnegative.
// The spectral flow telescopes these ranks across the certified partition.
template <typename Op>
std::int64_t sf_phillips(const OperatorPath<Op>& path,
                         const PathPartition<typename Op::ScalarType>& partition) {
    using Scalar = typename Op::ScalarType;
    const auto spectra = detail::sample_spectra(path);
    detail::verify_breakpoints<Scalar>(partition.breakpoint_indices, path.size(),
                                       partition.segments(), "sf_phillips");
    if (partition.certificates.size() != partition.segments()) {
        throw UncertifiedPartition("sf_phillips: certificates missing");
    }
    std::int64_t flow = 0;
    for (std::size_t seg = 0; seg < partition.segments(); ++seg) {
        const Scalar a = partition.window_radii[seg];
        const Scalar required = partition.certificates[seg].required_clearance;
        const std::size_t lo = partition.breakpoint_indices[seg];
        const std::size_t hi = partition.breakpoint_indices[seg + 1];
        for (std::size_t i = lo; i <= hi; ++i) {
            if (!spectra[i].count_in_closed(-a, a) ||
                !(spectra[i].min_distance_to_barriers(a) > required)) {
                throw UncertifiedPartition("sf_phillips: certificate fails at sample " +
                                           std::to_string(i));
            }
        }
        flow += *spectra[hi].count_in_closed(Scalar(0), a) -
                *spectra[lo].count_in_closed(Scalar(0), a);
    }
    return flow;
}

template <typename Op>
std::int64_t sf_phillips(const OperatorPath<Op>& path,
                         PartitionOptions<typename Op::ScalarType> opts = {}) {
    return sf_phillips(path, choose_partition(path, opts));
}

// ------------------------------- phase paths ----------------------------------

// One sample of a unitary path on the circle: either a sorted list of
// eigenphases or the exact Cayley phase lattice of a diagonal operator.
template <typename Scalar = double>
class PhaseSample {
public:
    static PhaseSample from_phases(std::vector<Scalar> phases) {
        std::sort(phases.begin(), phases.end());
        PhaseSample s;
        s.rep_ = std::move(phases);
        return s;
    }
    static PhaseSample from_cayley(CayleyPhases<Scalar> c) {
        PhaseSample s;
        s.rep_ = std::move(c);
        return s;
    }

    std::optional<std::int64_t> count_in_right_open(Scalar lo, Scalar hi) const {
        if (const auto* ph = std::get_if<std::vector<Scalar>>(&rep_)) {
            auto first = std::lower_bound(ph->begin(), ph->end(), lo);
            auto last = std::lower_bound(ph->begin(), ph->end(), hi);
            return static_cast<std::int64_t>(last - first);
        }
        return std::get<CayleyPhases<Scalar>>(rep_).count_in_right_open(lo, hi);
    }

    Scalar min_distance_to_barriers(Scalar eps) const {
        const Scalar lo = pi_v<Scalar> - eps;
        const Scalar hi = pi_v<Scalar> + eps;
        if (const auto* ph = std::get_if<std::vector<Scalar>>(&rep_)) {
            Scalar d = std::numeric_limits<Scalar>::infinity();
            for (Scalar t : *ph) d = std::min(d, std::min(std::abs(t - lo), std::abs(t - hi)));
            return d;
        }
        const auto& c = std::get<CayleyPhases<Scalar>>(rep_);
        return std::min(c.min_distance_to(lo), c.min_distance_to(hi));
    }

    std::vector<Scalar> offsets_from_pi(int max_points) const {
        if (const auto* ph = std::get_if<std::vector<Scalar>>(&rep_)) {
            std::vector<Scalar> out;
            for (Scalar t : *ph) out.push_back(std::abs(t - pi_v<Scalar>));
            std::sort(out.begin(), out.end());
            if (static_cast<int>(out.size()) > max_points) out.resize(max_points);
            return out;
        }
        return std::get<CayleyPhases<Scalar>>(rep_).offsets_near_pi(max_points);
    }

private:
    std::variant<std::vector<Scalar>, CayleyPhases<Scalar>> rep_;
};

template <typename Scalar = double>
struct PhasePath {
    std::vector<Scalar> params;
    std::vector<PhaseSample<Scalar>> samples;
    std::optional<Scalar> lipschitz;  // phase-velocity bound

    Scalar max_step() const {
        Scalar m(0);
        for (std::size_t i = 1; i < params.size(); ++i) m = std::max(m, params[i] - params[i - 1]);
        return m;
    }
};

template <typename Scalar = double>
struct UnitaryPath {
    std::vector<Scalar> params;
    std::vector<UnitaryOperator<Scalar>> samples;
    std::optional<Scalar> lipschitz;
};

// --------------------------- choose_phase_partition ---------------------------

// Circle analogue of choose_partition around the point −1 (phase π).
// Candidates for the barrier half-width ε come from gaps of the |θ − π|
// offsets; the ladder bisects toward π and ε stays strictly below π.
template <typename Scalar>
PhasePartition<Scalar> choose_phase_partition(const PhasePath<Scalar>& path,
                                              PartitionOptions<Scalar> opts = {}) {
    if (path.params.size() != path.samples.size() || path.params.size() < 2) {
        throw ShapeMismatch("choose_phase_partition: need matching params and >= 2 samples");
    }
    const Scalar guard = opts.guard ? *opts.guard : Scalar(1e-6);
    if (!(guard > Scalar(0))) {
        throw std::invalid_argument("choose_phase_partition: guard must be positive");
    }
    Scalar required = guard;
    if (opts.use_lipschitz && path.lipschitz) {
        required += *path.lipschitz * path.max_step();
    }
    auto viable = [&](std::size_t i, Scalar eps) -> Scalar {
        if (!path.samples[i].count_in_right_open(pi_v<Scalar>, pi_v<Scalar> + eps)) {
            return Scalar(0);
        }
        return path.samples[i].min_distance_to_barriers(eps);
    };
    auto candidates_at = [&](std::size_t i) {
        std::vector<Scalar> offsets = path.samples[i].offsets_from_pi(64);
        std::vector<Scalar> values;
        values.push_back(Scalar(0));
        values.insert(values.end(), offsets.begin(), offsets.end());
        std::sort(values.begin(), values.end());
        std::vector<Scalar> out;
        for (std::size_t j = 1; j < values.size(); ++j) {
            if (values[j] - values[j - 1] > 2 * required && values[j - 1] < pi_v<Scalar>) {
                const Scalar mid = (values[j] + values[j - 1]) / 2;
                if (mid < pi_v<Scalar> - required) out.push_back(mid);
            }
        }
        // Bisect the remaining gap up toward π for the empty-side case.
        Scalar top = values.back();
        for (int j = 0; j < 4; ++j) {
            top = (top + pi_v<Scalar>) / 2;
            if (top > values.back() + 2 * required && top < pi_v<Scalar> - required) {
                out.push_back(top);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    auto g = detail::greedy_partition<Scalar>(path.params.size(), opts, required, viable,
                                              candidates_at, "choose_phase_partition");
    PhasePartition<Scalar> part;
    part.breakpoint_indices = std::move(g.breakpoint_indices);
    part.barrier_widths = std::move(g.levels);
    part.certificates = std::move(g.certificates);
    part.guard = guard;
    for (std::size_t idx : part.breakpoint_indices) part.breakpoints.push_back(path.params[idx]);
    return part;
}

// ----------------------------------- wind -------------------------------------

// Winding number through −1: per segment, k(t, ε) counts eigenphases in the
// half-open arc [π, π + ε) and the telescoped sum is the net crossing count.
// The half-open interval realizes the e^{iε} endpoint convention: a phase
// sitting exactly at π is counted, so an eigenvalue arriving at −1 from the
// upper half-plane contributes and one arriving from below does not.
template <typename Scalar>
std::int64_t wind(const PhasePath<Scalar>& path, const PhasePartition<Scalar>& partition) {
    detail::verify_breakpoints<Scalar>(partition.breakpoint_indices, path.params.size(),
                                       partition.segments(), "wind");
    if (partition.certificates.size() != partition.segments()) {
        throw UncertifiedPartition("wind: certificates missing");
    }
    std::int64_t w = 0;
    for (std::size_t seg = 0; seg < partition.segments(); ++seg) {
        const Scalar eps = partition.barrier_widths[seg];
        const Scalar required = partition.certificates[seg].required_clearance;
        const std::size_t lo = partition.breakpoint_indices[seg];
        const std::size_t hi = partition.breakpoint_indices[seg + 1];
        for (std::size_t i = lo; i <= hi; ++i) {
            if (!path.samples[i].count_in_right_open(pi_v<Scalar>, pi_v<Scalar> + eps) ||
                !(path.samples[i].min_distance_to_barriers(eps) > required)) {
                throw UncertifiedPartition("wind: certificate fails at sample " +
                                           std::to_string(i));
            }
        }
        w += *path.samples[hi].count_in_right_open(pi_v<Scalar>, pi_v<Scalar> + eps) -
             *path.samples[lo].count_in_right_open(pi_v<Scalar>, pi_v<Scalar> + eps);
    }
    return w;
}

template <typename Scalar>
std::int64_t wind(const PhasePath<Scalar>& path, PartitionOptions<Scalar> opts = {}) {
    return wind(path, choose_phase_partition(path, opts));
}

template <typename Scalar>
PhasePath<Scalar> phase_path(const UnitaryPath<Scalar>& upath) {
    if (upath.params.size() != upath.samples.size() || upath.params.size() < 2) {
        throw ShapeMismatch("phase_path: need matching params and >= 2 samples");
    }
    PhasePath<Scalar> out;
    out.params = upath.params;
    out.lipschitz = upath.lipschitz;
    for (const auto& U : upath.samples) {
        const auto ph = eigenphases(U);
        out.samples.push_back(PhaseSample<Scalar>::from_phases(
            std::vector<Scalar>(ph.phases.data(), ph.phases.data() + ph.phases.size())));
    }
    return out;
}

template <typename Scalar>
std::int64_t wind(const UnitaryPath<Scalar>& upath, PartitionOptions<Scalar> opts = {}) {
    return wind(phase_path(upath), opts);
}

// --------------------------------- sf_cayley ----------------------------------

// SF(f) = wind(Κ∘f). For matrix samples the eigenphases come from the
// unitaries themselves, an independent route from the window counting.
template <typename Scalar>
std::int64_t sf_cayley(const OperatorPath<HermitianOperator<Scalar>>& path,
                       PartitionOptions<Scalar> opts = {}) {
    PhasePath<Scalar> pp;
    pp.params = path.params();
    if (path.lipschitz()) pp.lipschitz = 2 * *path.lipschitz();  // |dθ/dλ| ≤ 2
    for (const auto& T : path.samples()) {
        const auto ph = eigenphases(cayley(T));
        pp.samples.push_back(PhaseSample<Scalar>::from_phases(
            std::vector<Scalar>(ph.phases.data(), ph.phases.data() + ph.phases.size())));
    }
    return wind(pp, opts);
}

template <typename Scalar>
std::int64_t sf_cayley(const OperatorPath<DiagonalOperator<Scalar>>& path,
                       PartitionOptions<Scalar> opts = {}) {
    PhasePath<Scalar> pp;
    pp.params = path.params();
    if (path.lipschitz()) pp.lipschitz = 2 * *path.lipschitz();
    for (const auto& T : path.samples()) {
        pp.samples.push_back(PhaseSample<Scalar>::from_cayley(cayley(T)));
    }
    return wind(pp, opts);
}

// --------------------------------- sf_oracle ----------------------------------

// Brute-force crossing count: resample the path `refine`× finer by linear
// interpolation, match sorted eigenvalues between consecutive fine samples,
// and count signed zero crossings of the piecewise-linear curves. A curve
// value exactly at 0 counts as nonnegative.
template <typename Scalar>
std::int64_t sf_oracle(const OperatorPath<HermitianOperator<Scalar>>& path, int refine = 20) {
    if (refine < 1) throw std::invalid_argument("sf_oracle: refine must be >= 1");
    auto eigenvalues_of = [](const MatrixC<Scalar>& m) {
        Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(m, Eigen::EigenvaluesOnly);
        return VectorR<Scalar>(es.eigenvalues());
    };
    std::int64_t crossings = 0;
    VectorR<Scalar> prev = eigenvalues_of(path.samples().front().matrix());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const MatrixC<Scalar>& a = path.samples()[i].matrix();
        const MatrixC<Scalar>& b = path.samples()[i + 1].matrix();
        for (int s = 1; s <= refine; ++s) {
            const Scalar t = Scalar(s) / Scalar(refine);
            MatrixC<Scalar> m = (Scalar(1) - t) * a + t * b;
            VectorR<Scalar> cur = eigenvalues_of(m);
            for (Eigen::Index k = 0; k < cur.size(); ++k) {
                const bool was = prev(k) >= Scalar(0);
                const bool now = cur(k) >= Scalar(0);
                if (!was && now) ++crossings;
                if (was && !now) --crossings;
            }
            prev = std::move(cur);
        }
    }
    return crossings;
}

template <typename Scalar>
std::int64_t sf_oracle(const OperatorPath<DiagonalOperator<Scalar>>& path, int refine = 20) {
    if (refine < 1) throw std::invalid_argument("sf_oracle: refine must be >= 1");
    for (const auto& s : path.samples()) {
        if (s.clamp_bound()) {
            throw CannotCertify("sf_oracle: truncated samples are not interpolable");
        }
    }
    const auto& first = path.samples().front();
    std::int64_t crossings = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& A = path.samples()[i];
        const auto& B = path.samples()[i + 1];
        // Indices whose interpolated curve can touch 0 on this interval:
        // the explicit block plus the tail indices between the endpoint roots.
        std::int64_t lo = std::min(A.first_index(), B.first_index());
        std::int64_t hi = std::max(A.last_index(), B.last_index());
        auto widen = [&](const DiagonalOperator<Scalar>& op) {
            if (!op.tail()) return;
            const Scalar root = -op.tail()->offset / op.tail()->slope;
            const std::int64_t k = static_cast<std::int64_t>(std::floor(root));
            if (op.extends_below()) lo = std::min(lo, k - 2);
            if (op.extends_above()) hi = std::max(hi, k + 2);
        };
        widen(A);
        widen(B);
        if (hi - lo > 1'000'000) {
            throw CannotCertify("sf_oracle: unbounded crossing range");
        }
        for (std::int64_t k = lo; k <= hi; ++k) {
            if ((k < first.first_index() && !first.extends_below()) ||
                (k > first.last_index() && !first.extends_above())) {
                continue;
            }
            const Scalar va = A.eigenvalue_at(k);
            const Scalar vb = B.eigenvalue_at(k);
            bool was = va >= Scalar(0);
            for (int s = 1; s <= refine; ++s) {
                const Scalar t = Scalar(s) / Scalar(refine);
                const bool now = ((Scalar(1) - t) * va + t * vb) >= Scalar(0);
                if (!was && now) ++crossings;
                if (was && !now) --crossings;
                was = now;
            }
        }
    }
    return crossings;
}

// -------------------------------- path algebra --------------------------------

namespace detail {

template <typename Scalar>
Scalar sample_distance(const HermitianOperator<Scalar>& a, const HermitianOperator<Scalar>& b) {
    if (a.dim() != b.dim()) return std::numeric_limits<Scalar>::infinity();
    return operator_norm(a.matrix() - b.matrix());
}

template <typename Scalar>
Scalar sample_distance(const DiagonalOperator<Scalar>& a, const DiagonalOperator<Scalar>& b) {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    if (!DiagonalOperator<Scalar>::same_domain(a, b)) return inf;
    if (static_cast<bool>(a.tail()) != static_cast<bool>(b.tail())) return inf;
    if (static_cast<bool>(a.clamp_bound()) != static_cast<bool>(b.clamp_bound())) return inf;
    Scalar d(0);
    if (a.tail()) {
        if (a.tail()->slope != b.tail()->slope) return inf;
        d = std::max(d, std::abs(a.tail()->offset - b.tail()->offset));
    }
    if (a.clamp_bound()) d = std::max(d, std::abs(*a.clamp_bound() - *b.clamp_bound()));
    const std::int64_t lo = std::min(a.first_index(), b.first_index());
    const std::int64_t hi = std::max(a.last_index(), b.last_index());
    for (std::int64_t k = lo; k <= hi; ++k) {
        d = std::max(d, std::abs(a.eigenvalue_at(k) - b.eigenvalue_at(k)));
    }
    return d;
}

template <typename Scalar>
HermitianOperator<Scalar> lerp_sample(const HermitianOperator<Scalar>& a,
                                      const HermitianOperator<Scalar>& b, Scalar t) {
    return HermitianOperator<Scalar>((Scalar(1) - t) * a.matrix() + t * b.matrix());
}

template <typename Scalar>
DiagonalOperator<Scalar> lerp_sample(const DiagonalOperator<Scalar>& a,
                                     const DiagonalOperator<Scalar>& b, Scalar t) {
    return affine_combine(Scalar(1) - t, a, t, b);
}

}  // namespace detail

// Concatenation f1 * f2, reparametrized to [0, 1] with the join at 1/2.
// The end sample of f1 must coincide with the start sample of f2.
template <typename Op>
OperatorPath<Op> path_concat(const OperatorPath<Op>& f1, const OperatorPath<Op>& f2) {
    using Scalar = typename Op::ScalarType;
    const Scalar scale = Scalar(1);  // operators compared entrywise at the join
    if (detail::sample_distance(f1.samples().back(), f2.samples().front()) >
        hybrid(Scalar(tol::symmetry), scale)) {
        throw EndpointMismatch("path_concat: end of f1 differs from start of f2");
    }
    auto normalized = [](const OperatorPath<Op>& f, Scalar t) {
        return (t - f.params().front()) / (f.params().back() - f.params().front());
    };
    std::vector<Scalar> params;
    std::vector<Op> samples;
    for (std::size_t i = 0; i < f1.size(); ++i) {
        params.push_back(normalized(f1, f1.params()[i]) / 2);
        samples.push_back(f1.samples()[i]);
    }
    for (std::size_t i = 1; i < f2.size(); ++i) {
        params.push_back(Scalar(0.5) + normalized(f2, f2.params()[i]) / 2);
        samples.push_back(f2.samples()[i]);
    }
    std::optional<Scalar> lip;
    if (f1.lipschitz() && f2.lipschitz()) {
        lip = 2 * std::max(*f1.lipschitz(), *f2.lipschitz());  // halved parameter spans
    }
    return OperatorPath<Op>(std::move(params), std::move(samples),
                            "concat(" + f1.family_tag() + "," + f2.family_tag() + ")", lip);
}

template <typename Op>
OperatorPath<Op> path_reverse(const OperatorPath<Op>& f) {
    using Scalar = typename Op::ScalarType;
    std::vector<Scalar> params;
    std::vector<Op> samples;
    for (std::size_t i = f.size(); i-- > 0;) {
        params.push_back(f.params().front() + f.params().back() - f.params()[i]);
        samples.push_back(f.samples()[i]);
    }
    return OperatorPath<Op>(std::move(params), std::move(samples),
                            "reverse(" + f.family_tag() + ")", f.lipschitz());
}

// ------------------------------- homotopy_check -------------------------------

template <typename Scalar = double>
struct HomotopyReport {
    std::vector<Scalar> s_values;
    std::vector<std::int64_t> sf_values;
    bool constant_sf = false;
};

// Straight-line homotopy H(s, ·) = (1−s)·f0 + s·f1 with fixed endpoints;
// spectral flow is computed on each intermediate path and must be constant.
template <typename Op>
HomotopyReport<typename Op::ScalarType> homotopy_check(
    const OperatorPath<Op>& f0, const OperatorPath<Op>& f1, int steps,
    PartitionOptions<typename Op::ScalarType> opts = {}) {
    using Scalar = typename Op::ScalarType;
    if (steps < 2) throw std::invalid_argument("homotopy_check: need steps >= 2");
    if (f0.size() != f1.size()) {
        throw ShapeMismatch("homotopy_check: parameter grids differ in length");
    }
    for (std::size_t i = 0; i < f0.size(); ++i) {
        if (std::abs(f0.params()[i] - f1.params()[i]) > Scalar(tol::symmetry)) {
            throw ShapeMismatch("homotopy_check: parameter grids differ");
        }
    }
    if (detail::sample_distance(f0.samples().front(), f1.samples().front()) >
            Scalar(tol::symmetry) ||
        detail::sample_distance(f0.samples().back(), f1.samples().back()) >
            Scalar(tol::symmetry)) {
        throw EndpointMismatch("homotopy_check: endpoint operators differ");
    }
    HomotopyReport<Scalar> report;
    for (int j = 0; j < steps; ++j) {
        const Scalar s = Scalar(j) / Scalar(steps - 1);
        std::vector<Op> samples;
        samples.reserve(f0.size());
        for (std::size_t i = 0; i < f0.size(); ++i) {
            samples.push_back(detail::lerp_sample(f0.samples()[i], f1.samples()[i], s));
        }
        std::optional<Scalar> lip;
        if (f0.lipschitz() && f1.lipschitz()) lip = std::max(*f0.lipschitz(), *f1.lipschitz());
        OperatorPath<Op> hpath(f0.params(), std::move(samples), "homotopy", lip);
        report.s_values.push_back(s);
        report.sf_values.push_back(sf_phillips(hpath, opts));
    }
    report.constant_sf = std::all_of(report.sf_values.begin(), report.sf_values.end(),
                                     [&](std::int64_t v) { return v == report.sf_values[0]; });
    return report;
}

}  // namespace specflow
