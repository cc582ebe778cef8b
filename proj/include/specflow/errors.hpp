#pragma once

#include <stdexcept>

namespace specflow {

// Base class for every domain error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two operands do not share a dimension or index structure.
struct ShapeMismatch : Error { using Error::Error; };

// Input matrix violates the hermiticity invariant.
struct NonHermitianInput : Error { using Error::Error; };

// Input matrix violates the unitarity invariant.
struct NonUnitaryInput : Error { using Error::Error; };

// Matrix fails the orthogonal-projection laws P = P†, P² = P.
struct NotAProjection : Error { using Error::Error; };

// Resolvent shift lies on (or grazes) the spectrum.
struct SingularShift : Error { using Error::Error; };

// A spectral-window endpoint grazes the spectrum.
struct BoundaryOnSpectrum : Error { using Error::Error; };

// An eigenvalue of the bounded transform lies too close to ±1.
struct NearUnitEigenvalue : Error { using Error::Error; };

// T(P,R) = PR + (I−P)(I−R) is numerically singular.
struct NonInvertiblePair : Error { using Error::Error; };

// 1 lies on (or grazes) the spectrum of a unitary operator.
struct UnitEigenvalue : Error { using Error::Error; };

// No barrier certificate clears the guard band along some segment.
struct CannotCertify : Error { using Error::Error; };

// A supplied partition fails re-verification against its path.
struct UncertifiedPartition : Error { using Error::Error; };

// Path endpoints required to coincide do not.
struct EndpointMismatch : Error { using Error::Error; };

// Family index parameter outside its admissible range.
struct BadIndex : Error { using Error::Error; };

// Malformed or inconsistent job document.
struct InvalidJob : Error { using Error::Error; };

}  // namespace specflow
