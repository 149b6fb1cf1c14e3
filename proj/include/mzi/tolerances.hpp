#pragma once

namespace mzi::tol {

// Algebraic identities (commutators, hermiticity, normalization of constructors).
inline constexpr double kAlgebraic = 1e-12;
// Floating matrix products: unitarity, norm preservation, decomposition equivalence.
inline constexpr double kProduct = 1e-10;
// Independent rotation backends.
inline constexpr double kBackend = 1e-9;
// Loose guard used when a StateVector is wrapped without renormalization.
inline constexpr double kNormGuard = 1e-9;

// Outcome probabilities below this are treated as exact zeros in Fisher sums.
inline constexpr double kDegenerateProbability = 1e-12;
// |d<Jz>/dphi| below this makes error propagation undefined.
inline constexpr double kFlatSignal = 1e-12;
// Likelihood quadrature must integrate to one within this.
inline constexpr double kQuadrature = 1e-8;

// First amplitude above this magnitude fixes the global phase.
inline constexpr double kCanonicalPhase = 1e-12;

}  // namespace mzi::tol
