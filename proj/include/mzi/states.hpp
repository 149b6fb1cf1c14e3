#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "mzi/state_vector.hpp"

namespace mzi {

enum class Field { real, complex };
enum class Parity { symmetric, antisymmetric };

// |j,0>, N/2 particles in each input port.
StateVector twin_fock(int particles);

// (|j,q> + |j,-q>) / sqrt(2), 1 <= q <= N/2.
StateVector di_fock(int particles, int q);

// (|j,j> + |j,-j>) / sqrt(2) prepared before the first beam splitter.
StateVector noon_external(int particles);

// Input e^{-i pi/2 Jx}|N00N> whose state after the first beam splitter is N00N.
StateVector noon_internal_input(int particles);

// (w_- |j,-q> + w_0 |j,0> + w_+ |j,q>) / norm. Weights ordered (minus, zero, plus).
StateVector tri_fock(int particles, int q, const std::array<Complex, 3>& weights = {1.0, 1.0, 1.0});

// alpha_m proportional to exp(-m^2 / sigma_prime^2).
StateVector gaussian_state(int particles, double sigma_prime);

struct UnbalancedTwin {
    StateVector state;
    // gamma actually realized after rounding gamma * j to a valid m.
    double realized_gamma;
};

// |j, gamma j> with gamma j rounded to the nearest basis state.
UnbalancedTwin unbalanced_twin(int particles, double gamma);

// Real field: alpha_m uniform in [-1, 1]. Complex field: |alpha_m| uniform in
// [0, 1] with phase uniform in [0, 2 pi). Normalized afterwards.
StateVector random_state(int particles, Field field, std::uint64_t seed);

// alpha_m -> (alpha_m +- alpha_{-m}) / norm. Throws when the projection vanishes.
StateVector symmetrize(const StateVector& state, Parity parity);

// Text format: first line N, then N+1 lines "m re im".
void write_state(std::ostream& out, const StateVector& state);
StateVector read_state(std::istream& in);

}  // namespace mzi
