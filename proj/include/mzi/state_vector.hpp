#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace mzi {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// Basis index i = m + N/2 for the |j,m> state with j = N/2. Half-integer m
// values are exactly representable as doubles, so public APIs take m directly.
std::size_t index_of(int particles, double m);
double projection_of(int particles, std::size_t index);
bool is_valid_projection(int particles, double m);

// Pure two-mode state with fixed particle number N, stored over the
// N+1 dimensional |j,m> basis with m = -N/2..N/2.
class StateVector {
public:
    // Wraps amplitudes that are already normalized (checked loosely).
    StateVector(int particles, ComplexVector amplitudes);

    // Rescales arbitrary non-zero amplitudes to unit norm.
    static StateVector normalized(int particles, ComplexVector amplitudes);

    int particles() const { return particles_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    double j() const { return 0.5 * particles_; }

    const ComplexVector& amplitudes() const { return amplitudes_; }
    Complex amplitude(double m) const { return amplitudes_[static_cast<Eigen::Index>(index_of(particles_, m))]; }
    Complex operator[](std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }

    double norm() const { return amplitudes_.norm(); }

    // Global phase fixed so the first amplitude with non-negligible
    // magnitude is real and non-negative.
    StateVector canonical() const;

    // Multiply every amplitude by e^{i phase}.
    StateVector with_global_phase(double phase) const;

private:
    int particles_;
    ComplexVector amplitudes_;
};

}  // namespace mzi
