#include "mzi/state_vector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mzi/tolerances.hpp"

namespace mzi {

namespace {

void check_particles(int particles) {
    if (particles < 1) {
        throw std::invalid_argument("particle number must be >= 1, got " + std::to_string(particles));
    }
}

}  // namespace

bool is_valid_projection(int particles, double m) {
    const double shifted = m + 0.5 * particles;
    return std::isfinite(m) && shifted >= 0.0 && shifted <= particles && shifted == std::floor(shifted);
}

std::size_t index_of(int particles, double m) {
    if (!is_valid_projection(particles, m)) {
        throw std::out_of_range("m = " + std::to_string(m) + " is not a valid projection for N = " +
                                std::to_string(particles));
    }
    return static_cast<std::size_t>(m + 0.5 * particles);
}

double projection_of(int particles, std::size_t index) {
    return static_cast<double>(index) - 0.5 * particles;
}

StateVector::StateVector(int particles, ComplexVector amplitudes)
    : particles_(particles), amplitudes_(std::move(amplitudes)) {
    check_particles(particles_);
    if (amplitudes_.size() != particles_ + 1) {
        throw std::invalid_argument("state of N = " + std::to_string(particles_) + " needs " +
                                    std::to_string(particles_ + 1) + " amplitudes, got " +
                                    std::to_string(amplitudes_.size()));
    }
    if (!amplitudes_.allFinite()) {
        throw std::invalid_argument("state amplitudes must be finite");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > tol::kNormGuard) {
        throw std::invalid_argument("state is not normalized (norm = " + std::to_string(amplitudes_.norm()) + ")");
    }
}

StateVector StateVector::normalized(int particles, ComplexVector amplitudes) {
    check_particles(particles);
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("cannot normalize a zero or non-finite amplitude vector");
    }
    amplitudes /= n;
    return StateVector(particles, std::move(amplitudes));
}

StateVector StateVector::canonical() const {
    for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
        if (std::abs(amplitudes_[i]) > tol::kCanonicalPhase) {
            ComplexVector out = amplitudes_ * std::polar(1.0, -std::arg(amplitudes_[i]));
            out[i] = Complex(std::abs(amplitudes_[i]), 0.0);
            return StateVector(particles_, std::move(out));
        }
    }
    return *this;
}

StateVector StateVector::with_global_phase(double phase) const {
    ComplexVector out = amplitudes_ * std::polar(1.0, phase);
    return StateVector(particles_, std::move(out));
}

}  // namespace mzi
