#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "mzi/spin_algebra.hpp"
#include "mzi/state_vector.hpp"

namespace mzi {

// Exit-port statistics P(m|phi) = |alpha_m(phi)|^2.
struct OutcomeDistribution {
    int particles = 0;
    double phi = 0.0;
    std::vector<double> probs;

    double at(double m) const { return probs.at(index_of(particles, m)); }
};

struct MomentReport {
    double mean_jz = 0.0;
    double var_jz = 0.0;
    double jz2 = 0.0;
    double jz4 = 0.0;
};

// Mach-Zehnder output e^{-i phi Jy}|psi_in>.
StateVector propagate(const StateVector& state_in, double phi, RotationBackend backend = RotationBackend::spectral);

OutcomeDistribution outcome_distribution(const StateVector& state_in, double phi);

// dP(m|phi)/dphi = 2 Im[conj(alpha_m) (Jy psi_out)_m].
std::vector<double> outcome_derivative(const StateVector& state_in, double phi);

MomentReport jz_moments(const StateVector& state_out);

// Precomputes the spectral coefficients of one input so outputs on a dense
// phase grid cost one O(N^2) product each. Immutable; safe to share.
class PhaseScan {
public:
    explicit PhaseScan(const StateVector& state_in);

    int particles() const { return particles_; }
    ComplexVector output(double phi) const;
    std::vector<double> probabilities(double phi) const;

private:
    int particles_;
    std::shared_ptr<const JxSpectrum> spectrum_;
    ComplexVector coefficients_;
};

// CSV with header "m,P", one row per m.
void write_distribution_csv(std::ostream& out, const OutcomeDistribution& distribution);

}  // namespace mzi
