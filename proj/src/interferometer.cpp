#include "mzi/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mzi/format.hpp"

namespace mzi {

namespace {

std::vector<double> squared_magnitudes(const ComplexVector& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[static_cast<std::size_t>(i)] = std::norm(v[i]);
    }
    return out;
}

}  // namespace

StateVector propagate(const StateVector& state_in, double phi, RotationBackend backend) {
    if (phi == 0.0) {
        return state_in;
    }
    if (backend == RotationBackend::spectral) {
        return rotate_y(state_in, phi);
    }
    return apply_unitary(rotation_y(state_in.particles(), phi, backend), state_in);
}

OutcomeDistribution outcome_distribution(const StateVector& state_in, double phi) {
    const StateVector out = propagate(state_in, phi);
    return {state_in.particles(), phi, squared_magnitudes(out.amplitudes())};
}

std::vector<double> outcome_derivative(const StateVector& state_in, double phi) {
    const StateVector out = propagate(state_in, phi);
    const ComplexVector jy_out = apply_jy(out.particles(), out.amplitudes());
    std::vector<double> derivative(out.dim());
    for (std::size_t i = 0; i < out.dim(); ++i) {
        derivative[i] = 2.0 * std::imag(std::conj(out[i]) * jy_out[static_cast<Eigen::Index>(i)]);
    }
    return derivative;
}

MomentReport jz_moments(const StateVector& state_out) {
    MomentReport report;
    for (std::size_t i = 0; i < state_out.dim(); ++i) {
        const double p = std::norm(state_out[i]);
        const double m = projection_of(state_out.particles(), i);
        const double m2 = m * m;
        report.mean_jz += p * m;
        report.jz2 += p * m2;
        report.jz4 += p * m2 * m2;
    }
    report.var_jz = std::max(0.0, report.jz2 - report.mean_jz * report.mean_jz);
    return report;
}

PhaseScan::PhaseScan(const StateVector& state_in)
    : particles_(state_in.particles()),
      spectrum_(JxSpectrum::get(state_in.particles())),
      coefficients_(spectrum_->y_coefficients(state_in.amplitudes())) {}

ComplexVector PhaseScan::output(double phi) const { return spectrum_->y_from_coefficients(phi, coefficients_); }

std::vector<double> PhaseScan::probabilities(double phi) const { return squared_magnitudes(output(phi)); }

void write_distribution_csv(std::ostream& out, const OutcomeDistribution& distribution) {
    out << "m,P\n";
    for (std::size_t i = 0; i < distribution.probs.size(); ++i) {
        out << format_double(projection_of(distribution.particles, i)) << ',' << format_double(distribution.probs[i])
            << '\n';
    }
}

}  // namespace mzi
