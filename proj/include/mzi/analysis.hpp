#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mzi/interferometer.hpp"
#include "mzi/state_vector.hpp"

namespace mzi {

// State family with parameters, written `name` or `name:key=value,key=value`.
//
//   twin_fock
//   di_fock:q=1            (or qfrac=f, q = round(f N/2))
//   noon_external
//   noon_internal
//   tri_fock:q=1           (qfrac as for di_fock; weights w_minus, w_zero, w_plus)
//   gaussian:sigma=1.7
//   unbalanced:gamma=0.5
//   engineered
//
// Any family accepts phase_seed=<int>: each amplitude alpha_m is multiplied by
// a pseudo-random phase that depends only on (seed, m), so the pattern is the
// same at every N.
struct FamilySpec {
    std::string name;
    std::map<std::string, double> params;

    double param(const std::string& key, double fallback) const;
    std::string to_string() const;
};

FamilySpec parse_family(const std::string& text);
StateVector build_family(const FamilySpec& family, int particles);

struct ScalingPoint {
    int particles = 0;
    double sigma = 0.0;
};

// sigma = C / N^beta fitted by least squares in log-log space.
struct ScalingFit {
    double c = 0.0;
    double beta = 0.0;
    double residual = 0.0;  // RMS of log-space residuals
    std::vector<ScalingPoint> points;

    double predict(double particles) const;
};

// Desk-scale sweep {50, 100, 200, 400, 800}.
std::vector<int> default_sweep();

// (N, 1/sqrt(F(theta))) for each N.
std::vector<ScalingPoint> sweep_fisher(const FamilySpec& family, const std::vector<int>& particle_counts,
                                       double theta = 0.0);

ScalingFit fit_power_law(const std::vector<ScalingPoint>& points);

// Error-propagation Delta phi at the best small operating point for each N, plus its fit.
ScalingFit sweep_error_propagation(const FamilySpec& family, const std::vector<int>& particle_counts);

struct EngineeringStages {
    StateVector rotated;  // twin-Fock after e^{-i (3 pi / 4N) Jx}
    StateVector twisted;  // after the subsequent e^{-i (3 pi / 2) Jz^2}
};

// Twin-Fock state driven by H = g Jx for g tau = 3 pi / 4N, then by
// H = chi Jz^2 for chi tau = 3 pi / 2. Both stages in canonical phase.
EngineeringStages engineer_gaussian_stages(int particles);
StateVector engineer_gaussian(int particles);

// Gaussian state whose m = +-1 components are pi/2 out of phase with m = 0:
// alpha_m = i^{|m|} exp(-m^2 / sigma'^2) / norm.
StateVector dephased_gaussian(int particles, double sigma_prime);

// Jz moments of the propagated state on each phase in `phis`.
std::vector<MomentReport> phase_misalignment_demo(int particles, const std::vector<double>& phis,
                                                  double sigma_prime = 1.7, bool aligned = false);

// CSV header "N,sigma".
void write_sweep_csv(std::ostream& out, const std::vector<ScalingPoint>& points);
// Lines "C <value>", "beta <value>", "residual <value>".
void write_fit_summary(std::ostream& out, const ScalingFit& fit);

}  // namespace mzi
