#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mzi/state_vector.hpp"

namespace mzi {

// Raised when d<Jz>/dphi vanishes and error propagation is undefined.
class FlatSignalError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Raised when <Jz^4> - <Jz^2>^2 vanishes.
class DegenerateMomentsError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct FisherReport {
    double theta = 0.0;
    double fisher = 0.0;
    double sigma = 0.0;  // 1/sqrt(F), +inf when F == 0
    int degenerate_terms = 0;
};

// F = sum_m (dP_m/dphi)^2 / P_m at theta. Outcomes with P_m below
// tol::kDegenerateProbability contribute their phi -> theta limit 4 |(Jy psi_out)_m|^2.
FisherReport fisher_information(const StateVector& state_in, double theta);

// Normalized phase density sampled on a uniform grid over [-pi/2, pi/2].
struct LikelihoodProfile {
    double theta = 0.0;
    double measurements = 0.0;
    std::vector<double> grid;
    std::vector<double> density;

    double cell() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

// max(4096, 64 N): resolves oscillations of period 2 pi / N.
std::size_t default_grid_size(int particles);

std::vector<double> phase_grid(std::size_t size);

// Uniform density 1/pi.
LikelihoodProfile uniform_profile(std::size_t grid_size);

// P_M(phi|theta) proportional to prod_m P(m|phi)^{P(m|theta) M}. M may be fractional.
// grid_size == 0 selects default_grid_size.
LikelihoodProfile likelihood_profile(const StateVector& state_in, double theta, double measurements,
                                     std::size_t grid_size = 0);

struct MeasurementRecord {
    std::vector<double> outcomes;  // m values
    std::uint64_t seed = 0;
    double theta = 0.0;
};

// M i.i.d. exit-port outcomes drawn from P(m|theta).
MeasurementRecord sample_outcomes(const StateVector& state_in, double theta, int measurements, std::uint64_t seed);

// Bayes update prior(phi) prod_k P(m_k|phi). Without a prior the uniform
// density on the default grid is used.
LikelihoodProfile posterior_from_outcomes(const StateVector& state_in, const MeasurementRecord& record,
                                          const std::optional<LikelihoodProfile>& prior = std::nullopt);

double profile_integral(const LikelihoodProfile& profile);
double profile_mean(const LikelihoodProfile& profile);
double profile_variance(const LikelihoodProfile& profile);
// Sub-profile between the local minima bracketing the peak nearest phi (not renormalized).
LikelihoodProfile profile_basin(const LikelihoodProfile& profile, double phi);
// Grid maximum refined by a parabola through its neighbours.
double profile_argmax(const LikelihoodProfile& profile);
// Refined positions of every local maximum whose refined height is within rel_tol of the tallest.
std::vector<double> profile_maxima(const LikelihoodProfile& profile, double rel_tol);

// Delta phi = Delta Jz / |d<Jz>/dphi| at theta. Throws FlatSignalError.
double error_propagation_uncertainty(const StateVector& state_in, double theta);

struct ErrorPropagationPoint {
    double theta = 0.0;
    double delta_phi = 0.0;
};

// theta = k pi / 200 for k = 0..10.
std::vector<double> default_error_propagation_thetas();

// Smallest Delta phi over the candidate operating points. Throws FlatSignalError
// if the signal is flat at all of them.
ErrorPropagationPoint best_error_propagation(const StateVector& state_in,
                                             const std::vector<double>& thetas = default_error_propagation_thetas());

// <Jz^2> / sqrt(<Jz^4> - <Jz^2>^2) of the output state.
double snr_jz_squared(const StateVector& state_in, double theta);

struct CramerRaoReport {
    bool defined = false;  // false when error propagation is undefined
    double lhs = 0.0;      // Delta phi^2
    double rhs = 0.0;      // 1/F
    bool holds = true;
};

CramerRaoReport cramer_rao_check(const StateVector& state_in, double theta, double relative_slack = 1e-8);

// CSV with header "phi,density".
void write_profile_csv(std::ostream& out, const LikelihoodProfile& profile);
// Flat JSON object with keys theta, F, sigma, degenerate_terms.
std::string fisher_report_json(const FisherReport& report);

}  // namespace mzi
