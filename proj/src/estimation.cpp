#include "mzi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "json.hpp"

#include "mzi/format.hpp"
#include "mzi/interferometer.hpp"
#include "mzi/parallel.hpp"
#include "mzi/spin_algebra.hpp"
#include "mzi/tolerances.hpp"

namespace mzi {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        sum += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
    }
    return sum;
}

// exp(log_density - max), then normalized by trapezoid quadrature.
std::vector<double> normalize_log_density(const std::vector<double>& grid, std::vector<double> log_density) {
    const double peak = *std::max_element(log_density.begin(), log_density.end());
    if (!std::isfinite(peak)) {
        throw std::domain_error("phase density vanishes on the whole grid");
    }
    for (double& v : log_density) {
        v = std::exp(v - peak);
    }
    const double area = trapezoid(grid, log_density);
    for (double& v : log_density) {
        v /= area;
    }
    return log_density;
}

void check_grid_size(std::size_t size) {
    if (size < 2) {
        throw std::invalid_argument("phase grid needs at least 2 points");
    }
}

// log-density of sum_m weight_m log P(m|phi) over the grid; zero weights are skipped.
std::vector<double> weighted_log_likelihood(const StateVector& state_in, const std::vector<double>& weights,
                                            const std::vector<double>& grid) {
    const PhaseScan scan(state_in);
    std::vector<std::size_t> active;
    for (std::size_t m = 0; m < weights.size(); ++m) {
        if (weights[m] > 0.0) {
            active.push_back(m);
        }
    }
    std::vector<double> log_density(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t g) {
        const std::vector<double> probs = scan.probabilities(grid[g]);
        double total = 0.0;
        for (std::size_t m : active) {
            total += weights[m] * std::log(probs[m]);
        }
        log_density[g] = std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
    });
    return log_density;
}

double phase_shift_slope(const StateVector& out) {
    // d<Jz>/dphi = sum_m m dP_m/dphi with dP_m/dphi = 2 Im[conj(a_m) (Jy a)_m].
    const ComplexVector jy_out = apply_jy(out.particles(), out.amplitudes());
    double slope = 0.0;
    for (std::size_t i = 0; i < out.dim(); ++i) {
        slope += projection_of(out.particles(), i) * 2.0 *
                 std::imag(std::conj(out[i]) * jy_out[static_cast<Eigen::Index>(i)]);
    }
    return slope;
}

}  // namespace

FisherReport fisher_information(const StateVector& state_in, double theta) {
    const StateVector out = propagate(state_in, theta);
    const ComplexVector jy_out = apply_jy(out.particles(), out.amplitudes());

    FisherReport report;
    report.theta = theta;
    for (std::size_t i = 0; i < out.dim(); ++i) {
        const Complex a = out[i];
        const Complex b = jy_out[static_cast<Eigen::Index>(i)];
        const double p = std::norm(a);
        if (p < tol::kDegenerateProbability) {
            // alpha_m(theta) = 0 makes P quadratic in (phi - theta): the 0/0 term tends to 4|b|^2.
            report.fisher += 4.0 * std::norm(b);
            ++report.degenerate_terms;
        } else {
            const double dp = 2.0 * std::imag(std::conj(a) * b);
            report.fisher += dp * dp / p;
        }
    }
    report.sigma = report.fisher > 0.0 ? 1.0 / std::sqrt(report.fisher) : std::numeric_limits<double>::infinity();
    return report;
}

std::size_t default_grid_size(int particles) {
    return std::max<std::size_t>(4096, 64 * static_cast<std::size_t>(std::max(particles, 0)));
}

std::vector<double> phase_grid(std::size_t size) {
    check_grid_size(size);
    std::vector<double> grid(size);
    const double step = std::numbers::pi / static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i) {
        grid[i] = -kHalfPi + step * static_cast<double>(i);
    }
    grid.back() = kHalfPi;
    return grid;
}

LikelihoodProfile uniform_profile(std::size_t grid_size) {
    LikelihoodProfile profile;
    profile.grid = phase_grid(grid_size);
    profile.density.assign(grid_size, 1.0 / std::numbers::pi);
    return profile;
}

LikelihoodProfile likelihood_profile(const StateVector& state_in, double theta, double measurements,
                                     std::size_t grid_size) {
    if (!(measurements >= 0.0) || !std::isfinite(measurements)) {
        throw std::invalid_argument("measurement count must be finite and >= 0");
    }
    if (grid_size == 0) {
        grid_size = default_grid_size(state_in.particles());
    }
    LikelihoodProfile profile = uniform_profile(grid_size);
    profile.theta = theta;
    profile.measurements = measurements;
    if (measurements == 0.0) {
        return profile;
    }

    const OutcomeDistribution at_theta = outcome_distribution(state_in, theta);
    std::vector<double> weights(at_theta.probs.size(), 0.0);
    for (std::size_t m = 0; m < weights.size(); ++m) {
        // Outcomes that cannot occur at theta carry no factor in the product.
        if (at_theta.probs[m] >= tol::kDegenerateProbability) {
            weights[m] = at_theta.probs[m] * measurements;
        }
    }
    profile.density = normalize_log_density(profile.grid, weighted_log_likelihood(state_in, weights, profile.grid));
    return profile;
}

MeasurementRecord sample_outcomes(const StateVector& state_in, double theta, int measurements, std::uint64_t seed) {
    if (measurements < 0) {
        throw std::invalid_argument("measurement count must be >= 0");
    }
    const OutcomeDistribution dist = outcome_distribution(state_in, theta);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> draw(dist.probs.begin(), dist.probs.end());

    MeasurementRecord record;
    record.seed = seed;
    record.theta = theta;
    record.outcomes.reserve(static_cast<std::size_t>(measurements));
    for (int k = 0; k < measurements; ++k) {
        record.outcomes.push_back(projection_of(state_in.particles(), draw(rng)));
    }
    return record;
}

LikelihoodProfile posterior_from_outcomes(const StateVector& state_in, const MeasurementRecord& record,
                                          const std::optional<LikelihoodProfile>& prior) {
    const int particles = state_in.particles();
    std::vector<double> counts(static_cast<std::size_t>(particles) + 1, 0.0);
    for (double m : record.outcomes) {
        if (!is_valid_projection(particles, m)) {
            throw std::out_of_range("outcome m = " + format_double(m) + " is outside [-N/2, N/2]");
        }
        counts[index_of(particles, m)] += 1.0;
    }

    LikelihoodProfile profile = prior ? *prior : uniform_profile(default_grid_size(particles));
    if (profile.grid.size() != profile.density.size() || profile.grid.size() < 2) {
        throw std::invalid_argument("prior profile grid and density sizes disagree");
    }
    profile.theta = record.theta;
    profile.measurements = (prior ? prior->measurements : 0.0) + static_cast<double>(record.outcomes.size());
    if (record.outcomes.empty()) {
        return profile;
    }

    std::vector<double> log_density = weighted_log_likelihood(state_in, counts, profile.grid);
    for (std::size_t g = 0; g < log_density.size(); ++g) {
        log_density[g] += std::log(profile.density[g]);
    }
    profile.density = normalize_log_density(profile.grid, std::move(log_density));
    return profile;
}

double profile_integral(const LikelihoodProfile& profile) { return trapezoid(profile.grid, profile.density); }

double profile_mean(const LikelihoodProfile& profile) {
    std::vector<double> weighted(profile.grid.size());
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        weighted[i] = profile.grid[i] * profile.density[i];
    }
    return trapezoid(profile.grid, weighted) / profile_integral(profile);
}

double profile_variance(const LikelihoodProfile& profile) {
    const double mean = profile_mean(profile);
    std::vector<double> weighted(profile.grid.size());
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        const double d = profile.grid[i] - mean;
        weighted[i] = d * d * profile.density[i];
    }
    return trapezoid(profile.grid, weighted) / profile_integral(profile);
}

LikelihoodProfile profile_basin(const LikelihoodProfile& profile, double phi) {
    const auto& g = profile.grid;
    if (g.empty()) {
        throw std::invalid_argument("empty profile");
    }
    const auto at = std::lower_bound(g.begin(), g.end(), phi);
    std::size_t i = static_cast<std::size_t>(std::min(at - g.begin(), static_cast<std::ptrdiff_t>(g.size() - 1)));
    const auto& d = profile.density;
    // Climb to the peak, then descend both sides to the bracketing minima.
    while (i + 1 < d.size() && d[i + 1] > d[i]) ++i;
    while (i > 0 && d[i - 1] > d[i]) --i;
    std::size_t lo = i, hi = i;
    while (lo > 0 && d[lo - 1] <= d[lo]) --lo;
    while (hi + 1 < d.size() && d[hi + 1] <= d[hi]) ++hi;
    LikelihoodProfile basin;
    basin.theta = profile.theta;
    basin.measurements = profile.measurements;
    basin.grid.assign(g.begin() + static_cast<std::ptrdiff_t>(lo), g.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    basin.density.assign(d.begin() + static_cast<std::ptrdiff_t>(lo), d.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    return basin;
}

namespace {

struct Peak {
    double position;
    double height;
};

Peak refine_peak(const LikelihoodProfile& profile, std::size_t i) {
    if (i == 0 || i + 1 >= profile.grid.size()) {
        return {profile.grid[i], profile.density[i]};
    }
    const double y0 = profile.density[i - 1];
    const double y1 = profile.density[i];
    const double y2 = profile.density[i + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    if (!(curvature < 0.0)) {
        return {profile.grid[i], y1};
    }
    const double shift = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
    return {profile.grid[i] + shift * profile.cell(), y1 - 0.25 * (y0 - y2) * shift};
}

}  // namespace

double profile_argmax(const LikelihoodProfile& profile) {
    if (profile.density.empty()) {
        throw std::invalid_argument("empty profile");
    }
    const auto it = std::max_element(profile.density.begin(), profile.density.end());
    return refine_peak(profile, static_cast<std::size_t>(it - profile.density.begin())).position;
}

std::vector<double> profile_maxima(const LikelihoodProfile& profile, double rel_tol) {
    const auto& d = profile.density;
    if (d.empty()) {
        throw std::invalid_argument("empty profile");
    }
    std::vector<Peak> peaks;
    double top = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const bool left_ok = i == 0 || d[i] >= d[i - 1];
        const bool right_ok = i + 1 == d.size() || d[i] > d[i + 1];
        if (left_ok && right_ok) {
            peaks.push_back(refine_peak(profile, i));
            top = std::max(top, peaks.back().height);
        }
    }
    std::vector<double> maxima;
    for (const Peak& p : peaks) {
        if (p.height >= (1.0 - rel_tol) * top) maxima.push_back(p.position);
    }
    return maxima;
}

double error_propagation_uncertainty(const StateVector& state_in, double theta) {
    const StateVector out = propagate(state_in, theta);
    const double slope = phase_shift_slope(out);
    if (!(std::abs(slope) > tol::kFlatSignal)) {
        throw FlatSignalError("d<Jz>/dphi vanishes at theta = " + format_double(theta) +
                              "; error propagation is undefined");
    }
    return std::sqrt(jz_moments(out).var_jz) / std::abs(slope);
}

std::vector<double> default_error_propagation_thetas() {
    std::vector<double> thetas;
    for (int k = 0; k <= 10; ++k) {
        thetas.push_back(k * std::numbers::pi / 200.0);
    }
    return thetas;
}

ErrorPropagationPoint best_error_propagation(const StateVector& state_in, const std::vector<double>& thetas) {
    std::optional<ErrorPropagationPoint> best;
    for (double theta : thetas) {
        try {
            const double dphi = error_propagation_uncertainty(state_in, theta);
            if (!best || dphi < best->delta_phi) {
                best = ErrorPropagationPoint{theta, dphi};
            }
        } catch (const FlatSignalError&) {
        }
    }
    if (!best) {
        throw FlatSignalError("d<Jz>/dphi vanishes at every candidate operating point");
    }
    return *best;
}

double snr_jz_squared(const StateVector& state_in, double theta) {
    const MomentReport moments = jz_moments(propagate(state_in, theta));
    const double spread = moments.jz4 - moments.jz2 * moments.jz2;
    if (!(spread > 1e-14 * std::max(1.0, moments.jz4))) {
        throw DegenerateMomentsError("<Jz^4> - <Jz^2>^2 vanishes; Jz^2 signal-to-noise is undefined");
    }
    return moments.jz2 / std::sqrt(spread);
}

CramerRaoReport cramer_rao_check(const StateVector& state_in, double theta, double relative_slack) {
    CramerRaoReport report;
    const FisherReport fisher = fisher_information(state_in, theta);
    report.rhs = fisher.fisher > 0.0 ? 1.0 / fisher.fisher : std::numeric_limits<double>::infinity();
    try {
        const double dphi = error_propagation_uncertainty(state_in, theta);
        report.defined = true;
        report.lhs = dphi * dphi;
        report.holds = report.lhs >= report.rhs * (1.0 - relative_slack);
    } catch (const FlatSignalError&) {
        report.defined = false;
        report.holds = true;
    }
    return report;
}

void write_profile_csv(std::ostream& out, const LikelihoodProfile& profile) {
    out << "phi,density\n";
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        out << format_double(profile.grid[i]) << ',' << format_double(profile.density[i]) << '\n';
    }
}

std::string fisher_report_json(const FisherReport& report) {
    nlohmann::ordered_json j;
    j["theta"] = report.theta;
    j["F"] = report.fisher;
    j["sigma"] = std::isfinite(report.sigma) ? nlohmann::ordered_json(report.sigma) : nlohmann::ordered_json(nullptr);
    j["degenerate_terms"] = report.degenerate_terms;
    return j.dump(2);
}

}  // namespace mzi
