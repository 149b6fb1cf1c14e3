#include "mzi/analysis.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mzi/estimation.hpp"
#include "mzi/format.hpp"
#include "mzi/parallel.hpp"
#include "mzi/spin_algebra.hpp"
#include "mzi/states.hpp"

namespace mzi {

namespace {

int resolve_q(const FamilySpec& family, int particles) {
    if (family.params.count("q")) {
        return static_cast<int>(std::lround(family.params.at("q")));
    }
    if (family.params.count("qfrac")) {
        const long q = std::lround(family.params.at("qfrac") * particles / 2.0);
        return static_cast<int>(std::max(1L, q));
    }
    return 1;
}

StateVector apply_phase_pattern(const StateVector& state, std::uint64_t seed) {
    ComplexVector amps = state.amplitudes();
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        const auto twice_m = static_cast<std::int64_t>(std::llround(2.0 * projection_of(state.particles(), i)));
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(twice_m + (1LL << 30))};
        std::mt19937_64 rng(seq);
        const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
        amps[i] *= std::polar(1.0, phase);
    }
    return StateVector(state.particles(), std::move(amps));
}

void check_known_keys(const FamilySpec& family, std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : family.params) {
        if (key == "phase_seed") {
            continue;
        }
        bool known = false;
        for (const char* k : keys) {
            known = known || key == k;
        }
        if (!known) {
            throw std::invalid_argument("family '" + family.name + "' does not take parameter '" + key + "'");
        }
    }
}

StateVector build_base(const FamilySpec& family, int particles) {
    const std::string& name = family.name;
    if (name == "twin_fock") {
        check_known_keys(family, {});
        return twin_fock(particles);
    }
    if (name == "di_fock") {
        check_known_keys(family, {"q", "qfrac"});
        return di_fock(particles, resolve_q(family, particles));
    }
    if (name == "noon_external") {
        check_known_keys(family, {});
        return noon_external(particles);
    }
    if (name == "noon_internal") {
        check_known_keys(family, {});
        return noon_internal_input(particles);
    }
    if (name == "tri_fock") {
        check_known_keys(family, {"q", "qfrac", "w_minus", "w_zero", "w_plus"});
        return tri_fock(particles, resolve_q(family, particles),
                        {family.param("w_minus", 1.0), family.param("w_zero", 1.0), family.param("w_plus", 1.0)});
    }
    if (name == "gaussian") {
        check_known_keys(family, {"sigma"});
        return gaussian_state(particles, family.param("sigma", 1.7));
    }
    if (name == "unbalanced") {
        check_known_keys(family, {"gamma"});
        return unbalanced_twin(particles, family.param("gamma", 0.5)).state;
    }
    if (name == "engineered") {
        check_known_keys(family, {});
        return engineer_gaussian(particles);
    }
    throw std::invalid_argument("unknown state family '" + name + "'");
}

}  // namespace

double FamilySpec::param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string FamilySpec::to_string() const {
    std::string out = name;
    char sep = ':';
    for (const auto& [key, value] : params) {
        out += sep + key + '=' + format_double(value);
        sep = ',';
    }
    return out;
}

FamilySpec parse_family(const std::string& text) {
    FamilySpec family;
    const auto colon = text.find(':');
    family.name = text.substr(0, colon);
    if (family.name.empty()) {
        throw std::invalid_argument("empty state family name");
    }
    if (colon == std::string::npos) {
        return family;
    }
    std::istringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("family parameter '" + item + "' is not key=value");
        }
        family.params[item.substr(0, eq)] = parse_double(item.substr(eq + 1));
    }
    return family;
}

StateVector build_family(const FamilySpec& family, int particles) {
    StateVector state = build_base(family, particles);
    if (family.params.count("phase_seed")) {
        state = apply_phase_pattern(state, static_cast<std::uint64_t>(family.params.at("phase_seed")));
    }
    return state;
}

double ScalingFit::predict(double particles) const { return c / std::pow(particles, beta); }

std::vector<int> default_sweep() { return {50, 100, 200, 400, 800}; }

std::vector<ScalingPoint> sweep_fisher(const FamilySpec& family, const std::vector<int>& particle_counts,
                                       double theta) {
    std::vector<ScalingPoint> points(particle_counts.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const int n = particle_counts[i];
        points[i] = {n, fisher_information(build_family(family, n), theta).sigma};
    });
    return points;
}

ScalingFit fit_power_law(const std::vector<ScalingPoint>& points) {
    if (points.size() < 2) {
        throw std::invalid_argument("power-law fit needs at least two points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].particles < 1 || !(points[i].sigma > 0.0) || !std::isfinite(points[i].sigma)) {
            throw std::invalid_argument("power-law fit needs N >= 1 and finite sigma > 0");
        }
        if (i > 0 && points[i].particles <= points[i - 1].particles) {
            throw std::invalid_argument("power-law fit needs strictly increasing N");
        }
    }
    // log sigma = log C - beta log N
    const double count = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const double x = std::log(static_cast<double>(p.particles));
        const double y = std::log(p.sigma);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / count;

    ScalingFit fit;
    fit.c = std::exp(intercept);
    fit.beta = -slope;
    fit.points = points;
    double ss = 0.0;
    for (const auto& p : points) {
        const double r = std::log(p.sigma) - (intercept + slope * std::log(static_cast<double>(p.particles)));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / count);
    return fit;
}

ScalingFit sweep_error_propagation(const FamilySpec& family, const std::vector<int>& particle_counts) {
    std::vector<ScalingPoint> points(particle_counts.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const int n = particle_counts[i];
        points[i] = {n, best_error_propagation(build_family(family, n)).delta_phi};
    });
    return fit_power_law(points);
}

EngineeringStages engineer_gaussian_stages(int particles) {
    const StateVector start = twin_fock(particles);
    StateVector rotated = rotate_x(start, 3.0 * std::numbers::pi / (4.0 * particles)).canonical();
    StateVector twisted = evolve_jz_squared(rotated, 1.5 * std::numbers::pi).canonical();
    return {std::move(rotated), std::move(twisted)};
}

StateVector engineer_gaussian(int particles) { return engineer_gaussian_stages(particles).twisted; }

StateVector dephased_gaussian(int particles, double sigma_prime) {
    const StateVector base = gaussian_state(particles, sigma_prime);
    ComplexVector amps = base.amplitudes();
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        const auto m = static_cast<long>(std::lround(std::abs(projection_of(particles, i))));
        static const Complex kIPowers[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        amps[i] *= kIPowers[m % 4];
    }
    return StateVector(particles, std::move(amps));
}

std::vector<MomentReport> phase_misalignment_demo(int particles, const std::vector<double>& phis,
                                                  double sigma_prime, bool aligned) {
    const StateVector state =
        aligned ? gaussian_state(particles, sigma_prime) : dephased_gaussian(particles, sigma_prime);
    std::vector<MomentReport> reports(phis.size());
    parallel_for(phis.size(), [&](std::size_t i) { reports[i] = jz_moments(propagate(state, phis[i])); });
    return reports;
}

void write_sweep_csv(std::ostream& out, const std::vector<ScalingPoint>& points) {
    out << "N,sigma\n";
    for (const auto& p : points) {
        out << p.particles << ',' << format_double(p.sigma) << '\n';
    }
}

void write_fit_summary(std::ostream& out, const ScalingFit& fit) {
    out << "C " << format_double(fit.c) << '\n';
    out << "beta " << format_double(fit.beta) << '\n';
    out << "residual " << format_double(fit.residual) << '\n';
}

}  // namespace mzi
