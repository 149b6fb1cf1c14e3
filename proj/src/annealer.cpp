#include "mzi/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mzi/estimation.hpp"
#include "mzi/format.hpp"
#include "mzi/parallel.hpp"

namespace mzi {

namespace {

std::mt19937_64 member_stream(std::uint64_t seed, std::uint64_t member) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(member), 0x616e6e65u};
    return std::mt19937_64(seq);
}

std::vector<StateVector> random_population(const AnnealerConfig& config) {
    config.validate();
    std::vector<StateVector> population;
    population.reserve(static_cast<std::size_t>(config.population));
    std::mt19937_64 seeds = member_stream(config.seed, 0xffffffffu);
    for (int i = 0; i < config.population; ++i) {
        population.push_back(random_state(config.particles, config.field, seeds()));
    }
    return population;
}

AnnealState evaluate(StateVector state, double theta) {
    const double energy = pseudo_energy(state, theta);
    return {std::move(state), energy};
}

StateVector apply_symmetry(StateVector state, Symmetry symmetry) {
    switch (symmetry) {
        case Symmetry::symmetric: return symmetrize(state, Parity::symmetric);
        case Symmetry::antisymmetric: return symmetrize(state, Parity::antisymmetric);
        case Symmetry::none: break;
    }
    return state;
}

std::vector<AnnealState> initial_members(const AnnealerConfig& config, std::vector<StateVector> population) {
    config.validate();
    if (population.empty()) {
        throw std::invalid_argument("annealer needs a non-empty population");
    }
    std::vector<AnnealState> members;
    members.reserve(population.size());
    for (auto& state : population) {
        if (state.particles() != config.particles) {
            throw std::invalid_argument("population member particle number does not match config");
        }
        members.push_back(evaluate(apply_symmetry(std::move(state), config.symmetry), config.theta));
    }
    return members;
}

const AnnealState& lowest(const std::vector<AnnealState>& members) {
    return *std::min_element(members.begin(), members.end(),
                             [](const AnnealState& a, const AnnealState& b) { return a.energy < b.energy; });
}

double energy_change(double before, double after) {
    if (std::isinf(after)) {
        return std::numeric_limits<double>::infinity();
    }
    if (std::isinf(before)) {
        return -std::numeric_limits<double>::infinity();
    }
    return after - before;
}

}  // namespace

double AnnealerConfig::resolved_step_threshold() const {
    return step_threshold ? *step_threshold : population / 10.0;
}

void AnnealerConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("annealer config: " + what); };
    if (particles < 1) fail("particles must be >= 1");
    if (population < 1) fail("population must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon must lie in (0, 1]");
    if (!(phase_epsilon >= 0.0)) fail("phase_epsilon must be >= 0");
    if (!(initial_step >= 0.0)) fail("initial_step must be >= 0");
    if (!(step_decay > 0.0 && step_decay < 1.0)) fail("step_decay must lie in (0, 1)");
    if (!(k_decay > 0.0 && k_decay < 1.0)) fail("k_decay must lie in (0, 1)");
    if (initial_k && !(*initial_k > 0.0)) fail("initial_k must be > 0");
    if (step_window < 1) fail("step_window must be >= 1");
    if (max_iterations < 0) fail("max_iterations must be >= 0");
    if (calibration_probes < 1) fail("calibration_probes must be >= 1");
    if (!std::isfinite(theta)) fail("theta must be finite");
}

double pseudo_energy(const StateVector& state, double theta) { return fisher_information(state, theta).sigma; }

double pseudo_temperature(std::span<const AnnealState> population) {
    if (population.empty()) {
        throw std::invalid_argument("pseudo-temperature of an empty population");
    }
    double sum = 0.0;
    for (const auto& member : population) {
        sum += member.energy;
    }
    return sum / static_cast<double>(population.size());
}

StateVector propose_multiplicative(const StateVector& state, Field field, double epsilon, double phase_epsilon,
                                   std::mt19937_64& rng, double sign_change_threshold) {
    std::uniform_real_distribution<double> factor(epsilon, 1.0 + epsilon);
    std::uniform_real_distribution<double> kick(-phase_epsilon, phase_epsilon);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    ComplexVector amps = state.amplitudes();
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        if (field == Field::real) {
            const double a = amps[i].real();
            if (std::abs(a) < sign_change_threshold) {
                amps[i] = Complex((1.0 + epsilon) * std::abs(a) * unit(rng), 0.0);
            } else {
                amps[i] = Complex(a * factor(rng), 0.0);
            }
        } else {
            const double magnitude = std::abs(amps[i]) * factor(rng);
            amps[i] = std::polar(magnitude, std::arg(amps[i]) + kick(rng));
        }
    }
    return StateVector::normalized(state.particles(), std::move(amps));
}

StateVector propose_hypersphere(const StateVector& state, Field field, double step, std::mt19937_64& rng) {
    if (step == 0.0) {
        return state;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const ComplexVector& x = state.amplitudes();
    ComplexVector direction(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double re = gauss(rng);
        const double im = field == Field::complex ? gauss(rng) : 0.0;
        direction[i] = Complex(re, im);
    }
    // Remove the radial part under the real inner product Re<x, d>.
    const double radial = std::real(x.dot(direction));
    direction -= radial * x;
    const double length = direction.norm();
    if (length == 0.0) {
        return state;
    }
    direction /= length;
    ComplexVector moved = std::cos(step) * x + std::sin(step) * direction;
    return StateVector::normalized(state.particles(), std::move(moved));
}

bool accept(double delta_e, double k, double temperature, std::mt19937_64& rng) {
    if (delta_e <= 0.0) {
        return true;
    }
    if (!(k * temperature > 0.0) || std::isinf(delta_e)) {
        return false;
    }
    const double p = std::exp(-delta_e / (k * temperature));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    return uniform(rng) < p;
}

Annealer::Annealer(AnnealerConfig config) : Annealer(config, random_population(config)) {}

Annealer::Annealer(AnnealerConfig config, std::vector<StateVector> population)
    : config_(std::move(config)),
      population_(initial_members(config_, std::move(population))),
      best_(lowest(population_)) {
    config_.population = static_cast<int>(population_.size());
    for (std::size_t i = 0; i < population_.size(); ++i) {
        streams_.push_back(member_stream(config_.seed, i));
    }
    step_ = config_.initial_step;
    k_ = config_.initial_k ? *config_.initial_k : calibrate_k();
}

StateVector Annealer::propose(const StateVector& state, std::mt19937_64& rng) const {
    StateVector next = config_.proposal == Proposal::hypersphere
                           ? propose_hypersphere(state, config_.field, step_, rng)
                           : propose_multiplicative(state, config_.field, config_.epsilon, config_.phase_epsilon, rng,
                                                    config_.sign_change_threshold);
    return apply_symmetry(std::move(next), config_.symmetry);
}

double Annealer::calibrate_k() {
    // k such that the median uphill probe move is accepted with probability 1/2.
    std::mt19937_64 rng = member_stream(config_.seed, 0xfffffffeu);
    std::vector<double> uphill;
    for (int probe = 0; probe < config_.calibration_probes; ++probe) {
        const AnnealState& member = population_[static_cast<std::size_t>(probe) % population_.size()];
        try {
            const double delta = energy_change(member.energy, pseudo_energy(propose(member.vector, rng), config_.theta));
            if (delta > 0.0 && std::isfinite(delta)) {
                uphill.push_back(delta);
            }
        } catch (const std::invalid_argument&) {
        }
    }
    const double temperature = pseudo_temperature(population_);
    if (uphill.empty() || !(temperature > 0.0) || !std::isfinite(temperature)) {
        return 1.0;
    }
    auto mid = uphill.begin() + static_cast<std::ptrdiff_t>(uphill.size() / 2);
    std::nth_element(uphill.begin(), mid, uphill.end());
    return *mid / (temperature * std::numbers::ln2);
}

const AnnealRecord& Annealer::step() {
    const double temperature = pseudo_temperature(population_);
    const std::size_t count = population_.size();
    std::vector<int> downhill(count, 0);
    std::vector<int> uphill(count, 0);

    parallel_for(count, [&](std::size_t i) {
        auto& rng = streams_[i];
        AnnealState& member = population_[i];
        std::optional<AnnealState> candidate;
        try {
            candidate = evaluate(propose(member.vector, rng), config_.theta);
        } catch (const std::invalid_argument&) {
            // Symmetry projection of the proposal vanished.
            return;
        }
        const double delta = energy_change(member.energy, candidate->energy);
        if (delta < 0.0) {
            downhill[i] = 1;
        }
        if (accept(delta, k_, temperature, rng)) {
            if (delta > 0.0) {
                uphill[i] = 1;
            }
            member = std::move(*candidate);
        }
    });

    AnnealRecord record;
    record.iteration = ++iteration_;
    record.temperature = temperature;
    record.downhill_found = std::accumulate(downhill.begin(), downhill.end(), 0);
    record.uphill_accepted = std::accumulate(uphill.begin(), uphill.end(), 0);

    for (const auto& member : population_) {
        if (member.energy < best_.energy) {
            best_ = member;
        }
    }

    if (record.uphill_accepted > record.downhill_found) {
        k_ *= config_.k_decay;
        ++k_decays_;
    }

    if (config_.proposal == Proposal::hypersphere) {
        downhill_window_.push_back(record.downhill_found);
        if (static_cast<int>(downhill_window_.size()) > config_.step_window) {
            downhill_window_.pop_front();
        }
        if (static_cast<int>(downhill_window_.size()) == config_.step_window) {
            const int found = std::accumulate(downhill_window_.begin(), downhill_window_.end(), 0);
            if (found < config_.resolved_step_threshold()) {
                step_ *= config_.step_decay;
                downhill_window_.clear();
            }
        }
    }

    record.k = k_;
    record.step = step_;
    record.best_energy = best_.energy;
    trace_.records.push_back(record);
    return trace_.records.back();
}

bool Annealer::finished() const {
    return iteration_ >= config_.max_iterations ||
           (config_.proposal == Proposal::hypersphere && step_ < config_.min_step);
}

AnnealResult Annealer::run() {
    while (!finished()) {
        step();
    }
    return {best_, population_, trace_};
}

AnnealResult run_annealer(const AnnealerConfig& config) { return Annealer(config).run(); }

void write_trace_csv(std::ostream& out, const AnnealTrace& trace) {
    out << "iteration,T,k,step,best_energy,uphill_accepted,downhill_found\n";
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << format_double(r.temperature) << ',' << format_double(r.k) << ','
            << format_double(r.step) << ',' << format_double(r.best_energy) << ',' << r.uphill_accepted << ','
            << r.downhill_found << '\n';
    }
}

}  // namespace mzi
