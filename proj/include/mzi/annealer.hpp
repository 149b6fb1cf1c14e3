#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mzi/states.hpp"

namespace mzi {

enum class Symmetry { none, symmetric, antisymmetric };
enum class Proposal { multiplicative, hypersphere };

struct AnnealerConfig {
    int particles = 20;
    int population = 64;
    Field field = Field::real;
    Symmetry symmetry = Symmetry::none;
    Proposal proposal = Proposal::hypersphere;

    // Multiplicative proposals: amplitude factor in [epsilon, 1 + epsilon],
    // phase kick in (-phase_epsilon, phase_epsilon).
    double epsilon = 0.5;
    double phase_epsilon = 0.05;
    // Below this magnitude real amplitudes may change sign.
    double sign_change_threshold = 0.02;

    // Hypersphere proposals: initial geodesic step.
    double initial_step = 0.1;
    double step_decay = 0.5;
    // Step is reduced when fewer than step_threshold downhill moves are found
    // over step_window iterations. Default threshold is population / 10.
    int step_window = 10;
    std::optional<double> step_threshold;
    double min_step = 1e-8;

    // Boltzmann-analog constant; calibrated from probe moves when unset.
    std::optional<double> initial_k;
    double k_decay = 0.9;
    int calibration_probes = 100;

    int max_iterations = 5000;
    double theta = 0.0;
    std::uint64_t seed = 1;

    double resolved_step_threshold() const;
    // Throws std::invalid_argument on any inconsistent field.
    void validate() const;
};

struct AnnealState {
    StateVector vector;
    double energy;  // 1 / sqrt(F)
};

struct AnnealRecord {
    int iteration = 0;
    double temperature = 0.0;
    double k = 0.0;
    double step = 0.0;
    double best_energy = 0.0;
    int uphill_accepted = 0;
    int downhill_found = 0;
};

struct AnnealTrace {
    std::vector<AnnealRecord> records;
};

// Pseudo-energy 1/sqrt(F(theta)); +inf when F vanishes.
double pseudo_energy(const StateVector& state, double theta);

// Population mean of the pseudo-energies.
double pseudo_temperature(std::span<const AnnealState> population);

StateVector propose_multiplicative(const StateVector& state, Field field, double epsilon, double phase_epsilon,
                                   std::mt19937_64& rng, double sign_change_threshold = 0.02);

// Move a geodesic distance `step` on the unit sphere (real dimension N+1 for
// the real field, 2(N+1) for the complex field) in a uniformly random tangent direction.
StateVector propose_hypersphere(const StateVector& state, Field field, double step, std::mt19937_64& rng);

// Metropolis rule: always accept when p = exp(-delta_e / (k T)) >= 1, otherwise with probability p.
bool accept(double delta_e, double k, double temperature, std::mt19937_64& rng);

struct AnnealResult {
    AnnealState best;
    std::vector<AnnealState> final_population;
    AnnealTrace trace;
};

class Annealer {
public:
    // Random initial population drawn from the config seed.
    explicit Annealer(AnnealerConfig config);
    // Caller-supplied initial population.
    Annealer(AnnealerConfig config, std::vector<StateVector> population);

    // One proposal per member, acceptance, then k and step adaptation.
    const AnnealRecord& step();
    bool finished() const;
    AnnealResult run();

    const AnnealerConfig& config() const { return config_; }
    const std::vector<AnnealState>& population() const { return population_; }
    const AnnealState& best() const { return best_; }
    const AnnealTrace& trace() const { return trace_; }
    double k() const { return k_; }
    double step_size() const { return step_; }
    int k_decays() const { return k_decays_; }

private:
    StateVector propose(const StateVector& state, std::mt19937_64& rng) const;
    double calibrate_k();

    AnnealerConfig config_;
    std::vector<AnnealState> population_;
    AnnealState best_;
    std::vector<std::mt19937_64> streams_;
    AnnealTrace trace_;
    std::deque<int> downhill_window_;
    double k_ = 1.0;
    double step_ = 0.1;
    int k_decays_ = 0;
    int iteration_ = 0;
};

AnnealResult run_annealer(const AnnealerConfig& config);

// CSV header: iteration,T,k,step,best_energy,uphill_accepted,downhill_found
void write_trace_csv(std::ostream& out, const AnnealTrace& trace);

}  // namespace mzi
