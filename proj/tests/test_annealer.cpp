#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mzi/annealer.hpp"
#include "mzi/estimation.hpp"
#include "mzi/spin_algebra.hpp"

using namespace mzi;

namespace {

AnnealState member(double energy) { return {twin_fock(2), energy}; }

AnnealerConfig small_config() {
    AnnealerConfig c;
    c.particles = 10;
    c.population = 16;
    c.max_iterations = 200;
    c.seed = 42;
    return c;
}

}  // namespace

TEST_CASE("pseudo-energy and pseudo-temperature") {
    CHECK(pseudo_energy(twin_fock(2), 0.0) == doctest::Approx(0.5));
    std::vector<AnnealState> pop{member(0.1), member(0.3)};
    CHECK(pseudo_temperature(pop) == doctest::Approx(0.2));
    CHECK_THROWS_AS(pseudo_temperature(std::span<const AnnealState>{}), std::invalid_argument);
    // A Jy eigenstate carries no phase information.
    const StateVector jy_eigen = rotate_x(unbalanced_twin(10, 1.0).state, std::numbers::pi / 2);
    CHECK(pseudo_energy(jy_eigen, 0.0) > 1e6);
}

TEST_CASE("multiplicative proposals") {
    std::mt19937_64 rng(3);
    const StateVector real = random_state(12, Field::real, 5);
    for (int i = 0; i < 50; ++i) {
        const StateVector next = propose_multiplicative(real, Field::real, 0.5, 0.05, rng);
        CHECK(std::abs(next.norm() - 1.0) <= 1e-10);
        CHECK(next.amplitudes().imag().norm() == 0.0);
    }
    const StateVector complex = random_state(12, Field::complex, 6);
    for (int i = 0; i < 50; ++i) {
        CHECK(std::abs(propose_multiplicative(complex, Field::complex, 0.5, 0.05, rng).norm() - 1.0) <= 1e-10);
    }
    // A zero real amplitude can only be revived via the sign-change branch scaled by |a|, so it stays zero.
    const StateVector spike = StateVector::normalized(4, ComplexVector::Unit(5, 2));
    const StateVector moved = propose_multiplicative(spike, Field::real, 0.5, 0.05, rng);
    CHECK(std::abs(moved[2]) == doctest::Approx(1.0));

    std::mt19937_64 a(9), b(9);
    CHECK(propose_multiplicative(real, Field::real, 0.5, 0.05, a).amplitudes() ==
          propose_multiplicative(real, Field::real, 0.5, 0.05, b).amplitudes());
}

TEST_CASE("hypersphere proposals move a geodesic distance step") {
    std::mt19937_64 rng(11);
    for (Field field : {Field::real, Field::complex}) {
        const StateVector s = random_state(20, field, 2);
        double mean = 0.0;
        const int trials = 500;
        for (int i = 0; i < trials; ++i) {
            const StateVector next = propose_hypersphere(s, field, 0.05, rng);
            CHECK(std::abs(next.norm() - 1.0) <= 1e-10);
            if (field == Field::real) CHECK(next.amplitudes().imag().norm() == 0.0);
            mean += (next.amplitudes() - s.amplitudes()).norm() / trials;
        }
        CHECK(mean == doctest::Approx(0.05).epsilon(0.2));
    }
    CHECK(propose_hypersphere(twin_fock(4), Field::real, 0.0, rng).amplitudes() == twin_fock(4).amplitudes());
}

TEST_CASE("Metropolis acceptance") {
    std::mt19937_64 rng(17);
    CHECK(accept(-1.0, 1.0, 1.0, rng));
    CHECK(accept(0.0, 1.0, 1.0, rng));
    CHECK_FALSE(accept(1e-3, 1.0, 1e-300, rng));
    CHECK_FALSE(accept(1.0, 0.0, 1.0, rng));
    const int trials = 100000;
    int hits = 0;
    for (int i = 0; i < trials; ++i) hits += accept(0.5, 2.0, 0.25, rng) ? 1 : 0;
    CHECK(static_cast<double>(hits) / trials == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("annealer config validation") {
    AnnealerConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.resolved_step_threshold() == doctest::Approx(6.4));
    auto bad = [](auto mutate) {
        AnnealerConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(bad([](AnnealerConfig& x) { x.population = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](AnnealerConfig& x) { x.epsilon = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](AnnealerConfig& x) { x.step_decay = 1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](AnnealerConfig& x) { x.initial_k = -1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](AnnealerConfig& x) { x.theta = NAN; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(Annealer(small_config(), {twin_fock(4)}), std::invalid_argument);
    CHECK_THROWS_AS(Annealer(small_config(), std::vector<StateVector>{}), std::invalid_argument);
}

TEST_CASE("annealer bookkeeping") {
    for (Proposal proposal : {Proposal::hypersphere, Proposal::multiplicative}) {
        for (Field field : {Field::real, Field::complex}) {
            AnnealerConfig c = small_config();
            c.proposal = proposal;
            c.field = field;
            Annealer a(c);
            const double k0 = a.k();
            CHECK(k0 > 0.0);
            double best = a.best().energy;
            for (int i = 0; i < 60; ++i) {
                const AnnealRecord& r = a.step();
                CHECK(r.best_energy <= best);
                best = r.best_energy;
                CHECK(a.k() == doctest::Approx(k0 * std::pow(c.k_decay, a.k_decays())).epsilon(1e-12));
            }
            for (const auto& m : a.population()) {
                CHECK(std::abs(m.vector.norm() - 1.0) <= 1e-10);
                CHECK(std::abs(m.energy - pseudo_energy(m.vector, 0.0)) <= 1e-12);
            }
            CHECK(a.best().energy == doctest::Approx(fisher_information(a.best().vector, 0.0).sigma).epsilon(1e-12));
        }
    }
}

TEST_CASE("explicit initial k and a frozen twin-Fock population") {
    AnnealerConfig c = small_config();
    c.initial_k = 0.3;
    c.initial_step = 0.0;
    Annealer a(c, std::vector<StateVector>(8, twin_fock(10)));
    CHECK(a.k() == 0.3);
    for (int i = 0; i < 20; ++i) a.step();
    for (const auto& m : a.population()) CHECK(m.vector.amplitudes() == twin_fock(10).amplitudes());
    // No move changes the energy, so neither counter fires and k stays put.
    CHECK(a.k_decays() == 0);
}

TEST_CASE("symmetry projection is kept throughout a run") {
    AnnealerConfig c = small_config();
    c.symmetry = Symmetry::antisymmetric;
    c.max_iterations = 50;
    const auto result = run_annealer(c);
    for (const auto& m : result.final_population) {
        for (int k = 0; k <= 10; ++k) CHECK(std::abs(m.vector.amplitudes()[k] + m.vector.amplitudes()[10 - k]) < 1e-12);
    }
}

TEST_CASE("annealer runs are seed-deterministic and stop on step underflow") {
    AnnealerConfig c = small_config();
    c.initial_step = 1e-7;
    c.min_step = 1e-8;
    c.step_threshold = 1e6;  // force a halving every window
    const auto a = run_annealer(c);
    const auto b = run_annealer(c);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        CHECK(a.trace.records[i].best_energy == b.trace.records[i].best_energy);
        CHECK(a.trace.records[i].k == b.trace.records[i].k);
    }
    CHECK(a.trace.records.size() == 4 * static_cast<std::size_t>(c.step_window));
    CHECK(a.trace.records.back().step < 1e-8);

    std::ostringstream csv;
    write_trace_csv(csv, a.trace);
    CHECK(csv.str().rfind("iteration,T,k,step,best_energy,uphill_accepted,downhill_found\n", 0) == 0);
}

TEST_CASE("hypersphere annealing at N = 20 approaches 1/N") {
    AnnealerConfig c;
    c.particles = 20;
    c.population = 32;
    c.max_iterations = 3000;
    const auto result = run_annealer(c);
    CHECK(result.best.energy <= 1.15 / 20);
    CHECK(result.best.energy >= 1.0 / 20 * (1 - 1e-9));
}
