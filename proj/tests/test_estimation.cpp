#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mzi/estimation.hpp"
#include "mzi/interferometer.hpp"
#include "mzi/spin_algebra.hpp"
#include "mzi/states.hpp"
#include "oracles.hpp"

using namespace mzi;

namespace {

double input_jy_variance(const StateVector& s) {
    const ComplexVector jy = apply_jy(s.particles(), s.amplitudes());
    const double mean = std::real(s.amplitudes().dot(jy));
    return jy.squaredNorm() - mean * mean;
}

// Largest interior local maximum away from theta, relative to the density at theta.
// The endpoints are exact aliases of theta = 0 for twin-Fock input and are excluded.
double secondary_peak_ratio(const LikelihoodProfile& p, double theta) {
    const auto& d = p.density;
    std::size_t at = 0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        if (std::abs(p.grid[i] - theta) < std::abs(p.grid[at] - theta)) at = i;
    }
    double second = 0.0;
    for (std::size_t i = 1; i + 1 < d.size(); ++i) {
        if (std::abs(p.grid[i] - theta) > 2 * p.cell() && d[i] >= d[i - 1] && d[i] > d[i + 1]) {
            second = std::max(second, d[i]);
        }
    }
    return second / d[at];
}

}  // namespace

TEST_CASE("twin-Fock Fisher information equals N(N+2)/2 at theta = 0") {
    for (int n : {2, 10, 20, 100, 400}) {
        const FisherReport r = fisher_information(twin_fock(n), 0.0);
        CHECK(r.fisher == doctest::Approx(n * (n + 2) / 2.0).epsilon(1e-12));
        CHECK(r.sigma == doctest::Approx(1.0 / std::sqrt(n * (n + 2) / 2.0)));
        CHECK(r.degenerate_terms == n);
    }
}

TEST_CASE("N00N Fisher information: external is shot-noise, internal is Heisenberg") {
    for (int n : {4, 20, 64}) {
        CHECK(fisher_information(noon_external(n), 0.0).fisher == doctest::Approx(n).epsilon(1e-10));
        CHECK(fisher_information(noon_internal_input(n), 0.0).fisher == doctest::Approx(n * n).epsilon(1e-8));
    }
}

TEST_CASE("degenerate-term rule equals the delta -> 0 limit of the naive sum") {
    // Oracle: naive sum (zero-probability terms skipped) at theta + delta with
    // finite-difference derivatives of the dense exponential, Richardson-extrapolated in delta^2.
    const int n = 20;
    const StateVector s = twin_fock(n);
    const double exact = fisher_information(s, 0.0).fisher;
    std::map<double, double> naive;
    for (double delta : {1e-3, 1e-4, 1e-5}) {
        naive[delta] = oracle::naive_fisher(s.amplitudes(), n, delta, delta / 100);
        CHECK(naive[delta] == doctest::Approx(exact).epsilon(1e-3));
    }
    const double extrapolated = (100.0 * naive[1e-4] - naive[1e-3]) / 99.0;
    CHECK(extrapolated == doctest::Approx(exact).epsilon(1e-3));
    // Skipping the zero terms instead would report zero information.
    CHECK(oracle::naive_fisher(s.amplitudes(), n, 0.0, 1e-6) < 1e-6);
}

TEST_CASE("Fisher information is bounded by 4 Var(Jy) and invariant under global phase") {
    std::vector<StateVector> states = {twin_fock(16),      di_fock(16, 3), noon_external(16), noon_internal_input(16),
                                       tri_fock(16, 2),    gaussian_state(16, 1.7)};
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        states.push_back(random_state(16, seed % 2 ? Field::real : Field::complex, seed));
    }
    for (const auto& s : states) {
        const double bound = 4.0 * input_jy_variance(s);
        for (double theta : {0.0, 0.2, -0.9}) {
            const double f = fisher_information(s, theta).fisher;
            CHECK(f <= bound * (1.0 + 1e-8));
            CHECK(f >= 0.0);
            const double rotated = fisher_information(s.with_global_phase(1.234), theta).fisher;
            CHECK(std::abs(rotated - f) < 1e-10 * std::max(1.0, f));
        }
    }
}

TEST_CASE("likelihood profile basics") {
    SUBCASE("M = 0 gives the uniform density") {
        const auto p = likelihood_profile(twin_fock(20), 0.0, 0.0, 512);
        for (double d : p.density) CHECK(d == doctest::Approx(1.0 / std::numbers::pi));
    }
    SUBCASE("normalized, non-negative, strictly increasing grid") {
        const auto p = likelihood_profile(gaussian_state(40, 1.7), 0.3, 7.5);
        CHECK(p.grid.size() == default_grid_size(40));
        CHECK(p.grid.front() == -std::numbers::pi / 2);
        CHECK(p.grid.back() == std::numbers::pi / 2);
        CHECK(std::abs(profile_integral(p) - 1.0) <= 1e-8);
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            CHECK(p.density[i] >= 0.0);
            if (i) CHECK(p.grid[i] > p.grid[i - 1]);
        }
    }
    SUBCASE("large exponents do not underflow") {
        const auto p = likelihood_profile(gaussian_state(100, 1.7), 0.05, 1000.0);
        CHECK(std::abs(profile_integral(p) - 1.0) <= 1e-8);
        CHECK(std::abs(profile_argmax(p) - 0.05) <= p.cell());
    }
    SUBCASE("maximum sits at theta") {
        const auto p = likelihood_profile(gaussian_state(20, 1.7), 0.2, 10.0);
        CHECK(std::abs(profile_argmax(p) - 0.2) <= p.cell());
    }
    CHECK(default_grid_size(20) == 4096);
    CHECK(default_grid_size(200) == 12800);
    CHECK_THROWS_AS(likelihood_profile(twin_fock(4), 0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(likelihood_profile(twin_fock(4), 0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("twin-Fock secondary likelihood peaks shrink with more measurements") {
    const auto one = likelihood_profile(twin_fock(20), 0.0, 1.0);
    const auto ten = likelihood_profile(twin_fock(20), 0.0, 10.0);
    CHECK(secondary_peak_ratio(one, 0.0) > 0.05);
    CHECK(secondary_peak_ratio(ten, 0.0) < secondary_peak_ratio(one, 0.0) / 10.0);
}

TEST_CASE("internal N00N likelihood oscillates with period 2 pi / N") {
    const int n = 20;
    const auto p = likelihood_profile(noon_internal_input(n), 0.0, 1.0);
    const auto maxima = profile_maxima(p, 1e-6);
    REQUIRE(maxima.size() >= 9);
    const double period = (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
    CHECK(std::abs(period - 2 * std::numbers::pi / n) <= p.cell());
    // theta is among the equal maxima.
    const double nearest = *std::min_element(maxima.begin(), maxima.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    });
    CHECK(std::abs(nearest) <= p.cell());
}

TEST_CASE("profile statistics") {
    SUBCASE("synthetic gaussian density") {
        LikelihoodProfile p = uniform_profile(20001);
        const double mu = 0.1, sigma = 0.05;
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            const double z = (p.grid[i] - mu) / sigma;
            p.density[i] = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
        }
        CHECK(profile_variance(p) == doctest::Approx(sigma * sigma).epsilon(1e-6));
        CHECK(profile_mean(p) == doctest::Approx(mu).epsilon(1e-9));
        CHECK(std::abs(profile_argmax(p) - mu) < 1e-6);
    }
    SUBCASE("twin-Fock N=20, M=100: variance matches 1/(M F)") {
        const double f = fisher_information(twin_fock(20), 0.0).fisher;
        const auto p = likelihood_profile(twin_fock(20), 0.0, 100.0);
        CHECK(profile_variance(p) == doctest::Approx(1.0 / (100.0 * f)).epsilon(0.10));
    }
}

TEST_CASE("sample_outcomes") {
    const auto all_zero = sample_outcomes(twin_fock(20), 0.0, 50, 3);
    for (double m : all_zero.outcomes) CHECK(m == 0.0);

    const StateVector s = gaussian_state(20, 2.0);
    const auto a = sample_outcomes(s, 0.4, 200, 17);
    const auto b = sample_outcomes(s, 0.4, 200, 17);
    CHECK(a.outcomes == b.outcomes);
    for (double m : a.outcomes) CHECK(std::abs(m) <= 10.0);

    const int count = 100000;
    const auto big = sample_outcomes(s, 0.4, count, 5);
    const auto dist = outcome_distribution(s, 0.4);
    std::vector<double> freq(dist.probs.size(), 0.0);
    for (double m : big.outcomes) freq[index_of(20, m)] += 1.0 / count;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        CHECK(std::abs(freq[i] - dist.probs[i]) <= 4.0 / std::sqrt(count));
    }
    CHECK_THROWS_AS(sample_outcomes(s, 0.0, -1, 1), std::invalid_argument);
}

TEST_CASE("posterior_from_outcomes") {
    const StateVector s = twin_fock(20);
    SUBCASE("empty record keeps the uniform prior") {
        const auto p = posterior_from_outcomes(s, MeasurementRecord{});
        for (double d : p.density) CHECK(d == doctest::Approx(1.0 / std::numbers::pi));
    }
    SUBCASE("sequential and batch updates agree") {
        const StateVector g = gaussian_state(20, 1.7);
        const auto record = sample_outcomes(g, 0.15, 30, 8);
        const auto batch = posterior_from_outcomes(g, record);
        std::optional<LikelihoodProfile> running;
        for (double m : record.outcomes) {
            MeasurementRecord one;
            one.outcomes = {m};
            one.theta = record.theta;
            running = posterior_from_outcomes(g, one, running);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < batch.density.size(); ++i) {
            err = std::max(err, std::abs(batch.density[i] - running->density[i]));
        }
        CHECK(err <= 1e-10);
    }
    SUBCASE("200 outcomes at theta = 0.1 locate the phase") {
        const auto record = sample_outcomes(s, 0.1, 200, 2024);
        const auto post = posterior_from_outcomes(s, record);
        // The twin-Fock posterior is symmetric in phi; examine the positive branch.
        LikelihoodProfile half;
        for (std::size_t i = 0; i < post.grid.size(); ++i) {
            if (post.grid[i] >= 0.0) {
                half.grid.push_back(post.grid[i]);
                half.density.push_back(post.density[i]);
            }
        }
        const double sigma = std::sqrt(profile_variance(half));
        CHECK(std::abs(profile_argmax(half) - 0.1) <= 3.0 * sigma);
        CHECK(sigma < 0.05);
    }
    SUBCASE("out-of-range outcome is rejected") {
        MeasurementRecord bad;
        bad.outcomes = {11.0};
        CHECK_THROWS_AS(posterior_from_outcomes(s, bad), std::out_of_range);
    }
}

TEST_CASE("error propagation") {
    for (double theta : {0.0, 0.01, 0.3, -1.0}) {
        CHECK_THROWS_AS(error_propagation_uncertainty(twin_fock(40), theta), FlatSignalError);
    }
    CHECK_THROWS_AS(best_error_propagation(twin_fock(40)), FlatSignalError);

    // Slope check against finite differences of <Jz>.
    const StateVector g = gaussian_state(60, 1.7);
    const double theta = 0.02, h = 1e-6;
    const double slope_fd =
        (jz_moments(propagate(g, theta + h)).mean_jz - jz_moments(propagate(g, theta - h)).mean_jz) / (2 * h);
    const double expected = std::sqrt(jz_moments(propagate(g, theta)).var_jz) / std::abs(slope_fd);
    CHECK(error_propagation_uncertainty(g, theta) == doctest::Approx(expected).epsilon(1e-6));

    // Tri-Fock (1,1,1), q=1 at theta = 0: sqrt(2/3) / (2 c_0 / 3), c_0 = sqrt(j(j+1)).
    const int n = 100;
    const double j = n / 2.0;
    const double c0 = std::sqrt(j * (j + 1));
    CHECK(error_propagation_uncertainty(tri_fock(n, 1), 0.0) ==
          doctest::Approx(std::sqrt(2.0 / 3.0) / (2.0 * c0 / 3.0)).epsilon(1e-10));
    CHECK(default_error_propagation_thetas().size() == 11);
}

TEST_CASE("Jz^2 signal to noise") {
    CHECK_THROWS_AS(snr_jz_squared(unbalanced_twin(20, 1.0).state, 0.0), DegenerateMomentsError);
    const StateVector g = gaussian_state(40, 2.0);
    CHECK(snr_jz_squared(g.with_global_phase(0.7), 0.3) == doctest::Approx(snr_jz_squared(g, 0.3)).epsilon(1e-12));
    // Once j*phi >> 1 the twin-Fock output ratio approaches sqrt(2).
    CHECK(snr_jz_squared(twin_fock(100), 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("Cramer-Rao inequality") {
    for (double theta : {0.0, 0.005, 0.02}) {
        const auto r = cramer_rao_check(gaussian_state(100, 1.7), theta);
        CHECK(r.defined);
        CHECK(r.holds);
        CHECK(r.lhs >= r.rhs * (1 - 1e-8));
    }
    for (int q : {1, 3, 7}) {
        for (int k = 0; k < 10; ++k) {
            const double theta = -1.3 + 0.29 * k;
            const auto r = cramer_rao_check(tri_fock(30, q, {1.0, 0.6, Complex(0.2, 0.9)}), theta);
            CHECK(r.holds);
        }
    }
    const auto flat = cramer_rao_check(twin_fock(10), 0.2);
    CHECK_FALSE(flat.defined);
    CHECK(flat.holds);
}

TEST_CASE("report serialization") {
    const auto report = fisher_information(twin_fock(10), 0.0);
    const auto parsed = nlohmann::json::parse(fisher_report_json(report));
    CHECK(parsed.at("F").get<double>() == report.fisher);
    CHECK(parsed.at("sigma").get<double>() == report.sigma);
    CHECK(parsed.at("theta").get<double>() == 0.0);
    CHECK(parsed.at("degenerate_terms").get<int>() == 10);

    std::ostringstream csv;
    write_profile_csv(csv, uniform_profile(3));
    CHECK(csv.str().rfind("phi,density\n", 0) == 0);
}
