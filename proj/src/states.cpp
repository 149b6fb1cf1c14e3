#include "mzi/states.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mzi/format.hpp"
#include "mzi/spin_algebra.hpp"

namespace mzi {

namespace {

void require_even(int particles, const char* what) {
    if (particles < 2 || particles % 2 != 0) {
        throw std::invalid_argument(std::string(what) + " requires an even particle number >= 2, got " +
                                    std::to_string(particles));
    }
}

void require_positive(int particles) {
    if (particles < 1) {
        throw std::invalid_argument("particle number must be >= 1, got " + std::to_string(particles));
    }
}

void require_q(int particles, int q) {
    if (q < 1 || q > particles / 2) {
        throw std::invalid_argument("q must lie in [1, N/2] = [1, " + std::to_string(particles / 2) + "], got " +
                                    std::to_string(q));
    }
}

ComplexVector zeros(int particles) { return ComplexVector::Zero(particles + 1); }

Eigen::Index at(int particles, double m) { return static_cast<Eigen::Index>(index_of(particles, m)); }

}  // namespace

StateVector twin_fock(int particles) {
    require_even(particles, "twin-Fock state");
    ComplexVector amps = zeros(particles);
    amps[at(particles, 0.0)] = 1.0;
    return StateVector(particles, std::move(amps));
}

StateVector di_fock(int particles, int q) {
    require_even(particles, "di-Fock state");
    require_q(particles, q);
    ComplexVector amps = zeros(particles);
    amps[at(particles, -q)] = std::numbers::sqrt2 / 2;
    amps[at(particles, q)] = std::numbers::sqrt2 / 2;
    return StateVector(particles, std::move(amps));
}

StateVector noon_external(int particles) {
    require_positive(particles);
    const double j = 0.5 * particles;
    ComplexVector amps = zeros(particles);
    amps[at(particles, -j)] = std::numbers::sqrt2 / 2;
    amps[at(particles, j)] = std::numbers::sqrt2 / 2;
    return StateVector(particles, std::move(amps));
}

StateVector noon_internal_input(int particles) {
    return rotate_x(noon_external(particles), std::numbers::pi / 2).canonical();
}

StateVector tri_fock(int particles, int q, const std::array<Complex, 3>& weights) {
    require_even(particles, "tri-Fock state");
    require_q(particles, q);
    ComplexVector amps = zeros(particles);
    amps[at(particles, -q)] = weights[0];
    amps[at(particles, 0.0)] = weights[1];
    amps[at(particles, q)] = weights[2];
    if (amps.norm() == 0.0) {
        throw std::invalid_argument("tri-Fock weights must not all be zero");
    }
    return StateVector::normalized(particles, std::move(amps)).canonical();
}

StateVector gaussian_state(int particles, double sigma_prime) {
    require_even(particles, "gaussian state");
    if (!(sigma_prime > 0.0) || !std::isfinite(sigma_prime)) {
        throw std::invalid_argument("gaussian width must be positive and finite");
    }
    ComplexVector amps(particles + 1);
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        const double m = projection_of(particles, static_cast<std::size_t>(i));
        amps[i] = std::exp(-(m * m) / (sigma_prime * sigma_prime));
    }
    return StateVector::normalized(particles, std::move(amps));
}

UnbalancedTwin unbalanced_twin(int particles, double gamma) {
    require_positive(particles);
    if (!(gamma >= -1.0 && gamma <= 1.0)) {
        throw std::invalid_argument("unbalance fraction gamma must lie in [-1, 1]");
    }
    const double j = 0.5 * particles;
    const auto index = static_cast<Eigen::Index>(std::lround(gamma * j + j));
    ComplexVector amps = zeros(particles);
    amps[index] = 1.0;
    const double m = projection_of(particles, static_cast<std::size_t>(index));
    return {StateVector(particles, std::move(amps)), m / j};
}

StateVector random_state(int particles, Field field, std::uint64_t seed) {
    require_positive(particles);
    std::mt19937_64 rng(seed);
    ComplexVector amps(particles + 1);
    if (field == Field::real) {
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            amps[i] = Complex(uniform(rng), 0.0);
        }
    } else {
        std::uniform_real_distribution<double> magnitude(0.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            const double r = magnitude(rng);
            amps[i] = std::polar(r, phase(rng));
        }
    }
    return StateVector::normalized(particles, std::move(amps)).canonical();
}

StateVector symmetrize(const StateVector& state, Parity parity) {
    const double sign = parity == Parity::symmetric ? 1.0 : -1.0;
    const ComplexVector& a = state.amplitudes();
    const Eigen::Index last = a.size() - 1;
    ComplexVector out(a.size());
    for (Eigen::Index i = 0; i <= last; ++i) {
        out[i] = a[i] + sign * a[last - i];
    }
    if (out.norm() <= 1e-14) {
        throw std::invalid_argument(parity == Parity::symmetric ? "symmetric projection of the state vanishes"
                                                                : "antisymmetric projection of the state vanishes");
    }
    return StateVector::normalized(state.particles(), std::move(out));
}

void write_state(std::ostream& out, const StateVector& state) {
    out << state.particles() << '\n';
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const Complex a = state[i];
        out << format_double(projection_of(state.particles(), i)) << ' ' << format_double(a.real()) << ' '
            << format_double(a.imag()) << '\n';
    }
}

StateVector read_state(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("state file is empty");
    }
    int particles = 0;
    {
        std::istringstream header(line);
        if (!(header >> particles) || particles < 1) {
            throw std::runtime_error("state file header must be a positive particle number, got '" + line + "'");
        }
    }
    ComplexVector amps = ComplexVector::Zero(particles + 1);
    std::vector<bool> seen(static_cast<std::size_t>(particles) + 1, false);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string m_text, re_text, im_text, extra;
        if (!(row >> m_text >> re_text >> im_text) || (row >> extra)) {
            throw std::runtime_error("malformed state row: '" + line + "'");
        }
        const double m = parse_double(m_text);
        if (!is_valid_projection(particles, m)) {
            throw std::runtime_error("state row has invalid m = " + m_text);
        }
        const std::size_t index = index_of(particles, m);
        if (seen[index]) {
            throw std::runtime_error("duplicate state row for m = " + m_text);
        }
        seen[index] = true;
        amps[static_cast<Eigen::Index>(index)] = Complex(parse_double(re_text), parse_double(im_text));
        ++rows;
    }
    if (rows != static_cast<std::size_t>(particles) + 1) {
        throw std::runtime_error("state file has " + std::to_string(rows) + " rows, expected " +
                                 std::to_string(particles + 1));
    }
    return StateVector(particles, std::move(amps));
}

}  // namespace mzi
