#include "mzi/spin_algebra.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace mzi {

namespace {

void check_particles(int particles) {
    if (particles < 1) {
        throw std::invalid_argument("particle number must be >= 1, got " + std::to_string(particles));
    }
}

void check_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("rotation angle must be finite");
    }
}

void check_length(int particles, const ComplexVector& v) {
    if (v.size() != particles + 1) {
        throw std::invalid_argument("vector length " + std::to_string(v.size()) + " does not match N + 1 = " +
                                    std::to_string(particles + 1));
    }
}

// (-i)^k
Complex minus_i_power(Eigen::Index k) {
    switch (k & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

// Real-symmetric tridiagonal Jx: zero diagonal, off-diagonal c_k / 2.
Eigen::VectorXd jx_off_diagonal(int particles) {
    Eigen::VectorXd off(particles);
    for (int k = 0; k < particles; ++k) {
        off[k] = 0.5 * raising_coefficient(particles, projection_of(particles, static_cast<std::size_t>(k)));
    }
    return off;
}

ComplexVector real_times(const Eigen::MatrixXd& a, const ComplexVector& v) {
    const Eigen::VectorXd re = a * v.real();
    const Eigen::VectorXd im = a * v.imag();
    ComplexVector out(re.size());
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        out[i] = Complex(re[i], im[i]);
    }
    return out;
}

ComplexVector real_transpose_times(const Eigen::MatrixXd& a, const ComplexVector& v) {
    const Eigen::VectorXd re = a.transpose() * v.real();
    const Eigen::VectorXd im = a.transpose() * v.imag();
    ComplexVector out(re.size());
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        out[i] = Complex(re[i], im[i]);
    }
    return out;
}

// e^{i pi/2 Jx}, computed once per N by scaling and squaring.
class BeamSplitterCache {
public:
    std::shared_ptr<const ComplexMatrix> get(int particles) {
        std::lock_guard lock(mutex_);
        auto& slot = cache_[particles];
        if (!slot) {
            const ComplexMatrix generator = Complex(0.0, std::numbers::pi / 2) * build_operators(particles).jx.entries;
            slot = std::make_shared<const ComplexMatrix>(generator.exp());
        }
        return slot;
    }

private:
    std::mutex mutex_;
    std::map<int, std::shared_ptr<const ComplexMatrix>> cache_;
};

}  // namespace

double raising_coefficient(int particles, double m) {
    const double j = 0.5 * particles;
    const double value = j * (j + 1.0) - m * (m + 1.0);
    return value > 0.0 ? std::sqrt(value) : 0.0;
}

AngularMomentumOperators build_operators(int particles) {
    check_particles(particles);
    const Eigen::Index dim = particles + 1;
    const double j = 0.5 * particles;

    ComplexMatrix raise = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix jz = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double m = projection_of(particles, static_cast<std::size_t>(i));
        jz(i, i) = m;
        if (i + 1 < dim) {
            raise(i + 1, i) = raising_coefficient(particles, m);
        }
    }
    const ComplexMatrix lower = raise.adjoint();

    AngularMomentumOperators ops;
    ops.jx = {particles, 0.5 * (raise + lower)};
    ops.jy = {particles, (raise - lower) / Complex(0.0, 2.0)};
    ops.jz = {particles, jz};
    ops.j2 = {particles, ComplexMatrix::Identity(dim, dim) * (j * (j + 1.0))};
    return ops;
}

ComplexVector apply_jx(int particles, const ComplexVector& v) {
    check_length(particles, v);
    const Eigen::Index dim = v.size();
    ComplexVector out = ComplexVector::Zero(dim);
    for (Eigen::Index i = 0; i + 1 < dim; ++i) {
        const double c = 0.5 * raising_coefficient(particles, projection_of(particles, static_cast<std::size_t>(i)));
        out[i + 1] += c * v[i];
        out[i] += c * v[i + 1];
    }
    return out;
}

ComplexVector apply_jy(int particles, const ComplexVector& v) {
    check_length(particles, v);
    const Eigen::Index dim = v.size();
    ComplexVector out = ComplexVector::Zero(dim);
    // Jy = (J+ - J-) / 2i: <i+1|Jy|i> = -i c/2, <i|Jy|i+1> = +i c/2.
    for (Eigen::Index i = 0; i + 1 < dim; ++i) {
        const double c = 0.5 * raising_coefficient(particles, projection_of(particles, static_cast<std::size_t>(i)));
        out[i + 1] += Complex(0.0, -c) * v[i];
        out[i] += Complex(0.0, c) * v[i + 1];
    }
    return out;
}

ComplexVector apply_jz(int particles, const ComplexVector& v) {
    check_length(particles, v);
    ComplexVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = projection_of(particles, static_cast<std::size_t>(i)) * v[i];
    }
    return out;
}

JxSpectrum::JxSpectrum(int particles) : particles_(particles) {
    check_particles(particles);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(Eigen::VectorXd::Zero(particles + 1), jx_off_diagonal(particles),
                                  Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Jx eigendecomposition failed for N = " + std::to_string(particles));
    }
    vectors_ = solver.eigenvectors();
    // The spectrum of Jx is exactly {-j, ..., j}.
    values_.resize(particles + 1);
    for (int k = 0; k <= particles; ++k) {
        values_[k] = projection_of(particles, static_cast<std::size_t>(k));
    }
}

std::shared_ptr<const JxSpectrum> JxSpectrum::get(int particles) {
    check_particles(particles);
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const JxSpectrum>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[particles];
    if (!slot) {
        slot = std::make_shared<const JxSpectrum>(particles);
    }
    return slot;
}

ComplexVector JxSpectrum::rotate_x(double angle, const ComplexVector& v) const {
    check_angle(angle);
    check_length(particles_, v);
    ComplexVector c = real_transpose_times(vectors_, v);
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c[k] *= std::polar(1.0, -angle * values_[k]);
    }
    return real_times(vectors_, c);
}

ComplexVector JxSpectrum::y_coefficients(const ComplexVector& v) const {
    check_length(particles_, v);
    ComplexVector shifted(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        shifted[k] = std::conj(minus_i_power(k)) * v[k];
    }
    return real_transpose_times(vectors_, shifted);
}

ComplexVector JxSpectrum::y_from_coefficients(double angle, const ComplexVector& coefficients) const {
    check_angle(angle);
    ComplexVector c = coefficients;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c[k] *= std::polar(1.0, -angle * values_[k]);
    }
    ComplexVector out = real_times(vectors_, c);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        out[k] *= minus_i_power(k);
    }
    return out;
}

ComplexVector JxSpectrum::rotate_y(double angle, const ComplexVector& v) const {
    return y_from_coefficients(angle, y_coefficients(v));
}

ComplexMatrix JxSpectrum::rotation_x(double angle) const {
    check_angle(angle);
    Eigen::MatrixXd cos_part = vectors_;
    Eigen::MatrixXd sin_part = vectors_;
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        cos_part.col(k) *= std::cos(angle * values_[k]);
        sin_part.col(k) *= std::sin(angle * values_[k]);
    }
    const Eigen::MatrixXd re = cos_part * vectors_.transpose();
    const Eigen::MatrixXd im = -(sin_part * vectors_.transpose());
    ComplexMatrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
}

ComplexMatrix JxSpectrum::rotation_y(double angle) const {
    ComplexMatrix out = rotation_x(angle);
    for (Eigen::Index a = 0; a < out.rows(); ++a) {
        for (Eigen::Index b = 0; b < out.cols(); ++b) {
            out(a, b) *= minus_i_power(a) * std::conj(minus_i_power(b));
        }
    }
    return out;
}

UnitaryMatrix rotation_y(int particles, double angle, RotationBackend backend) {
    check_particles(particles);
    check_angle(angle);
    if (backend == RotationBackend::spectral) {
        return {particles, JxSpectrum::get(particles)->rotation_y(angle)};
    }
    static BeamSplitterCache splitters;
    const auto open = splitters.get(particles);  // e^{i pi/2 Jx}
    ComplexMatrix phased = *open;
    for (Eigen::Index i = 0; i < phased.rows(); ++i) {
        phased.row(i) *= std::polar(1.0, angle * projection_of(particles, static_cast<std::size_t>(i)));
    }
    return {particles, open->adjoint() * phased};
}

UnitaryMatrix rotation_x(int particles, double angle) {
    check_particles(particles);
    return {particles, JxSpectrum::get(particles)->rotation_x(angle)};
}

StateVector apply_unitary(const UnitaryMatrix& u, const StateVector& state) {
    if (u.dim() != state.dim()) {
        throw std::invalid_argument("unitary of dimension " + std::to_string(u.dim()) +
                                    " cannot act on a state of dimension " + std::to_string(state.dim()));
    }
    return StateVector(state.particles(), u.entries * state.amplitudes());
}

StateVector rotate_x(const StateVector& state, double angle) {
    return StateVector(state.particles(), JxSpectrum::get(state.particles())->rotate_x(angle, state.amplitudes()));
}

StateVector rotate_y(const StateVector& state, double angle) {
    return StateVector(state.particles(), JxSpectrum::get(state.particles())->rotate_y(angle, state.amplitudes()));
}

StateVector evolve_jz_squared(const StateVector& state, double chi_tau) {
    check_angle(chi_tau);
    ComplexVector out = state.amplitudes();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double m = projection_of(state.particles(), static_cast<std::size_t>(i));
        out[i] *= std::polar(1.0, -chi_tau * m * m);
    }
    return StateVector(state.particles(), std::move(out));
}

}  // namespace mzi
