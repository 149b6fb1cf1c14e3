#pragma once

#include <memory>

#include <Eigen/Dense>

#include "mzi/state_vector.hpp"

namespace mzi {

// Matrix of an angular-momentum operator in the Jz eigenbasis, rows and
// columns indexed by i = m + N/2.
struct OperatorMatrix {
    int particles = 0;
    ComplexMatrix entries;

    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
};

struct AngularMomentumOperators {
    OperatorMatrix jx;
    OperatorMatrix jy;
    OperatorMatrix jz;
    OperatorMatrix j2;
};

AngularMomentumOperators build_operators(int particles);

// <j,m+1| J+ |j,m> = sqrt(j(j+1) - m(m+1)).
double raising_coefficient(int particles, double m);

// Tridiagonal operator actions in O(N), used on hot paths instead of dense products.
ComplexVector apply_jx(int particles, const ComplexVector& v);
ComplexVector apply_jy(int particles, const ComplexVector& v);
ComplexVector apply_jz(int particles, const ComplexVector& v);

struct UnitaryMatrix {
    int particles = 0;
    ComplexMatrix entries;

    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
};

enum class RotationBackend {
    // Eigendecomposition of the real tridiagonal form of Jy.
    spectral,
    // Beam splitter, phase shift, beam splitter: e^{-i pi/2 Jx} e^{i phi Jz} e^{i pi/2 Jx},
    // with the beam splitters from a Pade matrix exponential.
    beam_splitter,
};

// Eigensystem of Jx. Jy = D Jx D^dagger with D = diag((-i)^k), so one real
// symmetric tridiagonal eigenproblem serves rotations about x and y. Angles
// enter only through e^{-i angle m} on the eigenvalues.
class JxSpectrum {
public:
    explicit JxSpectrum(int particles);

    // Shared, immutable instance per particle number.
    static std::shared_ptr<const JxSpectrum> get(int particles);

    int particles() const { return particles_; }
    const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
    const Eigen::VectorXd& eigenvalues() const { return values_; }

    // e^{-i angle Jx} v and e^{-i angle Jy} v in O(N^2).
    ComplexVector rotate_x(double angle, const ComplexVector& v) const;
    ComplexVector rotate_y(double angle, const ComplexVector& v) const;

    // Coefficients c = V^T D^dagger v so that e^{-i angle Jy} v = D V (e^{-i angle lambda} .* c).
    ComplexVector y_coefficients(const ComplexVector& v) const;
    ComplexVector y_from_coefficients(double angle, const ComplexVector& coefficients) const;

    ComplexMatrix rotation_x(double angle) const;
    ComplexMatrix rotation_y(double angle) const;

private:
    int particles_;
    Eigen::MatrixXd vectors_;
    Eigen::VectorXd values_;
};

UnitaryMatrix rotation_y(int particles, double angle, RotationBackend backend = RotationBackend::spectral);
UnitaryMatrix rotation_x(int particles, double angle);

StateVector apply_unitary(const UnitaryMatrix& u, const StateVector& state);

// e^{-i angle Jx}|psi> and e^{-i angle Jy}|psi> without forming the matrix.
StateVector rotate_x(const StateVector& state, double angle);
StateVector rotate_y(const StateVector& state, double angle);

// One-axis twisting: alpha_m -> e^{-i chi_tau m^2} alpha_m.
StateVector evolve_jz_squared(const StateVector& state, double chi_tau);

}  // namespace mzi
