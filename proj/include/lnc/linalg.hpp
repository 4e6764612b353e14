#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace lnc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};

/// Frobenius norm of A - A^dagger (zero iff A is Hermitian).
inline double hermiticity_residual(const Matrix& a) {
    return (a - a.adjoint()).norm();
}

/// Frobenius norm of A + A^dagger (zero iff A is anti-Hermitian).
inline double anti_hermiticity_residual(const Matrix& a) {
    return (a + a.adjoint()).norm();
}

inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }
inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// Kronecker product of two dense complex matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Eigenvalues of the Hermitian part (A + A^dagger)/2, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& a) {
    const Matrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Largest entry modulus (0 for an empty matrix).
inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace lnc
