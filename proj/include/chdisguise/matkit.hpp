#pragma once

// Dense complex Hermitian linear algebra used throughout the library.
//
// Matrices are Eigen::MatrixXcd. The eigensolver is a cyclic complex Jacobi
// method: every problem handled here is at most 16x16 (Choi matrices of
// 4-dimensional channels), where Jacobi is accurate to a few ulps and gives
// fully deterministic output for a fixed input.

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace chdisguise {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Eigenvalues sorted descending; column k of `eigenvectors` belongs to
/// eigenvalue k. Each eigenvector's first non-negligible component is real
/// and positive.
struct EigenSystem {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

/// Positive and negative parts of a Hermitian matrix, both PSD with
/// orthogonal supports: M = plus - minus.
struct PosNegSplit {
  ComplexMatrix plus;
  ComplexMatrix minus;
};

inline constexpr double kDefaultZeroTol = 1e-10;

/// max |M - M^dagger| <= rel_tol * (1 + max |M|).
bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12);

/// (M + M^dagger) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Largest absolute entry.
double max_abs(const ComplexMatrix& m);

/// Full spectrum of a Hermitian matrix.
/// Throws ValidationError for non-square or non-Hermitian input and
/// NumericalError if the sweeps do not converge.
EigenSystem hermitian_eig(const ComplexMatrix& m);

/// Eigenvalues with |lambda| <= zero_tol * ||M|| are assigned to neither part.
PosNegSplit split_pos_neg(const ComplexMatrix& m, double zero_tol = kDefaultZeroTol);

/// Largest singular value.
double spectral_norm(const ComplexMatrix& m);

/// Nearest PSD matrix in the Frobenius norm (negative eigenvalues clipped).
ComplexMatrix project_psd(const ComplexMatrix& m);

double min_eigenvalue(const ComplexMatrix& m);

/// V f(Lambda) V^dagger for a Hermitian matrix.
ComplexMatrix spectral_map(const ComplexMatrix& m,
                           const std::function<double(double)>& f);

ComplexMatrix identity(Eigen::Index n);

/// Column-stacking vectorization: vec(A)[col * rows + row] = A(row, col).
ComplexVector vec(const ComplexMatrix& a);

/// Inverse of vec for a square n x n matrix.
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index n);

}  // namespace chdisguise
