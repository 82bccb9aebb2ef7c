#pragma once

#include <functional>
#include <vector>

#include "msir/matrix.hpp"

namespace msir::linalg {

// Eigenpairs of a symmetric matrix. Eigenvalues are nonincreasing; column j of
// `eigenvectors` pairs with eigenvalues[j]. Each column is oriented so that its
// entry of largest magnitude is positive (lowest index wins ties).
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

struct JacobiOptions {
  // Stop once the off-diagonal Frobenius norm drops below tolerance * ||A||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
  // Symmetry tolerance applied to the input.
  double symmetry_tolerance = 1e-8;
};

// Cyclic Jacobi rotations. Throws DataError for non-square, non-finite, or
// non-symmetric input and NumericalError when max_sweeps is exhausted.
EigenDecomposition sym_eigendecomposition(const Matrix& a, const JacobiOptions& options = {});

// Largest eigenvalue of a symmetric matrix by Lanczos iteration with full
// reorthogonalization. Converges to the same value as the leading entry of
// sym_eigendecomposition, which is used as the cross-check in tests.
double largest_eigenvalue(const Matrix& a);

// Lower-triangular L with A = L L^T. Throws DataError on a non-positive pivot.
Matrix cholesky(const Matrix& a);

// Solves (L L^T) X = B given the Cholesky factor L.
Matrix cholesky_solve(const Matrix& l, const Matrix& b);

// (G + tau I)^{-1} B through a Cholesky factorization of G + tau I. A symmetric
// G whose shift is indefinite is solved through its eigendecomposition instead;
// NumericalError if G + tau I is singular.
Matrix ridge_inverse_apply(const Matrix& g, double tau, const Matrix& b);

// V diag(f(lambda)) V^T for SPD M. Eigenvalues at or below 1e-12 * lambda_max
// (or a non-positive spectrum) raise DataError.
Matrix spd_function(const Matrix& m, const std::function<double(double)>& f);

Matrix spd_matrix_log(const Matrix& m);
Matrix spd_matrix_exp_of_symmetric(const Matrix& s);
Matrix spd_inverse_sqrt(const Matrix& m);

// 2 * sum log diag(chol(M)).
double logdet_spd(const Matrix& m);

// Eigenvalues of a symmetric positive definite matrix, validated as in spd_function.
std::vector<double> spd_eigenvalues(const Matrix& m);

}  // namespace msir::linalg
