#pragma once

// Dense complex linear algebra kernel: eigendecomposition, matrix
// exponential, multiplication, linear solves and norms. Intended for
// operators up to a few hundred rows; everything is value-semantic and
// stateless, so concurrent use is the caller's business.

#include <span>

#include "nonrecip/types.hpp"

namespace nonrecip::numkernel {

// Default absolute comparison tolerance on entries.
constexpr double kDefaultTol = 1e-10;

// Entrywise maximum modulus (the max-norm used by the classification
// predicates).
double max_abs(const Matrix& m);

bool is_finite(const Matrix& m);
bool is_finite(const Vector& v);

// Entrywise comparison with explicit tolerance; there is deliberately no
// operator== anywhere in this library.
bool approx_equal(const Matrix& a, const Matrix& b, double tol = kDefaultTol);
bool approx_equal(const Vector& a, const Vector& b, double tol = kDefaultTol);

// Exact matrix product up to rounding. Throws DimensionError on mismatch.
Matrix multiply(const Matrix& a, const Matrix& b);

struct EigResult {
  Vector values;      // eigenvalues, in solver order
  Matrix vectors;     // unit-norm right eigenvectors as columns
  double condition;   // 2-norm condition of the eigenvector matrix
                      // (infinity when numerically singular)
};

// Dense complex eigendecomposition (Schur/QR based). Each returned pair
// satisfies ||m v - lambda v|| <= tol * ||m||_F; a violation or a
// non-converged iteration throws ConvergenceError.
EigResult eig(const Matrix& m, double tol = 1e-9);

// exp(m) by scaling-and-squaring with a [13/13] Pade core; the matrix is
// scaled so the scaled 1-norm is <= 0.5, which keeps defective inputs as
// accurate as diagonalizable ones. Throws OverflowError when entries leave
// the representable range.
Matrix expm(const Matrix& m);

// Solve a x = b for square a, residual <= 1e-10 ||b||_F (one step of
// iterative refinement is applied if needed). Throws SingularMatrixError
// naming the offending pivot index when a pivot falls below
// n * eps * max|a|.
Matrix solve(const Matrix& a, const Matrix& b);

}  // namespace nonrecip::numkernel
