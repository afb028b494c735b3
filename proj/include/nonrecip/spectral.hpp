#pragma once

// Biorthogonal spectral analysis: paired right/left eigenvectors,
// normalization, defectiveness detection, and the spectral growth-rate
// bound for long-time dynamics.

#include <vector>

#include "nonrecip/types.hpp"

namespace nonrecip::spectral {

// Eigenvector-matrix condition above which a matrix is flagged defective
// and pairing/normalization are not attempted.
constexpr double kDefectiveConditionThreshold = 1e8;

struct SpectralData {
  // Sorted by descending Im, ties (within 1e-9 of the spectral scale) by
  // ascending Re, so index 0 carries the dominant growth mode.
  Vector eigenvalues;

  // Non-defective: right_vectors[k] is unit norm, left_vectors[k] is the
  // matching right eigenvector of h^dagger scaled so <phi_k|psi_k> = 1.
  // Defective: only the numerically independent eigenvectors found, with
  // unit norm and no pairing asserted.
  std::vector<Vector> right_vectors;
  std::vector<Vector> left_vectors;

  bool defective = false;
  double eigvec_condition = 0.0;
};

SpectralData analyze(const Matrix& h, double tol = 1e-9);

// Max_k Im(lambda_k): the asymptotic exponential rate of the Euclidean norm.
double max_growth_rate(const SpectralData& sd);

// True iff every |Im lambda_k| <= tol.
bool spectrum_is_real(const SpectralData& sd, double tol = 1e-9);

}  // namespace nonrecip::spectral
