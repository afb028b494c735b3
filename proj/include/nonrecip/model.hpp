#pragma once

// Hamiltonian families of the nonreciprocal chain study, plus the structure
// predicates (Hermitian / normal / pseudo-Hermitian) and the imaginary gauge
// transform that symmetrizes an open asymmetric-hopping chain.

#include <string>
#include <string_view>

#include "nonrecip/types.hpp"

namespace nonrecip::model {

enum class Family {
  chain,         // N-site chain: diagonal -i*gamma, t_l above, t_r below,
                 // corners beta*t_r (top right) and beta*t_l (bottom left)
  jordan2,       // [[0, t_l], [0, 0]]
  jordan2_loss,  // [[-i*gamma, t_l], [0, -i*gamma]]
  pt2,           // [[i*g - i*gamma0, c], [c, -i*g - i*gamma0]]
};

Family family_from_string(std::string_view name);  // throws ConfigError
std::string to_string(Family family);

struct HamiltonianSpec {
  Family family = Family::chain;
  int n = 10;           // chain only; >= 2
  double t_l = 1.0;     // leftward hopping (site j+1 -> j)
  double t_r = 0.0;     // rightward hopping (site j -> j+1)
  double gamma = 0.0;   // net loss, >= 0
  double beta = 0.0;    // boundary parameter in [0,1]: 1 = PBC, 0 = OBC
  double gamma0 = 0.0;  // pt2 net loss, >= 0
  double g = 1.0;       // pt2 gain/loss
  double c = 1.0;       // pt2 coupling
};

// Throws ConfigError naming the offending field.
void validate(const HamiltonianSpec& spec);

// Matrix dimension build() will produce: spec.n for chains, 2 otherwise.
int dimension(const HamiltonianSpec& spec);

Matrix build(const HamiltonianSpec& spec);

// ||h - h^dagger||_max <= tol
bool is_hermitian(const Matrix& h, double tol = 1e-9);

// ||h h^dagger - h^dagger h||_max <= tol
bool is_normal(const Matrix& h, double tol = 1e-9);

// ||eta h eta^-1 - h^dagger||_max <= tol. Throws SingularMatrixError for
// singular eta. Note this is a necessary condition for a real spectrum, not
// a sufficient one; spectral reality is always checked on the eigenvalues
// themselves.
bool check_pseudo_hermitian(const Matrix& h, const Matrix& eta, double tol = 1e-9);

struct GaugeTransform {
  Matrix s;      // diag(r, r^2, ..., r^N) with r = sqrt(t_l / t_r)
  Matrix h_sym;  // s H s^-1: hopping sqrt(t_l t_r) on both off-diagonals
};

// Similarity transform removing the hopping asymmetry of an open chain.
// Requires family == chain, beta == 0 and t_l, t_r > 0; eta = s^dagger s
// then certifies pseudo-Hermiticity of the lossless chain.
GaugeTransform gauge_transform(const HamiltonianSpec& spec);

}  // namespace nonrecip::model
