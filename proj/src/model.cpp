#include "nonrecip/model.hpp"

#include <cmath>
#include <sstream>

#include "nonrecip/numkernel.hpp"

namespace nonrecip::model {

Family family_from_string(std::string_view name) {
  if (name == "chain") return Family::chain;
  if (name == "jordan2") return Family::jordan2;
  if (name == "jordan2-loss") return Family::jordan2_loss;
  if (name == "pt2") return Family::pt2;
  throw ConfigError("unknown model family \"" + std::string(name) +
                    "\" (expected chain|jordan2|jordan2-loss|pt2)");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::chain: return "chain";
    case Family::jordan2: return "jordan2";
    case Family::jordan2_loss: return "jordan2-loss";
    case Family::pt2: return "pt2";
  }
  throw ConfigError("invalid family enum value");
}

void validate(const HamiltonianSpec& spec) {
  if (spec.family == Family::chain && spec.n < 2)
    throw ConfigError("model.n: chain requires n >= 2, got " + std::to_string(spec.n));
  if (!(spec.gamma >= 0.0))
    throw ConfigError("model.gamma: net loss must be >= 0, got " + std::to_string(spec.gamma));
  if (!(spec.beta >= 0.0 && spec.beta <= 1.0))
    throw ConfigError("model.beta: boundary parameter must lie in [0,1], got " +
                      std::to_string(spec.beta));
  if (!(spec.gamma0 >= 0.0))
    throw ConfigError("model.gamma0: net loss must be >= 0, got " + std::to_string(spec.gamma0));
  if (!std::isfinite(spec.t_l) || !std::isfinite(spec.t_r) || !std::isfinite(spec.g) ||
      !std::isfinite(spec.c))
    throw ConfigError("model: hopping/coupling parameters must be finite");
}

int dimension(const HamiltonianSpec& spec) {
  return spec.family == Family::chain ? spec.n : 2;
}

Matrix build(const HamiltonianSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case Family::chain: {
      const int n = spec.n;
      Matrix h = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j) h(j, j) = Complex(0.0, -spec.gamma);
      for (int j = 0; j + 1 < n; ++j) {
        h(j, j + 1) = spec.t_l;
        h(j + 1, j) = spec.t_r;
      }
      h(0, n - 1) += spec.beta * spec.t_r;
      h(n - 1, 0) += spec.beta * spec.t_l;
      return h;
    }
    case Family::jordan2: {
      Matrix h = Matrix::Zero(2, 2);
      h(0, 1) = spec.t_l;
      return h;
    }
    case Family::jordan2_loss: {
      Matrix h = Matrix::Zero(2, 2);
      h(0, 0) = h(1, 1) = Complex(0.0, -spec.gamma);
      h(0, 1) = spec.t_l;
      return h;
    }
    case Family::pt2: {
      Matrix h = Matrix::Zero(2, 2);
      h(0, 0) = Complex(0.0, spec.g - spec.gamma0);
      h(1, 1) = Complex(0.0, -spec.g - spec.gamma0);
      h(0, 1) = h(1, 0) = spec.c;
      return h;
    }
  }
  throw ConfigError("invalid family enum value");
}

bool is_hermitian(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) throw DimensionError("is_hermitian: matrix must be square");
  return numkernel::max_abs(h - h.adjoint()) <= tol;
}

bool is_normal(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) throw DimensionError("is_normal: matrix must be square");
  return numkernel::max_abs(h * h.adjoint() - h.adjoint() * h) <= tol;
}

bool check_pseudo_hermitian(const Matrix& h, const Matrix& eta, double tol) {
  if (h.rows() != h.cols()) throw DimensionError("check_pseudo_hermitian: h must be square");
  if (eta.rows() != h.rows() || eta.cols() != h.cols())
    throw DimensionError("check_pseudo_hermitian: eta must match h");
  // eta h eta^-1 via a transposed solve: z eta = eta h.
  const Matrix eta_h = eta * h;
  const Matrix z = numkernel::solve(eta.transpose(), eta_h.transpose()).transpose();
  return numkernel::max_abs(z - h.adjoint()) <= tol;
}

GaugeTransform gauge_transform(const HamiltonianSpec& spec) {
  validate(spec);
  if (spec.family != Family::chain)
    throw ConfigError("gauge_transform: only defined for the chain family");
  if (spec.beta != 0.0) throw ConfigError("gauge_transform: PBC not gauge-removable");
  if (spec.t_r <= 0.0 || spec.t_l <= 0.0)
    throw SingularMatrixError("gauge transform singular for unidirectional coupling");

  const int n = spec.n;
  const double r = std::sqrt(spec.t_l / spec.t_r);
  Eigen::VectorXd scale(n);
  double p = 1.0;
  for (int j = 0; j < n; ++j) {
    p *= r;
    scale(j) = p;
  }
  if (!scale.allFinite() || scale.minCoeff() <= 0.0)
    throw OverflowError("gauge_transform: scale factors r^j left the representable range");

  const Matrix h = build(spec);
  Matrix h_sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h_sym(i, j) = h(i, j) * (scale(i) / scale(j));

  GaugeTransform out;
  out.s = scale.cast<Complex>().asDiagonal();
  out.h_sym = std::move(h_sym);
  return out;
}

}  // namespace nonrecip::model
