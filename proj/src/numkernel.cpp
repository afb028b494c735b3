#include "nonrecip/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nonrecip::numkernel {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << who << ": matrix must be square and nonempty, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Matrix& m, const char* who) {
  if (!is_finite(m)) throw Error(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_finite(const Matrix& m) { return m.allFinite(); }
bool is_finite(const Vector& v) { return v.allFinite(); }

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_abs(a - b) <= tol;
}

bool approx_equal(const Vector& a, const Vector& b, double tol) {
  if (a.size() != b.size()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "multiply: dimension mismatch, " << a.rows() << "x" << a.cols() << " * " << b.rows()
       << "x" << b.cols();
    throw DimensionError(os.str());
  }
  return a * b;
}

EigResult eig(const Matrix& m, double tol) {
  require_square(m, "eig");
  require_finite(m, "eig");

  Eigen::ComplexEigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
  const long max_iterations = 30L * static_cast<long>(m.rows());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig: QR iteration failed to converge within " << max_iterations << " iterations";
    throw ConvergenceError(os.str(), max_iterations);
  }

  EigResult result;
  result.values = solver.eigenvalues();
  result.vectors = solver.eigenvectors();  // columns are unit norm

  const double scale = m.norm();  // Frobenius
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double residual = (m * result.vectors.col(k) - result.values(k) * result.vectors.col(k)).norm();
    if (residual > tol * std::max(scale, 1e-300)) {
      std::ostringstream os;
      os << "eig: residual " << residual << " for eigenvalue " << k << " exceeds " << tol
         << "*||m||";
      throw ConvergenceError(os.str(), max_iterations);
    }
  }

  Eigen::JacobiSVD<Matrix> svd(result.vectors);
  const double sv_min = svd.singularValues().minCoeff();
  const double sv_max = svd.singularValues().maxCoeff();
  result.condition = sv_min > 0.0 ? sv_max / sv_min : std::numeric_limits<double>::infinity();
  return result;
}

namespace {

// Pade [13/13] coefficients for exp.
constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};

}  // namespace

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");

  const Eigen::Index n = m.rows();
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();

  // Scale so the working norm is <= 0.5, then undo by repeated squaring.
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    if (squarings > 1060) throw OverflowError("expm: matrix norm too large to scale");
  }
  const Matrix a = m / std::pow(2.0, squarings);

  const Matrix identity = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  const Matrix u = a * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
                        kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
                        kPade13[1] * identity);
  const Matrix v = a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
                   kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 + kPade13[0] * identity;

  Matrix result = Eigen::PartialPivLU<Matrix>(v - u).solve(v + u);
  for (int s = 0; s < squarings; ++s) result = result * result;

  if (!is_finite(result)) throw OverflowError("expm: result overflowed the representable range");
  return result;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  require_square(a, "solve");
  require_finite(a, "solve");
  if (a.rows() != b.rows()) {
    std::ostringstream os;
    os << "solve: dimension mismatch, a is " << a.rows() << "x" << a.cols() << ", b has "
       << b.rows() << " rows";
    throw DimensionError(os.str());
  }

  Eigen::PartialPivLU<Matrix> lu(a);
  const double pivot_floor =
      static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * max_abs(a);
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    if (std::abs(diag(k)) <= pivot_floor) {
      std::ostringstream os;
      os << "solve: singular matrix, pivot " << k << " has magnitude " << std::abs(diag(k))
         << " (threshold " << pivot_floor << ")";
      throw SingularMatrixError(os.str(), k);
    }
  }

  Matrix x = lu.solve(b);
  const double b_scale = std::max(b.norm(), 1e-300);
  Matrix residual = b - a * x;
  if (residual.norm() > 0.5e-10 * b_scale) {
    x += lu.solve(residual);  // one refinement step
    residual = b - a * x;
    if (residual.norm() > 1e-10 * b_scale) {
      throw SingularMatrixError("solve: residual exceeds 1e-10*||b|| after refinement");
    }
  }
  return x;
}

}  // namespace nonrecip::numkernel
