#include "nonrecip/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "nonrecip/numkernel.hpp"

namespace nonrecip::spectral {

namespace {

// Sort order: descending Im, ties (within tie_tol) by ascending Re.
std::vector<Eigen::Index> sorted_order(const Vector& values, double tie_tol) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a).imag() > values(b).imag();
  });
  // Re-sort runs of nearly equal imaginary parts by real part.
  std::size_t lo = 0;
  while (lo < order.size()) {
    std::size_t hi = lo + 1;
    while (hi < order.size() &&
           values(order[hi - 1]).imag() - values(order[hi]).imag() <= tie_tol)
      ++hi;
    std::stable_sort(order.begin() + lo, order.begin() + hi, [&](Eigen::Index a, Eigen::Index b) {
      return values(a).real() < values(b).real();
    });
    lo = hi;
  }
  return order;
}

// Keep only vectors with a significant component outside the span of the
// ones already kept (modified Gram-Schmidt with a fixed threshold).
std::vector<Vector> independent_subset(const Matrix& vectors, double threshold) {
  std::vector<Vector> kept;
  std::vector<Vector> basis;
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Vector v = vectors.col(k);
    for (const Vector& b : basis) v -= b.dot(v) * b;
    if (v.norm() > threshold) {
      kept.push_back(vectors.col(k).normalized());
      basis.push_back(v.normalized());
    }
  }
  return kept;
}

struct Cluster {
  std::size_t begin;
  std::size_t end;  // half-open
};

std::vector<Cluster> degenerate_clusters(const Vector& values, double cluster_tol) {
  std::vector<Cluster> clusters;
  std::size_t lo = 0;
  const auto n = static_cast<std::size_t>(values.size());
  while (lo < n) {
    std::size_t hi = lo + 1;
    while (hi < n && std::abs(values(static_cast<Eigen::Index>(hi)) -
                              values(static_cast<Eigen::Index>(hi - 1))) <= cluster_tol)
      ++hi;
    if (hi - lo >= 2) clusters.push_back({lo, hi});
    lo = hi;
  }
  return clusters;
}

}  // namespace

SpectralData analyze(const Matrix& h, double tol) {
  const auto right = numkernel::eig(h, tol);
  const auto left = numkernel::eig(h.adjoint(), tol);
  const Eigen::Index n = h.rows();

  SpectralData sd;
  sd.eigvec_condition = right.condition;
  sd.defective =
      !(right.condition <= kDefectiveConditionThreshold);  // catches inf/NaN as well

  const double scale = std::max(1.0, right.values.cwiseAbs().maxCoeff());
  const auto order = sorted_order(right.values, 1e-9 * scale);

  sd.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) sd.eigenvalues(k) = right.values(order[k]);

  if (sd.defective) {
    sd.right_vectors = independent_subset(right.vectors, 1e-6);
    sd.left_vectors = independent_subset(left.vectors, 1e-6);
    return sd;
  }

  Matrix psi(n, n);
  for (Eigen::Index k = 0; k < n; ++k) psi.col(k) = right.vectors.col(order[k]);

  // Pair left eigenvectors to right ones by eigenvalue conjugation,
  // greedy nearest match; near-ties resolved by largest |<phi|psi>|.
  Matrix phi(n, n);
  {
    std::vector<bool> used(n, false);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Complex target = std::conj(sd.eigenvalues(k));
      double best_dist = std::numeric_limits<double>::infinity();
      for (Eigen::Index m = 0; m < n; ++m)
        if (!used[m]) best_dist = std::min(best_dist, std::abs(left.values(m) - target));

      Eigen::Index best = -1;
      double best_overlap = -1.0;
      for (Eigen::Index m = 0; m < n; ++m) {
        if (used[m]) continue;
        const double dist = std::abs(left.values(m) - target);
        if (dist > best_dist + 1e-9 * scale) continue;
        const double overlap = std::abs(left.vectors.col(m).dot(psi.col(k)));
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = m;
        }
      }

      if (best_dist > std::max(tol * scale, tol)) {
        std::ostringstream os;
        os << "analyze: eigenvalue " << k << " of h has no conjugate partner in spectrum of "
           << "h^dagger within " << tol << " (distance " << best_dist << ")";
        throw ConvergenceError(os.str(), 0);
      }
      used[static_cast<std::size_t>(best)] = true;
      phi.col(k) = left.vectors.col(best);
    }
  }

  // Degenerate but non-defective eigenvalues: orthonormalize the right
  // block, then rebuild the left block so the whole pairing stays clean.
  for (const Cluster& cluster : degenerate_clusters(sd.eigenvalues, 1e-8 * scale)) {
    const auto lo = static_cast<Eigen::Index>(cluster.begin);
    const auto len = static_cast<Eigen::Index>(cluster.end - cluster.begin);
    const Matrix psi_block = psi.middleCols(lo, len);
    Eigen::HouseholderQR<Matrix> qr(psi_block);
    Matrix q = qr.householderQ() * Matrix::Identity(n, len);
    psi.middleCols(lo, len) = q;

    const Matrix phi_block = phi.middleCols(lo, len);
    const Matrix overlap = phi_block.adjoint() * psi.middleCols(lo, len);
    // phi' = phi * (overlap^-1)^dagger so that phi'^dagger psi = I.
    phi.middleCols(lo, len) =
        phi_block * numkernel::solve(overlap, Matrix::Identity(len, len)).adjoint();
  }

  // Normalization convention: right vectors unit norm, left vectors scaled
  // so <phi_k|psi_k> = 1.
  sd.right_vectors.resize(static_cast<std::size_t>(n));
  sd.left_vectors.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector r = psi.col(k).normalized();
    Vector l = phi.col(k);
    const Complex d = l.dot(r);  // <phi|psi>
    if (std::abs(d) < 1e-14) {
      std::ostringstream os;
      os << "analyze: vanishing biorthogonal overlap for eigenvalue " << k
         << " on a matrix not flagged defective (condition " << right.condition << ")";
      throw ConvergenceError(os.str(), 0);
    }
    l /= std::conj(d);
    sd.right_vectors[static_cast<std::size_t>(k)] = std::move(r);
    sd.left_vectors[static_cast<std::size_t>(k)] = std::move(l);
  }
  return sd;
}

double max_growth_rate(const SpectralData& sd) {
  double rate = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    rate = std::max(rate, sd.eigenvalues(k).imag());
  return rate;
}

bool spectrum_is_real(const SpectralData& sd, double tol) {
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    if (std::abs(sd.eigenvalues(k).imag()) > tol) return false;
  return true;
}

}  // namespace nonrecip::spectral
