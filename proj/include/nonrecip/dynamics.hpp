#pragma once

// Time evolution of psi under H and phi under H^dagger, the derived
// real-valued observables (per-site amplitudes, Euclidean norm, biorthogonal
// overlaps), and growth-law fitting utilities.

#include <optional>
#include <span>
#include <vector>

#include "nonrecip/model.hpp"
#include "nonrecip/types.hpp"

namespace nonrecip::dynamics {

enum class Method {
  expm_step,    // one uniform-step propagator, iterated; requires uniform grid
  expm_direct,  // full matrix exponential at every sample
  rk4,          // classic fixed-substep Runge-Kutta on d/dt x = -i H x
};

Method method_from_string(std::string_view name);  // throws ConfigError
std::string to_string(Method method);

struct PropagateOptions {
  Method method = Method::expm_step;
  double rk4_substep = 1e-3;
  // expm_step: recompute the state from a single direct exponential every
  // this many steps to cap multiplicative error growth in long runs.
  int anchor_interval = 1000;
  // Abort once any |x_j| exceeds this; amplifying runs must pick t_max
  // accordingly.
  double overflow_limit = 1e150;
};

struct StateTrajectory {
  std::vector<double> times;       // increasing, starting at 0
  std::vector<Vector> psi;         // x_j(t); empty when only phi was evolved
  std::vector<Vector> phi;         // y_j(t); empty unless adjoint-evolved
  model::HamiltonianSpec spec;     // provenance, filled in by the caller
};

// psi[k] = expm(-i h times[k]) psi0. Throws ConfigError for a bad grid and
// OverflowError (carrying the last valid time) when amplification leaves the
// representable range.
StateTrajectory propagate(const Matrix& h, const Vector& psi0, const std::vector<double>& times,
                          const PropagateOptions& options = {});

// phi[k] = expm(-i h^dagger times[k]) phi0.
StateTrajectory propagate_adjoint(const Matrix& h, const Vector& phi0,
                                  const std::vector<double>& times,
                                  const PropagateOptions& options = {});

struct ObservableSeries {
  std::vector<double> times;
  Eigen::MatrixXd per_site_amplitude;  // samples x sites, |x_j(t)|
  Eigen::VectorXd euclidean_norm;      // ||x(t)||

  bool has_left = false;
  Eigen::MatrixXd left_amplitude;  // |y_j(t)|

  bool has_bi = false;
  Eigen::MatrixXcd bi_overlap;          // y_j^*(t) x_j(t); real for the chain family
  Eigen::VectorXcd bi_norm;             // sum_j y_j^* x_j, conserved along a trajectory
  Eigen::MatrixXd signed_log_overlap;   // sgn(y^*x) log sqrt|y^*x|; NaN marks exact zeros
};

// Populates whatever the trajectory supports: psi-derived fields always
// (psi required), left/bi fields when phi is present.
ObservableSeries observables(const StateTrajectory& traj);

// Least-squares slope of log(value) vs t over t in [t_lo, t_hi]. Requires
// >= 8 samples in the window and positive values throughout.
double fit_exponential_rate(std::span<const double> times, std::span<const double> values,
                            double t_lo, double t_hi);

// Least-squares slope of log(value) vs log(t); additionally requires t_lo > 0.
double fit_power_exponent(std::span<const double> times, std::span<const double> values,
                          double t_lo, double t_hi);

struct Peak {
  double t = 0.0;
  double value = 0.0;
};

// Grid argmax refined by a parabola through the three neighboring samples
// (no refinement at the grid ends).
Peak peak_transient(std::span<const double> times, std::span<const double> values);

}  // namespace nonrecip::dynamics
