#include "nonrecip/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nonrecip/numkernel.hpp"

namespace nonrecip::dynamics {

Method method_from_string(std::string_view name) {
  if (name == "expm-step") return Method::expm_step;
  if (name == "expm-direct") return Method::expm_direct;
  if (name == "rk4") return Method::rk4;
  throw ConfigError("unknown method \"" + std::string(name) +
                    "\" (expected expm-step|expm-direct|rk4)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::expm_step: return "expm-step";
    case Method::expm_direct: return "expm-direct";
    case Method::rk4: return "rk4";
  }
  throw ConfigError("invalid method enum value");
}

namespace {

void validate_grid(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("propagate: empty time grid");
  if (times.front() != 0.0) throw ConfigError("propagate: time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("propagate: time grid must be strictly increasing");
}

void check_overflow(const Vector& state, double limit, double last_valid_time) {
  if (state.allFinite() && state.cwiseAbs().maxCoeff() <= limit) return;
  std::ostringstream os;
  os << "propagate: state amplitude exceeded " << limit << "; last valid time "
     << last_valid_time;
  throw OverflowError(os.str(), last_valid_time);
}

std::vector<Vector> evolve(const Matrix& h, const Vector& x0, const std::vector<double>& times,
                           const PropagateOptions& options) {
  if (h.rows() != h.cols()) throw DimensionError("propagate: h must be square");
  if (x0.size() != h.rows()) {
    std::ostringstream os;
    os << "propagate: initial state has dimension " << x0.size() << ", h is " << h.rows() << "x"
       << h.cols();
    throw DimensionError(os.str());
  }
  if (!numkernel::is_finite(h) || !numkernel::is_finite(x0))
    throw Error("propagate: non-finite input");
  validate_grid(times);

  const Matrix generator = -kImag * h;
  std::vector<Vector> out(times.size());
  out[0] = x0;

  switch (options.method) {
    case Method::expm_step: {
      if (times.size() >= 2) {
        const double dt = times[1] - times[0];
        for (std::size_t k = 1; k < times.size(); ++k)
          if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * dt)
            throw ConfigError("propagate: expm-step requires a uniform time grid");
        const Matrix step = numkernel::expm(generator * dt);
        Vector state = x0;
        for (std::size_t k = 1; k < times.size(); ++k) {
          if (options.anchor_interval > 0 &&
              k % static_cast<std::size_t>(options.anchor_interval) == 0)
            state = numkernel::expm(generator * times[k]) * x0;
          else
            state = step * state;
          check_overflow(state, options.overflow_limit, times[k - 1]);
          out[k] = state;
        }
      }
      break;
    }
    case Method::expm_direct: {
      for (std::size_t k = 1; k < times.size(); ++k) {
        out[k] = numkernel::expm(generator * times[k]) * x0;
        check_overflow(out[k], options.overflow_limit, times[k - 1]);
      }
      break;
    }
    case Method::rk4: {
      if (!(options.rk4_substep > 0.0)) throw ConfigError("propagate: rk4 substep must be > 0");
      Vector state = x0;
      for (std::size_t k = 1; k < times.size(); ++k) {
        const double span = times[k] - times[k - 1];
        const auto substeps =
            std::max<long>(1, static_cast<long>(std::ceil(span / options.rk4_substep - 1e-12)));
        const double step = span / static_cast<double>(substeps);
        for (long s = 0; s < substeps; ++s) {
          const Vector k1 = generator * state;
          const Vector k2 = generator * (state + 0.5 * step * k1);
          const Vector k3 = generator * (state + 0.5 * step * k2);
          const Vector k4 = generator * (state + step * k3);
          state += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        check_overflow(state, options.overflow_limit, times[k - 1]);
        out[k] = state;
      }
      break;
    }
  }
  return out;
}

}  // namespace

StateTrajectory propagate(const Matrix& h, const Vector& psi0, const std::vector<double>& times,
                          const PropagateOptions& options) {
  StateTrajectory traj;
  traj.times = times;
  traj.psi = evolve(h, psi0, times, options);
  return traj;
}

StateTrajectory propagate_adjoint(const Matrix& h, const Vector& phi0,
                                  const std::vector<double>& times,
                                  const PropagateOptions& options) {
  StateTrajectory traj;
  traj.times = times;
  traj.phi = evolve(h.adjoint(), phi0, times, options);
  return traj;
}

ObservableSeries observables(const StateTrajectory& traj) {
  if (traj.psi.empty()) throw DimensionError("observables: trajectory has no psi states");
  if (traj.psi.size() != traj.times.size())
    throw DimensionError("observables: psi/time length mismatch");
  if (!traj.phi.empty() && traj.phi.size() != traj.times.size())
    throw DimensionError("observables: phi must share the psi time grid");

  const auto samples = static_cast<Eigen::Index>(traj.times.size());
  const Eigen::Index sites = traj.psi.front().size();

  ObservableSeries obs;
  obs.times = traj.times;
  obs.per_site_amplitude.resize(samples, sites);
  obs.euclidean_norm.resize(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const Vector& x = traj.psi[static_cast<std::size_t>(k)];
    obs.per_site_amplitude.row(k) = x.cwiseAbs().transpose();
    obs.euclidean_norm(k) = x.norm();
  }

  if (traj.phi.empty()) return obs;
  if (traj.phi.front().size() != sites)
    throw DimensionError("observables: phi dimension differs from psi");

  obs.has_left = true;
  obs.has_bi = true;
  obs.left_amplitude.resize(samples, sites);
  obs.bi_overlap.resize(samples, sites);
  obs.bi_norm.resize(samples);
  obs.signed_log_overlap.resize(samples, sites);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index k = 0; k < samples; ++k) {
    const Vector& x = traj.psi[static_cast<std::size_t>(k)];
    const Vector& y = traj.phi[static_cast<std::size_t>(k)];
    obs.left_amplitude.row(k) = y.cwiseAbs().transpose();
    Complex total = 0.0;
    for (Eigen::Index j = 0; j < sites; ++j) {
      const Complex v = std::conj(y(j)) * x(j);
      obs.bi_overlap(k, j) = v;
      total += v;
      // sgn(y^*x) log sqrt|y^*x|, with exact zeros mapped to a NaN sentinel
      // (log undefined at zero; rendered as the zero-amplitude color).
      const double mag = std::abs(v);
      if (mag == 0.0) {
        obs.signed_log_overlap(k, j) = nan;
      } else {
        const double sign = v.real() > 0.0 ? 1.0 : (v.real() < 0.0 ? -1.0 : 0.0);
        obs.signed_log_overlap(k, j) = sign * std::log(std::sqrt(mag));
      }
    }
    obs.bi_norm(k) = total;
  }
  return obs;
}

namespace {

struct Window {
  std::vector<double> t;
  std::vector<double> v;
};

Window collect_window(std::span<const double> times, std::span<const double> values, double t_lo,
                      double t_hi, const char* who) {
  if (times.size() != values.size())
    throw DimensionError(std::string(who) + ": times/values length mismatch");
  if (!(t_lo < t_hi)) throw ConfigError(std::string(who) + ": window must satisfy t_lo < t_hi");
  Window w;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_lo || times[k] > t_hi) continue;
    if (!(values[k] > 0.0)) {
      std::ostringstream os;
      os << who << ": nonpositive value " << values[k] << " at t = " << times[k]
         << " inside the fit window";
      throw Error(os.str());
    }
    w.t.push_back(times[k]);
    w.v.push_back(values[k]);
  }
  if (w.t.size() < 8) {
    std::ostringstream os;
    os << who << ": need >= 8 samples in [" << t_lo << ", " << t_hi << "], found " << w.t.size();
    throw ConfigError(os.str());
  }
  return w;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw Error("fit: degenerate window (zero abscissa variance)");
  return sxy / sxx;
}

}  // namespace

double fit_exponential_rate(std::span<const double> times, std::span<const double> values,
                            double t_lo, double t_hi) {
  const Window w = collect_window(times, values, t_lo, t_hi, "fit_exponential_rate");
  std::vector<double> logv(w.v.size());
  std::transform(w.v.begin(), w.v.end(), logv.begin(), [](double v) { return std::log(v); });
  return least_squares_slope(w.t, logv);
}

double fit_power_exponent(std::span<const double> times, std::span<const double> values,
                          double t_lo, double t_hi) {
  if (!(t_lo > 0.0)) throw ConfigError("fit_power_exponent: window must start at t_lo > 0");
  const Window w = collect_window(times, values, t_lo, t_hi, "fit_power_exponent");
  std::vector<double> logt(w.t.size()), logv(w.v.size());
  std::transform(w.t.begin(), w.t.end(), logt.begin(), [](double t) { return std::log(t); });
  std::transform(w.v.begin(), w.v.end(), logv.begin(), [](double v) { return std::log(v); });
  return least_squares_slope(logt, logv);
}

Peak peak_transient(std::span<const double> times, std::span<const double> values) {
  if (times.empty() || times.size() != values.size())
    throw DimensionError("peak_transient: empty series or length mismatch");
  std::size_t best = 0;
  for (std::size_t k = 1; k < times.size(); ++k)
    if (values[k] > values[best]) best = k;

  Peak peak{times[best], values[best]};
  if (best == 0 || best + 1 == times.size()) return peak;

  // Parabola through the argmax and its neighbors.
  const double t0 = times[best - 1], t1 = times[best], t2 = times[best + 1];
  const double v0 = values[best - 1], v1 = values[best], v2 = values[best + 1];
  const double d01 = (v1 - v0) / (t1 - t0);
  const double d12 = (v2 - v1) / (t2 - t1);
  const double curvature = (d12 - d01) / (t2 - t0);
  if (curvature < 0.0) {
    const double t_star = 0.5 * (t0 + t1 - d01 / curvature);
    if (t_star >= t0 && t_star <= t2) {
      peak.t = t_star;
      // Newton form of the interpolating parabola evaluated at its vertex.
      peak.value = v0 + d01 * (t_star - t0) + curvature * (t_star - t0) * (t_star - t1);
    }
  }
  return peak;
}

}  // namespace nonrecip::dynamics
