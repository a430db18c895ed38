#include "vioflight/estimation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vioflight::estimation {

namespace {

// Regularized lower incomplete gamma P(a, x), series for x < a + 1 and
// Lentz continued fraction otherwise.
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
  return 1.0 - q;
}

void symmetrize(Eigen::Matrix2d& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

double axis_variance(const Eigen::Matrix3d& cov, int axis, double fallback) {
  if (cov.isZero(0.0)) return fallback * fallback;
  return cov(axis, axis);
}

void require_psd(const Eigen::Matrix3d& cov, const char* what) {
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument(std::string(what) + ": covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument(std::string(what) + ": covariance not PSD");
  }
}

}  // namespace

double chi_squared_quantile(double prob, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_squared_quantile: dof < 1");
  if (!(prob > 0.0) || !(prob < 1.0)) {
    throw std::invalid_argument("chi_squared_quantile: prob must be in (0,1)");
  }
  const double a = 0.5 * static_cast<double>(dof);
  double lo = 0.0;
  double hi = static_cast<double>(dof);
  while (gamma_p(a, 0.5 * hi) < prob) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_p(a, 0.5 * mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

void FilterConfig::validate() const {
  if (!(accel_noise_density > 0.0) || !(default_sigma_p > 0.0) ||
      !(default_sigma_v > 0.0) || !(gate_quantile > 0.0) ||
      gate_failure_limit <= 0 || !(cov_trace_limit > 0.0) ||
      !(max_measurement_age > 0.0)) {
    throw std::invalid_argument("FilterConfig: all parameters must be positive");
  }
}

double EstimatorState::min_cov_eigenvalue() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const Eigen::Matrix2d& m : cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
    worst = std::min(worst, eig.eigenvalues().minCoeff());
  }
  return worst;
}

bool EstimatorState::mean_finite() const {
  return p.allFinite() && v.allFinite();
}

EstimatorState init_state(double t, const Eigen::Vector3d& p,
                          const Eigen::Vector3d& v, double pos_var,
                          double vel_var, const Eigen::Quaterniond& attitude) {
  EstimatorState state;
  state.t = t;
  state.p = p;
  state.v = v;
  for (Eigen::Matrix2d& m : state.cov) {
    m = Eigen::Vector2d(pos_var, vel_var).asDiagonal();
  }
  state.attitude = attitude.normalized();
  return state;
}

EstimatorState predict(const EstimatorState& state, const ImuSample& imu,
                       double dt, const FilterConfig& cfg) {
  cfg.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("predict: dt must be positive and finite");
  }
  if (!imu.a_world.allFinite()) {
    throw std::invalid_argument("predict: non-finite IMU acceleration");
  }

  EstimatorState out = state;
  out.t = state.t + dt;
  out.p = state.p + state.v * dt + 0.5 * imu.a_world * dt * dt;
  out.v = state.v + imu.a_world * dt;
  out.attitude = imu.q.normalized();
  out.last_accel = imu.a_world;

  Eigen::Matrix2d f;
  f << 1.0, dt, 0.0, 1.0;
  const double q = cfg.accel_noise_density * cfg.accel_noise_density;
  Eigen::Matrix2d qd;
  qd << q * dt * dt * dt / 3.0, q * dt * dt / 2.0,
        q * dt * dt / 2.0,      q * dt;
  for (int axis = 0; axis < 3; ++axis) {
    out.cov[axis] = f * state.cov[axis] * f.transpose() + qd;
    symmetrize(out.cov[axis]);
  }
  return out;
}

std::pair<EstimatorState, UpdateResult> update(const EstimatorState& state,
                                               const VioMeasurement& z,
                                               const FilterConfig& cfg) {
  cfg.validate();
  require_psd(z.cov_p, "update: position");
  if (z.cov_v) require_psd(*z.cov_v, "update: velocity");

  if (state.t - z.t > cfg.max_measurement_age) {
    return {state, UpdateResult::stale};
  }

  const bool with_velocity = z.v.has_value();
  const int dim = with_velocity ? 6 : 3;

  // Stacked gate distance from the per-axis innovations. The axes are
  // decoupled, so the innovation covariance is block diagonal.
  double gate_distance = 0.0;
  std::array<double, 3> rp{}, rv{};
  for (int axis = 0; axis < 3; ++axis) {
    rp[axis] = axis_variance(z.cov_p, axis, cfg.default_sigma_p);
    const double s_p = state.cov[axis](0, 0) + rp[axis];
    const double nu_p = z.p(axis) - state.p(axis);
    gate_distance += nu_p * nu_p / s_p;
    if (with_velocity) {
      rv[axis] = z.cov_v ? (*z.cov_v)(axis, axis)
                         : cfg.default_sigma_v * cfg.default_sigma_v;
      const double s_v = state.cov[axis](1, 1) + rv[axis];
      const double nu_v = (*z.v)(axis) - state.v(axis);
      gate_distance += nu_v * nu_v / s_v;
    }
  }

  const bool gate_enabled = cfg.gate_quantile < 1.0;
  if (gate_enabled &&
      gate_distance > chi_squared_quantile(cfg.gate_quantile, dim)) {
    EstimatorState out = state;
    out.consecutive_failures += 1;
    return {out, UpdateResult::gated};
  }

  EstimatorState out = state;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector2d mean(state.p(axis), state.v(axis));
    Eigen::Matrix2d cov = state.cov[axis];
    if (with_velocity) {
      const Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
      const Eigen::Matrix2d r =
          Eigen::Vector2d(rp[axis], rv[axis]).asDiagonal();
      const Eigen::Matrix2d s = cov + r;
      const Eigen::Matrix2d k = cov * s.inverse();
      const Eigen::Vector2d nu(z.p(axis) - mean(0), (*z.v)(axis) - mean(1));
      mean += k * nu;
      const Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity() - k * h;
      cov = ikh * cov * ikh.transpose() + k * r * k.transpose();
    } else {
      const Eigen::RowVector2d h(1.0, 0.0);
      const double s = cov(0, 0) + rp[axis];
      const Eigen::Vector2d k = cov.col(0) / s;
      mean += k * (z.p(axis) - mean(0));
      const Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity() - k * h;
      cov = ikh * cov * ikh.transpose() + rp[axis] * k * k.transpose();
    }
    symmetrize(cov);
    out.p(axis) = mean(0);
    out.v(axis) = mean(1);
    out.cov[axis] = cov;
  }
  out.consecutive_failures = 0;
  if (out.health == Health::degraded) out.health = Health::valid;
  return {out, UpdateResult::accepted};
}

EstimatorState propagate_to(const EstimatorState& state, double t_query,
                            const FilterConfig& cfg) {
  if (t_query < state.t) {
    throw std::invalid_argument("propagate_to: query time before state time");
  }
  if (t_query == state.t) return state;
  ImuSample hold;
  hold.t = t_query;
  hold.a_world = state.last_accel;
  hold.q = state.attitude;
  return predict(state, hold, t_query - state.t, cfg);
}

EstimatorState note_missed_measurement(EstimatorState state) {
  state.consecutive_failures += 1;
  return state;
}

std::pair<EstimatorState, std::optional<LandingEvent>> check_health(
    const EstimatorState& state, const FilterConfig& cfg) {
  cfg.validate();
  EstimatorState out = state;
  std::optional<LandingEvent> event;

  if (out.health == Health::failed) {
    return {out, event};  // latched
  }

  std::string cause;
  if (!out.mean_finite()) {
    cause = "nonfinite_state";
  } else if (out.consecutive_failures >= cfg.gate_failure_limit) {
    cause = "gate_failure_limit";
  } else if (out.position_cov_trace() > cfg.cov_trace_limit) {
    cause = "covariance_limit";
  }

  if (!cause.empty()) {
    out.health = Health::failed;
    if (!out.landing_emitted) {
      out.landing_emitted = true;
      event = LandingEvent{out.t, cause};
    }
    return {out, event};
  }

  out.health =
      (out.consecutive_failures > 0) ? Health::degraded : Health::valid;
  return {out, event};
}

const char* health_name(Health h) {
  switch (h) {
    case Health::valid: return "valid";
    case Health::degraded: return "degraded";
    case Health::failed: return "failed";
  }
  return "unknown";
}

}  // namespace vioflight::estimation
