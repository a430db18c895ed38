#ifndef VIOFLIGHT_ESTIMATION_HPP
#define VIOFLIGHT_ESTIMATION_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <string>
#include <utility>

namespace vioflight::estimation {

/// Gravity-compensated world-frame acceleration plus the attitude that the
/// downstream controller consumes directly (estimating attitude would add
/// delay the attitude loop cannot tolerate).
struct ImuSample {
  double t = 0.0;
  Eigen::Vector3d a_world = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
};

/// Asynchronous position (and optional velocity) correction.
struct VioMeasurement {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> v;
  /// Zero matrix means "use the configured defaults".
  Eigen::Matrix3d cov_p = Eigen::Matrix3d::Zero();
  std::optional<Eigen::Matrix3d> cov_v;
};

enum class Health { valid, degraded, failed };

enum class UpdateResult { accepted, gated, stale };

struct FilterConfig {
  /// White-acceleration process noise density, m/s^2 per sqrt(Hz).
  double accel_noise_density = 0.1;
  double default_sigma_p = 0.05;  // m, used when cov_p is zero
  double default_sigma_v = 0.05;  // m/s
  /// Chi-square gate probability on the stacked innovation; >= 1 disables
  /// the gate.
  double gate_quantile = 0.99;
  /// Consecutive rejected or missing corrections before the estimate is
  /// declared failed (30 frames of a 30 Hz sensor, about one second).
  int gate_failure_limit = 30;
  double cov_trace_limit = 25.0;      // m^2, position covariance trace
  double max_measurement_age = 0.010; // s, one control period

  void validate() const;
};

/// Point-mass filter state: three independent [position, velocity] axes
/// driven by the IMU acceleration, attitude passed through from the IMU.
struct EstimatorState {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  std::array<Eigen::Matrix2d, 3> cov = {Eigen::Matrix2d::Identity(),
                                        Eigen::Matrix2d::Identity(),
                                        Eigen::Matrix2d::Identity()};
  Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity();
  Eigen::Vector3d last_accel = Eigen::Vector3d::Zero();
  Health health = Health::valid;
  int consecutive_failures = 0;
  bool landing_emitted = false;

  double position_cov_trace() const {
    return cov[0](0, 0) + cov[1](0, 0) + cov[2](0, 0);
  }
  double min_cov_eigenvalue() const;
  bool mean_finite() const;
};

struct LandingEvent {
  double t = 0.0;
  std::string cause;
};

EstimatorState init_state(double t, const Eigen::Vector3d& p,
                          const Eigen::Vector3d& v, double pos_var,
                          double vel_var,
                          const Eigen::Quaterniond& attitude =
                              Eigen::Quaterniond::Identity());

/// Constant-acceleration propagation over dt with the IMU acceleration as
/// input; covariance picks up integrated white-acceleration process noise.
EstimatorState predict(const EstimatorState& state, const ImuSample& imu,
                       double dt, const FilterConfig& cfg);

/// Linear position (and velocity, when present) update with a chi-square
/// innovation gate. Gated and stale measurements leave the mean untouched;
/// gated ones advance the failure counter, accepted ones reset it.
std::pair<EstimatorState, UpdateResult> update(const EstimatorState& state,
                                               const VioMeasurement& z,
                                               const FilterConfig& cfg);

/// Zero-order-hold prediction to a query time at the output rate the
/// control loop demands, independent of the correction rate. Exactly the
/// semigroup closure of predict over the same interval.
EstimatorState propagate_to(const EstimatorState& state, double t_query,
                            const FilterConfig& cfg);

/// A correction opportunity that produced no measurement (sensor dropout)
/// counts against the same failure limit as a gated one.
EstimatorState note_missed_measurement(EstimatorState state);

/// Health transition rules; emits the landing event exactly once, on the
/// transition into failed. failed is latched.
std::pair<EstimatorState, std::optional<LandingEvent>> check_health(
    const EstimatorState& state, const FilterConfig& cfg);

const char* health_name(Health h);

/// Inverse chi-square CDF (regularized incomplete gamma inversion).
double chi_squared_quantile(double prob, int dof);

}  // namespace vioflight::estimation

#endif  // VIOFLIGHT_ESTIMATION_HPP
