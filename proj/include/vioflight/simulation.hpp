#ifndef VIOFLIGHT_SIMULATION_HPP
#define VIOFLIGHT_SIMULATION_HPP

#include "vioflight/estimation.hpp"
#include "vioflight/shaping.hpp"
#include "vioflight/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vioflight::sim {

/// Double-integrator plant with a norm limit on the applied acceleration.
/// Tilt dynamics are abstracted into that limit.
struct PlantState {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d a_cmd_applied = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

struct PlantLimits {
  double a_max = 2.0;  // m/s^2
};

struct ControllerGains {
  double kp = 3.0;
  double kv = 4.0;
};

struct ReferencePoint {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

/// Synthetic VIO sensor: noisy scaled position (and velocity) of the true
/// state, with per-frame dropout, scripted outage windows, a slow position
/// drift for divergence injection, and a fixed output delay.
struct VioSensorModel {
  double rate_hz = 30.0;
  double sigma_p = 0.0;   // m
  double sigma_v = 0.0;   // m/s
  bool with_velocity = true;
  double dropout_prob = 0.0;
  double scale = 1.0;
  Eigen::Vector3d ramp = Eigen::Vector3d::Zero();  // m/s measurement drift
  double ramp_start = 0.0;                         // s
  double delay = 0.0;                              // s
  std::vector<std::pair<double, double>> dropout_windows;  // [start, end)
};

struct ReferenceSpec {
  double side = 20.0;          // m
  double velocity = 1.0;       // m/s
  double altitude = 3.0;       // m
  double sample_period = 0.2;  // s
  bool shape = true;
  std::string file;  // non-empty: load this TUM file instead
};

struct SimConfig {
  ReferenceSpec reference;
  shaping::MotionConstraints constraints{10.0, 0.4, 0.2};
  double camera_pitch_deg = 90.0;  // scenario tag, recorded in outputs
  PlantLimits plant;
  ControllerGains controller;
  double imu_accel_sigma = 0.0;  // m/s^2 white noise on the IMU sample
  VioSensorModel vio;
  estimation::FilterConfig filter;
  double control_rate_hz = 100.0;
  double duration = 120.0;  // s
  std::uint64_t seed = 1;

  void validate() const;
};

struct FlightRecord {
  double t = 0.0;
  Eigen::Vector3d truth_p, truth_v;
  double truth_yaw = 0.0;
  Eigen::Vector3d est_p, est_v;
  estimation::Health health = estimation::Health::valid;
  Eigen::Vector3d a_cmd, a_applied;
};

struct VioRecord {
  double t = 0.0;
  bool dropout = false;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

struct Event {
  double t = 0.0;
  std::string name;
  std::string cause;
};

struct FlightLog {
  std::vector<FlightRecord> records;
  std::vector<VioRecord> vio;
  std::vector<Event> events;

  traj::Trajectory truth_trajectory() const;
  traj::Trajectory estimate_trajectory() const;
  std::size_t count_events(const std::string& name) const;

  void write_events_csv(std::ostream& out) const;
  void write_commands_csv(std::ostream& out) const;
  void write_vio_csv(std::ostream& out) const;
};

/// Independent named RNG streams so toggling one noise source does not
/// shift the draws of another.
struct RngStreams {
  std::mt19937_64 imu;
  std::mt19937_64 vio;
  std::mt19937_64 dropout;

  explicit RngStreams(std::uint64_t seed);
};

PlantState step_plant(const PlantState& state, const Eigen::Vector3d& a_cmd,
                      double dt, const PlantLimits& limits);

/// Position-velocity feedback law, saturated to the plant limit.
Eigen::Vector3d track_reference(const estimation::EstimatorState& estimate,
                                const ReferencePoint& ref,
                                const ControllerGains& gains, double a_max);

/// Reference lookup with linear interpolation; clamps to the endpoints with
/// zero velocity outside the trajectory time span.
ReferencePoint reference_at(const traj::Trajectory& reference, double t);

/// One VIO frame, or nothing when this frame drops out.
std::optional<estimation::VioMeasurement> sample_vio(const PlantState& truth,
                                                     const VioSensorModel& m,
                                                     RngStreams& rng);

/// Deterministic fixed-step closed loop: plant, IMU prediction, VIO
/// corrections on their own grid, health monitoring with emergency landing,
/// full logging. Bitwise reproducible for a fixed config and seed.
FlightLog run_closed_loop(const SimConfig& cfg);

/// The reference trajectory a config resolves to (generated or loaded,
/// shaped when requested).
traj::Trajectory build_reference(const SimConfig& cfg);

}  // namespace vioflight::sim

#endif  // VIOFLIGHT_SIMULATION_HPP
