#include "vioflight/simulation.hpp"

#include "vioflight/numeric_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vioflight::sim {

namespace {

constexpr double kLandingDescentRate = 0.5;  // m/s

Eigen::Quaterniond yaw_quat(double yaw) {
  return Eigen::Quaterniond(
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
}

}  // namespace

void SimConfig::validate() const {
  constraints.validate();
  filter.validate();
  if (reference.file.empty()) {
    if (!(reference.side > 0.0) || !(reference.velocity > 0.0) ||
        !(reference.altitude > 0.0) || !(reference.sample_period > 0.0)) {
      throw std::invalid_argument("SimConfig: reference parameters must be positive");
    }
  }
  if (!(plant.a_max > 0.0)) {
    throw std::invalid_argument("SimConfig: plant.a_max must be positive");
  }
  if (!(control_rate_hz > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("SimConfig: rates and duration must be positive");
  }
  if (!(vio.rate_hz > 0.0)) {
    throw std::invalid_argument("SimConfig: vio.rate_hz must be positive");
  }
  if (vio.sigma_p < 0.0 || vio.sigma_v < 0.0 || !(vio.scale > 0.0) ||
      vio.dropout_prob < 0.0 || vio.dropout_prob > 1.0 || vio.delay < 0.0) {
    throw std::invalid_argument("SimConfig: invalid VIO sensor parameters");
  }
  for (const auto& [start, end] : vio.dropout_windows) {
    if (!(end > start)) {
      throw std::invalid_argument("SimConfig: empty dropout window");
    }
  }
  if (imu_accel_sigma < 0.0) {
    throw std::invalid_argument("SimConfig: imu_accel_sigma must be >= 0");
  }
}

RngStreams::RngStreams(std::uint64_t seed) {
  std::seed_seq imu_seq{seed, std::uint64_t{1}};
  std::seed_seq vio_seq{seed, std::uint64_t{2}};
  std::seed_seq dropout_seq{seed, std::uint64_t{3}};
  imu.seed(imu_seq);
  vio.seed(vio_seq);
  dropout.seed(dropout_seq);
}

PlantState step_plant(const PlantState& state, const Eigen::Vector3d& a_cmd,
                      double dt, const PlantLimits& limits) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_plant: dt must be positive");
  }
  if (!a_cmd.allFinite()) {
    throw std::invalid_argument("step_plant: non-finite command");
  }
  Eigen::Vector3d a = a_cmd;
  const double norm = a.norm();
  if (norm > limits.a_max) {
    a *= limits.a_max / norm;
  }
  PlantState out = state;
  out.t = state.t + dt;
  out.p = state.p + state.v * dt + 0.5 * a * dt * dt;
  out.v = state.v + a * dt;
  out.a_cmd_applied = a;
  return out;
}

Eigen::Vector3d track_reference(const estimation::EstimatorState& estimate,
                                const ReferencePoint& ref,
                                const ControllerGains& gains, double a_max) {
  if (!ref.p.allFinite() || !ref.v.allFinite() || !estimate.mean_finite()) {
    throw std::invalid_argument("track_reference: non-finite input");
  }
  Eigen::Vector3d a =
      gains.kp * (ref.p - estimate.p) + gains.kv * (ref.v - estimate.v);
  const double norm = a.norm();
  if (norm > a_max) {
    a *= a_max / norm;
  }
  return a;
}

ReferencePoint reference_at(const traj::Trajectory& reference, double t) {
  const auto& poses = reference.poses;
  ReferencePoint out;
  if (t < poses.front().t || poses.size() == 1) {
    out.p = poses.front().p;
    return out;
  }
  if (t >= poses.back().t) {
    out.p = poses.back().p;
    return out;
  }
  const auto it = std::upper_bound(
      poses.begin(), poses.end(), t,
      [](double when, const traj::TimedPose& pose) { return when < pose.t; });
  const traj::TimedPose& a = *(it - 1);
  const traj::TimedPose& b = *it;
  const double span = b.t - a.t;
  const double s = (t - a.t) / span;
  out.p = a.p + s * (b.p - a.p);
  out.v = (b.p - a.p) / span;
  return out;
}

std::optional<estimation::VioMeasurement> sample_vio(const PlantState& truth,
                                                     const VioSensorModel& m,
                                                     RngStreams& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Draw every stream each frame regardless of outcome, so dropout and
  // noise settings stay independent of one another.
  const double u = uniform(rng.dropout);
  Eigen::Vector3d noise_p, noise_v;
  for (int i = 0; i < 3; ++i) noise_p(i) = gauss(rng.vio);
  for (int i = 0; i < 3; ++i) noise_v(i) = gauss(rng.vio);

  bool dropped = u < m.dropout_prob;
  for (const auto& [start, end] : m.dropout_windows) {
    if (truth.t >= start && truth.t < end) dropped = true;
  }
  if (dropped) return std::nullopt;

  Eigen::Vector3d drift = Eigen::Vector3d::Zero();
  if (truth.t > m.ramp_start) {
    drift = m.ramp * (truth.t - m.ramp_start);
  }

  estimation::VioMeasurement z;
  z.t = truth.t - m.delay;
  z.p = m.scale * truth.p + drift + m.sigma_p * noise_p;
  if (m.with_velocity) {
    Eigen::Vector3d drift_rate =
        (truth.t > m.ramp_start) ? m.ramp : Eigen::Vector3d::Zero();
    z.v = m.scale * truth.v + drift_rate + m.sigma_v * noise_v;
  }
  return z;
}

traj::Trajectory build_reference(const SimConfig& cfg) {
  traj::Trajectory reference;
  if (!cfg.reference.file.empty()) {
    reference = traj::load_trajectory(cfg.reference.file);
  } else {
    reference =
        traj::generate_square(cfg.reference.side, cfg.reference.velocity,
                              cfg.reference.sample_period,
                              cfg.reference.altitude);
  }
  if (cfg.reference.shape) {
    reference = shaping::shape_trajectory(reference, cfg.constraints).first;
  }
  return reference;
}

traj::Trajectory FlightLog::truth_trajectory() const {
  traj::Trajectory out;
  out.frame_id = "truth";
  out.poses.reserve(records.size());
  for (const FlightRecord& r : records) {
    out.poses.emplace_back(r.t, r.truth_p, yaw_quat(r.truth_yaw));
  }
  return out;
}

traj::Trajectory FlightLog::estimate_trajectory() const {
  traj::Trajectory out;
  out.frame_id = "estimate";
  out.poses.reserve(records.size());
  for (const FlightRecord& r : records) {
    out.poses.emplace_back(r.t, r.est_p, yaw_quat(r.truth_yaw));
  }
  return out;
}

std::size_t FlightLog::count_events(const std::string& name) const {
  std::size_t n = 0;
  for (const Event& e : events) {
    if (e.name == name) ++n;
  }
  return n;
}

void FlightLog::write_events_csv(std::ostream& out) const {
  out << "t,event,cause\n";
  for (const Event& e : events) {
    out << format_double(e.t) << ',' << e.name << ',' << e.cause << '\n';
  }
}

void FlightLog::write_commands_csv(std::ostream& out) const {
  out << "t,ax_cmd,ay_cmd,az_cmd,ax_applied,ay_applied,az_applied\n";
  for (const FlightRecord& r : records) {
    out << format_double(r.t) << ',' << format_double(r.a_cmd.x()) << ','
        << format_double(r.a_cmd.y()) << ',' << format_double(r.a_cmd.z())
        << ',' << format_double(r.a_applied.x()) << ','
        << format_double(r.a_applied.y()) << ','
        << format_double(r.a_applied.z()) << '\n';
  }
}

void FlightLog::write_vio_csv(std::ostream& out) const {
  out << "t,dropout,px,py,pz,vx,vy,vz\n";
  for (const VioRecord& r : vio) {
    out << format_double(r.t) << ',' << (r.dropout ? 1 : 0) << ',';
    if (r.dropout) {
      out << ",,,,,\n";
    } else {
      out << format_double(r.p.x()) << ',' << format_double(r.p.y()) << ','
          << format_double(r.p.z()) << ',' << format_double(r.v.x()) << ','
          << format_double(r.v.y()) << ',' << format_double(r.v.z()) << '\n';
    }
  }
}

FlightLog run_closed_loop(const SimConfig& cfg) {
  cfg.validate();
  const traj::Trajectory reference = build_reference(cfg);

  const double dt = 1.0 / cfg.control_rate_hz;
  const auto ticks = static_cast<std::size_t>(
      std::llround(cfg.duration * cfg.control_rate_hz));

  RngStreams rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Flying start: position and velocity matched to the reference head.
  PlantState plant;
  plant.p = reference.poses.front().p;
  if (reference.size() > 1) {
    plant.v = (reference.poses[1].p - reference.poses[0].p) /
              (reference.poses[1].t - reference.poses[0].t);
  }

  estimation::EstimatorState est = estimation::init_state(
      0.0, plant.p, plant.v, 1e-4, 1e-4, yaw_quat(plant.yaw));

  FlightLog log;
  log.records.reserve(ticks + 1);

  estimation::Health last_health = estimation::Health::valid;
  std::size_t vio_frame = 0;  // next frame index on the sensor grid

  for (std::size_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * dt;

    // VIO frames due by now, on the sensor's own grid.
    while (static_cast<double>(vio_frame) / cfg.vio.rate_hz <= t + 1e-12) {
      ++vio_frame;
      const std::optional<estimation::VioMeasurement> z =
          sample_vio(plant, cfg.vio, rng);
      VioRecord record;
      record.t = t;
      if (z.has_value()) {
        record.p = z->p;
        if (z->v) record.v = *z->v;
        est = estimation::update(est, *z, cfg.filter).first;
      } else {
        record.dropout = true;
        est = estimation::note_missed_measurement(est);
      }
      log.vio.push_back(record);
    }

    auto [checked, landing] = estimation::check_health(est, cfg.filter);
    est = checked;
    if (est.health != last_health) {
      log.events.push_back(Event{
          t, "health", std::string(estimation::health_name(last_health)) +
                           "->" + estimation::health_name(est.health)});
      last_health = est.health;
    }
    if (landing) {
      log.events.push_back(Event{t, "landing", landing->cause});
    }

    Eigen::Vector3d a_cmd;
    if (est.health == estimation::Health::failed) {
      // Emergency landing: no lateral command, fixed-rate descent damped
      // with the IMU-propagated vertical velocity.
      double az = cfg.controller.kv * (-kLandingDescentRate - est.v.z());
      if (std::abs(az) > cfg.plant.a_max) {
        az = std::copysign(cfg.plant.a_max, az);
      }
      a_cmd = Eigen::Vector3d(0.0, 0.0, az);
    } else {
      a_cmd = track_reference(est, reference_at(reference, t), cfg.controller,
                              cfg.plant.a_max);
    }

    const PlantState next = step_plant(plant, a_cmd, dt, cfg.plant);

    FlightRecord record;
    record.t = t;
    record.truth_p = plant.p;
    record.truth_v = plant.v;
    record.truth_yaw = plant.yaw;
    record.est_p = est.p;
    record.est_v = est.v;
    record.health = est.health;
    record.a_cmd = a_cmd;
    record.a_applied = next.a_cmd_applied;
    log.records.push_back(record);

    if (est.health == estimation::Health::failed && plant.p.z() <= 0.0) {
      log.events.push_back(Event{t, "touchdown", "ground"});
      break;
    }

    // IMU measures the acceleration applied over this step; the estimator
    // propagates with it to the next tick.
    Eigen::Vector3d imu_noise;
    for (int i = 0; i < 3; ++i) imu_noise(i) = gauss(rng.imu);
    estimation::ImuSample imu;
    imu.t = next.t;
    imu.a_world = next.a_cmd_applied + cfg.imu_accel_sigma * imu_noise;
    imu.q = yaw_quat(next.yaw);
    est = estimation::predict(est, imu, dt, cfg.filter);

    plant = next;
  }
  return log;
}

}  // namespace vioflight::sim
