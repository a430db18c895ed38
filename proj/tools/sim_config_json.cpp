#include "sim_config_json.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

namespace vioflight::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& scope,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw std::runtime_error("config: unknown key '" + scope + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    out = obj.at(key).get<T>();
  }
}

void read_vec3(const json& obj, const char* key, Eigen::Vector3d& out) {
  if (!obj.contains(key)) return;
  const auto values = obj.at(key).get<std::vector<double>>();
  if (values.size() != 3) {
    throw std::runtime_error(std::string("config: '") + key +
                             "' must hold exactly 3 numbers");
  }
  out = Eigen::Vector3d(values[0], values[1], values[2]);
}

void parse_reference(const json& obj, sim::ReferenceSpec& ref) {
  check_keys(obj, "reference.",
             {"file", "side", "velocity", "altitude", "sample_period",
              "shape"});
  read(obj, "file", ref.file);
  read(obj, "side", ref.side);
  read(obj, "velocity", ref.velocity);
  read(obj, "altitude", ref.altitude);
  read(obj, "sample_period", ref.sample_period);
  read(obj, "shape", ref.shape);
}

void parse_constraints(const json& obj, shaping::MotionConstraints& c) {
  check_keys(obj, "constraints.", {"v_max", "a_max", "sample_period"});
  read(obj, "v_max", c.v_max);
  read(obj, "a_max", c.a_max);
  read(obj, "sample_period", c.sample_period);
}

void parse_vio(const json& obj, sim::VioSensorModel& vio) {
  check_keys(obj, "vio.",
             {"rate_hz", "sigma_p", "sigma_v", "with_velocity", "dropout_prob",
              "scale", "ramp", "ramp_start", "delay", "dropout_windows"});
  read(obj, "rate_hz", vio.rate_hz);
  read(obj, "sigma_p", vio.sigma_p);
  read(obj, "sigma_v", vio.sigma_v);
  read(obj, "with_velocity", vio.with_velocity);
  read(obj, "dropout_prob", vio.dropout_prob);
  read(obj, "scale", vio.scale);
  read_vec3(obj, "ramp", vio.ramp);
  read(obj, "ramp_start", vio.ramp_start);
  read(obj, "delay", vio.delay);
  if (obj.contains("dropout_windows")) {
    vio.dropout_windows.clear();
    for (const auto& window : obj.at("dropout_windows")) {
      const auto bounds = window.get<std::vector<double>>();
      if (bounds.size() != 2) {
        throw std::runtime_error(
            "config: each vio.dropout_windows entry must be [start, end]");
      }
      vio.dropout_windows.emplace_back(bounds[0], bounds[1]);
    }
  }
}

void parse_filter(const json& obj, estimation::FilterConfig& filter) {
  check_keys(obj, "filter.",
             {"accel_noise_density", "default_sigma_p", "default_sigma_v",
              "gate_quantile", "gate_failure_limit", "cov_trace_limit",
              "max_measurement_age"});
  read(obj, "accel_noise_density", filter.accel_noise_density);
  read(obj, "default_sigma_p", filter.default_sigma_p);
  read(obj, "default_sigma_v", filter.default_sigma_v);
  read(obj, "gate_quantile", filter.gate_quantile);
  read(obj, "gate_failure_limit", filter.gate_failure_limit);
  read(obj, "cov_trace_limit", filter.cov_trace_limit);
  read(obj, "max_measurement_age", filter.max_measurement_age);
}

void parse_grid(const json& obj, GridSpec& grid) {
  check_keys(obj, "grid.", {"velocities", "pitches", "altitude_for_pitch"});
  read(obj, "velocities", grid.velocities);
  read(obj, "pitches", grid.pitches);
  if (obj.contains("altitude_for_pitch")) {
    for (const auto& [key, value] : obj.at("altitude_for_pitch").items()) {
      grid.altitude_for_pitch[std::stod(key)] = value.get<double>();
    }
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }

  check_keys(root, "",
             {"reference", "constraints", "camera_pitch_deg", "plant",
              "controller", "imu", "vio", "filter", "control_rate_hz",
              "duration", "seed", "grid"});

  RunConfig cfg;
  if (root.contains("reference")) {
    parse_reference(root.at("reference"), cfg.sim.reference);
  }
  if (root.contains("constraints")) {
    parse_constraints(root.at("constraints"), cfg.sim.constraints);
  }
  read(root, "camera_pitch_deg", cfg.sim.camera_pitch_deg);
  if (root.contains("plant")) {
    check_keys(root.at("plant"), "plant.", {"a_max"});
    read(root.at("plant"), "a_max", cfg.sim.plant.a_max);
  }
  if (root.contains("controller")) {
    check_keys(root.at("controller"), "controller.", {"kp", "kv"});
    read(root.at("controller"), "kp", cfg.sim.controller.kp);
    read(root.at("controller"), "kv", cfg.sim.controller.kv);
  }
  if (root.contains("imu")) {
    check_keys(root.at("imu"), "imu.", {"accel_sigma"});
    read(root.at("imu"), "accel_sigma", cfg.sim.imu_accel_sigma);
  }
  if (root.contains("vio")) {
    parse_vio(root.at("vio"), cfg.sim.vio);
  }
  if (root.contains("filter")) {
    parse_filter(root.at("filter"), cfg.sim.filter);
  }
  read(root, "control_rate_hz", cfg.sim.control_rate_hz);
  read(root, "duration", cfg.sim.duration);
  read(root, "seed", cfg.sim.seed);
  if (root.contains("grid")) {
    parse_grid(root.at("grid"), cfg.grid);
    cfg.has_grid = true;
  }
  cfg.sim.validate();
  return cfg;
}

}  // namespace vioflight::cli
