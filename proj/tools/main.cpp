// vioflight: trajectory evaluation, shaping, closed-loop simulation and
// camera geometry sweeps for visual-inertial flight experiments.

#include "vioflight/alignment.hpp"
#include "vioflight/camgeo.hpp"
#include "vioflight/metrics.hpp"
#include "vioflight/numeric_io.hpp"
#include "vioflight/shaping.hpp"
#include "vioflight/simulation.hpp"
#include "vioflight/trajectory.hpp"

#include "sim_config_json.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace vioflight;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;  // also: health failure in simulate

struct EvalOptions {
  std::string gt_path;
  std::string est_path;
  std::string align_mode = "rigid";
  double delta = 1.0;
  double max_dt = 0.02;
  bool lateral_only = true;
  std::string csv_path;
  std::string samples_csv_path;
};

metrics::MetricReport run_eval(const traj::Trajectory& gt,
                               const traj::Trajectory& est,
                               const std::string& align_mode, double delta,
                               double max_dt, bool lateral_only) {
  const auto pairs = traj::associate(gt, est, max_dt);
  const align::AlignmentTransform transform = align::compute_alignment(
      align::gather_pairs(gt, est, pairs), align::parse_mode(align_mode));
  const traj::Trajectory est_aligned = align::apply_alignment(transform, est);
  return metrics::evaluate(gt, est_aligned, pairs, delta, lateral_only);
}

int cmd_eval(const EvalOptions& opt) {
  const traj::Trajectory gt = traj::load_trajectory(opt.gt_path);
  const traj::Trajectory est = traj::load_trajectory(opt.est_path);
  const metrics::MetricReport report = run_eval(
      gt, est, opt.align_mode, opt.delta, opt.max_dt, opt.lateral_only);

  std::cout << "ATE [m]: " << format_double(report.ate_m) << "  ("
            << report.n_pairs << " pairs, lateral_only="
            << (report.lateral_only ? "on" : "off") << ")\n";
  std::cout << "RPE [m]: " << format_double(report.rpe_m)
            << "  (delta = " << format_double(report.delta_s) << " s, "
            << report.rpe_per_sample.size() << " samples)\n";
  std::cout << "alignment: " << opt.align_mode << "\n";

  if (!opt.csv_path.empty()) {
    std::ofstream out(opt.csv_path);
    if (!out) throw std::runtime_error("cannot write " + opt.csv_path);
    report.write_csv(out);
  }
  if (!opt.samples_csv_path.empty()) {
    std::ofstream out(opt.samples_csv_path);
    if (!out) throw std::runtime_error("cannot write " + opt.samples_csv_path);
    report.write_samples_csv(out);
  }
  return kExitOk;
}

struct ShapeOptions {
  std::string in_path;
  std::string out_path;
  shaping::MotionConstraints constraints;
  std::size_t max_iter = 50;
  std::string report_path;
};

void print_shaping_report(const shaping::ShapingReport& report) {
  std::cout << "iterations:         " << report.iterations << "\n"
            << "inserted samples:   " << report.inserted_samples << "\n"
            << "max accel before:   " << format_double(report.max_accel_before)
            << " m/s^2\n"
            << "max accel after:    " << format_double(report.max_accel_after)
            << " m/s^2\n"
            << "max path deviation: "
            << format_double(report.max_path_deviation) << " m\n"
            << "converged:          " << (report.converged ? "yes" : "no")
            << "\n";
}

int cmd_shape(const ShapeOptions& opt) {
  const traj::Trajectory input = traj::load_trajectory(opt.in_path);
  auto [shaped, report] =
      shaping::shape_trajectory(input, opt.constraints, opt.max_iter);
  traj::save_trajectory(shaped, opt.out_path);
  print_shaping_report(report);
  if (!opt.report_path.empty()) {
    std::ofstream out(opt.report_path);
    if (!out) throw std::runtime_error("cannot write " + opt.report_path);
    out << "iterations,inserted_samples,max_accel_before,max_accel_after,"
           "max_path_deviation,converged\n"
        << report.iterations << ',' << report.inserted_samples << ','
        << format_double(report.max_accel_before) << ','
        << format_double(report.max_accel_after) << ','
        << format_double(report.max_path_deviation) << ','
        << (report.converged ? 1 : 0) << '\n';
  }
  return report.converged ? kExitOk : kExitNotConverged;
}

struct SimulateOptions {
  std::string config_path;
  std::string out_dir = "run";
  std::optional<std::uint64_t> seed;
  bool grid = false;
};

struct RunResult {
  metrics::MetricReport report;
  std::size_t landing_events = 0;
};

RunResult write_run(const sim::SimConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const sim::FlightLog log = sim::run_closed_loop(cfg);

  const traj::Trajectory truth = log.truth_trajectory();
  const traj::Trajectory estimate = log.estimate_trajectory();
  traj::save_trajectory(truth, (dir / "truth.tum").string());
  traj::save_trajectory(estimate, (dir / "estimate.tum").string());

  {
    std::ofstream out(dir / "events.csv");
    log.write_events_csv(out);
  }
  {
    std::ofstream out(dir / "commands.csv");
    log.write_commands_csv(out);
  }
  {
    std::ofstream out(dir / "vio.csv");
    log.write_vio_csv(out);
  }

  const auto pairs = traj::associate(truth, estimate, 0.5 / cfg.control_rate_hz);
  const align::AlignmentTransform transform = align::compute_alignment(
      align::gather_pairs(truth, estimate, pairs), align::Mode::rigid);
  const metrics::MetricReport report = metrics::evaluate(
      truth, align::apply_alignment(transform, estimate), pairs, 1.0, true);
  {
    std::ofstream out(dir / "metrics.csv");
    report.write_csv(out);
  }
  {
    std::ofstream out(dir / "metrics_samples.csv");
    report.write_samples_csv(out);
  }
  return RunResult{report, log.count_events("landing")};
}

int cmd_simulate(const SimulateOptions& opt) {
  cli::RunConfig cfg = cli::load_run_config(opt.config_path);
  if (opt.seed) cfg.sim.seed = *opt.seed;

  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);
  fs::copy_file(opt.config_path, out_dir / "config.json",
                fs::copy_options::overwrite_existing);

  std::size_t total_landings = 0;
  if (opt.grid) {
    if (!cfg.has_grid || cfg.grid.velocities.empty() ||
        cfg.grid.pitches.empty()) {
      throw std::runtime_error(
          "simulate --grid requires a 'grid' section with velocities and "
          "pitches");
    }
    std::ofstream summary(out_dir / "summary.csv");
    summary << "pitch_deg,velocity_mps,ate_m,rpe_m,landing_events\n";
    for (double pitch : cfg.grid.pitches) {
      for (double velocity : cfg.grid.velocities) {
        sim::SimConfig cell = cfg.sim;
        cell.camera_pitch_deg = pitch;
        cell.reference.velocity = velocity;
        const auto alt = cfg.grid.altitude_for_pitch.find(pitch);
        if (alt != cfg.grid.altitude_for_pitch.end()) {
          cell.reference.altitude = alt->second;
        }
        std::ostringstream name;
        name << "pitch" << pitch << "_v" << velocity;
        const RunResult result = write_run(cell, out_dir / name.str());
        summary << format_double(pitch) << ',' << format_double(velocity)
                << ',' << format_double(result.report.ate_m) << ','
                << format_double(result.report.rpe_m) << ','
                << result.landing_events << '\n';
        std::cout << name.str() << ": ATE "
                  << format_double(result.report.ate_m) << " m, RPE "
                  << format_double(result.report.rpe_m) << " m\n";
        total_landings += result.landing_events;
      }
    }
  } else {
    const RunResult result = write_run(cfg.sim, out_dir);
    std::cout << "ATE [m]: " << format_double(result.report.ate_m) << "\n"
              << "RPE [m]: " << format_double(result.report.rpe_m) << "\n"
              << "landing events: " << result.landing_events << "\n"
              << "outputs: " << out_dir.string() << "\n";
    total_landings = result.landing_events;
  }
  return total_landings == 0 ? kExitOk : kExitNotConverged;
}

struct CamgeoOptions {
  std::vector<double> pitches = {0.0, 10.0, 30.0, 90.0};
  std::vector<double> fps_values = {30.0, 60.0, 90.0};
  std::vector<double> velocities = {5.0};
  camgeo::CameraModel cam;
  camgeo::FlightCondition cond;
  std::string out_path;
};

int cmd_camgeo(const CamgeoOptions& opt) {
  std::ostringstream buffer;
  camgeo::write_sweep_csv(buffer, opt.cam, opt.cond, opt.pitches,
                          opt.fps_values, opt.velocities);
  if (opt.out_path.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw std::runtime_error("cannot write " + opt.out_path);
    out << buffer.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV visual-inertial flight toolkit"};
  app.require_subcommand(1);

  EvalOptions eval_opt;
  CLI::App* eval = app.add_subcommand(
      "eval", "ATE/RPE of an estimated trajectory against ground truth");
  eval->add_option("gt", eval_opt.gt_path, "ground-truth TUM file")->required();
  eval->add_option("est", eval_opt.est_path, "estimate TUM file")->required();
  eval->add_option("--align", eval_opt.align_mode,
                   "alignment mode: rigid|sim3|yaw2d");
  eval->add_option("--delta", eval_opt.delta, "RPE interval in seconds");
  eval->add_option("--max-dt", eval_opt.max_dt,
                   "association time tolerance in seconds");
  eval->add_flag("--lateral-only,!--full-3d", eval_opt.lateral_only,
                 "evaluate x/y error only (default on)");
  eval->add_option("--csv", eval_opt.csv_path, "write the report as CSV");
  eval->add_option("--samples-csv", eval_opt.samples_csv_path,
                   "write per-sample errors as CSV");

  ShapeOptions shape_opt;
  CLI::App* shape = app.add_subcommand(
      "shape", "insert samples until a trajectory meets motion constraints");
  shape->add_option("input", shape_opt.in_path, "input TUM file")->required();
  shape->add_option("output", shape_opt.out_path, "output TUM file")
      ->required();
  shape->add_option("--a-max", shape_opt.constraints.a_max,
                    "max acceleration, m/s^2");
  shape->add_option("--v-max", shape_opt.constraints.v_max,
                    "max velocity, m/s");
  shape->add_option("--sample-period", shape_opt.constraints.sample_period,
                    "output sample period, s");
  shape->add_option("--max-iter", shape_opt.max_iter, "iteration cap");
  shape->add_option("--report", shape_opt.report_path,
                    "write the shaping report as CSV");

  SimulateOptions sim_opt;
  std::uint64_t seed_value = 0;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "closed-loop flight with a synthetic VIO sensor");
  simulate->add_option("--config", sim_opt.config_path, "JSON config file")
      ->required();
  simulate->add_option("--out", sim_opt.out_dir, "run output directory");
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed_value, "override the config seed");
  simulate->add_flag("--grid", sim_opt.grid,
                     "run the velocity x orientation grid from the config");

  CamgeoOptions cam_opt;
  CLI::App* camgeo_cmd = app.add_subcommand(
      "camgeo", "footprint / overlap / pixel-displacement sweep");
  camgeo_cmd->add_option("--pitch", cam_opt.pitches, "pitch angles, deg");
  camgeo_cmd->add_option("--fps", cam_opt.fps_values, "frame rates, Hz");
  camgeo_cmd->add_option("--velocity", cam_opt.velocities, "velocities, m/s");
  camgeo_cmd->add_option("--altitude", cam_opt.cond.altitude, "altitude, m");
  camgeo_cmd->add_option("--hfov", cam_opt.cam.hfov_deg, "horizontal FoV, deg");
  camgeo_cmd->add_option("--vfov", cam_opt.cam.vfov_deg, "vertical FoV, deg");
  camgeo_cmd->add_option("--width", cam_opt.cam.width, "image width, px");
  camgeo_cmd->add_option("--height", cam_opt.cam.height, "image height, px");
  camgeo_cmd->add_option("--yaw-rate", cam_opt.cond.yaw_rate,
                         "yaw rate, rad/s");
  camgeo_cmd->add_option("--out", cam_opt.out_path,
                         "output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return cmd_eval(eval_opt);
    if (shape->parsed()) return cmd_shape(shape_opt);
    if (simulate->parsed()) {
      if (seed_opt->count() > 0) sim_opt.seed = seed_value;
      return cmd_simulate(sim_opt);
    }
    if (camgeo_cmd->parsed()) return cmd_camgeo(cam_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
