#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vioflight/alignment.hpp"
#include "vioflight/trajectory.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace vioflight;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vioflight_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& args) {
  const std::string cmd =
      std::string(VIOFLIGHT_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

traj::Trajectory wavy_trajectory() {
  traj::Trajectory t;
  for (int i = 0; i < 300; ++i) {
    const double time = 0.1 * i;
    t.poses.emplace_back(
        time,
        Eigen::Vector3d(time, std::sin(0.3 * time), 0.5 * std::cos(0.2 * time)),
        Eigen::Quaterniond::Identity());
  }
  return t;
}

}  // namespace

TEST_CASE("eval: a file against itself scores zero") {
  TempDir dir;
  const fs::path gt = dir.path / "gt.tum";
  traj::save_trajectory(wavy_trajectory(), gt.string());
  const fs::path csv = dir.path / "report.csv";

  CHECK(run("eval " + gt.string() + " " + gt.string() + " --csv " +
            csv.string()) == 0);
  const std::string report = slurp(csv);
  CHECK(report.find("ate_m,rpe_m") == 0);
  const auto newline = report.find('\n');
  const auto comma = report.find(',', newline);
  const double ate = std::stod(report.substr(newline + 1));
  const double rpe = std::stod(report.substr(comma + 1));
  CHECK(ate <= 1e-12);
  CHECK(rpe <= 1e-12);
}

TEST_CASE("eval: rigidly transformed copy aligns back to zero error") {
  TempDir dir;
  const traj::Trajectory gt = wavy_trajectory();

  align::AlignmentTransform g;
  g.rotation =
      Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 3).normalized())
          .toRotationMatrix();
  g.translation = {5, -4, 2};
  const traj::Trajectory est = align::apply_alignment(g, gt);

  const fs::path gt_path = dir.path / "gt.tum";
  const fs::path est_path = dir.path / "est.tum";
  traj::save_trajectory(gt, gt_path.string());
  traj::save_trajectory(est, est_path.string());
  const fs::path csv = dir.path / "report.csv";

  CHECK(run("eval " + gt_path.string() + " " + est_path.string() +
            " --align rigid --csv " + csv.string()) == 0);
  const std::string report = slurp(csv);
  const auto newline = report.find('\n');
  const double ate = std::stod(report.substr(newline + 1));
  CHECK(ate <= 1e-9);
}

TEST_CASE("eval: drifting copy shows the drift rate in RPE") {
  TempDir dir;
  traj::Trajectory gt = wavy_trajectory();
  traj::Trajectory est = gt;
  for (auto& pose : est.poses) pose.p.x() += 0.1 * pose.t;

  const fs::path gt_path = dir.path / "gt.tum";
  const fs::path est_path = dir.path / "est.tum";
  traj::save_trajectory(gt, gt_path.string());
  traj::save_trajectory(est, est_path.string());
  const fs::path csv = dir.path / "report.csv";

  CHECK(run("eval " + gt_path.string() + " " + est_path.string() +
            " --delta 1.0 --full-3d --csv " + csv.string()) == 0);
  const std::string report = slurp(csv);
  const auto newline = report.find('\n');
  const auto comma = report.find(',', newline);
  const double rpe = std::stod(report.substr(comma + 1));
  CHECK(rpe == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("eval: missing file exits 1") {
  CHECK(run("eval /nonexistent/a.tum /nonexistent/b.tum") == 1);
}

TEST_CASE("shape: feasible input returns 0, infeasible bound returns 2") {
  TempDir dir;
  const fs::path square = dir.path / "square.tum";
  traj::save_trajectory(traj::generate_square(20.0, 1.0, 0.2, 3.0),
                        square.string());
  const fs::path out = dir.path / "shaped.tum";

  CHECK(run("shape " + square.string() + " " + out.string() +
            " --a-max 0.4") == 0);
  const traj::Trajectory shaped = traj::load_trajectory(out.string());
  CHECK(shaped.size() > 401);

  // Re-shaping the converged output changes nothing.
  const fs::path out2 = dir.path / "shaped2.tum";
  CHECK(run("shape " + out.string() + " " + out2.string() + " --a-max 0.4") ==
        0);
  CHECK(slurp(out) == slurp(out2));

  CHECK(run("shape " + square.string() + " " + out.string() +
            " --a-max 1e-6 --max-iter 1") == 2);
}

TEST_CASE("simulate: identical config and seed give byte-identical runs") {
  TempDir dir;
  const fs::path cfg = dir.path / "sim.json";
  write_file(cfg, R"({
  "reference": {"side": 5.0, "velocity": 1.0, "altitude": 3.0},
  "vio": {"sigma_p": 0.05, "sigma_v": 0.05, "dropout_prob": 0.02},
  "imu": {"accel_sigma": 0.05},
  "duration": 20.0,
  "seed": 11
})");

  const fs::path run_a = dir.path / "a";
  const fs::path run_b = dir.path / "b";
  CHECK(run("simulate --config " + cfg.string() + " --out " + run_a.string()) ==
        0);
  CHECK(run("simulate --config " + cfg.string() + " --out " + run_b.string()) ==
        0);

  for (const char* name :
       {"truth.tum", "estimate.tum", "events.csv", "commands.csv", "vio.csv",
        "metrics.csv", "metrics_samples.csv", "config.json"}) {
    CHECK(slurp(run_a / name) == slurp(run_b / name));
    CHECK_FALSE(slurp(run_a / name).empty());
  }

  const fs::path run_c = dir.path / "c";
  CHECK(run("simulate --config " + cfg.string() + " --seed 12 --out " +
            run_c.string()) == 0);
  CHECK(slurp(run_a / "truth.tum") != slurp(run_c / "truth.tum"));
}

TEST_CASE("simulate: fault injection exits 2 with one landing event") {
  TempDir dir;
  const fs::path cfg = dir.path / "fault.json";
  write_file(cfg, R"({
  "reference": {"side": 5.0, "velocity": 1.0, "altitude": 3.0},
  "vio": {"sigma_p": 0.05, "sigma_v": 0.05, "ramp": [0.5, 0.0, 0.0], "ramp_start": 10.0},
  "duration": 25.0,
  "seed": 3
})");
  const fs::path out = dir.path / "run";
  CHECK(run("simulate --config " + cfg.string() + " --out " + out.string()) ==
        2);
  const std::string events = slurp(out / "events.csv");
  std::size_t landings = 0;
  std::istringstream lines(events);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find(",landing,") != std::string::npos) ++landings;
  }
  CHECK(landings == 1);
}

TEST_CASE("simulate: grid produces one directory per cell plus a summary") {
  TempDir dir;
  const fs::path cfg = dir.path / "grid.json";
  write_file(cfg, R"({
  "reference": {"side": 5.0, "velocity": 1.0, "altitude": 3.0},
  "vio": {"sigma_p": 0.05, "sigma_v": 0.05},
  "duration": 12.0,
  "seed": 5,
  "grid": {"velocities": [1.0, 2.0], "pitches": [0.0, 90.0],
           "altitude_for_pitch": {"0": 3.0, "90": 5.0}}
})");
  const fs::path out = dir.path / "sweep";
  CHECK(run("simulate --config " + cfg.string() + " --grid --out " +
            out.string()) == 0);
  CHECK(fs::exists(out / "summary.csv"));
  std::size_t cells = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.is_directory()) ++cells;
  }
  CHECK(cells == 4);
  const std::string summary = slurp(out / "summary.csv");
  CHECK(summary.find("pitch_deg,velocity_mps,ate_m,rpe_m") == 0);
}

TEST_CASE("simulate: unknown config keys exit 1") {
  TempDir dir;
  const fs::path cfg = dir.path / "bad.json";
  write_file(cfg, R"({"refrence": {"side": 5.0}})");
  CHECK(run("simulate --config " + cfg.string() + " --out " +
            (dir.path / "x").string()) == 1);
}

TEST_CASE("camgeo: fps sweep obeys the inverse law in the CSV") {
  TempDir dir;
  const fs::path csv = dir.path / "sweep.csv";
  CHECK(run("camgeo --pitch 90 --fps 30 60 90 --velocity 5 --altitude 3 "
            "--hfov 91.2 --out " +
            csv.string()) == 0);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);  // header
  std::vector<double> px;
  while (std::getline(lines, line)) {
    const auto pos = line.rfind(',');
    px.push_back(std::stod(line.substr(pos + 1)));
  }
  REQUIRE(px.size() == 3);
  CHECK(px[0] / px[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(px[0] / px[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(px[0] == doctest::Approx(17.41).epsilon(1e-3));
}
