#include "vioflight/trajectory.hpp"

#include "vioflight/numeric_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vioflight::traj {

namespace {

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

bool finite(const Eigen::Quaterniond& q) {
  return std::isfinite(q.w()) && std::isfinite(q.x()) && std::isfinite(q.y()) &&
         std::isfinite(q.z());
}

}  // namespace

TimedPose::TimedPose(double t_, const Eigen::Vector3d& p_,
                     const Eigen::Quaterniond& q_)
    : t(t_), p(p_), q(q_) {
  if (!std::isfinite(t) || !finite(p) || !finite(q)) {
    throw std::invalid_argument("TimedPose: non-finite component");
  }
  const double n = q.norm();
  if (n <= 0.0) {
    throw std::invalid_argument("TimedPose: zero quaternion");
  }
  q.normalize();
}

double Trajectory::duration() const {
  if (poses.empty()) return 0.0;
  return poses.back().t - poses.front().t;
}

void Trajectory::validate() const {
  if (poses.empty()) {
    throw std::invalid_argument("Trajectory: empty");
  }
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const TimedPose& pose = poses[i];
    if (!std::isfinite(pose.t) || !finite(pose.p) || !finite(pose.q)) {
      throw std::invalid_argument("Trajectory: non-finite pose at index " +
                                  std::to_string(i));
    }
    if (std::abs(pose.q.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("Trajectory: unnormalized quaternion at index " +
                                  std::to_string(i));
    }
    if (i > 0 && pose.t <= poses[i - 1].t) {
      throw std::invalid_argument(
          "Trajectory: timestamps not strictly increasing at index " +
          std::to_string(i));
    }
  }
}

double KinematicProfile::max_accel_norm(bool interior_only) const {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (interior_only && one_sided(i)) continue;
    best = std::max(best, a[i].norm());
  }
  return best;
}

Trajectory parse_trajectory(std::istream& in, Format format) {
  if (format != Format::tum) {
    throw std::invalid_argument("parse_trajectory: unsupported format");
  }
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Comment and blank lines are skipped.
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    double t, px, py, pz, qx, qy, qz, qw;
    if (!(fields >> t >> px >> py >> pz >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error("trajectory parse error: line " +
                               std::to_string(line_no) +
                               ": expected 8 numeric fields: '" + line + "'");
    }
    std::string extra;
    if (fields >> extra) {
      throw std::runtime_error("trajectory parse error: line " +
                               std::to_string(line_no) +
                               ": trailing data after 8 fields");
    }
    TimedPose pose;
    try {
      pose = TimedPose(t, Eigen::Vector3d(px, py, pz),
                       Eigen::Quaterniond(qw, qx, qy, qz));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trajectory parse error: line " +
                               std::to_string(line_no) + ": " + e.what());
    }
    if (!traj.poses.empty() && pose.t <= traj.poses.back().t) {
      throw std::runtime_error("trajectory parse error: line " +
                               std::to_string(line_no) +
                               ": timestamp not increasing");
    }
    traj.poses.push_back(pose);
  }
  if (traj.poses.empty()) {
    throw std::runtime_error("trajectory parse error: no poses in input");
  }
  return traj;
}

Trajectory load_trajectory(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trajectory file: " + path);
  }
  try {
    Trajectory traj = parse_trajectory(in, format);
    traj.frame_id = path;
    return traj;
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void serialize_trajectory(const Trajectory& traj, std::ostream& out,
                          Format format) {
  if (format != Format::tum) {
    throw std::invalid_argument("serialize_trajectory: unsupported format");
  }
  for (const TimedPose& pose : traj.poses) {
    out << format_double(pose.t) << ' ' << format_double(pose.p.x()) << ' '
        << format_double(pose.p.y()) << ' ' << format_double(pose.p.z()) << ' '
        << format_double(pose.q.x()) << ' ' << format_double(pose.q.y()) << ' '
        << format_double(pose.q.z()) << ' ' << format_double(pose.q.w())
        << '\n';
  }
}

void save_trajectory(const Trajectory& traj, const std::string& path,
                     Format format) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write trajectory file: " + path);
  }
  serialize_trajectory(traj, out, format);
}

std::vector<MatchedPair> associate(const Trajectory& gt, const Trajectory& est,
                                   double max_dt) {
  if (max_dt <= 0.0) {
    throw std::invalid_argument("associate: max_dt must be positive");
  }
  gt.validate();
  est.validate();

  std::vector<double> gt_times;
  gt_times.reserve(gt.size());
  for (const TimedPose& pose : gt.poses) gt_times.push_back(pose.t);

  // For every estimate pose find its single nearest ground-truth pose.
  // Conflicts on a ground-truth index keep the closer match.
  struct Candidate {
    std::size_t est;
    double dt;
  };
  std::map<std::size_t, Candidate> best_for_gt;
  for (std::size_t j = 0; j < est.size(); ++j) {
    const double t = est.poses[j].t;
    auto it = std::lower_bound(gt_times.begin(), gt_times.end(), t);
    std::size_t i = static_cast<std::size_t>(it - gt_times.begin());
    std::size_t nearest = (i < gt_times.size()) ? i : gt_times.size() - 1;
    if (i > 0 && (i == gt_times.size() ||
                  std::abs(gt_times[i - 1] - t) <= std::abs(gt_times[i] - t))) {
      nearest = i - 1;
    }
    const double dt = std::abs(gt_times[nearest] - t);
    if (dt > max_dt) continue;
    auto found = best_for_gt.find(nearest);
    if (found == best_for_gt.end() || dt < found->second.dt) {
      best_for_gt[nearest] = Candidate{j, dt};
    }
  }

  std::vector<MatchedPair> pairs;
  pairs.reserve(best_for_gt.size());
  for (const auto& [gt_idx, cand] : best_for_gt) {
    pairs.push_back(MatchedPair{gt_idx, cand.est});
  }
  std::sort(pairs.begin(), pairs.end(), [&](const MatchedPair& a,
                                            const MatchedPair& b) {
    return est.poses[a.est].t < est.poses[b.est].t;
  });
  if (pairs.empty()) {
    throw std::runtime_error("associate: zero pairs within max_dt = " +
                             format_double(max_dt));
  }
  return pairs;
}

KinematicProfile finite_diff(const Trajectory& traj) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 3) {
    throw std::invalid_argument(
        "finite_diff: need at least 3 samples, got " + std::to_string(n));
  }

  KinematicProfile prof;
  prof.t.resize(n);
  prof.v.resize(n);
  prof.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) prof.t[i] = traj.poses[i].t;

  auto second_diff = [&](std::size_t lo) {
    // Second derivative of the quadratic through samples lo, lo+1, lo+2.
    const Eigen::Vector3d& p0 = traj.poses[lo].p;
    const Eigen::Vector3d& p1 = traj.poses[lo + 1].p;
    const Eigen::Vector3d& p2 = traj.poses[lo + 2].p;
    const double h1 = traj.poses[lo + 1].t - traj.poses[lo].t;
    const double h2 = traj.poses[lo + 2].t - traj.poses[lo + 1].t;
    return Eigen::Vector3d(2.0 * (h1 * p2 - (h1 + h2) * p1 + h2 * p0) /
                           (h1 * h2 * (h1 + h2)));
  };

  for (std::size_t i = 1; i + 1 < n; ++i) {
    prof.v[i] = (traj.poses[i + 1].p - traj.poses[i - 1].p) /
                (traj.poses[i + 1].t - traj.poses[i - 1].t);
    prof.a[i] = second_diff(i - 1);
  }
  prof.v[0] = (traj.poses[1].p - traj.poses[0].p) /
              (traj.poses[1].t - traj.poses[0].t);
  prof.v[n - 1] = (traj.poses[n - 1].p - traj.poses[n - 2].p) /
                  (traj.poses[n - 1].t - traj.poses[n - 2].t);
  prof.a[0] = second_diff(0);
  prof.a[n - 1] = second_diff(n - 3);
  return prof;
}

Trajectory generate_square(double side, double velocity, double sample_period,
                           double altitude) {
  if (side <= 0.0 || velocity <= 0.0 || sample_period <= 0.0 ||
      altitude <= 0.0) {
    throw std::invalid_argument("generate_square: all parameters must be positive");
  }
  const double spacing = velocity * sample_period;
  if (spacing > side) {
    throw std::invalid_argument(
        "generate_square: sample spacing " + format_double(spacing) +
        " m exceeds side length " + format_double(side) + " m");
  }
  // Snap the spacing so each side holds an integer number of steps; corners
  // then land exactly on samples and the sampled path length is 4*side.
  const auto steps_per_side =
      static_cast<std::size_t>(std::llround(side / spacing));
  const double step = side / static_cast<double>(steps_per_side);

  const Eigen::Vector3d corners[4] = {
      {0.0, 0.0, altitude},
      {side, 0.0, altitude},
      {side, side, altitude},
      {0.0, side, altitude},
  };

  Trajectory traj;
  traj.frame_id = "square";
  const std::size_t total = 4 * steps_per_side;
  traj.poses.reserve(total + 1);
  for (std::size_t k = 0; k <= total; ++k) {
    const std::size_t edge = (k / steps_per_side) % 4;
    const std::size_t along = k % steps_per_side;
    Eigen::Vector3d p;
    if (k == total) {
      p = corners[0];
    } else {
      const Eigen::Vector3d& a = corners[edge];
      const Eigen::Vector3d& b = corners[(edge + 1) % 4];
      const double frac = static_cast<double>(along) * step / side;
      p = a + frac * (b - a);
    }
    traj.poses.emplace_back(static_cast<double>(k) * sample_period, p,
                            Eigen::Quaterniond::Identity());
  }
  return traj;
}

}  // namespace vioflight::traj
