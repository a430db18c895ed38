#ifndef VIOFLIGHT_TRAJECTORY_HPP
#define VIOFLIGHT_TRAJECTORY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace vioflight::traj {

/// One timestamped pose. Position is in meters, the quaternion gives the
/// body orientation in the world frame and is normalized on construction.
struct TimedPose {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();

  TimedPose() = default;
  TimedPose(double t, const Eigen::Vector3d& p, const Eigen::Quaterniond& q);
};

/// Ordered pose series with strictly increasing timestamps.
struct Trajectory {
  std::vector<TimedPose> poses;
  std::string frame_id;

  std::size_t size() const { return poses.size(); }
  double duration() const;

  /// Throws std::invalid_argument if empty, non-finite, or non-monotone.
  void validate() const;
};

/// Velocity/acceleration samples obtained by finite differences.
/// Same length as the source trajectory; the first and last samples are
/// one-sided estimates.
struct KinematicProfile {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> v;  // m/s
  std::vector<Eigen::Vector3d> a;  // m/s^2

  std::size_t size() const { return t.size(); }
  bool one_sided(std::size_t i) const { return i == 0 || i + 1 == t.size(); }
  double max_accel_norm(bool interior_only = true) const;
};

/// A matched (ground truth, estimate) index pair from associate().
struct MatchedPair {
  std::size_t gt = 0;
  std::size_t est = 0;
};

enum class Format { tum };

/// Parses `t px py pz qx qy qz qw` lines; `#` starts a comment line.
/// Throws std::runtime_error naming the offending line on malformed input,
/// on non-monotone timestamps and on empty input.
Trajectory parse_trajectory(std::istream& in, Format format = Format::tum);
Trajectory load_trajectory(const std::string& path, Format format = Format::tum);

/// Writes poses with 17 significant digits so that parse(serialize(T)) == T.
void serialize_trajectory(const Trajectory& traj, std::ostream& out,
                          Format format = Format::tum);
void save_trajectory(const Trajectory& traj, const std::string& path,
                     Format format = Format::tum);

/// Nearest-in-time matching: each estimate pose is paired with its closest
/// ground-truth pose when |dt| <= max_dt; a ground-truth index is used at
/// most once (ties resolved toward the smaller |dt|). Pairs come back
/// ordered by estimate time. Throws when no pair qualifies.
std::vector<MatchedPair> associate(const Trajectory& gt, const Trajectory& est,
                                   double max_dt = 0.02);

/// Central differences at interior samples, one-sided at the endpoints.
/// Requires at least 3 samples.
KinematicProfile finite_diff(const Trajectory& traj);

/// Closed square path at constant altitude, equidistant samples at a
/// constant-velocity profile (spacing = velocity * sample_period, adjusted
/// so corners fall on samples), constant yaw. Starts and ends at the first
/// corner.
Trajectory generate_square(double side, double velocity, double sample_period,
                           double altitude);

}  // namespace vioflight::traj

#endif  // VIOFLIGHT_TRAJECTORY_HPP
