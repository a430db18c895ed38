#ifndef VIOFLIGHT_ALIGNMENT_HPP
#define VIOFLIGHT_ALIGNMENT_HPP

#include "vioflight/trajectory.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

namespace vioflight::align {

enum class Mode { rigid, similarity, yaw2d };

/// Closed-form least-squares transform mapping estimate coordinates into
/// the ground-truth frame: p_gt ~= scale * R * p_est + translation.
struct AlignmentTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;

  Eigen::Quaterniond rotation_quat() const {
    return Eigen::Quaterniond(rotation).normalized();
  }
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }

  /// Throws if the rotation is not orthonormal with det +1 or scale <= 0.
  void validate() const;
};

struct PointPair {
  Eigen::Vector3d gt = Eigen::Vector3d::Zero();
  Eigen::Vector3d est = Eigen::Vector3d::Zero();
};

/// Horn-style closed-form fit minimizing sum |gt_i - (s R est_i + t)|^2.
/// rigid fixes s = 1; yaw2d restricts the rotation to the world z axis.
/// The SVD solution carries the usual reflection guard so the rotation is
/// always proper, planar inputs included. Throws std::runtime_error naming
/// the failing condition on degenerate geometry (coincident points for all
/// modes, collinear points for rigid/similarity).
AlignmentTransform compute_alignment(const std::vector<PointPair>& pairs,
                                     Mode mode = Mode::rigid);

/// Maps every pose: p -> s R p + t, q -> quat(R) * q. Timestamps unchanged.
traj::Trajectory apply_alignment(const AlignmentTransform& transform,
                                 const traj::Trajectory& trajectory);

/// Position pairs for the matched indices, in pair order.
std::vector<PointPair> gather_pairs(const traj::Trajectory& gt,
                                    const traj::Trajectory& est,
                                    const std::vector<traj::MatchedPair>& pairs);

Mode parse_mode(const std::string& name);  // "rigid" | "sim3" | "yaw2d"

}  // namespace vioflight::align

#endif  // VIOFLIGHT_ALIGNMENT_HPP
