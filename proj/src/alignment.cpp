#include "vioflight/alignment.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace vioflight::align {

void AlignmentTransform::validate() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("AlignmentTransform: rotation not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("AlignmentTransform: rotation determinant != 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("AlignmentTransform: scale must be positive");
  }
}

namespace {

AlignmentTransform solve_yaw2d(const std::vector<PointPair>& pairs) {
  const double n = static_cast<double>(pairs.size());
  Eigen::Vector3d mu_gt = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_est = Eigen::Vector3d::Zero();
  for (const PointPair& pp : pairs) {
    mu_gt += pp.gt;
    mu_est += pp.est;
  }
  mu_gt /= n;
  mu_est /= n;

  // Maximize sum gt~ . Rz(theta) est~ over theta using the xy components.
  double dot = 0.0;    // cos coefficient
  double cross = 0.0;  // sin coefficient
  double spread = 0.0;
  for (const PointPair& pp : pairs) {
    const Eigen::Vector3d x = pp.est - mu_est;
    const Eigen::Vector3d y = pp.gt - mu_gt;
    dot += x.x() * y.x() + x.y() * y.y();
    cross += x.x() * y.y() - x.y() * y.x();
    spread += x.head<2>().squaredNorm() + y.head<2>().squaredNorm();
  }
  if (spread <= 1e-18 * n) {
    throw std::runtime_error(
        "compute_alignment: degenerate geometry (points coincident in the "
        "horizontal plane, yaw unobservable)");
  }
  const double theta = std::atan2(cross, dot);

  AlignmentTransform out;
  out.rotation = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ())
                     .toRotationMatrix();
  out.translation = mu_gt - out.rotation * mu_est;
  out.scale = 1.0;
  return out;
}

}  // namespace

AlignmentTransform compute_alignment(const std::vector<PointPair>& pairs,
                                     Mode mode) {
  const std::size_t min_pairs = (mode == Mode::yaw2d) ? 2 : 3;
  if (pairs.size() < min_pairs) {
    throw std::invalid_argument("compute_alignment: need at least " +
                                std::to_string(min_pairs) + " pairs, got " +
                                std::to_string(pairs.size()));
  }
  if (mode == Mode::yaw2d) {
    return solve_yaw2d(pairs);
  }

  const double n = static_cast<double>(pairs.size());
  Eigen::Vector3d mu_gt = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_est = Eigen::Vector3d::Zero();
  for (const PointPair& pp : pairs) {
    mu_gt += pp.gt;
    mu_est += pp.est;
  }
  mu_gt /= n;
  mu_est /= n;

  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  double var_est = 0.0;
  double var_gt = 0.0;
  for (const PointPair& pp : pairs) {
    const Eigen::Vector3d x = pp.est - mu_est;
    const Eigen::Vector3d y = pp.gt - mu_gt;
    sigma += y * x.transpose();
    var_est += x.squaredNorm();
    var_gt += y.squaredNorm();
  }
  sigma /= n;
  var_est /= n;
  var_gt /= n;

  if (var_est < 1e-18 || var_gt < 1e-18) {
    throw std::runtime_error(
        "compute_alignment: degenerate geometry (coincident points, zero "
        "spread)");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  if (d(1) <= 1e-10 * d(0)) {
    throw std::runtime_error(
        "compute_alignment: degenerate geometry (collinear points, rotation "
        "about the line axis unobservable)");
  }

  // Reflection guard: flip the smallest singular direction when the plain
  // SVD solution would be a reflection.
  Eigen::Vector3d flip = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    flip(2) = -1.0;
  }

  AlignmentTransform out;
  out.rotation =
      svd.matrixU() * flip.asDiagonal() * svd.matrixV().transpose();
  out.scale = (mode == Mode::similarity) ? d.dot(flip) / var_est : 1.0;
  if (!(out.scale > 0.0)) {
    throw std::runtime_error(
        "compute_alignment: degenerate geometry (non-positive scale "
        "solution)");
  }
  out.translation = mu_gt - out.scale * (out.rotation * mu_est);
  return out;
}

traj::Trajectory apply_alignment(const AlignmentTransform& transform,
                                 const traj::Trajectory& trajectory) {
  transform.validate();
  const Eigen::Quaterniond q_r = transform.rotation_quat();
  traj::Trajectory out;
  out.frame_id = trajectory.frame_id;
  out.poses.reserve(trajectory.size());
  for (const traj::TimedPose& pose : trajectory.poses) {
    out.poses.emplace_back(pose.t, transform.apply(pose.p),
                           Eigen::Quaterniond(q_r * pose.q).normalized());
  }
  return out;
}

std::vector<PointPair> gather_pairs(const traj::Trajectory& gt,
                                    const traj::Trajectory& est,
                                    const std::vector<traj::MatchedPair>& pairs) {
  std::vector<PointPair> out;
  out.reserve(pairs.size());
  for (const traj::MatchedPair& mp : pairs) {
    out.push_back(PointPair{gt.poses.at(mp.gt).p, est.poses.at(mp.est).p});
  }
  return out;
}

Mode parse_mode(const std::string& name) {
  if (name == "rigid") return Mode::rigid;
  if (name == "sim3" || name == "similarity") return Mode::similarity;
  if (name == "yaw2d") return Mode::yaw2d;
  throw std::invalid_argument("unknown alignment mode: " + name);
}

}  // namespace vioflight::align
