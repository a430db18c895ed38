#ifndef VIOFLIGHT_METRICS_HPP
#define VIOFLIGHT_METRICS_HPP

#include "vioflight/trajectory.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <iosfwd>
#include <vector>

namespace vioflight::metrics {

/// SE(3) discrepancy at one matched index: rotation and translation parts
/// of the group product, stamped with the ground-truth time.
struct PoseError {
  double t = 0.0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Per-pair absolute trajectory error: inverse(gt_i) * est_aligned_i.
/// The estimate must already be aligned into the ground-truth frame.
std::vector<PoseError> trajectory_errors(
    const traj::Trajectory& gt, const traj::Trajectory& est_aligned,
    const std::vector<traj::MatchedPair>& pairs);

/// RMSE of the translation norms. lateral_only zeroes the z component of
/// each translation before taking the norm.
double ate(const std::vector<PoseError>& errors, bool lateral_only);

/// Relative pose errors over a fixed time interval: the discrepancy between
/// matched relative motions inverse(rel_gt) * rel_est, where rel spans
/// k = round(delta / median pair spacing) pairs (at least one). Alignment
/// of the estimate is irrelevant here: a fixed left factor cancels.
std::vector<PoseError> rpe_errors(const traj::Trajectory& gt,
                                  const traj::Trajectory& est,
                                  const std::vector<traj::MatchedPair>& pairs,
                                  double delta);

/// RMSE over the relative pose errors, same lateral convention as ate().
double rpe(const std::vector<PoseError>& errors, bool lateral_only);

struct MetricReport {
  double ate_m = 0.0;
  double rpe_m = 0.0;
  std::size_t n_pairs = 0;
  double delta_s = 0.0;
  bool lateral_only = false;
  std::vector<double> ate_times;
  std::vector<double> ate_per_sample;
  std::vector<double> rpe_times;
  std::vector<double> rpe_per_sample;

  /// Header line plus one data row.
  void write_csv(std::ostream& out) const;
  /// One row per sample: t, ate error, rpe error (blank where undefined).
  void write_samples_csv(std::ostream& out) const;
};

/// Full metric pass over an already-aligned pair of trajectories.
MetricReport evaluate(const traj::Trajectory& gt,
                      const traj::Trajectory& est_aligned,
                      const std::vector<traj::MatchedPair>& pairs,
                      double delta, bool lateral_only);

}  // namespace vioflight::metrics

#endif  // VIOFLIGHT_METRICS_HPP
