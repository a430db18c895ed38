#include "vioflight/metrics.hpp"

#include "vioflight/numeric_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vioflight::metrics {

namespace {

// Minimal SE(3) element for composing pose discrepancies.
struct Pose {
  Eigen::Quaterniond q;
  Eigen::Vector3d p;

  Pose inverse() const {
    const Eigen::Quaterniond qi = q.conjugate();
    return Pose{qi, -(qi * p)};
  }
  Pose operator*(const Pose& other) const {
    return Pose{Eigen::Quaterniond(q * other.q), q * other.p + p};
  }
};

Pose as_pose(const traj::TimedPose& tp) { return Pose{tp.q, tp.p}; }

double rmse_of_norms(const std::vector<PoseError>& errors, bool lateral_only) {
  if (errors.empty()) {
    throw std::invalid_argument("metric over empty error list");
  }
  double sum_sq = 0.0;
  for (const PoseError& e : errors) {
    Eigen::Vector3d tr = e.translation;
    if (lateral_only) tr.z() = 0.0;
    sum_sq += tr.squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<double>(errors.size()));
}

std::vector<double> norms(const std::vector<PoseError>& errors,
                          bool lateral_only) {
  std::vector<double> out;
  out.reserve(errors.size());
  for (const PoseError& e : errors) {
    Eigen::Vector3d tr = e.translation;
    if (lateral_only) tr.z() = 0.0;
    out.push_back(tr.norm());
  }
  return out;
}

}  // namespace

std::vector<PoseError> trajectory_errors(
    const traj::Trajectory& gt, const traj::Trajectory& est_aligned,
    const std::vector<traj::MatchedPair>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("trajectory_errors: empty pair list");
  }
  std::vector<PoseError> errors;
  errors.reserve(pairs.size());
  for (const traj::MatchedPair& mp : pairs) {
    const Pose f = as_pose(gt.poses.at(mp.gt)).inverse() *
                   as_pose(est_aligned.poses.at(mp.est));
    errors.push_back(PoseError{gt.poses[mp.gt].t, f.q.normalized(), f.p});
  }
  return errors;
}

double ate(const std::vector<PoseError>& errors, bool lateral_only) {
  return rmse_of_norms(errors, lateral_only);
}

std::vector<PoseError> rpe_errors(const traj::Trajectory& gt,
                                  const traj::Trajectory& est,
                                  const std::vector<traj::MatchedPair>& pairs,
                                  double delta) {
  if (delta <= 0.0) {
    throw std::invalid_argument("rpe_errors: delta must be positive");
  }
  if (pairs.size() < 2) {
    throw std::invalid_argument("rpe_errors: need at least 2 pairs");
  }

  std::vector<double> spacings;
  spacings.reserve(pairs.size() - 1);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    spacings.push_back(gt.poses[pairs[i].gt].t - gt.poses[pairs[i - 1].gt].t);
  }
  std::nth_element(spacings.begin(), spacings.begin() + spacings.size() / 2,
                   spacings.end());
  const double median = spacings[spacings.size() / 2];

  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(delta / median)));
  if (k >= pairs.size()) {
    throw std::invalid_argument(
        "rpe_errors: trajectory shorter than delta (index offset " +
        std::to_string(k) + " >= " + std::to_string(pairs.size()) + " pairs)");
  }

  std::vector<PoseError> errors;
  errors.reserve(pairs.size() - k);
  for (std::size_t i = 0; i + k < pairs.size(); ++i) {
    const Pose rel_gt = as_pose(gt.poses[pairs[i].gt]).inverse() *
                        as_pose(gt.poses[pairs[i + k].gt]);
    const Pose rel_est = as_pose(est.poses[pairs[i].est]).inverse() *
                         as_pose(est.poses[pairs[i + k].est]);
    const Pose e = rel_gt.inverse() * rel_est;
    errors.push_back(PoseError{gt.poses[pairs[i].gt].t, e.q.normalized(), e.p});
  }
  return errors;
}

double rpe(const std::vector<PoseError>& errors, bool lateral_only) {
  return rmse_of_norms(errors, lateral_only);
}

void MetricReport::write_csv(std::ostream& out) const {
  out << "ate_m,rpe_m,n_pairs,delta_s,lateral_only\n";
  out << format_double(ate_m) << ',' << format_double(rpe_m) << ',' << n_pairs
      << ',' << format_double(delta_s) << ',' << (lateral_only ? 1 : 0)
      << '\n';
}

void MetricReport::write_samples_csv(std::ostream& out) const {
  out << "t,ate_err_m,rpe_err_m\n";
  for (std::size_t i = 0; i < ate_per_sample.size(); ++i) {
    out << format_double(ate_times[i]) << ','
        << format_double(ate_per_sample[i]) << ',';
    if (i < rpe_per_sample.size()) {
      out << format_double(rpe_per_sample[i]);
    }
    out << '\n';
  }
}

MetricReport evaluate(const traj::Trajectory& gt,
                      const traj::Trajectory& est_aligned,
                      const std::vector<traj::MatchedPair>& pairs,
                      double delta, bool lateral_only) {
  MetricReport report;
  report.n_pairs = pairs.size();
  report.delta_s = delta;
  report.lateral_only = lateral_only;

  const std::vector<PoseError> abs_errors =
      trajectory_errors(gt, est_aligned, pairs);
  report.ate_m = ate(abs_errors, lateral_only);
  report.ate_per_sample = norms(abs_errors, lateral_only);
  for (const PoseError& e : abs_errors) report.ate_times.push_back(e.t);

  const std::vector<PoseError> rel_errors =
      rpe_errors(gt, est_aligned, pairs, delta);
  report.rpe_m = rpe(rel_errors, lateral_only);
  report.rpe_per_sample = norms(rel_errors, lateral_only);
  for (const PoseError& e : rel_errors) report.rpe_times.push_back(e.t);

  return report;
}

}  // namespace vioflight::metrics
