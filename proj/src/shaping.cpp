#include "vioflight/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vioflight::shaping {

namespace {

constexpr double kSlack = 1e-9;

double point_segment_distance(const Eigen::Vector3d& p,
                              const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq <= 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double directed_hausdorff(const traj::Trajectory& from,
                          const traj::Trajectory& to) {
  double worst = 0.0;
  for (const traj::TimedPose& pose : from.poses) {
    double best = std::numeric_limits<double>::infinity();
    if (to.size() == 1) {
      best = (pose.p - to.poses[0].p).norm();
    } else {
      for (std::size_t i = 0; i + 1 < to.size(); ++i) {
        best = std::min(best, point_segment_distance(pose.p, to.poses[i].p,
                                                     to.poses[i + 1].p));
        if (best == 0.0) break;
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// Sample density bookkeeping against the input polyline: segment j of the
// input is emitted as n[j] equal on-segment steps. The densified profile is
// what the iteration refines; positions never leave the input polyline and
// every input vertex stays a sample.
struct DensityPlan {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Quaterniond> orientations;
  std::vector<double> lengths;     // per segment
  std::vector<std::size_t> n;      // subdivisions per segment, >= 1

  double spacing(std::size_t j) const {
    return lengths[j] / static_cast<double>(n[j]);
  }

  traj::Trajectory emit(double t0, double sample_period) const {
    traj::Trajectory out;
    std::size_t total = 1;
    for (std::size_t j = 0; j < n.size(); ++j) total += n[j];
    out.poses.reserve(total);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      const Eigen::Vector3d& a = vertices[j];
      const Eigen::Vector3d& b = vertices[j + 1];
      for (std::size_t step = 0; step < n[j]; ++step, ++k) {
        const double frac =
            static_cast<double>(step) / static_cast<double>(n[j]);
        out.poses.emplace_back(t0 + static_cast<double>(k) * sample_period,
                               a + frac * (b - a), orientations[j]);
      }
    }
    out.poses.emplace_back(t0 + static_cast<double>(k) * sample_period,
                           vertices.back(), orientations.back());
    return out;
  }

  /// Base segments a given emitted sample index touches. Interior samples
  /// belong to one segment; samples on input vertices touch both sides.
  void segments_of_sample(std::size_t sample,
                          std::vector<std::size_t>& out) const {
    out.clear();
    std::size_t k = 0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      if (sample == k) {
        if (j > 0) out.push_back(j - 1);
        out.push_back(j);
        return;
      }
      if (sample < k + n[j]) {
        out.push_back(j);
        return;
      }
      k += n[j];
    }
    out.push_back(n.size() - 1);  // final vertex
  }
};

}  // namespace

void MotionConstraints::validate() const {
  if (!(v_max > 0.0) || !(a_max > 0.0) || !(sample_period > 0.0)) {
    throw std::invalid_argument(
        "MotionConstraints: v_max, a_max and sample_period must be positive");
  }
}

std::vector<std::size_t> find_violations(const traj::Trajectory& trajectory,
                                         const MotionConstraints& constraints) {
  constraints.validate();
  const traj::KinematicProfile prof = traj::finite_diff(trajectory);
  std::vector<std::size_t> violations;
  for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
    if (prof.a[i].norm() > constraints.a_max + kSlack ||
        prof.v[i].norm() > constraints.v_max + kSlack) {
      violations.push_back(i);
    }
  }
  return violations;
}

double hausdorff_distance(const traj::Trajectory& a, const traj::Trajectory& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::pair<traj::Trajectory, ShapingReport> shape_trajectory(
    const traj::Trajectory& trajectory, const MotionConstraints& constraints,
    std::size_t max_iter) {
  constraints.validate();
  if (max_iter < 1) {
    throw std::invalid_argument("shape_trajectory: max_iter must be >= 1");
  }

  ShapingReport report;
  report.max_accel_before = traj::finite_diff(trajectory).max_accel_norm();

  const double dt = constraints.sample_period;
  const double ramp = constraints.a_max * dt * dt;  // spacing step per sample
  const double t0 = trajectory.poses.front().t;

  DensityPlan plan;
  plan.vertices.reserve(trajectory.size());
  plan.orientations.reserve(trajectory.size());
  for (const traj::TimedPose& pose : trajectory.poses) {
    plan.vertices.push_back(pose.p);
    plan.orientations.push_back(pose.q);
  }
  const std::size_t m = plan.vertices.size() - 1;
  plan.lengths.resize(m);
  plan.n.assign(m, 1);
  for (std::size_t j = 0; j < m; ++j) {
    plan.lengths[j] = (plan.vertices[j + 1] - plan.vertices[j]).norm();
  }

  traj::Trajectory current = trajectory;
  std::size_t previous_total = current.size();
  std::vector<std::size_t> touched;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const traj::KinematicProfile prof = traj::finite_diff(current);
    std::vector<std::size_t> violations;
    for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
      if (prof.a[i].norm() > constraints.a_max + kSlack ||
          prof.v[i].norm() > constraints.v_max + kSlack) {
        violations.push_back(i);
      }
    }
    if (violations.empty()) {
      report.converged = true;
      break;
    }
    ++report.iterations;

    // Spacing caps per segment. Only the larger side of a speed step gets
    // capped, so slowdown spreads outward from the critical point rather
    // than dragging already-slow samples further down.
    std::vector<double> target(m);
    for (std::size_t j = 0; j < m; ++j) target[j] = plan.spacing(j);
    const std::vector<double> before = target;

    for (std::size_t i : violations) {
      plan.segments_of_sample(i, touched);
      double d_big = 0.0;
      double d_small = std::numeric_limits<double>::infinity();
      for (std::size_t j : touched) {
        if (plan.lengths[j] <= 0.0) continue;
        d_big = std::max(d_big, plan.spacing(j));
        d_small = std::min(d_small, plan.spacing(j));
      }
      if (d_big <= 0.0) continue;

      const double a_i = prof.a[i].norm();
      const double v_i = prof.v[i].norm();
      for (std::size_t j : touched) {
        if (plan.lengths[j] <= 0.0) continue;
        const double d_j = plan.spacing(j);
        if (d_j < d_big * (1.0 - 1e-9)) continue;  // small side untouched
        double cap = d_j;
        if (a_i > constraints.a_max + kSlack) {
          const double fix_scale = d_j * 0.9 * constraints.a_max / a_i;
          const double fix_mismatch = d_small + 0.9 * ramp;
          cap = (fix_mismatch < d_j) ? std::max(fix_mismatch, fix_scale)
                                     : fix_scale;
        }
        if (v_i > constraints.v_max + kSlack) {
          cap = std::min(cap, 0.95 * constraints.v_max * dt);
        }
        target[j] = std::min(target[j], cap);
      }
    }

    // Feasibility envelope: neighboring spacings may differ by at most the
    // ramp step, and one iteration may at most halve a spacing.
    auto clamp_growth = [&](std::size_t j, double value) {
      return std::max(value, 0.5 * before[j]);
    };
    for (std::size_t j = 0; j < m; ++j) {
      if (plan.lengths[j] <= 0.0) continue;
      if (j > 0 && plan.lengths[j - 1] > 0.0) {
        target[j] = std::min(target[j], target[j - 1] + 0.95 * ramp);
      }
      target[j] = clamp_growth(j, target[j]);
    }
    for (std::size_t j = m; j-- > 0;) {
      if (plan.lengths[j] <= 0.0) continue;
      if (j + 1 < m && plan.lengths[j + 1] > 0.0) {
        target[j] = std::min(target[j], target[j + 1] + 0.95 * ramp);
      }
      target[j] = clamp_growth(j, target[j]);
    }

    // Quantize to whole subdivisions, then repair quantization-induced
    // steps, still within this round's doubling budget.
    const std::vector<std::size_t> n_start = plan.n;
    for (std::size_t j = 0; j < m; ++j) {
      if (plan.lengths[j] <= 0.0 || target[j] >= before[j]) continue;
      const auto needed = static_cast<std::size_t>(
          std::ceil(plan.lengths[j] / target[j] - 1e-9));
      plan.n[j] = std::min(std::max(plan.n[j], needed), 2 * n_start[j]);
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t j = 0; j + 1 < m; ++j) {
        if (plan.lengths[j] <= 0.0 || plan.lengths[j + 1] <= 0.0) continue;
        for (const auto& [big, small] :
             {std::pair{j + 1, j}, std::pair{j, j + 1}}) {
          if (plan.spacing(big) >
              plan.spacing(small) + ramp + kSlack) {
            const auto needed = static_cast<std::size_t>(std::ceil(
                plan.lengths[big] / (plan.spacing(small) + 0.95 * ramp) -
                1e-9));
            const std::size_t bounded =
                std::min(std::max(plan.n[big], needed), 2 * n_start[big]);
            if (bounded > plan.n[big]) {
              plan.n[big] = bounded;
              changed = true;
            }
          }
        }
      }
    }

    current = plan.emit(t0, dt);
    report.inserted_samples += current.size() - previous_total;
    previous_total = current.size();
  }
  if (!report.converged) {
    report.converged = find_violations(current, constraints).empty();
  }

  report.max_accel_after = traj::finite_diff(current).max_accel_norm();
  report.max_path_deviation = hausdorff_distance(trajectory, current);
  return {std::move(current), report};
}

ShapingReport validate(const traj::Trajectory& trajectory,
                       const MotionConstraints& constraints) {
  constraints.validate();
  ShapingReport report;
  const double max_accel = traj::finite_diff(trajectory).max_accel_norm();
  report.max_accel_before = max_accel;
  report.max_accel_after = max_accel;
  report.converged = find_violations(trajectory, constraints).empty();
  return report;
}

}  // namespace vioflight::shaping
