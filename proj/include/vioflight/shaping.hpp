#ifndef VIOFLIGHT_SHAPING_HPP
#define VIOFLIGHT_SHAPING_HPP

#include "vioflight/trajectory.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace vioflight::shaping {

/// Motion limits a localization method tolerates before tracking degrades.
struct MotionConstraints {
  double v_max = 10.0;        // m/s
  double a_max = 0.4;         // m/s^2
  double sample_period = 0.2; // s, output trajectory rate

  void validate() const;  // all strictly positive
};

struct ShapingReport {
  std::size_t iterations = 0;
  std::size_t inserted_samples = 0;
  double max_accel_before = 0.0;  // m/s^2, interior finite-difference max
  double max_accel_after = 0.0;
  double max_path_deviation = 0.0;  // m, Hausdorff between polylines
  bool converged = false;
};

/// Interior sample indices whose finite-difference velocity or acceleration
/// exceeds the constraints (with a 1e-9 slack so converged outputs stay
/// clean under re-evaluation). Requires at least 3 samples.
std::vector<std::size_t> find_violations(const traj::Trajectory& trajectory,
                                         const MotionConstraints& constraints);

/// Iteratively inserts on-segment midpoints around every violating sample
/// and re-stamps the result at the constraint sample period, slowing local
/// traversal until the motion fits the constraints or max_iter is reached.
/// Original positions are preserved in order; the geometric path does not
/// move. A non-converged result is returned best-effort with
/// converged = false.
std::pair<traj::Trajectory, ShapingReport> shape_trajectory(
    const traj::Trajectory& trajectory, const MotionConstraints& constraints,
    std::size_t max_iter = 50);

/// Constraint evaluation without modification.
ShapingReport validate(const traj::Trajectory& trajectory,
                       const MotionConstraints& constraints);

/// Symmetric Hausdorff distance between the position polylines.
double hausdorff_distance(const traj::Trajectory& a, const traj::Trajectory& b);

}  // namespace vioflight::shaping

#endif  // VIOFLIGHT_SHAPING_HPP
