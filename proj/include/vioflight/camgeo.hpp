#ifndef VIOFLIGHT_CAMGEO_HPP
#define VIOFLIGHT_CAMGEO_HPP

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

namespace vioflight::camgeo {

/// Pinhole camera mounted with a pitch below the horizontal:
/// 0 deg looks forward, 90 deg straight down.
struct CameraModel {
  double pitch_deg = 90.0;
  double hfov_deg = 91.2;
  double vfov_deg = 59.9;
  double width = 640.0;   // px
  double height = 360.0;  // px
  double fps = 30.0;

  void validate() const;
  double focal_px() const;  // (width/2) / tan(hfov/2)
};

struct FlightCondition {
  double altitude = 3.0;  // m
  double velocity = 5.0;  // m/s horizontal
  double yaw_rate = 0.0;  // rad/s

  void validate() const;
};

/// Intersection of the viewing frustum with the ground plane. When any
/// corner ray points at or above the horizon the footprint is unbounded
/// and `open` is set; the polygon is only meaningful when closed.
struct GroundFootprint {
  bool open = false;
  std::vector<Eigen::Vector2d> polygon;  // ground xy, UAV at origin

  double area() const;
  Eigen::Vector2d centroid() const;
};

GroundFootprint ground_footprint(const CameraModel& cam,
                                 const FlightCondition& cond);

/// Fraction of the footprint still in view one frame later, after the
/// translation velocity/fps and yaw rotation yaw_rate/fps. Exact convex
/// polygon clipping. Throws on an open footprint.
double frame_overlap(const CameraModel& cam, const FlightCondition& cond);

/// Feature motion between consecutive frames at the footprint-center ray,
/// in pixels: focal * (velocity / fps) / slant range. Throws when the
/// center ray has no ground intersection.
double pixel_displacement(const CameraModel& cam, const FlightCondition& cond);

/// Cross-product sweep rows, deterministic ordering:
/// pitch_deg,fps,velocity_mps,altitude_m,footprint_area_m2,overlap,px_per_frame
/// (overlap and px/frame are blank where the footprint is open).
void write_sweep_csv(std::ostream& out, const CameraModel& base,
                     const FlightCondition& base_cond,
                     const std::vector<double>& pitches,
                     const std::vector<double>& fps_values,
                     const std::vector<double>& velocities);

}  // namespace vioflight::camgeo

#endif  // VIOFLIGHT_CAMGEO_HPP
