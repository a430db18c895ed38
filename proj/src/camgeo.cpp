#include "vioflight/camgeo.hpp"

#include "vioflight/numeric_io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vioflight::camgeo {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double shoelace_area(const std::vector<Eigen::Vector2d>& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

// Sutherland-Hodgman clip of a convex polygon against the half plane on the
// inner side of edge (a, b) of a counterclockwise clip polygon.
std::vector<Eigen::Vector2d> clip_against_edge(
    const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& a,
    const Eigen::Vector2d& b) {
  auto inside = [&](const Eigen::Vector2d& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) -
               (b.y() - a.y()) * (p.x() - a.x()) >=
           0.0;
  };
  auto intersect = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    const Eigen::Vector2d d1 = q - p;
    const Eigen::Vector2d d2 = b - a;
    const double denom = d1.x() * d2.y() - d1.y() * d2.x();
    const double s = ((a - p).x() * d2.y() - (a - p).y() * d2.x()) / denom;
    return Eigen::Vector2d(p + s * d1);
  };

  std::vector<Eigen::Vector2d> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& prev = poly[(i + n - 1) % n];
    const bool cur_in = inside(cur);
    const bool prev_in = inside(prev);
    if (cur_in) {
      if (!prev_in) out.push_back(intersect(prev, cur));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(intersect(prev, cur));
    }
  }
  return out;
}

double intersection_area(std::vector<Eigen::Vector2d> subject,
                         const std::vector<Eigen::Vector2d>& clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    subject =
        clip_against_edge(subject, clip[i], clip[(i + 1) % clip.size()]);
  }
  if (subject.size() < 3) return 0.0;
  return shoelace_area(subject);
}

void ensure_ccw(std::vector<Eigen::Vector2d>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  if (twice < 0.0) std::reverse(poly.begin(), poly.end());
}

// Camera basis in world coordinates (x forward, y left, z up) for a camera
// pitched down by pitch_rad: optical axis z_c, image right x_c, image down
// y_c.
struct CameraBasis {
  Eigen::Vector3d x_c, y_c, z_c;
};

CameraBasis camera_basis(double pitch_rad) {
  CameraBasis basis;
  basis.z_c = Eigen::Vector3d(std::cos(pitch_rad), 0.0, -std::sin(pitch_rad));
  basis.x_c = Eigen::Vector3d(0.0, -1.0, 0.0);
  basis.y_c = basis.z_c.cross(basis.x_c);
  return basis;
}

}  // namespace

void CameraModel::validate() const {
  if (pitch_deg < 0.0 || pitch_deg > 90.0) {
    throw std::invalid_argument("CameraModel: pitch must be in [0, 90] deg");
  }
  if (!(hfov_deg > 0.0) || hfov_deg >= 180.0 || !(vfov_deg > 0.0) ||
      vfov_deg >= 180.0) {
    throw std::invalid_argument("CameraModel: fov must be in (0, 180) deg");
  }
  if (!(width > 0.0) || !(height > 0.0) || !(fps > 0.0)) {
    throw std::invalid_argument(
        "CameraModel: resolution and fps must be positive");
  }
}

double CameraModel::focal_px() const {
  return (width / 2.0) / std::tan(0.5 * hfov_deg * kDegToRad);
}

void FlightCondition::validate() const {
  if (!(altitude > 0.0)) {
    throw std::invalid_argument("FlightCondition: altitude must be positive");
  }
  if (velocity < 0.0) {
    throw std::invalid_argument("FlightCondition: velocity must be >= 0");
  }
}

double GroundFootprint::area() const {
  if (open || polygon.size() < 3) return 0.0;
  return shoelace_area(polygon);
}

Eigen::Vector2d GroundFootprint::centroid() const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const Eigen::Vector2d& p : polygon) c += p;
  return polygon.empty() ? c : Eigen::Vector2d(c / polygon.size());
}

GroundFootprint ground_footprint(const CameraModel& cam,
                                 const FlightCondition& cond) {
  cam.validate();
  cond.validate();

  const CameraBasis basis = camera_basis(cam.pitch_deg * kDegToRad);
  const double tan_h = std::tan(0.5 * cam.hfov_deg * kDegToRad);
  const double tan_v = std::tan(0.5 * cam.vfov_deg * kDegToRad);

  // Image corners in cyclic order: TL, TR, BR, BL.
  const double corner_uv[4][2] = {
      {-tan_h, -tan_v}, {tan_h, -tan_v}, {tan_h, tan_v}, {-tan_h, tan_v}};

  GroundFootprint footprint;
  for (const auto& uv : corner_uv) {
    const Eigen::Vector3d dir =
        uv[0] * basis.x_c + uv[1] * basis.y_c + basis.z_c;
    if (dir.z() >= 0.0) {
      footprint.open = true;  // ray at or above the horizon
      footprint.polygon.clear();
      return footprint;
    }
    const double scale = cond.altitude / -dir.z();
    footprint.polygon.emplace_back(scale * dir.x(), scale * dir.y());
  }
  ensure_ccw(footprint.polygon);
  return footprint;
}

double frame_overlap(const CameraModel& cam, const FlightCondition& cond) {
  const GroundFootprint footprint = ground_footprint(cam, cond);
  if (footprint.open) {
    throw std::runtime_error(
        "frame_overlap: open footprint (horizon in view), overlap undefined");
  }
  const double area = footprint.area();
  if (area <= 0.0) {
    throw std::runtime_error("frame_overlap: degenerate footprint");
  }

  const Eigen::Vector2d shift(cond.velocity / cam.fps, 0.0);
  const double angle = cond.yaw_rate / cam.fps;
  const Eigen::Rotation2Dd rot(angle);
  const Eigen::Vector2d center = footprint.centroid();

  std::vector<Eigen::Vector2d> moved;
  moved.reserve(footprint.polygon.size());
  for (const Eigen::Vector2d& p : footprint.polygon) {
    moved.push_back(rot * (p - center) + center + shift);
  }
  return intersection_area(moved, footprint.polygon) / area;
}

double pixel_displacement(const CameraModel& cam,
                          const FlightCondition& cond) {
  cam.validate();
  cond.validate();
  const double pitch_rad = cam.pitch_deg * kDegToRad;
  const CameraBasis basis = camera_basis(pitch_rad);
  if (basis.z_c.z() >= 0.0) {
    throw std::runtime_error(
        "pixel_displacement: center ray has no ground intersection");
  }
  const double slant_range = cond.altitude / std::sin(pitch_rad);
  return (cam.focal_px() * cond.velocity / slant_range) / cam.fps;
}

void write_sweep_csv(std::ostream& out, const CameraModel& base,
                     const FlightCondition& base_cond,
                     const std::vector<double>& pitches,
                     const std::vector<double>& fps_values,
                     const std::vector<double>& velocities) {
  out << "pitch_deg,fps,velocity_mps,altitude_m,footprint_area_m2,overlap,"
         "px_per_frame\n";
  for (double pitch : pitches) {
    for (double fps : fps_values) {
      for (double velocity : velocities) {
        CameraModel cam = base;
        cam.pitch_deg = pitch;
        cam.fps = fps;
        FlightCondition cond = base_cond;
        cond.velocity = velocity;

        const GroundFootprint footprint = ground_footprint(cam, cond);
        out << format_double(pitch) << ',' << format_double(fps) << ','
            << format_double(velocity) << ','
            << format_double(cond.altitude) << ',';
        if (footprint.open) {
          out << ",,\n";
        } else {
          out << format_double(footprint.area()) << ','
              << format_double(frame_overlap(cam, cond)) << ','
              << format_double(pixel_displacement(cam, cond)) << '\n';
        }
      }
    }
  }
}

}  // namespace vioflight::camgeo
