#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vioflight/camgeo.hpp"

#include <cmath>
#include <sstream>

using namespace vioflight;
using camgeo::CameraModel;
using camgeo::FlightCondition;

namespace {

CameraModel nadir_90fov() {
  CameraModel cam;
  cam.pitch_deg = 90.0;
  cam.hfov_deg = 90.0;
  cam.vfov_deg = 90.0;
  return cam;
}

}  // namespace

TEST_CASE("footprint: nadir camera with 90 deg fov sees a square") {
  FlightCondition cond;
  cond.altitude = 3.0;
  const auto fp = camgeo::ground_footprint(nadir_90fov(), cond);
  REQUIRE_FALSE(fp.open);
  REQUIRE(fp.polygon.size() == 4);
  // Side 2 * altitude * tan(45 deg) = 6 m, centered under the UAV.
  CHECK(fp.area() == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(fp.centroid().norm() <= 1e-12);
  for (const auto& corner : fp.polygon) {
    CHECK(std::abs(std::abs(corner.x()) - 3.0) <= 1e-12);
    CHECK(std::abs(std::abs(corner.y()) - 3.0) <= 1e-12);
  }
}

TEST_CASE("footprint: forward camera is open (horizon in view)") {
  CameraModel cam;
  cam.pitch_deg = 0.0;
  FlightCondition cond;
  const auto fp = camgeo::ground_footprint(cam, cond);
  CHECK(fp.open);
}

TEST_CASE("footprint: doubling the altitude doubles the square side") {
  FlightCondition low, high;
  low.altitude = 3.0;
  high.altitude = 6.0;
  const auto fp_low = camgeo::ground_footprint(nadir_90fov(), low);
  const auto fp_high = camgeo::ground_footprint(nadir_90fov(), high);
  CHECK(fp_high.area() == doctest::Approx(4.0 * fp_low.area()).epsilon(1e-12));
}

TEST_CASE("footprint: area grows with altitude at nadir") {
  double last = 0.0;
  for (double alt = 1.0; alt <= 10.0; alt += 1.0) {
    FlightCondition cond;
    cond.altitude = alt;
    const double area = camgeo::ground_footprint(nadir_90fov(), cond).area();
    CHECK(area > last);
    last = area;
  }
}

TEST_CASE("footprint: pitched camera yields a closed trapezoid") {
  CameraModel cam;
  cam.pitch_deg = 60.0;
  cam.hfov_deg = 70.0;
  cam.vfov_deg = 50.0;
  FlightCondition cond;
  cond.altitude = 3.0;
  const auto fp = camgeo::ground_footprint(cam, cond);
  REQUIRE_FALSE(fp.open);
  CHECK(fp.area() > 0.0);
  // 30 deg pitch with a 50 deg vfov puts the top rays above the horizon.
  cam.pitch_deg = 20.0;
  CHECK(camgeo::ground_footprint(cam, cond).open);
}

TEST_CASE("overlap: stationary camera sees the same scene") {
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 0.0;
  CHECK(camgeo::frame_overlap(nadir_90fov(), cond) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlap: rectangle slide arithmetic at 5 m/s, 30 fps") {
  CameraModel cam = nadir_90fov();
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 5.0;
  // Shift 5/30 m over a 6 m square: overlap (6 - 1/6) / 6.
  const double expected = (6.0 - 5.0 / 30.0) / 6.0;
  CHECK(camgeo::frame_overlap(cam, cond) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(camgeo::frame_overlap(cam, cond) == doctest::Approx(0.9722222222));
}

TEST_CASE("overlap: doubling fps strictly increases overlap") {
  CameraModel cam = nadir_90fov();
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 5.0;
  const double at30 = camgeo::frame_overlap(cam, cond);
  cam.fps = 60.0;
  const double at60 = camgeo::frame_overlap(cam, cond);
  CHECK(at60 > at30);
}

TEST_CASE("overlap: monotone in fps, anti-monotone in velocity") {
  CameraModel cam = nadir_90fov();
  FlightCondition cond;
  cond.altitude = 4.0;
  double last = 0.0;
  for (double fps = 15.0; fps <= 120.0; fps += 15.0) {
    cam.fps = fps;
    cond.velocity = 5.0;
    const double overlap = camgeo::frame_overlap(cam, cond);
    CHECK(overlap >= last);
    last = overlap;
  }
  cam.fps = 30.0;
  last = 1.0;
  for (double v = 0.0; v <= 10.0; v += 1.0) {
    cond.velocity = v;
    const double overlap = camgeo::frame_overlap(cam, cond);
    CHECK(overlap <= last);
    last = overlap;
  }
}

TEST_CASE("overlap: grows with altitude at nadir for fixed speed") {
  CameraModel cam = nadir_90fov();
  FlightCondition cond;
  cond.velocity = 5.0;
  double last = 0.0;
  for (double alt = 1.0; alt <= 10.0; alt += 1.0) {
    cond.altitude = alt;
    const double overlap = camgeo::frame_overlap(cam, cond);
    CHECK(overlap > last);
    last = overlap;
  }
}

TEST_CASE("overlap: yaw rotation reduces overlap") {
  CameraModel cam = nadir_90fov();
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 0.0;
  cond.yaw_rate = 1.0;  // rad/s
  const double overlap = camgeo::frame_overlap(cam, cond);
  CHECK(overlap < 1.0);
  CHECK(overlap > 0.9);  // 1/30 rad rotation of a square about its center
}

TEST_CASE("overlap: open footprint rejected") {
  CameraModel cam;
  cam.pitch_deg = 0.0;
  FlightCondition cond;
  CHECK_THROWS_AS(camgeo::frame_overlap(cam, cond), std::runtime_error);
}

TEST_CASE("pixel displacement: published scenario constants") {
  CameraModel cam;
  cam.pitch_deg = 90.0;
  cam.hfov_deg = 91.2;
  cam.width = 640.0;
  cam.fps = 30.0;
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 5.0;

  CHECK(cam.focal_px() == doctest::Approx(313.37).epsilon(1e-3));
  const double expected =
      cam.focal_px() * (5.0 / 30.0) / 3.0;  // pinhole projection oracle
  const double actual = camgeo::pixel_displacement(cam, cond);
  CHECK(actual == doctest::Approx(expected).epsilon(1e-12));
  CHECK(actual == doctest::Approx(17.41).epsilon(1e-3));
}

TEST_CASE("pixel displacement: exactly inversely proportional to fps") {
  CameraModel cam;
  cam.pitch_deg = 90.0;
  cam.hfov_deg = 91.2;
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 5.0;

  cam.fps = 30.0;
  const double at30 = camgeo::pixel_displacement(cam, cond);
  cam.fps = 60.0;
  const double at60 = camgeo::pixel_displacement(cam, cond);
  cam.fps = 90.0;
  const double at90 = camgeo::pixel_displacement(cam, cond);

  CHECK(at30 == 2.0 * at60);  // exact: halving is a power-of-two rescale
  CHECK(at30 / at90 == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("pixel displacement: zero at zero velocity, error at pitch 0") {
  CameraModel cam;
  cam.pitch_deg = 90.0;
  FlightCondition cond;
  cond.velocity = 0.0;
  CHECK(camgeo::pixel_displacement(cam, cond) == 0.0);
  cam.pitch_deg = 0.0;
  cond.velocity = 5.0;
  CHECK_THROWS_AS(camgeo::pixel_displacement(cam, cond), std::runtime_error);
}

TEST_CASE("pixel displacement: slant range shrinks displacement off nadir") {
  CameraModel cam;
  cam.pitch_deg = 90.0;
  FlightCondition cond;
  cond.altitude = 3.0;
  cond.velocity = 5.0;
  const double nadir = camgeo::pixel_displacement(cam, cond);
  cam.pitch_deg = 45.0;  // slant range altitude / sin(45) > altitude
  CHECK(camgeo::pixel_displacement(cam, cond) < nadir);
}

TEST_CASE("sweep csv: blank overlap columns where the footprint is open") {
  std::ostringstream out;
  CameraModel cam;
  FlightCondition cond;
  camgeo::write_sweep_csv(out, cam, cond, {0.0, 90.0}, {30.0}, {5.0});
  const std::string text = out.str();
  CHECK(text.find("pitch_deg,fps,velocity_mps") == 0);
  CHECK(text.find("0,30,5,3,,,") != std::string::npos);
}

TEST_CASE("camera model validation") {
  CameraModel cam;
  cam.pitch_deg = 120.0;
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
  cam = CameraModel{};
  cam.hfov_deg = 180.0;
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
  FlightCondition cond;
  cond.altitude = 0.0;
  CHECK_THROWS_AS(cond.validate(), std::invalid_argument);
}
