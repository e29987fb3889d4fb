#include <doctest.h>

#include <random>
#include <set>

#include "test_support.hpp"

using namespace glintgaze;
using namespace glintgaze::testing;

namespace {
constexpr double kDeg = EIGEN_PI / 180.0;
}

TEST_SUITE("scene") {

TEST_CASE("project on and off the optical axis") {
  CameraModel cam;
  cam.fx = cam.fy = 500;
  CHECK((project(cam, Vector3d(0, 0, 0.1)) - Vector2d(320, 240)).norm() < 1e-12);
  CHECK((project(cam, Vector3d(0.01, 0, 0.1)) - Vector2d(370, 240)).norm() < 1e-9);
  CHECK_THROWS_AS(project(cam, Vector3d(1, 1, 0)), GazeError);
}

TEST_CASE("backproject(project(p)) passes through p") {
  const CameraModel cam = default_scene().camera;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> z(0.01, 10.0), xy(-0.5, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double depth = z(rng);
    const Vector3d p(xy(rng) * depth, xy(rng) * depth, depth);
    const Rayd ray = backproject(cam, project(cam, p));
    CHECK(point_to_line3_distance(p, ray) < 1e-9);
    CHECK(angle_between(ray.direction, p) < 1e-10);
  }
}

TEST_CASE("in_image bounds") {
  const CameraModel cam;
  CHECK(in_image(cam, Vector2d(0, 0)));
  CHECK(in_image(cam, Vector2d(639.5, 479.5)));
  CHECK_FALSE(in_image(cam, Vector2d(-0.1, 10)));
  CHECK_FALSE(in_image(cam, Vector2d(10, 480.5)));
}

TEST_CASE("camera model validation") {
  CameraModel cam;
  cam.fx = -1;
  CHECK_THROWS_AS(cam.validate(), GazeError);
}

TEST_CASE("default rig places the camera off axis below the display") {
  const Scene scene = default_scene();
  const Vector3d cam_center = scene.camera.to_device(Vector3d::Zero());
  CHECK(cam_center.norm() == doctest::Approx(0.035));
  CHECK(cam_center.y() < 0);
  // optical axis points at the eyeball center
  const Vector3d axis = scene.camera.to_device_direction(Vector3d::UnitZ());
  CHECK(angle_between(axis, -cam_center) < 1e-12);
  CHECK(angle_between(cam_center, Vector3d::UnitZ()) == doctest::Approx(30 * kDeg));
  // LEDs at the rectangle corners
  std::set<std::pair<int, int>> corners;
  for (const auto& l : scene.leds.positions) {
    const Vector3d d = scene.camera.to_device(l);
    CHECK(std::abs(std::abs(d.x()) - 0.020) < 1e-12);
    CHECK(std::abs(std::abs(d.y()) - 0.015) < 1e-12);
    CHECK(d.z() == doctest::Approx(0.025));
    corners.insert({d.x() > 0, d.y() > 0});
  }
  CHECK(corners.size() == 4);
  const EyePhysiology eye = default_physiology(scene);
  CHECK(scene.camera.to_device(eye.eyeball_center).norm() < 1e-15);
}

TEST_CASE("kappa rotation") {
  const Vector3d z = Vector3d::UnitZ();
  CHECK((apply_kappa(z, Kappa{}) - z).norm() < 1e-15);
  CHECK((apply_kappa(z, Kappa{90 * kDeg, 0}) - Vector3d(1, 0, 0)).norm() < 1e-12);
  // positive vertical kappa tilts upward
  CHECK(apply_kappa(z, Kappa{0, 2 * kDeg}).y() > 0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> k(-0.3, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const Vector3d v = random_unit(rng);
    const Kappa kappa{k(rng), k(rng)};
    CHECK((remove_kappa(apply_kappa(v, kappa), kappa) - v).norm() < 1e-12);
    CHECK(std::abs(apply_kappa(v, kappa).norm() - 1) < 1e-12);
  }
  // combined angle of the default kappa on the forward axis
  const double combined = angle_between(apply_kappa(z, Kappa{5 * kDeg, 1.5 * kDeg}), z);
  CHECK(to_arcmin(combined) == doctest::Approx(313.2).epsilon(0.002));
}

TEST_CASE("target grid layout") {
  const TargetGrid grid = make_target_grid();
  REQUIRE(grid.size() == 54);
  std::set<double> depths;
  for (const auto& t : grid.targets) depths.insert(t.position.z());
  CHECK(depths == std::set<double>{0.5, 0.75, 1.0, 1.5, 2.0, 3.0});
  for (int p = 0; p < kPlaneCount; ++p) {
    const auto& c = grid.center_of(p);
    CHECK(c.position.x() == 0.0);
    CHECK(c.position.y() == 0.0);
    CHECK(c.id == p * 9 + 4);
  }
  for (const auto& t : grid.targets) {
    CHECK(t.id == t.plane * 9 + t.row * 3 + t.col);
    const double extent = t.plane % 2 == 1 ? 10 * kDeg : 7 * kDeg;
    const double d = t.position.z();
    CHECK(t.position.x() == doctest::Approx((t.col - 1) * d * std::tan(extent)));
    CHECK(t.position.y() == doctest::Approx((1 - t.row) * d * std::tan(extent)));
  }
  // deterministic
  const TargetGrid again = make_target_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid.targets[i].position == again.targets[i].position);
  }
}

TEST_CASE("fixate with zero kappa looks straight at the target") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene, PupilMode::kPhysiological, Kappa{});
  const Vector3d target_dev(0, 0, 1.0);
  const EyePose pose = fixate(scene.camera, eye, target_dev);
  CHECK(pose.fixation_iterations <= 2);
  CHECK((pose.optical_axis - pose.visual_axis).norm() < 1e-15);
  const Vector3d target_cam = scene.camera.to_camera(target_dev);
  CHECK(angle_between(pose.optical_axis, target_cam - eye.eyeball_center) < 1e-12);
}

TEST_CASE("fixate satisfies the pose invariants on every grid target") {
  const Scene scene = default_scene();
  for (const auto mode : {PupilMode::kConsistent, PupilMode::kPhysiological}) {
    const EyePhysiology eye = eye_for(scene, mode);
    for (const auto& t : make_target_grid().targets) {
      const EyePose pose = fixate(scene.camera, eye, t.position);
      const Vector3d target_cam = scene.camera.to_camera(t.position);
      // visual axis passes through the target
      CHECK(angle_between(pose.visual_axis, target_cam - pose.cornea_center) < 1e-9);
      // visual = kappa(optical) in the device frame
      const Vector3d opt_dev = scene.camera.to_device_direction(pose.optical_axis);
      const Vector3d vis_dev = scene.camera.to_device_direction(pose.visual_axis);
      CHECK((apply_kappa(opt_dev, eye.kappa) - vis_dev).norm() < 1e-12);
      // cornea and pupil along the optical axis at the configured offsets
      CHECK((pose.cornea_center - eye.eyeball_center - eye.cornea_offset * pose.optical_axis)
                .norm() < 1e-15);
      CHECK((pose.pupil_center - pose.cornea_center -
             eye.effective_pupil_offset() * pose.optical_axis)
                .norm() < 1e-15);
      CHECK(std::abs(pose.optical_axis.norm() - 1) < 1e-12);
    }
  }
}

TEST_CASE("fixate rejects a target at the eyeball center") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  try {
    fixate(scene.camera, eye, Vector3d::Zero());
    FAIL("expected NoFixation");
  } catch (const GazeError& e) {
    CHECK(e.code() == ErrorCode::kNoFixation);
  }
}

TEST_CASE("physiology validation") {
  EyePhysiology eye;
  eye.cornea_radius = -1;
  CHECK_THROWS_AS(eye.validate(), GazeError);
}

}  // TEST_SUITE
