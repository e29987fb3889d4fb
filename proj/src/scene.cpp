#include "glintgaze/scene.hpp"

#include <cmath>
#include <string>

namespace glintgaze {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) {
    throw GazeError(ErrorCode::kInvalidConfig, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw GazeError(ErrorCode::kInvalidConfig, "image size must be positive");
  }
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height)) {
    throw GazeError(ErrorCode::kInvalidConfig, "principal point outside the image");
  }
}

Vector2d project(const CameraModel& camera, const Vector3d& p) {
  if (std::abs(p.z()) < 1e-9) {
    throw GazeError(ErrorCode::kDegenerateProjection, "point on the camera plane");
  }
  return {camera.cx + camera.fx * p.x() / p.z(), camera.cy + camera.fy * p.y() / p.z()};
}

Rayd backproject(const CameraModel& camera, const Vector2d& pixel) {
  const Vector3d dir((pixel.x() - camera.cx) / camera.fx, (pixel.y() - camera.cy) / camera.fy,
                     1.0);
  return Rayd(Vector3d::Zero(), dir);
}

bool in_image(const CameraModel& camera, const Vector2d& pixel) {
  return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= camera.width &&
         pixel.y() <= camera.height;
}

void LedRig::validate() const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (std::abs(positions[i].z()) < 1e-6) {
      throw GazeError(ErrorCode::kInvalidConfig,
                      "LED " + std::to_string(i) + " lies on the camera plane");
    }
  }
}

void EyePhysiology::validate() const {
  if (!(cornea_radius > 0.0)) {
    throw GazeError(ErrorCode::kInvalidConfig, "cornea radius must be positive");
  }
  if (pupil_mode == PupilMode::kPhysiological &&
      !(pupil_offset >= 0.0 && pupil_offset <= cornea_radius)) {
    throw GazeError(ErrorCode::kInvalidConfig, "pupil offset must lie in [0, cornea radius]");
  }
  if (!(cornea_offset >= 0.0)) {
    throw GazeError(ErrorCode::kInvalidConfig, "cornea offset must be non-negative");
  }
}

namespace {

Eigen::Matrix3d kappa_rotation(const Kappa& kappa) {
  // Positive rotation about +y sends +z toward +x; the negative rotation
  // about +x sends +z toward +y.
  return (Eigen::AngleAxisd(-kappa.vertical, Vector3d::UnitX()) *
          Eigen::AngleAxisd(kappa.horizontal, Vector3d::UnitY()))
      .toRotationMatrix();
}

}  // namespace

Vector3d apply_kappa(const Vector3d& axis, const Kappa& kappa) {
  return kappa_rotation(kappa) * axis;
}

Vector3d remove_kappa(const Vector3d& axis, const Kappa& kappa) {
  return kappa_rotation(kappa).transpose() * axis;
}

const GazeTarget& TargetGrid::center_of(int plane) const {
  return targets.at(static_cast<std::size_t>(plane * kTargetsPerPlane + 4));
}

TargetGrid make_target_grid(const GridConfig& config) {
  TargetGrid grid;
  grid.targets.reserve(kTargetCount);
  for (int plane = 0; plane < kPlaneCount; ++plane) {
    const double depth = config.plane_depths[static_cast<std::size_t>(plane)];
    const double extent = plane % 2 == 1 ? config.half_extent_odd : config.half_extent_even;
    const double offset = depth * std::tan(extent);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        GazeTarget t;
        t.plane = plane;
        t.row = row;
        t.col = col;
        t.id = plane * kTargetsPerPlane + row * 3 + col;
        // Row 0 is the top row.
        t.position = Vector3d((col - 1) * offset, (1 - row) * offset, depth);
        grid.targets.push_back(t);
      }
    }
  }
  return grid;
}

EyePose fixate(const CameraModel& camera, const EyePhysiology& eye, const Vector3d& target) {
  constexpr int kMaxIterations = 50;
  constexpr double kTolerance = 1e-9;

  const Vector3d center = camera.to_device(eye.eyeball_center);
  if (!((target - center).norm() > 2.0 * eye.cornea_offset) || !target.allFinite()) {
    throw GazeError(ErrorCode::kNoFixation, "target too close to the eyeball center");
  }

  Vector3d optical = remove_kappa((target - center).normalized(), eye.kappa);
  int iterations = 0;
  double residual = 0.0;
  while (true) {
    const Vector3d cornea = center + eye.cornea_offset * optical;
    const Vector3d wanted = (target - cornea).normalized();
    residual = angle_between(apply_kappa(optical, eye.kappa), wanted);
    if (residual < 1e-15 || iterations == kMaxIterations) break;
    const Vector3d next = remove_kappa(wanted, eye.kappa);
    ++iterations;
    const double step = angle_between(next, optical);
    optical = next;
    if (step < 1e-16) break;
  }

  const Vector3d cornea = center + eye.cornea_offset * optical;
  residual = angle_between(apply_kappa(optical, eye.kappa), (target - cornea).normalized());
  if (!(residual < kTolerance)) {
    throw GazeError(ErrorCode::kNoFixation, "fixation did not converge");
  }

  EyePose pose;
  pose.optical_axis = camera.to_camera_direction(optical);
  pose.visual_axis = camera.to_camera_direction(apply_kappa(optical, eye.kappa));
  pose.cornea_center = camera.to_camera(cornea);
  pose.pupil_center = pose.cornea_center + eye.effective_pupil_offset() * pose.optical_axis;
  pose.fixation_iterations = iterations;
  return pose;
}

Scene make_scene(const RigConfig& rig, const CameraModel& intrinsics, const GridConfig& grid) {
  Scene scene;
  scene.camera = intrinsics;
  scene.grid = grid;

  // Camera sits in front of and below the eye; its optical axis points back
  // at the eyeball center.
  const Vector3d position =
      rig.camera_distance * Vector3d(0.0, -std::sin(rig.camera_pitch), std::cos(rig.camera_pitch));
  const Vector3d z_axis = -position.normalized();
  const Vector3d x_axis = Vector3d::UnitX();
  const Vector3d y_axis = z_axis.cross(x_axis);
  Eigen::Matrix3d rotation;
  rotation.col(0) = x_axis;
  rotation.col(1) = y_axis;
  rotation.col(2) = z_axis;
  scene.camera.camera_to_device = Eigen::Isometry3d::Identity();
  scene.camera.camera_to_device.linear() = rotation;
  scene.camera.camera_to_device.translation() = position;

  const double hx = 0.5 * rig.led_width;
  const double hy = 0.5 * rig.led_height;
  const std::array<Vector3d, kLedCount> corners{
      Vector3d(-hx, hy, rig.led_depth), Vector3d(hx, hy, rig.led_depth),
      Vector3d(hx, -hy, rig.led_depth), Vector3d(-hx, -hy, rig.led_depth)};
  for (std::size_t i = 0; i < kLedCount; ++i) {
    scene.leds.positions[i] = scene.camera.to_camera(corners[i]);
  }
  scene.camera.validate();
  scene.leds.validate();
  return scene;
}

EyePhysiology default_physiology(const Scene& scene) {
  EyePhysiology eye;
  eye.eyeball_center = scene.camera.to_camera(Vector3d::Zero());
  return eye;
}

}  // namespace glintgaze
