#pragma once

// Camera, LED rig, eye model and the 54-target fixation protocol.
//
// Frames:
//   camera frame  - pinhole camera at the origin, +z along the optical axis,
//                   +x along image u, +y along image v.
//   device frame  - headset frame, +z forward toward the display, +y up,
//                   +x completing a right-handed frame. The nominal eyeball
//                   center sits at the device origin in the default rig.

#include <Eigen/Geometry>

#include <array>
#include <vector>

#include "glintgaze/geometry.hpp"

namespace glintgaze {

struct CameraModel {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  /// Maps camera-frame coordinates to device-frame coordinates.
  Eigen::Isometry3d camera_to_device = Eigen::Isometry3d::Identity();

  /// Throws InvalidConfig when the intrinsics are out of range.
  void validate() const;

  Vector3d to_device(const Vector3d& p) const { return camera_to_device * p; }
  Vector3d to_device_direction(const Vector3d& d) const { return camera_to_device.linear() * d; }
  Vector3d to_camera(const Vector3d& p) const { return camera_to_device.inverse() * p; }
  Vector3d to_camera_direction(const Vector3d& d) const {
    return camera_to_device.linear().transpose() * d;
  }
};

/// Pinhole projection u = cx + fx x/z, v = cy + fy y/z. Applies the formula
/// for any |z| >= 1e-9, including points behind the camera.
Vector2d project(const CameraModel& camera, const Vector3d& p);

/// Ray from the camera center through a pixel, pointing into z > 0.
Rayd backproject(const CameraModel& camera, const Vector2d& pixel);

bool in_image(const CameraModel& camera, const Vector2d& pixel);

inline constexpr std::size_t kLedCount = 4;

/// Four IR LEDs, positions in the camera frame.
struct LedRig {
  std::array<Vector3d, kLedCount> positions;

  void validate() const;
};

enum class PupilMode {
  /// Pupil center placed on the corneal sphere, so lifting it back is exact.
  kConsistent,
  /// Pupil center inside the cornea at the physiological depth.
  kPhysiological,
};

struct Kappa {
  double horizontal = 0.0;  // radians
  double vertical = 0.0;    // radians
};

struct EyePhysiology {
  double cornea_radius = 7.8e-3;
  Vector3d eyeball_center = Vector3d(0.0, 0.0, 0.035);  // camera frame
  double cornea_offset = 5.3e-3;                        // eyeball center -> cornea center
  double pupil_offset = 4.2e-3;                         // cornea center -> pupil center
  PupilMode pupil_mode = PupilMode::kPhysiological;
  Kappa kappa{5.0 * EIGEN_PI / 180.0, 1.5 * EIGEN_PI / 180.0};

  /// Distance from cornea center to pupil center for the active mode.
  double effective_pupil_offset() const {
    return pupil_mode == PupilMode::kConsistent ? cornea_radius : pupil_offset;
  }

  void validate() const;
};

/// Per-frame eye state. Points and axes are in the camera frame.
struct EyePose {
  Vector3d optical_axis;
  Vector3d visual_axis;
  Vector3d cornea_center;
  Vector3d pupil_center;
  int fixation_iterations = 0;
};

/// Rotate an axis by kappa: first about the device vertical axis (+y) by the
/// horizontal component, then about the device horizontal axis (+x) so that
/// a positive vertical component tilts the axis upward. Both the input and
/// output live in the device frame.
Vector3d apply_kappa(const Vector3d& axis, const Kappa& kappa);
Vector3d remove_kappa(const Vector3d& axis, const Kappa& kappa);

struct GazeTarget {
  Vector3d position;  // device frame
  int id = 0;
  int plane = 0;
  int row = 0;
  int col = 0;
};

struct GridConfig {
  std::array<double, 6> plane_depths{0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  /// Angular half-extent of the 3x3 grid on planes with odd index.
  double half_extent_odd = 10.0 * EIGEN_PI / 180.0;
  /// Angular half-extent on planes with even index.
  double half_extent_even = 7.0 * EIGEN_PI / 180.0;
};

struct TargetGrid {
  std::vector<GazeTarget> targets;

  std::size_t size() const { return targets.size(); }
  /// The (row 1, col 1) target of a plane.
  const GazeTarget& center_of(int plane) const;
};

inline constexpr int kPlaneCount = 6;
inline constexpr int kTargetsPerPlane = 9;
inline constexpr int kTargetCount = kPlaneCount * kTargetsPerPlane;

/// Targets ordered plane-major, then row (top to bottom), then column (left
/// to right). Target id = plane * 9 + row * 3 + col.
TargetGrid make_target_grid(const GridConfig& config = {});

/// Eye pose whose visual axis passes through `target` (device frame). Solved
/// by fixed-point iteration on the optical axis.
EyePose fixate(const CameraModel& camera, const EyePhysiology& eye, const Vector3d& target);

struct RigConfig {
  double camera_distance = 0.035;  // eyeball center -> camera center
  double camera_pitch = 30.0 * EIGEN_PI / 180.0;
  double led_width = 0.040;
  double led_height = 0.030;
  double led_depth = 0.025;  // device z of the LED rectangle
};

struct Scene {
  CameraModel camera;
  LedRig leds;
  GridConfig grid;
};

/// Camera below the display axis, pitched up toward the eyeball center which
/// sits at the device origin; LEDs at the corners of a rectangle centered on
/// the device forward axis.
Scene make_scene(const RigConfig& rig = {}, const CameraModel& intrinsics = {},
                 const GridConfig& grid = {});

/// Default physiology for a scene built from `rig`: eyeball center at the
/// device origin, expressed in the camera frame.
EyePhysiology default_physiology(const Scene& scene);

}  // namespace glintgaze
