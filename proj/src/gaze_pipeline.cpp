#include "glintgaze/gaze_pipeline.hpp"

#include <cmath>
#include <string>

namespace glintgaze {

Vector3d lift_pupil_3d(const CameraModel& camera, const Vector2d& pupil_2d,
                       const Sphered& cornea) {
  const Rayd ray = backproject(camera, pupil_2d);
  const auto t = ray_sphere_intersect(ray, cornea);
  if (!t) throw GazeError(ErrorCode::kPupilRayMiss, "pupil ray misses the corneal sphere");
  return ray.at(*t);
}

OpticalAxisEstimate optical_axis(const Vector3d& cornea_3d, const Vector3d& pupil_3d,
                                 const CameraModel& camera) {
  if (!((pupil_3d - cornea_3d).norm() > 1e-9)) {
    throw GazeError(ErrorCode::kDegenerateAxis, "pupil and cornea centers coincide");
  }
  OpticalAxisEstimate out;
  out.cornea_3d = camera.to_device(cornea_3d);
  out.pupil_3d = camera.to_device(pupil_3d);
  out.optical_axis = (out.pupil_3d - out.cornea_3d).normalized();
  return out;
}

GazeFrameSpec gaze_origin(std::span<const Vector3d> cornea_positions,
                          const Vector3d& central_target) {
  if (cornea_positions.empty()) {
    throw GazeError(ErrorCode::kEmptyInput, "no cornea positions for the gaze origin");
  }
  Vector3d sum = Vector3d::Zero();
  for (const auto& c : cornea_positions) sum += c;
  GazeFrameSpec frame;
  frame.origin = sum / static_cast<double>(cornea_positions.size());
  const Vector3d toward = central_target - frame.origin;
  if (!(toward.norm() > 0.0)) {
    throw GazeError(ErrorCode::kDegenerateAxis, "central target coincides with the origin");
  }
  frame.reference_dir = toward.normalized();
  return frame;
}

namespace {

constexpr double kGimbalTolerance = 1e-6;

struct Basis {
  Vector3d right;
  Vector3d up;
  Vector3d forward;
};

Basis basis_of(const GazeFrameSpec& frame) {
  Basis b;
  b.forward = frame.reference_dir.normalized();
  const Vector3d right = Vector3d::UnitY().cross(b.forward);
  if (right.norm() < std::sin(kGimbalTolerance)) {
    throw GazeError(ErrorCode::kGimbalDegenerate, "reference direction is vertical");
  }
  b.right = right.normalized();
  b.up = b.forward.cross(b.right);
  return b;
}

}  // namespace

GazeAngles to_angles(const Vector3d& dir, const GazeFrameSpec& frame) {
  const Basis b = basis_of(frame);
  const double x = dir.dot(b.right);
  const double y = dir.dot(b.up);
  const double z = dir.dot(b.forward);
  const double horizontal_norm = std::hypot(x, z);
  if (std::atan2(horizontal_norm, std::abs(y)) < kGimbalTolerance) {
    throw GazeError(ErrorCode::kGimbalDegenerate, "direction is (anti)parallel to vertical");
  }
  return {std::atan2(x, z), std::atan2(y, horizontal_norm)};
}

Vector3d from_angles(const GazeAngles& angles, const GazeFrameSpec& frame) {
  const Basis b = basis_of(frame);
  const double cv = std::cos(angles.vertical);
  return cv * std::sin(angles.horizontal) * b.right + std::sin(angles.vertical) * b.up +
         cv * std::cos(angles.horizontal) * b.forward;
}

FrameEstimate estimate_frame(const Scene& scene, const FrameObservation& obs,
                             const LiftOptions& options) {
  FrameEstimate out;
  out.cornea = lift_cornea_3d(scene.camera, scene.leds, obs, options);
  if (!obs.pupil) {
    throw GazeError(ErrorCode::kPupilAbsent,
                    "frame " + std::to_string(obs.frame_id) + " of target " +
                        std::to_string(obs.target_id) + " has no pupil");
  }
  const Vector3d pupil = lift_pupil_3d(
      scene.camera, *obs.pupil, Sphered{out.cornea.cornea_3d, options.cornea_radius});
  out.axis = optical_axis(out.cornea.cornea_3d, pupil, scene.camera);
  return out;
}

}  // namespace glintgaze
