#pragma once

#include <span>

#include "glintgaze/cornea_solver.hpp"

namespace glintgaze {

/// Optical axis estimate in the device frame.
struct OpticalAxisEstimate {
  Vector3d cornea_3d;
  Vector3d pupil_3d;
  Vector3d optical_axis;
};

/// Gaze parameterization frame: angles are measured from `reference_dir`
/// with the device +y axis as "up".
struct GazeFrameSpec {
  Vector3d origin = Vector3d::Zero();
  Vector3d reference_dir = Vector3d::UnitZ();
};

/// Horizontal (azimuth) and vertical (elevation) angles in radians.
struct GazeAngles {
  double horizontal = 0.0;
  double vertical = 0.0;
};

inline constexpr double kArcminPerRadian = 180.0 * 60.0 / EIGEN_PI;

inline double to_arcmin(double radians) { return radians * kArcminPerRadian; }
inline double from_arcmin(double arcmin) { return arcmin / kArcminPerRadian; }

/// Nearer intersection of the pupil pixel's camera ray with the corneal
/// sphere (camera frame).
Vector3d lift_pupil_3d(const CameraModel& camera, const Vector2d& pupil_2d,
                       const Sphered& cornea);

/// Axis from cornea center through pupil center, transformed to the device
/// frame. Inputs are camera-frame points.
OpticalAxisEstimate optical_axis(const Vector3d& cornea_3d, const Vector3d& pupil_3d,
                                 const CameraModel& camera);

/// Origin = mean of the cornea positions; reference direction from that
/// origin toward `central_target` (device frame).
GazeFrameSpec gaze_origin(std::span<const Vector3d> cornea_positions,
                          const Vector3d& central_target);

GazeAngles to_angles(const Vector3d& dir, const GazeFrameSpec& frame);
Vector3d from_angles(const GazeAngles& angles, const GazeFrameSpec& frame);

struct FrameEstimate {
  CorneaEstimate cornea;
  OpticalAxisEstimate axis;
};

/// Observation -> cornea 2D -> cornea 3D -> pupil 3D -> optical axis.
FrameEstimate estimate_frame(const Scene& scene, const FrameObservation& obs,
                             const LiftOptions& options = {});

}  // namespace glintgaze
