#pragma once

// Cornea center estimation from labelled glints.
//
// Cornea 2D: each LED projection l_i and its glint g_i span an image line
// through the projection of the cornea center, because L_i, G_i, the camera
// center and the cornea center are coplanar. The image point closest to all
// lines (in the least-squares sense) is the cornea 2D estimate.
//
// Cornea 3D: the cornea center lies on the back-projected cornea 2D ray. At a
// hypothesized distance along that ray, every glint ray is intersected with
// the corneal sphere and reflected about the surface normal; at the true
// distance the reflected rays pass through their LEDs.

#include <vector>

#include "glintgaze/simulator.hpp"

namespace glintgaze {

struct CorneaEstimate {
  Vector2d cornea_2d = Vector2d::Zero();
  Vector3d cornea_3d = Vector3d::Zero();  // camera frame
  int iterations = 0;
  double final_residual = 0.0;  // meters
  std::vector<std::size_t> used_glints;
  bool converged = true;
};

inline constexpr int kMaxLiftIterations = 100;

struct LiftOptions {
  double cornea_radius = 7.8e-3;
  double init_distance = 0.035;
  double min_distance = 0.005;
  double max_distance = 0.200;
  /// Residual level below which hitting the iteration cap still counts as
  /// converged (the cap is reported when the residual exceeds 10x this).
  double noise_floor = 1e-6;
  /// Refine the 1D result with an unconstrained 3D descent on the same loss.
  bool polish_3d = false;
};

/// One line per present glint, from the LED projection to the glint, in
/// glint-index order.
std::vector<Line2d> led_glint_lines(const CameraModel& camera, const LedRig& leds,
                                    const FrameObservation& obs);

/// Mean perpendicular distance from `p` to the lines.
double cornea_line_loss(const Vector2d& p, std::span<const Line2d> lines);

Vector2d solve_cornea_2d(const CameraModel& camera, const LedRig& leds,
                         const FrameObservation& obs);

/// Mean distance between each LED and the reflected ray of its glint for a
/// cornea hypothesis (camera frame). Glint rays that miss the hypothesized
/// sphere contribute their miss distance plus the radius.
double reflection_residual(const Vector3d& cornea_3d, const CameraModel& camera,
                           const LedRig& leds, const FrameObservation& obs, double radius);

/// Gradient descent on the distance along the cornea 2D ray. Never exceeds
/// kMaxLiftIterations; `converged` is false when the cap is hit with a
/// residual above 10x the noise floor.
CorneaEstimate lift_cornea_3d(const CameraModel& camera, const LedRig& leds,
                              const FrameObservation& obs, const LiftOptions& options = {});

}  // namespace glintgaze
