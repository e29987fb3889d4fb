#pragma once

// Scene configuration file: one "key = value" pair per line, '#' starts a
// comment. Lengths are in meters and angles in degrees. Unknown or repeated
// keys are rejected. Recognized keys and defaults:
//
//   camera.fx = 600              camera.fy = 600
//   camera.cx = 320              camera.cy = 240
//   camera.width = 640           camera.height = 480
//   rig.camera_distance = 0.035  rig.camera_pitch_deg = 30
//   rig.led_width = 0.040        rig.led_height = 0.030
//   rig.led_depth = 0.025
//   eye.cornea_radius = 0.0078   eye.cornea_offset = 0.0053
//   eye.pupil_offset = 0.0042    eye.pupil_mode = physiological
//   eye.kappa_h_deg = 5          eye.kappa_v_deg = 1.5
//   grid.plane_depths = 0.5, 0.75, 1.0, 1.5, 2.0, 3.0
//   grid.half_extent_odd_deg = 10
//   grid.half_extent_even_deg = 7
//   solver.cornea_radius = 0.0078
//   solver.init_distance = 0.035
//   solver.polish_3d = false

#include <iosfwd>
#include <string>

#include "glintgaze/cornea_solver.hpp"

namespace glintgaze {

struct SceneConfig {
  RigConfig rig;
  CameraModel intrinsics;
  GridConfig grid;
  EyePhysiology eye;  // eyeball center is derived from the rig
  LiftOptions lift;

  Scene scene() const;
  /// `eye` with its eyeball center placed at the device origin of `scene`.
  EyePhysiology physiology(const Scene& scene) const;
};

SceneConfig parse_scene_config(std::istream& in);
SceneConfig load_scene_config(const std::string& path);
void write_scene_config(std::ostream& out, const SceneConfig& config);

PupilMode parse_pupil_mode(const std::string& name);
std::string to_string(PupilMode mode);

}  // namespace glintgaze
