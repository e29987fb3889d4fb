#include "glintgaze/scene_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace glintgaze {

namespace {

constexpr double kDeg = EIGEN_PI / 180.0;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || !std::isfinite(v)) {
    throw GazeError(ErrorCode::kInvalidConfig, key + ": '" + value + "' is not a number");
  }
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_number(key, value);
  if (v != std::floor(v)) throw GazeError(ErrorCode::kInvalidConfig, key + " must be an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw GazeError(ErrorCode::kInvalidConfig, key + " must be true or false");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(SceneConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"camera.fx", [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.fx = to_number(k, v); }},
      {"camera.fy", [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.fy = to_number(k, v); }},
      {"camera.cx", [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.cx = to_number(k, v); }},
      {"camera.cy", [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.cy = to_number(k, v); }},
      {"camera.width", [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.width = to_int(k, v); }},
      {"camera.height",
       [](SceneConfig& c, auto& k, auto& v) { c.intrinsics.height = to_int(k, v); }},
      {"rig.camera_distance",
       [](SceneConfig& c, auto& k, auto& v) { c.rig.camera_distance = to_number(k, v); }},
      {"rig.camera_pitch_deg",
       [](SceneConfig& c, auto& k, auto& v) { c.rig.camera_pitch = to_number(k, v) * kDeg; }},
      {"rig.led_width", [](SceneConfig& c, auto& k, auto& v) { c.rig.led_width = to_number(k, v); }},
      {"rig.led_height",
       [](SceneConfig& c, auto& k, auto& v) { c.rig.led_height = to_number(k, v); }},
      {"rig.led_depth", [](SceneConfig& c, auto& k, auto& v) { c.rig.led_depth = to_number(k, v); }},
      {"eye.cornea_radius",
       [](SceneConfig& c, auto& k, auto& v) { c.eye.cornea_radius = to_number(k, v); }},
      {"eye.cornea_offset",
       [](SceneConfig& c, auto& k, auto& v) { c.eye.cornea_offset = to_number(k, v); }},
      {"eye.pupil_offset",
       [](SceneConfig& c, auto& k, auto& v) { c.eye.pupil_offset = to_number(k, v); }},
      {"eye.pupil_mode",
       [](SceneConfig& c, auto&, auto& v) { c.eye.pupil_mode = parse_pupil_mode(v); }},
      {"eye.kappa_h_deg",
       [](SceneConfig& c, auto& k, auto& v) { c.eye.kappa.horizontal = to_number(k, v) * kDeg; }},
      {"eye.kappa_v_deg",
       [](SceneConfig& c, auto& k, auto& v) { c.eye.kappa.vertical = to_number(k, v) * kDeg; }},
      {"grid.plane_depths",
       [](SceneConfig& c, auto& k, auto& v) {
         std::stringstream ss(v);
         std::string item;
         std::size_t i = 0;
         while (std::getline(ss, item, ',')) {
           if (i >= c.grid.plane_depths.size()) {
             throw GazeError(ErrorCode::kInvalidConfig, k + " needs exactly 6 depths");
           }
           c.grid.plane_depths[i++] = to_number(k, trim(item));
         }
         if (i != c.grid.plane_depths.size()) {
           throw GazeError(ErrorCode::kInvalidConfig, k + " needs exactly 6 depths");
         }
       }},
      {"grid.half_extent_odd_deg",
       [](SceneConfig& c, auto& k, auto& v) { c.grid.half_extent_odd = to_number(k, v) * kDeg; }},
      {"grid.half_extent_even_deg",
       [](SceneConfig& c, auto& k, auto& v) { c.grid.half_extent_even = to_number(k, v) * kDeg; }},
      {"solver.cornea_radius",
       [](SceneConfig& c, auto& k, auto& v) { c.lift.cornea_radius = to_number(k, v); }},
      {"solver.init_distance",
       [](SceneConfig& c, auto& k, auto& v) { c.lift.init_distance = to_number(k, v); }},
      {"solver.polish_3d",
       [](SceneConfig& c, auto& k, auto& v) { c.lift.polish_3d = to_bool(k, v); }},
  };
  return table;
}

}  // namespace

PupilMode parse_pupil_mode(const std::string& name) {
  if (name == "consistent") return PupilMode::kConsistent;
  if (name == "physiological") return PupilMode::kPhysiological;
  throw GazeError(ErrorCode::kInvalidConfig, "unknown pupil mode '" + name + "'");
}

std::string to_string(PupilMode mode) {
  return mode == PupilMode::kConsistent ? "consistent" : "physiological";
}

Scene SceneConfig::scene() const { return make_scene(rig, intrinsics, grid); }

EyePhysiology SceneConfig::physiology(const Scene& s) const {
  EyePhysiology out = eye;
  out.eyeball_center = s.camera.to_camera(Vector3d::Zero());
  out.validate();
  return out;
}

SceneConfig parse_scene_config(std::istream& in) {
  SceneConfig config;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw GazeError(ErrorCode::kInvalidConfig,
                      "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw GazeError(ErrorCode::kInvalidConfig,
                      "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw GazeError(ErrorCode::kInvalidConfig,
                      "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    it->second(config, key, value);
  }
  config.intrinsics.validate();
  return config;
}

SceneConfig load_scene_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GazeError(ErrorCode::kInvalidConfig, "cannot open config '" + path + "'");
  return parse_scene_config(in);
}

void write_scene_config(std::ostream& out, const SceneConfig& c) {
  out << "camera.fx = " << fmt(c.intrinsics.fx) << '\n'
      << "camera.fy = " << fmt(c.intrinsics.fy) << '\n'
      << "camera.cx = " << fmt(c.intrinsics.cx) << '\n'
      << "camera.cy = " << fmt(c.intrinsics.cy) << '\n'
      << "camera.width = " << c.intrinsics.width << '\n'
      << "camera.height = " << c.intrinsics.height << '\n'
      << "rig.camera_distance = " << fmt(c.rig.camera_distance) << '\n'
      << "rig.camera_pitch_deg = " << fmt(c.rig.camera_pitch / kDeg) << '\n'
      << "rig.led_width = " << fmt(c.rig.led_width) << '\n'
      << "rig.led_height = " << fmt(c.rig.led_height) << '\n'
      << "rig.led_depth = " << fmt(c.rig.led_depth) << '\n'
      << "eye.cornea_radius = " << fmt(c.eye.cornea_radius) << '\n'
      << "eye.cornea_offset = " << fmt(c.eye.cornea_offset) << '\n'
      << "eye.pupil_offset = " << fmt(c.eye.pupil_offset) << '\n'
      << "eye.pupil_mode = " << to_string(c.eye.pupil_mode) << '\n'
      << "eye.kappa_h_deg = " << fmt(c.eye.kappa.horizontal / kDeg) << '\n'
      << "eye.kappa_v_deg = " << fmt(c.eye.kappa.vertical / kDeg) << '\n'
      << "grid.plane_depths = ";
  for (std::size_t i = 0; i < c.grid.plane_depths.size(); ++i) {
    out << (i ? ", " : "") << fmt(c.grid.plane_depths[i]);
  }
  out << '\n'
      << "grid.half_extent_odd_deg = " << fmt(c.grid.half_extent_odd / kDeg) << '\n'
      << "grid.half_extent_even_deg = " << fmt(c.grid.half_extent_even / kDeg) << '\n'
      << "solver.cornea_radius = " << fmt(c.lift.cornea_radius) << '\n'
      << "solver.init_distance = " << fmt(c.lift.init_distance) << '\n'
      << "solver.polish_3d = " << (c.lift.polish_3d ? "true" : "false") << '\n';
}

}  // namespace glintgaze
