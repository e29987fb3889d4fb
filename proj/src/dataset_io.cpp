#include "glintgaze/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <istream>
#include <sstream>

namespace glintgaze {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw GazeError(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + what);
}

struct Row {
  const std::vector<std::string>& cells;
  const std::map<std::string, std::size_t>& index;
  int line_no;

  const std::string& raw(const std::string& name) const { return cells[index.at(name)]; }

  double number(const std::string& name) const {
    const std::string& s = raw(name);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') parse_fail(line_no, name + ": bad number '" + s + "'");
    return v;
  }

  int integer(const std::string& name) const {
    const std::string& s = raw(name);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') parse_fail(line_no, name + ": bad integer '" + s + "'");
    return static_cast<int>(v);
  }

  std::optional<Vector2d> point(const std::string& prefix) const {
    const std::string& flag = raw(prefix + "_present");
    if (flag == "0") return std::nullopt;
    if (flag != "1") parse_fail(line_no, prefix + "_present must be 0 or 1");
    return Vector2d(number(prefix + "_u"), number(prefix + "_v"));
  }
};

std::vector<std::string> observation_columns() {
  std::vector<std::string> cols{"subject_id", "target_id", "frame_id",
                                "target_x",   "target_y",  "target_z"};
  for (std::size_t i = 0; i < kLedCount; ++i) {
    const std::string g = "g" + std::to_string(i);
    cols.insert(cols.end(), {g + "_u", g + "_v", g + "_present"});
  }
  cols.insert(cols.end(), {"pupil_u", "pupil_v", "pupil_present"});
  return cols;
}

void write_point(std::ostream& out, const std::optional<Vector2d>& p) {
  if (p) {
    out << ',' << num(p->x()) << ',' << num(p->y()) << ",1";
  } else {
    out << ",,,0";
  }
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Scene& scene, const SimDataset& dataset,
                       bool with_truth) {
  const auto cols = observation_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  if (with_truth) {
    out << ",cornea_x,cornea_y,cornea_z,optical_x,optical_y,optical_z,visual_x,visual_y,visual_z";
  }
  out << '\n';
  for (const auto& rec : dataset.records) {
    const auto& o = rec.observation;
    out << o.subject_id << ',' << o.target_id << ',' << o.frame_id << ',' << num(o.target.x())
        << ',' << num(o.target.y()) << ',' << num(o.target.z());
    for (const auto& g : o.glints) write_point(out, g);
    write_point(out, o.pupil);
    if (with_truth) {
      const auto& pose = rec.truth.pose;
      const Vector3d optical = scene.camera.to_device_direction(pose.optical_axis);
      const Vector3d visual = scene.camera.to_device_direction(pose.visual_axis);
      for (const Vector3d* v : {&pose.cornea_center, &optical, &visual}) {
        out << ',' << num(v->x()) << ',' << num(v->y()) << ',' << num(v->z());
      }
    }
    out << '\n';
  }
}

std::vector<FrameObservation> read_observations_csv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) parse_fail(line_no, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::map<std::string, std::size_t> index;
  const auto header = split(line);
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const auto& c : observation_columns()) {
    if (!index.count(c)) parse_fail(line_no, "missing column '" + c + "'");
  }

  std::vector<FrameObservation> obs;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      parse_fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(cells.size()));
    }
    const Row row{cells, index, line_no};
    FrameObservation o;
    o.subject_id = row.integer("subject_id");
    o.target_id = row.integer("target_id");
    o.frame_id = row.integer("frame_id");
    o.target = Vector3d(row.number("target_x"), row.number("target_y"), row.number("target_z"));
    for (std::size_t i = 0; i < kLedCount; ++i) o.glints[i] = row.point("g" + std::to_string(i));
    o.pupil = row.point("pupil");
    obs.push_back(o);
  }
  return obs;
}

std::vector<SolvedFrame> solve_observations(const Scene& scene,
                                            const std::vector<FrameObservation>& observations,
                                            const LiftOptions& options) {
  std::vector<SolvedFrame> out;
  out.reserve(observations.size());
  for (const auto& o : observations) {
    SolvedFrame s;
    s.observation = &o;
    try {
      s.estimate = estimate_frame(scene, o, options);
    } catch (const GazeError& e) {
      s.status = to_string(e.code());
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_estimates_csv(std::ostream& out, const std::vector<SolvedFrame>& frames) {
  out << "subject_id,target_id,frame_id,status,cornea2d_u,cornea2d_v,cornea_x,cornea_y,cornea_z,"
         "iterations,residual_m,converged,pupil_x,pupil_y,pupil_z,optical_x,optical_y,optical_z\n";
  for (const auto& f : frames) {
    const auto& o = *f.observation;
    out << o.subject_id << ',' << o.target_id << ',' << o.frame_id << ',' << f.status;
    if (f.status != "ok") {
      out << std::string(14, ',') << '\n';
      continue;
    }
    const auto& c = f.estimate.cornea;
    const auto& a = f.estimate.axis;
    out << ',' << num(c.cornea_2d.x()) << ',' << num(c.cornea_2d.y());
    for (int i = 0; i < 3; ++i) out << ',' << num(a.cornea_3d[i]);
    out << ',' << c.iterations << ',' << num(c.final_residual) << ',' << (c.converged ? 1 : 0);
    for (int i = 0; i < 3; ++i) out << ',' << num(a.pupil_3d[i]);
    for (int i = 0; i < 3; ++i) out << ',' << num(a.optical_axis[i]);
    out << '\n';
  }
}

}  // namespace glintgaze
