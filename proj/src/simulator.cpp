#include "glintgaze/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace glintgaze {

namespace {

constexpr double kCollinearAngle = 1e-9;
constexpr int kBisectionSteps = 80;

}  // namespace

GlintPoint solve_glint_point(const Vector3d& camera_center, const Vector3d& led,
                             const Sphered& cornea) {
  const Vector3d to_camera = camera_center - cornea.center;
  const Vector3d to_led = led - cornea.center;
  if (!(to_camera.norm() > cornea.radius) || !(to_led.norm() > cornea.radius)) {
    throw GazeError(ErrorCode::kInsideSphere, "camera or LED inside the corneal sphere");
  }
  const Vector3d u = to_camera.normalized();
  const Vector3d w = to_led.normalized();
  const double arc = angle_between(u, w);
  if (arc < kCollinearAngle || arc > EIGEN_PI - kCollinearAngle) {
    return {cornea.center + cornea.radius * u, true};
  }
  // In-plane unit vector orthogonal to u, on the LED side.
  const Vector3d e = (w - w.dot(u) * u).normalized();

  auto point_at = [&](double theta) {
    return Vector3d(cornea.center + cornea.radius * (std::cos(theta) * u + std::sin(theta) * e));
  };
  // Positive once the normal has turned past the bisector of the directions
  // to the camera and to the LED.
  auto imbalance = [&](double theta) {
    const Vector3d n = std::cos(theta) * u + std::sin(theta) * e;
    const Vector3d g = cornea.center + cornea.radius * n;
    return n.dot((led - g).normalized()) - n.dot((camera_center - g).normalized());
  };

  double lo = 1e-9;
  double hi = arc;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (imbalance(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {point_at(0.5 * (lo + hi)), false};
}

double reflection_law_residual(const Vector3d& camera_center, const Vector3d& led,
                               const Sphered& cornea, const Vector3d& point) {
  const Vector3d n = (point - cornea.center).normalized();
  const Vector3d incoming = (point - led).normalized();
  return (reflect_direction(incoming, n) - (camera_center - point).normalized()).norm();
}

void NoiseModel::validate() const {
  if (!(glint_sigma >= 0.0 && pupil_sigma >= 0.0)) {
    throw GazeError(ErrorCode::kInvalidConfig, "noise sigmas must be non-negative");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw GazeError(ErrorCode::kInvalidConfig, "dropout probability must lie in [0, 1]");
  }
}

std::size_t FrameObservation::present_glint_count() const {
  std::size_t n = 0;
  for (const auto& g : glints) n += g.has_value() ? 1 : 0;
  return n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t frame_seed(std::uint64_t base, int subject, int target, int frame) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(subject));
  h = splitmix64(h ^ static_cast<std::uint64_t>(target));
  return splitmix64(h ^ static_cast<std::uint64_t>(frame));
}

FrameRecord render_frame(const Scene& scene, const EyePhysiology& eye, const GazeTarget& target,
                         const NoiseModel& noise, std::mt19937_64& rng) {
  noise.validate();
  FrameRecord record;
  record.observation.target_id = target.id;
  record.observation.target = target.position;

  FrameTruth& truth = record.truth;
  truth.pose = fixate(scene.camera, eye, target.position);
  const Sphered cornea{truth.pose.cornea_center, eye.cornea_radius};
  const Vector3d camera_center = Vector3d::Zero();

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Every draw happens unconditionally so the stream layout does not depend
  // on visibility.
  for (std::size_t i = 0; i < kLedCount; ++i) {
    const GlintPoint glint = solve_glint_point(camera_center, scene.leds.positions[i], cornea);
    const Vector3d normal = (glint.point - cornea.center).normalized();
    truth.reflection_points[i] = glint.point;
    truth.glints[i] = project(scene.camera, glint.point);
    truth.glint_visible[i] =
        !glint.collinear && (camera_center - glint.point).normalized().dot(normal) > 0.0;

    const double du = gauss(rng) * noise.glint_sigma;
    const double dv = gauss(rng) * noise.glint_sigma;
    const bool dropped = uniform(rng) < noise.dropout_prob;
    const Vector2d observed = truth.glints[i] + Vector2d(du, dv);
    if (truth.glint_visible[i] && in_image(scene.camera, observed) && !dropped) {
      record.observation.glints[i] = observed;
    }
  }

  truth.pupil = project(scene.camera, truth.pose.pupil_center);
  const double du = gauss(rng) * noise.pupil_sigma;
  const double dv = gauss(rng) * noise.pupil_sigma;
  const Vector2d pupil = truth.pupil + Vector2d(du, dv);
  if (in_image(scene.camera, pupil)) record.observation.pupil = pupil;
  return record;
}

FrameRecord render_frame(const Scene& scene, const EyePhysiology& eye, const GazeTarget& target,
                         const NoiseModel& noise, int subject_id, int frame_id) {
  std::mt19937_64 rng(frame_seed(noise.seed, subject_id, target.id, frame_id));
  FrameRecord record = render_frame(scene, eye, target, noise, rng);
  record.observation.subject_id = subject_id;
  record.observation.frame_id = frame_id;
  return record;
}

SimDataset generate_dataset(const Scene& scene, const std::vector<EyePhysiology>& subjects,
                            const TargetGrid& grid, int frames_per_target,
                            const NoiseModel& noise) {
  if (frames_per_target < 1) {
    throw GazeError(ErrorCode::kInvalidConfig, "frames_per_target must be >= 1");
  }
  SimDataset dataset;
  dataset.records.reserve(subjects.size() * grid.size() *
                          static_cast<std::size_t>(frames_per_target));
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (const auto& target : grid.targets) {
      for (int f = 0; f < frames_per_target; ++f) {
        dataset.records.push_back(
            render_frame(scene, subjects[s], target, noise, static_cast<int>(s), f));
      }
    }
  }
  return dataset;
}

std::vector<EyePhysiology> make_subjects(const EyePhysiology& base, int count,
                                         std::uint64_t seed) {
  std::vector<EyePhysiology> subjects;
  if (count <= 0) return subjects;
  subjects.push_back(base);
  std::mt19937_64 rng(splitmix64(seed ^ 0x5eedULL));
  std::uniform_real_distribution<double> kappa_jitter(-2.0 * EIGEN_PI / 180.0,
                                                      2.0 * EIGEN_PI / 180.0);
  std::uniform_real_distribution<double> radius_jitter(-0.3e-3, 0.3e-3);
  for (int i = 1; i < count; ++i) {
    EyePhysiology eye = base;
    eye.kappa.horizontal += kappa_jitter(rng);
    eye.kappa.vertical += 0.5 * kappa_jitter(rng);
    eye.cornea_radius += radius_jitter(rng);
    if (eye.pupil_mode == PupilMode::kPhysiological) {
      eye.pupil_offset = std::min(eye.pupil_offset, eye.cornea_radius);
    }
    subjects.push_back(eye);
  }
  return subjects;
}

}  // namespace glintgaze
