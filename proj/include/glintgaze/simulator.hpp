#pragma once

// Forward model: renders glint and pupil pixels of a synthetic eye together
// with the hidden ground truth that produced them.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "glintgaze/scene.hpp"

namespace glintgaze {

struct GlintPoint {
  Vector3d point;
  /// Camera, LED and cornea center are collinear; the reflection plane is
  /// undefined and `point` is the sphere point facing the camera.
  bool collinear = false;
};

/// Specular reflection point on a sphere for a point light at `led` seen
/// from `camera_center`. Bisection on the arc between the sphere points
/// facing the camera and the LED.
GlintPoint solve_glint_point(const Vector3d& camera_center, const Vector3d& led,
                             const Sphered& cornea);

/// |reflect(normalize(G - L), n) - normalize(O - G)| for a point G on the
/// sphere.
double reflection_law_residual(const Vector3d& camera_center, const Vector3d& led,
                               const Sphered& cornea, const Vector3d& point);

struct NoiseModel {
  double glint_sigma = 0.0;  // px
  double pupil_sigma = 0.0;  // px
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameObservation {
  int subject_id = 0;
  int target_id = 0;
  int frame_id = 0;
  Vector3d target = Vector3d::Zero();  // device frame
  /// Absent glints carry no coordinates.
  std::array<std::optional<Vector2d>, kLedCount> glints;
  std::optional<Vector2d> pupil;

  std::size_t present_glint_count() const;
};

struct FrameTruth {
  EyePose pose;  // camera frame
  std::array<Vector3d, kLedCount> reflection_points;
  std::array<Vector2d, kLedCount> glints;  // noiseless
  std::array<bool, kLedCount> glint_visible{};
  Vector2d pupil = Vector2d::Zero();  // noiseless
};

struct FrameRecord {
  FrameObservation observation;
  FrameTruth truth;
};

/// Deterministic 64-bit seed for one frame, independent of generation order.
std::uint64_t frame_seed(std::uint64_t base, int subject, int target, int frame);

FrameRecord render_frame(const Scene& scene, const EyePhysiology& eye, const GazeTarget& target,
                         const NoiseModel& noise, std::mt19937_64& rng);

/// Renders with the frame's derived seed.
FrameRecord render_frame(const Scene& scene, const EyePhysiology& eye, const GazeTarget& target,
                         const NoiseModel& noise, int subject_id, int frame_id);

struct SimDataset {
  std::vector<FrameRecord> records;
};

/// Records ordered subject-major, then target id, then frame id.
SimDataset generate_dataset(const Scene& scene, const std::vector<EyePhysiology>& subjects,
                            const TargetGrid& grid, int frames_per_target,
                            const NoiseModel& noise);

/// `count` subjects: subject 0 is `base`, the rest get deterministic kappa
/// and cornea-radius variations derived from `seed`.
std::vector<EyePhysiology> make_subjects(const EyePhysiology& base, int count,
                                         std::uint64_t seed);

}  // namespace glintgaze
