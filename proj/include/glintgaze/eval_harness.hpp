#pragma once

// Calibrate-on-one-plane / test-on-the-rest evaluation with arcmin error
// statistics.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "glintgaze/gaze_mapper.hpp"

namespace glintgaze {

/// Angle between two unit directions in arcmin.
double angular_error_arcmin(const Vector3d& estimated, const Vector3d& truth);

/// Euclidean pixel distance.
double pixel_error(const Vector2d& estimated, const Vector2d& truth);

struct ErrorSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
};

/// Quantiles use linear interpolation between order statistics at
/// position q (n - 1). A single value has std 0.
ErrorSummary summarize(std::vector<double> errors);

/// Linear-interpolation quantile of an already sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q);

/// One table row in Mean / Std / Q1 / Q2 / Q3 order with two decimals:
/// "| label | description | 179.53 | 135.81 | 80.29 | 136.64 | 241.85 |".
std::string format_report_row(const std::string& label, const std::string& description,
                              const ErrorSummary& summary);
std::string format_report_header();

enum class MapperKind { kNone, kPoly, kDense };

std::string to_string(MapperKind kind);
MapperKind parse_mapper_kind(const std::string& name);

struct ProtocolConfig {
  int calibration_plane = 1;
  int frames_per_target = 1;
  NoiseModel noise;  // its seed is replaced by `seed`
  MapperKind mapper = MapperKind::kDense;
  std::uint64_t seed = 0;
  /// Test origin = calibration origin instead of the mean test cornea.
  bool reuse_calibration_origin = false;
  /// Average errors per target before computing statistics.
  bool per_target = false;
  TrainHyper train;
  LiftOptions lift;

  void validate() const;
};

struct FrameResult {
  int subject_id = 0;
  int target_id = 0;
  int frame_id = 0;
  int plane = 0;
  bool calibration = false;
  std::string status = "ok";
  double error_arcmin = 0.0;  // test frames with status ok only
  Vector3d cornea_device = Vector3d::Zero();
  Vector3d optical_axis = Vector3d::Zero();
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

struct ProtocolResult {
  ErrorSummary summary;
  std::vector<FrameResult> frames;
  std::size_t test_frames = 0;
  std::size_t evaluated = 0;
  std::size_t dropped = 0;
  std::size_t calibration_frames_used = 0;
  GazeFrameSpec calibration_frame;
  GazeFrameSpec test_frame;
  std::optional<GazeMapper> mapper;
};

/// Fits a mapper on the calibration frames of an already estimated frame set.
/// Throws InsufficientCalibration when the chosen scheme lacks data.
std::optional<GazeMapper> calibrate_mapper(MapperKind kind, const CalibrationSet& cal,
                                           std::size_t distinct_targets,
                                           const GazeFrameSpec& frame, const TrainHyper& train,
                                           std::uint64_t seed);

ProtocolResult run_protocol(const Scene& scene, const EyePhysiology& eye,
                            const ProtocolConfig& config);

/// Per-frame rows followed by '#'-prefixed summary lines.
void write_metrics_csv(std::ostream& out, const ProtocolResult& result);

struct SweepRow {
  double sigma = 0.0;
  ErrorSummary summary;  // pooled over all seeds
  double mean_of_seed_means = 0.0;
  std::size_t dropped = 0;
};

/// One row per sigma (applied to glints and pupil). Seeds base, base+1, ...,
/// base+seeds-1 are shared by every sigma.
std::vector<SweepRow> noise_sweep(const Scene& scene, const EyePhysiology& eye,
                                  const std::vector<double>& sigmas,
                                  const ProtocolConfig& config, int seeds = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace glintgaze
