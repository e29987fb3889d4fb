#pragma once

// CSV dataset files, one row per frame:
//   subject_id,target_id,frame_id,target_x,target_y,target_z,
//   g0_u,g0_v,g0_present, ... g3_u,g3_v,g3_present,
//   pupil_u,pupil_v,pupil_present
// and with truth: cornea_x,cornea_y,cornea_z (camera frame),
//   optical_x,optical_y,optical_z,visual_x,visual_y,visual_z (device frame).
// Absent glints or pupil leave their u,v fields empty.

#include <iosfwd>
#include <vector>

#include "glintgaze/gaze_pipeline.hpp"

namespace glintgaze {

void write_dataset_csv(std::ostream& out, const Scene& scene, const SimDataset& dataset,
                       bool with_truth);

/// Reads the observation columns by header name; any truth columns are
/// ignored. Throws ParseError with the offending line number.
std::vector<FrameObservation> read_observations_csv(std::istream& in);

/// Result of running the geometric pipeline on one observation.
struct SolvedFrame {
  const FrameObservation* observation = nullptr;
  std::string status = "ok";
  FrameEstimate estimate;
};

std::vector<SolvedFrame> solve_observations(const Scene& scene,
                                            const std::vector<FrameObservation>& observations,
                                            const LiftOptions& options);

/// Columns: ids, status, cornea 2D (px), cornea 3D (device, m), iterations,
/// residual, converged, pupil 3D and optical axis (device).
void write_estimates_csv(std::ostream& out, const std::vector<SolvedFrame>& frames);

}  // namespace glintgaze
