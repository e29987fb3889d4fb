#include "glintgaze/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace glintgaze {

double angular_error_arcmin(const Vector3d& estimated, const Vector3d& truth) {
  const double c = std::clamp(estimated.dot(truth), -1.0, 1.0);
  return std::acos(c) * (180.0 / EIGEN_PI) * 60.0;
}

double pixel_error(const Vector2d& estimated, const Vector2d& truth) {
  return (estimated - truth).norm();
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw GazeError(ErrorCode::kEmptyInput, "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorSummary summarize(std::vector<double> errors) {
  if (errors.empty()) throw GazeError(ErrorCode::kEmptyInput, "no errors to summarize");
  ErrorSummary s;
  s.n = errors.size();
  s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double e : errors) ss += (e - s.mean) * (e - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  std::sort(errors.begin(), errors.end());
  s.q1 = sorted_quantile(errors, 0.25);
  s.q2 = sorted_quantile(errors, 0.50);
  s.q3 = sorted_quantile(errors, 0.75);
  return s;
}

std::string format_report_header() {
  return "| Model | Description | Mean AE | Std AE | Q1 AE | Q2 AE | Q3 AE |";
}

std::string format_report_row(const std::string& label, const std::string& description,
                              const ErrorSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "| %s | %s | %.2f | %.2f | %.2f | %.2f | %.2f |",
                label.c_str(), description.c_str(), s.mean, s.std, s.q1, s.q2, s.q3);
  return buf;
}

std::string to_string(MapperKind kind) {
  switch (kind) {
    case MapperKind::kNone: return "none";
    case MapperKind::kPoly: return "poly";
    case MapperKind::kDense: return "dense";
  }
  return "none";
}

MapperKind parse_mapper_kind(const std::string& name) {
  if (name == "none") return MapperKind::kNone;
  if (name == "poly") return MapperKind::kPoly;
  if (name == "dense") return MapperKind::kDense;
  throw GazeError(ErrorCode::kInvalidConfig, "unknown mapper '" + name + "'");
}

void ProtocolConfig::validate() const {
  if (calibration_plane < 0 || calibration_plane >= kPlaneCount) {
    throw GazeError(ErrorCode::kInvalidConfig, "calibration plane must lie in [0, 5]");
  }
  if (frames_per_target < 1) {
    throw GazeError(ErrorCode::kInvalidConfig, "frames per target must be >= 1");
  }
  noise.validate();
}

std::optional<GazeMapper> calibrate_mapper(MapperKind kind, const CalibrationSet& cal,
                                           std::size_t distinct_targets,
                                           const GazeFrameSpec& frame, const TrainHyper& train,
                                           std::uint64_t seed) {
  switch (kind) {
    case MapperKind::kNone:
      return std::nullopt;
    case MapperKind::kPoly:
      if (distinct_targets < kMinPolyPairs) {
        throw GazeError(ErrorCode::kInsufficientCalibration,
                        std::to_string(distinct_targets) + " usable calibration targets, need 6");
      }
      return fit_polynomial(cal, frame);
    case MapperKind::kDense:
      if (cal.empty()) {
        throw GazeError(ErrorCode::kInsufficientCalibration, "no usable calibration frames");
      }
      return net_train(net_init(seed), cal, train).net;
  }
  return std::nullopt;
}

namespace {

// Per-frame estimation shared by calibration and test frames.
FrameResult estimate_record(const Scene& scene, const FrameRecord& record,
                            const LiftOptions& lift, int calibration_plane) {
  FrameResult r;
  const FrameObservation& obs = record.observation;
  r.subject_id = obs.subject_id;
  r.target_id = obs.target_id;
  r.frame_id = obs.frame_id;
  r.plane = obs.target_id / kTargetsPerPlane;
  r.calibration = r.plane == calibration_plane;
  try {
    const FrameEstimate est = estimate_frame(scene, obs, lift);
    r.cornea_device = est.axis.cornea_3d;
    r.optical_axis = est.axis.optical_axis;
    r.iterations = est.cornea.iterations;
    r.residual = est.cornea.final_residual;
    r.converged = est.cornea.converged;
  } catch (const GazeError& e) {
    r.status = std::string(to_string(e.code()));
  }
  return r;
}

}  // namespace

ProtocolResult run_protocol(const Scene& scene, const EyePhysiology& eye,
                            const ProtocolConfig& config) {
  config.validate();
  eye.validate();
  NoiseModel noise = config.noise;
  noise.seed = config.seed;

  const TargetGrid grid = make_target_grid(scene.grid);
  ProtocolResult result;
  result.frames.reserve(grid.size() * static_cast<std::size_t>(config.frames_per_target));
  for (const auto& target : grid.targets) {
    for (int f = 0; f < config.frames_per_target; ++f) {
      const FrameRecord record = render_frame(scene, eye, target, noise, 0, f);
      result.frames.push_back(estimate_record(scene, record, config.lift, config.calibration_plane));
    }
  }

  // Calibration.
  std::vector<Vector3d> cal_corneas;
  std::set<int> cal_targets;
  for (const auto& r : result.frames) {
    if (r.calibration && r.status == "ok") {
      cal_corneas.push_back(r.cornea_device);
      cal_targets.insert(r.target_id);
    }
  }
  if (cal_corneas.empty()) {
    throw GazeError(ErrorCode::kInsufficientCalibration, "no usable calibration frames");
  }
  const Vector3d central = grid.center_of(config.calibration_plane).position;
  result.calibration_frame = gaze_origin(cal_corneas, central);
  CalibrationSet cal;
  for (const auto& r : result.frames) {
    if (!r.calibration || r.status != "ok") continue;
    const Vector3d target = grid.targets[static_cast<std::size_t>(r.target_id)].position;
    cal.push_back({r.optical_axis, (target - result.calibration_frame.origin).normalized()});
  }
  result.calibration_frames_used = cal.size();
  result.mapper = calibrate_mapper(config.mapper, cal, cal_targets.size(),
                                   result.calibration_frame, config.train,
                                   config.seed ^ 0xdeadbeefcafeULL);

  // Test origin.
  std::vector<Vector3d> test_corneas;
  for (const auto& r : result.frames) {
    if (!r.calibration) {
      ++result.test_frames;
      if (r.status == "ok") test_corneas.push_back(r.cornea_device);
    }
  }
  if (config.reuse_calibration_origin || test_corneas.empty()) {
    result.test_frame = result.calibration_frame;
  } else {
    Vector3d sum = Vector3d::Zero();
    for (const auto& c : test_corneas) sum += c;
    result.test_frame.origin = sum / static_cast<double>(test_corneas.size());
    result.test_frame.reference_dir = result.calibration_frame.reference_dir;
  }

  std::vector<double> errors;
  std::map<int, std::pair<double, int>> per_target;
  for (auto& r : result.frames) {
    if (r.calibration) continue;
    if (r.status == "ok") {
      try {
        const Vector3d gaze =
            result.mapper ? apply_mapper(*result.mapper, r.optical_axis) : r.optical_axis;
        const Vector3d target = grid.targets[static_cast<std::size_t>(r.target_id)].position;
        const Vector3d truth = (target - result.test_frame.origin).normalized();
        r.error_arcmin = angular_error_arcmin(gaze, truth);
      } catch (const GazeError& e) {
        r.status = std::string(to_string(e.code()));
      }
    }
    if (r.status != "ok") {
      ++result.dropped;
      continue;
    }
    ++result.evaluated;
    errors.push_back(r.error_arcmin);
    auto& acc = per_target[r.target_id];
    acc.first += r.error_arcmin;
    acc.second += 1;
  }

  if (config.per_target) {
    std::vector<double> means;
    for (const auto& [id, acc] : per_target) means.push_back(acc.first / acc.second);
    result.summary = summarize(std::move(means));
  } else {
    result.summary = summarize(std::move(errors));
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const ProtocolResult& result) {
  out << "subject_id,target_id,frame_id,plane,role,status,error_arcmin,cornea_x,cornea_y,"
         "cornea_z,iterations,residual_m,converged\n";
  for (const auto& r : result.frames) {
    const bool ok = r.status == "ok";
    out << r.subject_id << ',' << r.target_id << ',' << r.frame_id << ',' << r.plane << ','
        << (r.calibration ? "calibration" : "test") << ',' << r.status << ','
        << (ok && !r.calibration ? fmt(r.error_arcmin) : "") << ',';
    if (ok) {
      out << fmt(r.cornea_device.x()) << ',' << fmt(r.cornea_device.y()) << ','
          << fmt(r.cornea_device.z()) << ',' << r.iterations << ',' << fmt(r.residual) << ','
          << (r.converged ? 1 : 0) << '\n';
    } else {
      out << ",,,,,\n";
    }
  }
  const ErrorSummary& s = result.summary;
  out << "# summary,mean_arcmin,std_arcmin,q1_arcmin,q2_arcmin,q3_arcmin,n\n";
  out << "# summary," << fmt(s.mean) << ',' << fmt(s.std) << ',' << fmt(s.q1) << ','
      << fmt(s.q2) << ',' << fmt(s.q3) << ',' << s.n << '\n';
  out << "# frames,test," << result.test_frames << ",evaluated," << result.evaluated
      << ",dropped," << result.dropped << ",calibration_used," << result.calibration_frames_used
      << '\n';
}

std::vector<SweepRow> noise_sweep(const Scene& scene, const EyePhysiology& eye,
                                  const std::vector<double>& sigmas,
                                  const ProtocolConfig& config, int seeds) {
  if (!std::is_sorted(sigmas.begin(), sigmas.end())) {
    throw GazeError(ErrorCode::kInvalidConfig, "sweep sigmas must be sorted ascending");
  }
  if (seeds < 1) throw GazeError(ErrorCode::kInvalidConfig, "sweep needs >= 1 seed");
  std::vector<SweepRow> rows;
  for (double sigma : sigmas) {
    SweepRow row;
    row.sigma = sigma;
    std::vector<double> pooled;
    double sum_of_means = 0.0;
    for (int k = 0; k < seeds; ++k) {
      ProtocolConfig cfg = config;
      cfg.noise.glint_sigma = sigma;
      cfg.noise.pupil_sigma = sigma;
      cfg.seed = config.seed + static_cast<std::uint64_t>(k);
      const ProtocolResult run = run_protocol(scene, eye, cfg);
      sum_of_means += run.summary.mean;
      row.dropped += run.dropped;
      for (const auto& r : run.frames) {
        if (!r.calibration && r.status == "ok") pooled.push_back(r.error_arcmin);
      }
      if (seeds == 1) row.summary = run.summary;
    }
    if (seeds > 1) row.summary = summarize(std::move(pooled));
    row.mean_of_seed_means = sum_of_means / seeds;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "sigma_px,mean_arcmin,std_arcmin,q1_arcmin,q2_arcmin,q3_arcmin,n,mean_of_seed_means,"
         "dropped\n";
  for (const auto& r : rows) {
    out << fmt(r.sigma) << ',' << fmt(r.summary.mean) << ',' << fmt(r.summary.std) << ','
        << fmt(r.summary.q1) << ',' << fmt(r.summary.q2) << ',' << fmt(r.summary.q3) << ','
        << r.summary.n << ',' << fmt(r.mean_of_seed_means) << ',' << r.dropped << '\n';
  }
}

}  // namespace glintgaze
