#include "glintgaze/cornea_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glintgaze {

namespace {

constexpr double kFiniteDifferenceStep = 1e-9;  // meters
constexpr double kArmijo = 0.5;
constexpr double kLossTolerance = 1e-12;        // meters
constexpr double kStepTolerance = 1e-9;         // meters
constexpr double kMinTrialStep = 1e-13;         // meters
constexpr double kInitialTrialStep = 1e-3;      // meters
constexpr int kPolishIterations = 20;

void require_glints(const FrameObservation& obs, std::size_t minimum) {
  if (obs.present_glint_count() < minimum) {
    throw GazeError(ErrorCode::kInsufficientGlints,
                    "frame " + std::to_string(obs.frame_id) + " of target " +
                        std::to_string(obs.target_id) + " has " +
                        std::to_string(obs.present_glint_count()) + " glints, need " +
                        std::to_string(minimum));
  }
}

}  // namespace

std::vector<Line2d> led_glint_lines(const CameraModel& camera, const LedRig& leds,
                                    const FrameObservation& obs) {
  std::vector<Line2d> lines;
  lines.reserve(kLedCount);
  for (std::size_t i = 0; i < kLedCount; ++i) {
    if (!obs.glints[i]) continue;
    lines.emplace_back(project(camera, leds.positions[i]), *obs.glints[i]);
  }
  return lines;
}

double cornea_line_loss(const Vector2d& p, std::span<const Line2d> lines) {
  if (lines.empty()) {
    throw GazeError(ErrorCode::kInsufficientLines, "cornea line loss needs at least one line");
  }
  double sum = 0.0;
  for (const auto& line : lines) sum += point_to_line2_distance(p, line);
  return sum / static_cast<double>(lines.size());
}

Vector2d solve_cornea_2d(const CameraModel& camera, const LedRig& leds,
                         const FrameObservation& obs) {
  require_glints(obs, 2);
  const std::vector<Line2d> lines = led_glint_lines(camera, leds, obs);
  return intersect_lines2_lsq<double>(lines).point;
}

double reflection_residual(const Vector3d& cornea_3d, const CameraModel& camera,
                           const LedRig& leds, const FrameObservation& obs, double radius) {
  require_glints(obs, 1);
  const Sphered sphere{cornea_3d, radius};
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < kLedCount; ++i) {
    if (!obs.glints[i]) continue;
    ++count;
    const Rayd ray = backproject(camera, *obs.glints[i]);
    const auto t = ray_sphere_intersect(ray, sphere);
    if (!t) {
      const double miss = point_to_line3_distance(cornea_3d, ray) - radius;
      sum += miss + radius;
      continue;
    }
    const Vector3d g = ray.at(*t);
    const Vector3d normal = (g - cornea_3d) / radius;
    const Rayd reflected(g, reflect_direction(ray.direction, normal));
    sum += point_to_line3_distance(leds.positions[i], reflected);
  }
  return sum / static_cast<double>(count);
}

CorneaEstimate lift_cornea_3d(const CameraModel& camera, const LedRig& leds,
                              const FrameObservation& obs, const LiftOptions& options) {
  require_glints(obs, 2);

  CorneaEstimate estimate;
  for (std::size_t i = 0; i < kLedCount; ++i) {
    if (obs.glints[i]) estimate.used_glints.push_back(i);
  }
  estimate.cornea_2d = solve_cornea_2d(camera, leds, obs);
  const Rayd ray = backproject(camera, estimate.cornea_2d);

  const double lo = options.min_distance;
  const double hi = options.max_distance;
  auto loss = [&](double t) {
    return reflection_residual(ray.at(t), camera, leds, obs, options.cornea_radius);
  };
  auto gradient = [&](double t) {
    const double a = std::max(lo, t - kFiniteDifferenceStep);
    const double b = std::min(hi, t + kFiniteDifferenceStep);
    return (loss(b) - loss(a)) / (b - a);
  };

  double t = std::clamp(options.init_distance, lo, hi);
  double f = loss(t);
  double alpha = 0.0;
  int iterations = 0;
  while (iterations < kMaxLiftIterations) {
    const double g = gradient(t);
    if (g == 0.0 || !std::isfinite(g)) break;
    if (alpha == 0.0) alpha = kInitialTrialStep / std::abs(g);
    ++iterations;

    // Backtracking with Armijo sufficient decrease on the realized step.
    double t_new = t;
    double f_new = f;
    bool accepted = false;
    while (true) {
      t_new = std::clamp(t - alpha * g, lo, hi);
      const double step = std::abs(t_new - t);
      if (step < kMinTrialStep) break;
      f_new = loss(t_new);
      if (f_new <= f - kArmijo * std::abs(g) * step) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const double dt = std::abs(t_new - t);
    const double df = std::abs(f - f_new);
    t = t_new;
    f = f_new;
    alpha *= 2.0;
    if (df < kLossTolerance || dt < kStepTolerance) break;
  }
  Vector3d cornea = ray.at(t);

  if (options.polish_3d) {
    auto loss3 = [&](const Vector3d& c) {
      return reflection_residual(c, camera, leds, obs, options.cornea_radius);
    };
    double step_scale = 0.0;
    for (int k = 0; k < kPolishIterations; ++k) {
      Vector3d grad;
      for (int axis = 0; axis < 3; ++axis) {
        Vector3d hp = cornea;
        Vector3d hm = cornea;
        hp[axis] += kFiniteDifferenceStep;
        hm[axis] -= kFiniteDifferenceStep;
        grad[axis] = (loss3(hp) - loss3(hm)) / (2.0 * kFiniteDifferenceStep);
      }
      const double gnorm = grad.norm();
      if (gnorm == 0.0 || !std::isfinite(gnorm)) break;
      if (step_scale == 0.0) step_scale = 1e-4 / gnorm;
      bool accepted = false;
      Vector3d candidate;
      double f_candidate = f;
      while (step_scale * gnorm >= kMinTrialStep) {
        candidate = cornea - step_scale * grad;
        f_candidate = loss3(candidate);
        if (f_candidate <= f - kArmijo * step_scale * gnorm * gnorm) {
          accepted = true;
          break;
        }
        step_scale *= 0.5;
      }
      if (!accepted) break;
      const double df = f - f_candidate;
      cornea = candidate;
      f = f_candidate;
      step_scale *= 2.0;
      if (df < kLossTolerance) break;
    }
  }

  estimate.cornea_3d = cornea;
  estimate.iterations = iterations;
  estimate.final_residual = f;
  estimate.converged =
      !(iterations >= kMaxLiftIterations && f > 10.0 * options.noise_floor);
  return estimate;
}

}  // namespace glintgaze
