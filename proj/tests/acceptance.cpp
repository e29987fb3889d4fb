// Acceptance checks. Prints one PASS/FAIL line per criterion with the
// measured values and exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glintgaze/dataset_io.hpp"
#include "test_support.hpp"

using namespace glintgaze;
using namespace glintgaze::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Outcome forward_model_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst_residual = 0, worst_theta = 0;
  for (int i = 0; i < 500; ++i) {
    const GlintConfig c = random_glint_config(rng);
    const GlintPoint g = solve_glint_point(c.camera, c.led, c.cornea);
    worst_residual =
        std::max(worst_residual, reflection_law_residual(c.camera, c.led, c.cornea, g.point));
    worst_theta =
        std::max(worst_theta, std::abs(glint_theta(c, g.point) - scan_glint_theta(c, 1000000)));
  }
  const double t = seconds_since(t0);
  return {worst_residual < 1e-9 && worst_theta < 1e-5 && t < 30,
          "500 configs, max residual " + fmt("%.2e", worst_residual) + ", max |dtheta| " +
              fmt("%.2e", worst_theta) + " rad, " + fmt("%.1f", t) + " s"};
}

Outcome glint_line_concurrency() {
  const Scene scene = default_scene();
  double worst_line = 0, worst_2d = 0;
  std::size_t frames = 0;
  for (const auto mode : {PupilMode::kConsistent, PupilMode::kPhysiological}) {
    for (const auto& rec : clean_sweep(scene, eye_for(scene, mode))) {
      ++frames;
      const Vector2d c = project(scene.camera, rec.truth.pose.cornea_center);
      for (const auto& line : led_glint_lines(scene.camera, scene.leds, rec.observation)) {
        worst_line = std::max(worst_line, point_to_line2_distance(c, line));
      }
      worst_2d = std::max(
          worst_2d, (solve_cornea_2d(scene.camera, scene.leds, rec.observation) - c).norm());
    }
  }
  return {worst_line < 1e-6 && worst_2d < 1e-6,
          std::to_string(frames) + " frames, max line distance " + fmt("%.2e", worst_line) +
              " px, max cornea 2D error " + fmt("%.2e", worst_2d) + " px"};
}

Outcome cornea_round_trip() {
  const Scene scene = default_scene();
  const auto records = clean_sweep(scene, eye_for(scene));
  const auto t0 = Clock::now();
  double worst = 0;
  int max_iter = 0;
  bool all_converged = true;
  std::size_t four = 0;
  for (const auto& rec : records) {
    four += rec.observation.present_glint_count() == 4;
    const CorneaEstimate est = lift_cornea_3d(scene.camera, scene.leds, rec.observation);
    worst = std::max(worst, (est.cornea_3d - rec.truth.pose.cornea_center).norm());
    max_iter = std::max(max_iter, est.iterations);
    all_converged = all_converged && est.converged;
  }
  const double t = seconds_since(t0);
  return {four == 54 && worst < 1e-5 && max_iter <= 100 && all_converged && t < 10,
          "54 targets, max |c - C| " + fmt("%.2e", worst) + " m, max iterations " +
              std::to_string(max_iter) + ", " + fmt("%.3f", t) + " s"};
}

double protocol_mean(const Scene& scene, const EyePhysiology& eye, MapperKind kind,
                     double sigma = 0, std::uint64_t seed = 0) {
  ProtocolConfig cfg;
  cfg.mapper = kind;
  cfg.seed = seed;
  cfg.noise.glint_sigma = cfg.noise.pupil_sigma = sigma;
  return run_protocol(scene, eye, cfg).summary.mean;
}

Outcome end_to_end_calibration() {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const double dense = protocol_mean(scene, eye, MapperKind::kDense);
  const double poly = protocol_mean(scene, eye, MapperKind::kPoly);
  return {dense < 10 && poly < 30,
          "45 test targets, dense " + fmt("%.2f", dense) + " arcmin, poly " + fmt("%.2f", poly) +
              " arcmin"};
}

Outcome kappa_baseline() {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const double none = protocol_mean(scene, eye, MapperKind::kNone);
  const double dense = protocol_mean(scene, eye, MapperKind::kDense);
  const double poly = protocol_mean(scene, eye, MapperKind::kPoly);
  return {none >= 250 && none <= 350 && 5 * dense <= none && 5 * poly <= none,
          "no mapper " + fmt("%.2f", none) + " arcmin, improvement dense " +
              fmt("%.0fx", none / dense) + ", poly " + fmt("%.0fx", none / poly)};
}

Outcome noise_monotonicity() {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const std::vector<double> sigmas{0.0, 0.25, 0.5, 1.0};
  ProtocolConfig cfg;
  cfg.seed = 1000;
  bool pass = true;
  std::string detail;
  for (const auto kind : {MapperKind::kDense, MapperKind::kPoly}) {
    cfg.mapper = kind;
    const auto rows = noise_sweep(scene, eye, sigmas, cfg, 20);
    detail += to_string(kind) + ":";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail += " " + fmt("%.2f", rows[i].mean_of_seed_means);
      if (i > 0 && rows[i].mean_of_seed_means < rows[i - 1].mean_of_seed_means) pass = false;
    }
    if (kind == MapperKind::kDense && !(rows.back().mean_of_seed_means < 150)) pass = false;
    detail += "; ";
  }
  return {pass, detail + "arcmin at sigma 0/0.25/0.5/1 px, 20 seeds"};
}

Outcome report_layout() {
  ErrorSummary s;
  s.mean = 179.53;
  s.std = 135.81;
  s.q1 = 80.29;
  s.q2 = 136.64;
  s.q3 = 241.85;
  const std::string row = format_report_row("fixture", "layout check", s);
  const std::string header = format_report_header();
  return {row == "| fixture | layout check | 179.53 | 135.81 | 80.29 | 136.64 | 241.85 |" &&
              header == "| Model | Description | Mean AE | Std AE | Q1 AE | Q2 AE | Q3 AE |",
          row};
}

Outcome mapper_correctness() {
  const Scene scene = default_scene();
  const CalibrationSet cal = clean_calibration(scene, eye_for(scene), 1);

  // gradient check on a network with every layer randomized
  DenseGazeNet net = net_init(77);
  {
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    Eigen::VectorXd p = net.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] += u(rng) * 0.2;
    net.set_parameters(p);
  }
  Eigen::VectorXd grad;
  net_loss(net, cal, 1e-4, &grad);
  const Eigen::VectorXd p = net.parameters();
  double worst_rel = 0;
  std::mt19937_64 rng(79);
  std::uniform_int_distribution<Eigen::Index> pick(0, p.size() - 1);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Index i = pick(rng);
    DenseGazeNet a = net, b = net;
    Eigen::VectorXd q = p;
    q[i] += 1e-6;
    a.set_parameters(q);
    q[i] -= 2e-6;
    b.set_parameters(q);
    const double fd = (net_loss(a, cal, 1e-4) - net_loss(b, cal, 1e-4)) / 2e-6;
    worst_rel = std::max(worst_rel, std::abs(fd - grad[i]) /
                                        std::max({std::abs(fd), std::abs(grad[i]), 1e-6}));
  }

  // polynomial recovery
  const GazeFrameSpec frame{Vector3d(0.001, 0, 0.002), Vector3d(0.03, -0.02, 1).normalized()};
  Eigen::Matrix<double, 2, kPolyTerms> coeffs;
  coeffs << 0.01, 1.05, -0.02, 0.3, -0.1, 0.05, -0.015, 0.03, 0.97, -0.2, 0.15, 0.4;
  CalibrationSet synth;
  std::uniform_real_distribution<double> a(-0.2, 0.2);
  for (int i = 0; i < 9; ++i) {
    const GazeAngles in{a(rng), a(rng)};
    const Eigen::Vector2d out = coeffs * poly_basis(in);
    synth.push_back({from_angles(in, frame), from_angles({out.x(), out.y()}, frame)});
  }
  const double coeff_err = (fit_polynomial(synth, frame).coefficients - coeffs).cwiseAbs().maxCoeff();

  // untrained identity
  bool identity = true;
  const DenseGazeNet fresh = net_init(5);
  for (int i = 0; i < 1000; ++i) {
    const Vector3d v = random_unit(rng);
    identity = identity && net_forward(fresh, v) == v;
  }

  // serialization
  bool round_trip = true;
  TrainHyper h;
  h.epochs = 100;
  for (const GazeMapper& m : {GazeMapper(fit_polynomial(cal, frame)),
                              GazeMapper(net_train(net_init(6), cal, h).net)}) {
    std::stringstream ss;
    save_mapper(ss, m);
    const std::string text = ss.str();
    const GazeMapper back = load_mapper(ss);
    std::stringstream again;
    save_mapper(again, back);
    round_trip = round_trip && again.str() == text;
    for (int i = 0; i < 100; ++i) {
      const Vector3d v = (Vector3d(0, 0, 1) + 0.3 * random_unit(rng)).normalized();
      round_trip = round_trip && apply_mapper(back, v) == apply_mapper(m, v);
    }
  }
  return {worst_rel < 1e-4 && coeff_err < 1e-9 && identity && round_trip,
          "gradient rel. error " + fmt("%.1e", worst_rel) + ", poly coeff error " +
              fmt("%.1e", coeff_err) + ", identity " + (identity ? "exact" : "broken") +
              ", serialization " + (round_trip ? "bit-exact" : "lossy")};
}

std::string dataset_csv(std::uint64_t seed) {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene, PupilMode::kPhysiological);
  const auto data = generate_dataset(scene, make_subjects(eye, 2, seed), make_target_grid(), 3,
                                     NoiseModel{0.5, 0.5, 0.1, seed});
  std::ostringstream out;
  write_dataset_csv(out, scene, data, true);
  return out.str();
}

std::string metrics_csv(std::uint64_t seed) {
  const Scene scene = default_scene();
  ProtocolConfig cfg;
  cfg.seed = seed;
  cfg.noise = NoiseModel{0.5, 0.5, 0.1, 0};
  cfg.frames_per_target = 2;
  std::ostringstream out;
  write_metrics_csv(out, run_protocol(scene, eye_for(scene, PupilMode::kPhysiological), cfg));
  return out.str();
}

Outcome determinism() {
  const bool dataset = dataset_csv(7) == dataset_csv(7);
  const bool metrics = metrics_csv(7) == metrics_csv(7);
  const bool seed_matters = dataset_csv(8) != dataset_csv(7);
  return {dataset && metrics && seed_matters,
          std::string("dataset CSV ") + (dataset ? "identical" : "differs") + ", metrics CSV " +
              (metrics ? "identical" : "differs") + " across two runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 forward-model fidelity", forward_model_fidelity},
      {"2 glint-line concurrency", glint_line_concurrency},
      {"3 cornea 3D round trip", cornea_round_trip},
      {"4 end-to-end calibration", end_to_end_calibration},
      {"5 kappa baseline", kappa_baseline},
      {"6 noise monotonicity", noise_monotonicity},
      {"7 report layout fixture", report_layout},
      {"8 mapper correctness", mapper_correctness},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
