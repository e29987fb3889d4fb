// glintgaze command line: simulate | solve | calibrate | evaluate | sweep.
// Exit status 0 on success, 1 on usage errors (nothing written), 2 on data
// or geometry errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "glintgaze/dataset_io.hpp"
#include "glintgaze/eval_harness.hpp"
#include "glintgaze/scene_config.hpp"

using namespace glintgaze;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string mapper = "dense";
  double noise = 0.0;
  double dropout = 0.0;
  std::string pupil_mode;
  bool with_truth = false;
  int calibration_plane = 1;
  int frames = 1;
  int subjects = 1;
  std::string input;
  std::vector<double> sigmas{0.0, 0.25, 0.5, 1.0};
  int seeds = 20;
  bool per_target = false;
  bool reuse_origin = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::string subcommand;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string version = kVersion;
};

void write_manifest(const RunManifest& m) {
  std::ofstream f(fs::path(m.out) / "manifest.txt");
  f << "subcommand " << m.subcommand << '\n'
    << "config " << (m.config.empty() ? "(defaults)" : m.config) << '\n'
    << "seed " << m.seed << '\n'
    << "out " << m.out << '\n'
    << "version " << m.version << '\n';
}

std::ofstream open_out(const Options& o, const std::string& name) {
  std::ofstream f(fs::path(o.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(o.out) / name).string());
  return f;
}

// Everything that can be rejected as a usage error is checked here, before
// any output exists.
struct Prepared {
  SceneConfig config;
  Scene scene;
  EyePhysiology eye;
  ProtocolConfig protocol;
};

Prepared prepare(const Options& o) {
  Prepared p;
  try {
    if (!o.config.empty()) p.config = load_scene_config(o.config);
    if (!o.pupil_mode.empty()) p.config.eye.pupil_mode = parse_pupil_mode(o.pupil_mode);
    p.scene = p.config.scene();
    p.eye = p.config.physiology(p.scene);
    p.protocol.calibration_plane = o.calibration_plane;
    p.protocol.frames_per_target = o.frames;
    p.protocol.noise.glint_sigma = o.noise;
    p.protocol.noise.pupil_sigma = o.noise;
    p.protocol.noise.dropout_prob = o.dropout;
    p.protocol.noise.seed = o.seed;
    p.protocol.mapper = parse_mapper_kind(o.mapper);
    p.protocol.seed = o.seed;
    p.protocol.per_target = o.per_target;
    p.protocol.reuse_calibration_origin = o.reuse_origin;
    p.protocol.lift = p.config.lift;
    p.protocol.validate();
    if (o.subjects < 1) throw UsageError("--subjects must be >= 1");
  } catch (const GazeError& e) {
    throw UsageError(e.what());
  }
  return p;
}

int run(const std::string& sub, const Options& o) {
  const Prepared p = prepare(o);
  std::vector<FrameObservation> input;
  if (sub == "solve") {
    std::ifstream in(o.input);
    if (!in) throw UsageError("cannot open input '" + o.input + "'");
    input = read_observations_csv(in);  // parse errors are data errors
  }
  if (sub == "calibrate" && p.protocol.mapper == MapperKind::kNone) {
    throw UsageError("calibrate needs --mapper poly or dense");
  }
  if (sub == "sweep" && !std::is_sorted(o.sigmas.begin(), o.sigmas.end())) {
    throw UsageError("--sigmas must be ascending");
  }

  fs::create_directories(o.out);
  write_manifest({sub, o.config, o.seed, o.out});

  if (sub == "simulate") {
    const auto subjects = make_subjects(p.eye, o.subjects, o.seed);
    const auto data = generate_dataset(p.scene, subjects, make_target_grid(p.scene.grid), o.frames, p.protocol.noise);
    auto f = open_out(o, "dataset.csv");
    write_dataset_csv(f, p.scene, data, o.with_truth);
    std::cout << "wrote " << data.records.size() << " frames to "
              << (fs::path(o.out) / "dataset.csv").string() << '\n';
  } else if (sub == "solve") {
    const auto solved = solve_observations(p.scene, input, p.config.lift);
    auto f = open_out(o, "estimates.csv");
    write_estimates_csv(f, solved);
    std::size_t failed = 0;
    for (const auto& s : solved) {
      if (s.status != "ok") {
        ++failed;
        std::cerr << "frame " << s.observation->subject_id << '/' << s.observation->target_id
                  << '/' << s.observation->frame_id << ": " << s.status << '\n';
      }
    }
    std::cout << "solved " << solved.size() - failed << " of " << solved.size() << " frames\n";
  } else if (sub == "calibrate") {
    const auto result = run_protocol(p.scene, p.eye, p.protocol);
    auto f = open_out(o, "mapper.txt");
    save_mapper(f, *result.mapper);
    std::cout << "calibrated " << o.mapper << " mapper on " << result.calibration_frames_used
              << " frames\n";
  } else if (sub == "evaluate") {
    const auto result = run_protocol(p.scene, p.eye, p.protocol);
    {
      auto f = open_out(o, "metrics.csv");
      write_metrics_csv(f, result);
    }
    std::ostringstream report;
    report << format_report_header() << '\n'
           << "|---|---|---|---|---|---|---|\n"
           << format_report_row(o.mapper, "synthetic glint geometry, " +
                                              to_string(p.eye.pupil_mode) + " pupil",
                                result.summary)
           << '\n';
    auto f = open_out(o, "report.md");
    f << report.str();
    std::cout << report.str() << "evaluated " << result.evaluated << " of " << result.test_frames
              << " test frames, dropped " << result.dropped << '\n';
  } else if (sub == "sweep") {
    const auto rows = noise_sweep(p.scene, p.eye, o.sigmas, p.protocol, o.seeds);
    auto f = open_out(o, "sweep.csv");
    write_sweep_csv(f, rows);
    write_sweep_csv(std::cout, rows);
  }
  return 0;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "scene configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "base random seed");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--pupil-mode", o.pupil_mode, "consistent | physiological")
      ->check(CLI::IsMember({"consistent", "physiological"}));
}

void add_sim(CLI::App* app, Options& o) {
  app->add_option("--noise", o.noise, "glint and pupil pixel sigma")->check(CLI::NonNegativeNumber);
  app->add_option("--dropout", o.dropout, "glint dropout probability")->check(CLI::Range(0.0, 1.0));
  app->add_option("--frames", o.frames, "frames per target")->check(CLI::PositiveNumber);
}

void add_protocol(CLI::App* app, Options& o) {
  app->add_option("--mapper", o.mapper, "poly | dense | none")
      ->check(CLI::IsMember({"poly", "dense", "none"}));
  app->add_option("--calibration-plane", o.calibration_plane, "calibration plane index 0..5")
      ->check(CLI::Range(0, kPlaneCount - 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glintgaze: glint-based gaze estimation on synthetic data"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "render a synthetic dataset CSV");
  add_common(simulate, o);
  add_sim(simulate, o);
  simulate->add_flag("--with-truth", o.with_truth, "append ground truth columns");
  simulate->add_option("--subjects", o.subjects, "number of subjects")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "estimate cornea and optical axis per frame");
  add_common(solve, o);
  solve->add_option("--input", o.input, "observation CSV")->required();

  auto* calibrate = app.add_subcommand("calibrate", "fit and save a gaze mapper");
  add_common(calibrate, o);
  add_sim(calibrate, o);
  add_protocol(calibrate, o);

  auto* evaluate = app.add_subcommand("evaluate", "calibrate, test, write metrics and report");
  add_common(evaluate, o);
  add_sim(evaluate, o);
  add_protocol(evaluate, o);
  evaluate->add_flag("--per-target", o.per_target, "average frames per target first");
  evaluate->add_flag("--reuse-calibration-origin", o.reuse_origin,
                     "measure test errors from the calibration origin");

  auto* sweep = app.add_subcommand("sweep", "mean error against pixel noise");
  add_common(sweep, o);
  add_protocol(sweep, o);
  sweep->add_option("--dropout", o.dropout, "glint dropout probability")
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--frames", o.frames, "frames per target")->check(CLI::PositiveNumber);
  sweep->add_option("--sigmas", o.sigmas, "pixel sigmas, ascending")->delimiter(',');
  sweep->add_option("--seeds", o.seeds, "seeds per sigma")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n'
              << app.get_subcommands().front()->help();
    return 1;
  } catch (const GazeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
