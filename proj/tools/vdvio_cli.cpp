// Command line front end: simulate, run and evaluate.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vdvio/config.hpp"
#include "vdvio/estimator.hpp"
#include "vdvio/sensor_log.hpp"
#include "vdvio/simulator.hpp"
#include "vdvio/trajectory.hpp"

namespace fs = std::filesystem;
using namespace vdvio;

namespace {

AppConfig config_from(const std::optional<std::string>& path) {
  return path ? load_config(*path) : AppConfig();
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::string describe(const EstimatorDiagnostics& d) {
  return fmt::format(
      "keyframes={} marginalizations={} dvl={}/{} pressure={}/{} visual_updates={} "
      "features used={} gated={} rejected={} enhanced={} unenhanced={} "
      "skipped_updates={} late={} max_pos_sigma={:.3f} diverged={}",
      d.keyframes, d.marginalizations, d.dvl_accepted, d.dvl_accepted + d.dvl_gated,
      d.pressure_accepted, d.pressure_accepted + d.pressure_gated, d.visual_updates,
      d.features_used, d.features_gated, d.features_rejected, d.features_enhanced,
      d.features_unenhanced, d.skipped_updates, d.late_measurements, d.max_position_sigma,
      d.diverged);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual-DVL-inertial odometry tools"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic sensor log and ground truth");
  std::optional<std::string> sim_config;
  std::uint64_t seed = 0;
  std::string sim_out;
  sim->add_option("--config", sim_config, "YAML configuration")->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Random seed")->required();
  sim->add_option("--out", sim_out, "Sensor log to write")->required();

  auto* run = app.add_subcommand("run", "Run the estimator on a sensor log");
  std::string run_log, run_out;
  std::optional<std::string> run_config;
  bool no_dvl = false, no_visual = false, no_pressure = false, no_enhancement = false,
       no_keyframe = false;
  run->add_option("--log", run_log, "Sensor log")->required()->check(CLI::ExistingFile);
  run->add_option("--config", run_config, "YAML configuration")->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Estimated trajectory to write")->required();
  run->add_flag("--no-dvl", no_dvl, "Disable DVL velocity and point-cloud use");
  run->add_flag("--no-visual", no_visual, "Disable visual updates");
  run->add_flag("--no-pressure", no_pressure, "Disable pressure updates");
  run->add_flag("--no-enhancement", no_enhancement, "Disable DVL feature enhancement");
  run->add_flag("--no-keyframe", no_keyframe, "Clone every frame and drop the oldest clone");

  auto* eval = app.add_subcommand("evaluate", "Align an estimate to ground truth and report ATE");
  std::string est_path, gt_path, report_path;
  double window = 90.0;
  eval->add_option("--est", est_path, "Estimated trajectory")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "Ground-truth trajectory")->required()->check(CLI::ExistingFile);
  eval->add_option("--align-window", window, "Seconds used for alignment")
      ->required()
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", report_path, "Report to write (CSV series goes next to it)")
      ->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*sim) {
      const AppConfig config = config_from(sim_config);
      const SimulationResult result = simulate(config.simulation, seed);
      write_log(sim_out, result.log);
      const fs::path gt = sibling(sim_out, ".gt.txt");
      write_trajectory(gt, to_trajectory(result.truth));
      fmt::print("wrote {} ({} imu, {} dvl, {} clouds, {} pressure, {} frames) and {}\n", sim_out,
                 result.log.imu.size(), result.log.dvl.size(), result.log.clouds.size(),
                 result.log.pressure.size(), result.log.camera.size(), gt.string());
    } else if (*run) {
      AppConfig config = config_from(run_config);
      EstimatorConfig& est = config.estimator;
      if (no_dvl) est.dvl.enabled = false;
      if (no_visual) est.visual.enabled = false;
      if (no_pressure) est.pressure.enabled = false;
      if (no_enhancement) est.enhancement.enabled = false;
      if (no_keyframe) est.keyframe.enabled = false;
      const SensorLog log = read_log(run_log);
      const EstimatorResult result = run_estimator(log, est);
      write_trajectory(run_out, result.trajectory);
      fmt::print("wrote {} ({} poses)\n{}\n", run_out, result.trajectory.size(),
                 describe(result.diagnostics));
      if (result.diagnostics.diverged) return 3;
    } else if (*eval) {
      const TrajectoryRecord est = read_trajectory(est_path);
      const TrajectoryRecord gt = read_trajectory(gt_path);
      const AteReport report = evaluate_trajectory(est, gt, window);
      std::string text = fmt::format("[input]\nestimate = {}\nground_truth = {}\n\n", est_path,
                                     gt_path);
      text += format_ate_report(report, window);
      write_text(report_path, text);
      fs::path csv = sibling(report_path, ".csv");
      if (csv == fs::path(report_path)) csv = sibling(report_path, "_errors.csv");
      write_text(csv, format_error_csv(report));
      fmt::print("{}series: {}\n", format_ate_report(report, window), csv.string());
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
