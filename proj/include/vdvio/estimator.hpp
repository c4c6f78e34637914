#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vdvio/feature.hpp"
#include "vdvio/propagation.hpp"
#include "vdvio/sensor_log.hpp"
#include "vdvio/state.hpp"
#include "vdvio/trajectory.hpp"

namespace vdvio {

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitOptions {
  double duration = 5.0;             // s of static data at the start of the log
  double max_accel_variance = 0.05;  // (m/s^2)^2, summed over axes
  /// Initial one-sigma uncertainties.
  double sigma_roll_pitch = 0.01;  // rad
  double sigma_yaw = 1.0e-4;       // rad; yaw defines the global frame
  double sigma_position = 1.0e-4;  // m
  double sigma_velocity = 0.01;    // m/s
  double sigma_gyro_bias = 1.0e-4;
  double sigma_accel_bias = 0.05;
};

struct VisualOptions {
  bool enabled = true;
  double sigma = 0.09;  // normalized image plane
  double chi2_confidence = 0.95;
  std::size_t min_track_length = 3;
  std::size_t max_features_per_update = 60;
};

/// The per-sample noise_sd from the log is used, but never below min_noise_sd.
struct DvlOptions {
  bool enabled = true;
  double chi2_confidence = 0.95;
  double min_noise_sd = 0.005;  // m/s
};

struct PressureOptions {
  bool enabled = true;
  double chi2_confidence = 0.95;
  double min_noise_sd = 0.005;  // m
};

struct EnhancementOptions {
  bool enabled = true;
  CloudMatchOptions match;
};

struct KeyframeOptions {
  /// When disabled every camera frame is cloned and the oldest clone is
  /// marginalized (plain sliding-window MSCKF).
  bool enabled = true;
  KeyframeCriteria criteria;
};

struct EstimatorConfig {
  ImuNoiseParams imu;
  InitOptions init;
  std::size_t max_clones = 11;
  KeyframeOptions keyframe;
  VisualOptions visual;
  DvlOptions dvl;
  PressureOptions pressure;
  EnhancementOptions enhancement;
  /// Extra poses at this rate between keyframes; 0 emits keyframes and the final state only.
  double output_rate = 0.0;
  /// Divergence guard: the run is flagged when any position sigma exceeds this.
  double max_position_sigma = 1.0e3;
};

struct EstimatorDiagnostics {
  std::size_t imu_samples = 0;
  std::size_t dvl_accepted = 0, dvl_gated = 0;
  std::size_t pressure_accepted = 0, pressure_gated = 0;
  std::size_t visual_updates = 0;
  std::size_t features_used = 0, features_gated = 0, features_rejected = 0;
  std::size_t features_enhanced = 0, features_unenhanced = 0;
  std::size_t keyframes = 0, marginalizations = 0;
  std::size_t late_measurements = 0, skipped_updates = 0;
  double max_position_sigma = 0.0;
  bool diverged = false;
};

struct EstimatorResult {
  TrajectoryRecord trajectory;
  /// Position covariance for every trajectory pose.
  std::vector<Mat3> position_covariance;
  EstimatorDiagnostics diagnostics;
  FilterState final_state;
};

/// Static initialization from the first `options.duration` seconds: gravity
/// direction from the mean specific force (yaw fixed to zero), gyro bias from
/// the mean rate, zero position and velocity. Throws InitializationError when
/// the window is short or the vehicle is not static.
FilterState initialize_static(const std::vector<ImuSample>& imu, const InitOptions& options,
                              double gravity_magnitude, std::size_t max_clones);

/// Processes the whole log in timestamp order and returns the estimated
/// trajectory with one pose per keyframe (plus optional fixed-rate poses) and
/// the final state.
EstimatorResult run_estimator(const SensorLog& log, const EstimatorConfig& config);

}  // namespace vdvio
