#include "vdvio/estimator.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Geometry>

#include "vdvio/updates.hpp"

namespace vdvio {

FilterState initialize_static(const std::vector<ImuSample>& imu, const InitOptions& options,
                              double gravity_magnitude, std::size_t max_clones) {
  if (imu.size() < 2) throw InitializationError("not enough IMU samples to initialize");
  const double t0 = imu.front().timestamp;
  std::size_t n = 0;
  Vec3 acc = Vec3::Zero(), gyr = Vec3::Zero();
  while (n < imu.size() && imu[n].timestamp <= t0 + options.duration + 1e-9) {
    acc += imu[n].accel;
    gyr += imu[n].gyro;
    ++n;
  }
  if (n < 2 || imu[n - 1].timestamp - t0 < 0.9 * options.duration) {
    throw InitializationError("log is shorter than the initialization window");
  }
  acc /= static_cast<double>(n);
  gyr /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (imu[i].accel - acc).squaredNorm();
  var /= static_cast<double>(n);
  if (var > options.max_accel_variance) {
    throw InitializationError(fmt::format(
        "initialization window is not static (accel variance {:.4g} > {:.4g})", var,
        options.max_accel_variance));
  }
  if (std::abs(acc.norm() - gravity_magnitude) > 0.1 * gravity_magnitude) {
    throw InitializationError("mean specific force does not match gravity");
  }

  FilterState state;
  state.max_clones = max_clones;
  state.timestamp = imu[n - 1].timestamp;
  // R maps the global up axis onto the measured specific-force direction.
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), acc.normalized());
  state.imu.orientation = UnitQuaternion::from_rotation(q.toRotationMatrix());
  state.imu.gyro_bias = gyr;
  Eigen::VectorXd sd(layout::kImuDim);
  sd << options.sigma_roll_pitch, options.sigma_roll_pitch, options.sigma_yaw,
      Vec3::Constant(options.sigma_position), Vec3::Constant(options.sigma_velocity),
      Vec3::Constant(options.sigma_gyro_bias), Vec3::Constant(options.sigma_accel_bias);
  state.covariance = sd.cwiseAbs2().asDiagonal();
  return state;
}

namespace {

class Estimator {
 public:
  Estimator(const SensorLog& log, const EstimatorConfig& config)
      : log_(log), cfg_(config), ext_(log.header.extrinsics) {}

  EstimatorResult run() {
    state_ = initialize_static(log_.imu, cfg_.init, cfg_.imu.gravity_magnitude, cfg_.max_clones);
    std::size_t k = 0;
    while (log_.imu[k].timestamp < state_.timestamp) ++k;
    last_ = log_.imu[k];
    capture_initial_pressure();
    spdlog::debug("initialized at t={:.3f}", state_.timestamp);
    kf_position_ = state_.imu.position;
    next_output_ = state_.timestamp;
    emit();

    std::size_t d = skip_until(log_.dvl), c = skip_until(log_.clouds);
    std::size_t p = skip_until(log_.pressure), f = skip_until(log_.camera);
    const double inf = std::numeric_limits<double>::infinity();
    for (++k; k < log_.imu.size() && !diag_.diverged; ++k) {
      const ImuSample& next = log_.imu[k];
      ++diag_.imu_samples;
      for (;;) {
        const double td = d < log_.dvl.size() ? log_.dvl[d].timestamp : inf;
        const double tp = p < log_.pressure.size() ? log_.pressure[p].timestamp : inf;
        const double tf = f < log_.camera.size() ? log_.camera[f].timestamp : inf;
        const double t = std::min({td, tp, tf});
        if (t > next.timestamp) break;
        advance(next, t);
        if (td == t) {
          const DvlPointCloud* cloud = nullptr;
          while (c < log_.clouds.size() && log_.clouds[c].timestamp < t) ++c;
          if (c < log_.clouds.size() && log_.clouds[c].timestamp == t) cloud = &log_.clouds[c++];
          on_dvl(log_.dvl[d++], cloud, k);
        } else if (tp == t) {
          on_pressure(log_.pressure[p++]);
        } else {
          on_camera(log_.camera[f++]);
        }
        if (diag_.diverged) break;
      }
      advance(next, next.timestamp);
      if (cfg_.output_rate > 0.0 && state_.timestamp >= next_output_) emit();
    }
    diag_.late_measurements +=
        (log_.dvl.size() - d) + (log_.pressure.size() - p) + (log_.camera.size() - f);
    if (result_.trajectory.empty() ||
        result_.trajectory.points.back().timestamp < state_.timestamp) {
      emit();
    }
    result_.diagnostics = diag_;
    result_.final_state = state_;
    return std::move(result_);
  }

 private:
  template <typename T>
  std::size_t skip_until(const std::vector<T>& v) const {
    std::size_t i = 0;
    while (i < v.size() && v[i].timestamp <= state_.timestamp) ++i;
    return i;
  }

  void capture_initial_pressure() {
    // Average the readings taken while static; fall back to the first one.
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : log_.pressure) {
      if (s.timestamp > state_.timestamp) break;
      sum += s.depth;
      ++n;
    }
    if (n > 0) {
      initial_pressure_ = PressureSample{state_.timestamp, sum / static_cast<double>(n), 0.0};
      have_initial_pressure_ = true;
    } else if (!log_.pressure.empty()) {
      initial_pressure_ = log_.pressure.front();
      have_initial_pressure_ = true;
    }
  }

  // Propagates to time t <= next.timestamp using an interpolated sample.
  void advance(const ImuSample& next, double t) {
    if (t <= state_.timestamp) return;
    const ImuSample s = t >= next.timestamp ? next : interpolate_imu(last_, next, t);
    propagate(state_, last_, s, cfg_.imu);
    last_ = s;
    check_health();
  }

  void check_health() {
    const Mat3 pp = state_.covariance.block<3, 3>(layout::kPos, layout::kPos);
    const double sigma = std::sqrt(std::max(0.0, pp.diagonal().maxCoeff()));
    diag_.max_position_sigma = std::max(diag_.max_position_sigma, sigma);
    if (!std::isfinite(sigma) || sigma > cfg_.max_position_sigma || !state_.imu.is_finite()) {
      if (!diag_.diverged) spdlog::error("filter diverged at t={:.3f}", state_.timestamp);
      diag_.diverged = true;
    }
  }

  void emit() {
    if (!result_.trajectory.empty() &&
        result_.trajectory.points.back().timestamp >= state_.timestamp) {
      return;
    }
    result_.trajectory.points.push_back(
        {state_.timestamp, state_.imu.position, state_.imu.orientation});
    result_.position_covariance.push_back(
        state_.covariance.block<3, 3>(layout::kPos, layout::kPos));
    if (cfg_.output_rate > 0.0) {
      while (next_output_ <= state_.timestamp) next_output_ += 1.0 / cfg_.output_rate;
    }
  }

  bool update(const Eigen::VectorXd& r, const Eigen::MatrixXd& h, const Eigen::MatrixXd& noise) {
    if (!try_ekf_update(state_, r, h, noise)) {
      ++diag_.skipped_updates;
      return false;
    }
    check_health();
    return true;
  }

  void on_dvl(const DvlVelocity& z, const DvlPointCloud* cloud, std::size_t k) {
    if (!cfg_.dvl.enabled) return;
    if (cloud && cfg_.enhancement.enabled) clouds_.push_back(*cloud);
    // Nearest IMU sample for the lever-arm rate.
    const ImuSample& a = log_.imu[k - 1];
    const ImuSample& b = log_.imu[k];
    const Vec3 gyro = (z.timestamp - a.timestamp <= b.timestamp - z.timestamp) ? a.gyro : b.gyro;
    const Vec3 omega = gyro - state_.imu.gyro_bias;
    const auto m = dvl_velocity_residual(state_, z, ext_, omega);
    const double sd = std::max(z.noise_sd, cfg_.dvl.min_noise_sd);
    const Eigen::MatrixXd noise = Eigen::MatrixXd::Identity(3, 3) * sd * sd;
    if (!chi2_gate(m.residual, m.jacobian, state_.covariance, noise, cfg_.dvl.chi2_confidence)) {
      ++diag_.dvl_gated;
      return;
    }
    if (update(m.residual, m.jacobian, noise)) ++diag_.dvl_accepted;
  }

  void on_pressure(const PressureSample& z) {
    if (!cfg_.pressure.enabled || !have_initial_pressure_) return;
    const auto m = pressure_residual(state_, z, initial_pressure_, ext_);
    const double sd = std::max(z.noise_sd, cfg_.pressure.min_noise_sd);
    const Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(1, 1, sd * sd);
    if (!chi2_gate(m.residual, m.jacobian, state_.covariance, noise,
                   cfg_.pressure.chi2_confidence)) {
      ++diag_.pressure_gated;
      return;
    }
    if (update(m.residual, m.jacobian, noise)) ++diag_.pressure_accepted;
  }

  void on_camera(const CameraFrame& frame) {
    std::set<std::uint64_t> ids;
    for (const auto& o : frame.features) ids.insert(o.id);
    if (!cfg_.visual.enabled) {
      // Frames still set the output times so every variant is sampled alike.
      if (!is_keyframe(ids)) return;
      mark_keyframe(std::move(ids));
      return;
    }

    // Tracks that ended before this frame are used once and discarded.
    std::vector<FeatureTrack> lost;
    for (auto it = tracks_.begin(); it != tracks_.end();) {
      if (ids.count(it->first)) {
        ++it;
        continue;
      }
      if (it->second.size() >= cfg_.visual.min_track_length) lost.push_back(std::move(it->second));
      it = tracks_.erase(it);
    }
    visual_update(lost);

    if (!is_keyframe(ids)) return;

    if (state_.clones.size() >= state_.max_clones) marginalize_oldest();
    state_ = augment_clone(std::move(state_), frame.timestamp, true);
    for (const auto& o : frame.features) {
      auto& t = tracks_[o.id];
      t.id = o.id;
      t.measurements.push_back({frame.timestamp, o.uv});
    }
    prune_clouds();
    mark_keyframe(std::move(ids));
  }

  bool is_keyframe(const std::set<std::uint64_t>& ids) const {
    if (!cfg_.keyframe.enabled || !has_keyframe_) return true;
    std::size_t kept = 0;
    for (auto id : kf_ids_) kept += ids.count(id);
    const double lost_fraction =
        kf_ids_.empty() ? 1.0
                        : 1.0 - static_cast<double>(kept) / static_cast<double>(kf_ids_.size());
    const double translation = (state_.imu.position - kf_position_).norm();
    return select_keyframe(static_cast<double>(ids.size()), translation, lost_fraction,
                           cfg_.keyframe.criteria);
  }

  void mark_keyframe(std::set<std::uint64_t> ids) {
    kf_ids_ = std::move(ids);
    kf_position_ = state_.imu.position;
    has_keyframe_ = true;
    ++diag_.keyframes;
    emit();
  }

  void marginalize_oldest() {
    std::vector<FeatureTrack> all;
    all.reserve(tracks_.size());
    for (auto& [id, t] : tracks_) all.push_back(t);
    const auto policy = cfg_.keyframe.enabled ? MarginalizationPolicy::kKeyframe
                                              : MarginalizationPolicy::kOldest;
    MarginalizationStep step = marginalize(state_, all, policy);
    if (!step.performed) return;
    std::vector<FeatureTrack> batch;
    for (auto& t : step.batch) {
      if (t.size() >= cfg_.visual.min_track_length) batch.push_back(std::move(t));
    }
    visual_update(batch);
    state_ = remove_clone(std::move(state_), step.removed_index);
    tracks_.clear();
    for (auto& t : step.survivors) tracks_[t.id] = std::move(t);
    ++diag_.marginalizations;
  }

  void prune_clouds() {
    if (state_.clones.empty()) return;
    const double oldest = state_.clones.front().timestamp - 1.0;
    const auto keep = std::find_if(clouds_.begin(), clouds_.end(),
                                   [&](const DvlPointCloud& c) { return c.timestamp >= oldest; });
    clouds_.erase(clouds_.begin(), keep);
  }

  void visual_update(std::vector<FeatureTrack>& tracks) {
    if (tracks.empty()) return;
    std::stable_sort(tracks.begin(), tracks.end(),
                     [](const FeatureTrack& a, const FeatureTrack& b) { return a.size() > b.size(); });
    if (tracks.size() > cfg_.visual.max_features_per_update) {
      tracks.resize(cfg_.visual.max_features_per_update);
    }
    const double var = cfg_.visual.sigma * cfg_.visual.sigma;
    FeatureRecoveryOptions options;
    options.enable_enhancement = cfg_.enhancement.enabled && cfg_.dvl.enabled;
    options.match = cfg_.enhancement.match;

    std::vector<VisualResidualBlock> blocks;
    std::size_t rows = 0;
    for (const auto& track : tracks) {
      std::optional<EnhancedFeature> feature;
      try {
        feature = recover_feature(track, state_.clones, ext_, clouds_, options);
      } catch (const std::exception& e) {
        spdlog::debug("feature {} not recovered: {}", track.id, e.what());
      }
      if (!feature) {
        ++diag_.features_rejected;
        continue;
      }
      VisualResidualBlock block;
      try {
        block = nullspace_project(visual_feature_residual(state_, ext_, track, feature->position));
      } catch (const BehindCameraError&) {
        ++diag_.features_rejected;
        continue;
      } catch (const DegenerateGeometryError&) {
        ++diag_.features_rejected;
        continue;
      }
      const auto n = block.residual.size();
      if (!chi2_gate(block.residual, block.H_x, state_.covariance,
                     Eigen::MatrixXd::Identity(n, n) * var, cfg_.visual.chi2_confidence)) {
        ++diag_.features_gated;
        continue;
      }
      ++diag_.features_used;
      ++(feature->enhanced ? diag_.features_enhanced : diag_.features_unenhanced);
      rows += static_cast<std::size_t>(n);
      blocks.push_back(std::move(block));
    }
    if (blocks.empty()) return;

    Eigen::MatrixXd h(rows, state_.dim());
    Eigen::VectorXd r(rows);
    Eigen::Index row = 0;
    for (const auto& b : blocks) {
      h.middleRows(row, b.H_x.rows()) = b.H_x;
      r.segment(row, b.residual.size()) = b.residual;
      row += b.H_x.rows();
    }
    compress_measurement(h, r);
    const auto m = r.size();
    if (update(r, h, Eigen::MatrixXd::Identity(m, m) * var)) ++diag_.visual_updates;
  }

  const SensorLog& log_;
  const EstimatorConfig& cfg_;
  const Extrinsics ext_;
  FilterState state_;
  ImuSample last_;
  PressureSample initial_pressure_;
  bool have_initial_pressure_ = false;
  std::map<std::uint64_t, FeatureTrack> tracks_;
  std::set<std::uint64_t> kf_ids_;
  Vec3 kf_position_ = Vec3::Zero();
  bool has_keyframe_ = false;
  std::vector<DvlPointCloud> clouds_;
  double next_output_ = 0.0;
  EstimatorDiagnostics diag_;
  EstimatorResult result_;
};

}  // namespace

EstimatorResult run_estimator(const SensorLog& log, const EstimatorConfig& config) {
  log.validate();
  if (config.max_clones < 2) throw std::invalid_argument("max_clones must be at least 2");
  return Estimator(log, config).run();
}

}  // namespace vdvio
