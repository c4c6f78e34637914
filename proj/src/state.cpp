#include "vdvio/state.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

namespace vdvio {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool FeatureTrack::observed_at(double t) const {
  return std::any_of(measurements.begin(), measurements.end(),
                     [t](const Measurement& m) { return m.timestamp == t; });
}

std::optional<Vec2> FeatureTrack::measurement_at(double t) const {
  for (const auto& m : measurements) {
    if (m.timestamp == t) return m.uv;
  }
  return std::nullopt;
}

bool ImuState::is_finite() const {
  return orientation.xyzw().allFinite() && position.allFinite() && velocity.allFinite() &&
         gyro_bias.allFinite() && accel_bias.allFinite();
}

RigidTransform ClonePose::imu_to_global() const {
  RigidTransform t;
  t.rotation = rotation().transpose();
  t.translation = position;
  return t;
}

int FilterState::clone_index(double t) const {
  for (std::size_t i = 0; i < clones.size(); ++i) {
    if (clones[i].timestamp == t) return static_cast<int>(i);
  }
  return -1;
}

void apply_correction(FilterState& state, const VectorXd& dx) {
  using namespace layout;
  auto& imu = state.imu;
  imu.orientation = quat_boxplus(imu.orientation, dx.segment<3>(kTheta));
  imu.position += dx.segment<3>(kPos);
  imu.velocity += dx.segment<3>(kVel);
  imu.gyro_bias += dx.segment<3>(kBiasGyro);
  imu.accel_bias += dx.segment<3>(kBiasAccel);
  for (std::size_t i = 0; i < state.clones.size(); ++i) {
    const int o = clone_offset(i);
    auto& c = state.clones[i];
    c.orientation = quat_boxplus(c.orientation, dx.segment<3>(o));
    c.position += dx.segment<3>(o + 3);
  }
}

void symmetrize(MatrixXd& p) { p = 0.5 * (p + p.transpose()).eval(); }

FilterState augment_clone(FilterState state, double t, bool is_keyframe) {
  if (state.clones.size() >= state.max_clones) {
    throw WindowFullError("clone window is full; marginalize first");
  }
  if (!state.clones.empty() && !(t > state.clones.back().timestamp)) {
    throw std::invalid_argument("clone timestamp must follow the newest clone");
  }

  const int n = state.dim();
  MatrixXd grown = MatrixXd::Zero(n + layout::kCloneDim, n + layout::kCloneDim);
  grown.topLeftCorner(n, n) = state.covariance;
  // The clone Jacobian selects the IMU orientation and position rows.
  grown.bottomLeftCorner(layout::kCloneDim, n) = state.covariance.topRows(layout::kCloneDim);
  grown.topRightCorner(n, layout::kCloneDim) = state.covariance.leftCols(layout::kCloneDim);
  grown.bottomRightCorner(layout::kCloneDim, layout::kCloneDim) =
      state.covariance.topLeftCorner(layout::kCloneDim, layout::kCloneDim);
  state.covariance = std::move(grown);

  ClonePose clone;
  clone.timestamp = t;
  clone.orientation = state.imu.orientation;
  clone.position = state.imu.position;
  clone.is_keyframe = is_keyframe;
  state.clones.push_back(clone);
  return state;
}

FilterState remove_clone(FilterState state, std::size_t index) {
  if (index >= state.clones.size()) {
    throw std::out_of_range("remove_clone: index out of range");
  }
  const int n = state.dim();
  const int start = layout::clone_offset(index);
  const int d = layout::kCloneDim;
  const int tail = n - start - d;

  MatrixXd reduced(n - d, n - d);
  reduced.topLeftCorner(start, start) = state.covariance.topLeftCorner(start, start);
  reduced.topRightCorner(start, tail) = state.covariance.topRightCorner(start, tail);
  reduced.bottomLeftCorner(tail, start) = state.covariance.bottomLeftCorner(tail, start);
  reduced.bottomRightCorner(tail, tail) = state.covariance.bottomRightCorner(tail, tail);
  state.covariance = std::move(reduced);
  state.clones.erase(state.clones.begin() + static_cast<std::ptrdiff_t>(index));
  return state;
}

bool select_keyframe(double n_features, double translation_since_last_kf, double lost_fraction,
                     const KeyframeCriteria& criteria) {
  return n_features > criteria.min_features &&
         translation_since_last_kf > criteria.min_translation &&
         lost_fraction > criteria.min_feature_loss_fraction;
}

MarginalizationStep marginalize(const FilterState& state, const std::vector<FeatureTrack>& tracks,
                                MarginalizationPolicy policy) {
  MarginalizationStep step;
  if (state.clones.size() < state.max_clones || state.clones.size() < 2) {
    spdlog::debug("marginalize: window not full ({} of {}), nothing to do", state.clones.size(),
                  state.max_clones);
    step.survivors = tracks;
    return step;
  }

  step.performed = true;
  step.removed_index = 0;
  const double oldest = state.clones.front().timestamp;
  const double second_latest = state.clones[state.clones.size() - 2].timestamp;

  for (const auto& track : tracks) {
    const bool at_oldest = track.observed_at(oldest);
    const bool selected = policy == MarginalizationPolicy::kKeyframe
                              ? at_oldest && track.observed_at(second_latest)
                              : at_oldest;
    if (selected) {
      step.batch.push_back(track);
      step.survivors.push_back(FeatureTrack{track.id, {}});
      continue;
    }
    FeatureTrack kept{track.id, {}};
    for (const auto& m : track.measurements) {
      if (m.timestamp != oldest) kept.measurements.push_back(m);
    }
    step.survivors.push_back(std::move(kept));
  }
  return step;
}

double min_eigenvalue(const MatrixXd& p) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(p, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace vdvio
