#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "vdvio/feature_track.hpp"
#include "vdvio/geom.hpp"

namespace vdvio {

/// Error-state layout. The IMU block is [theta, p, v, bg, ba]; each clone
/// contributes [theta, p]. Orientation errors are left perturbations:
/// R_true = exp(theta) R_hat with R the global-to-IMU rotation.
namespace layout {
inline constexpr int kImuDim = 15;
inline constexpr int kCloneDim = 6;
inline constexpr int kTheta = 0;
inline constexpr int kPos = 3;
inline constexpr int kVel = 6;
inline constexpr int kBiasGyro = 9;
inline constexpr int kBiasAccel = 12;
inline constexpr int clone_offset(std::size_t i) {
  return kImuDim + kCloneDim * static_cast<int>(i);
}
}  // namespace layout

struct ImuState {
  UnitQuaternion orientation;  // global -> IMU
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();

  Mat3 rotation() const { return orientation.to_rotation(); }
  bool is_finite() const;
};

struct ClonePose {
  double timestamp = 0.0;
  UnitQuaternion orientation;  // global -> IMU
  Vec3 position = Vec3::Zero();
  bool is_keyframe = true;

  Mat3 rotation() const { return orientation.to_rotation(); }
  /// Pose as a transform mapping IMU-frame points into the global frame.
  RigidTransform imu_to_global() const;
};

struct FilterState {
  double timestamp = 0.0;
  ImuState imu;
  std::vector<ClonePose> clones;  // oldest first
  Eigen::MatrixXd covariance = Eigen::MatrixXd::Zero(layout::kImuDim, layout::kImuDim);
  std::size_t max_clones = 11;

  int dim() const { return static_cast<int>(covariance.rows()); }
  std::size_t clone_count() const { return clones.size(); }
  /// Index of the clone with this exact timestamp, or -1.
  int clone_index(double t) const;
};

class WindowFullError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Applies an error-state correction through boxplus on every component.
void apply_correction(FilterState& state, const Eigen::VectorXd& dx);

/// Averages the covariance with its transpose.
void symmetrize(Eigen::MatrixXd& p);

/// Appends a clone of the current IMU pose and grows the covariance by six
/// rows and columns with the exact cross-correlation. Throws WindowFullError
/// when max_clones is reached and std::invalid_argument when t does not
/// follow the newest clone.
FilterState augment_clone(FilterState state, double t, bool is_keyframe);

/// Deletes clone `index` and its covariance rows/columns.
FilterState remove_clone(FilterState state, std::size_t index);

struct KeyframeCriteria {
  double min_features = 50;
  double min_translation = 0.1;           // meters
  double min_feature_loss_fraction = 0.10;
};

/// All three criteria must be exceeded (strict inequalities).
bool select_keyframe(double n_features, double translation_since_last_kf, double lost_fraction,
                     const KeyframeCriteria& criteria = {});

enum class MarginalizationPolicy {
  /// Update with features seen in both the oldest and the second-latest
  /// keyframe, then drop only the oldest clone.
  kKeyframe,
  /// Sliding-window MSCKF: update with every feature seen in the oldest clone.
  kOldest,
};

struct MarginalizationStep {
  /// Tracks to use in a visual update against the state *before* the clone is removed.
  std::vector<FeatureTrack> batch;
  /// Every input track, with measurements of the removed clone dropped and
  /// batch tracks emptied (their ids stay alive for future keyframes).
  std::vector<FeatureTrack> survivors;
  std::size_t removed_index = 0;
  bool performed = false;
};

/// Plans a marginalization on a full window. When the window is not full the
/// returned step has performed == false and all tracks survive unchanged.
/// Batch measurements are consumed and never reused.
MarginalizationStep marginalize(const FilterState& state, const std::vector<FeatureTrack>& tracks,
                                MarginalizationPolicy policy = MarginalizationPolicy::kKeyframe);

double min_eigenvalue(const Eigen::MatrixXd& p);

}  // namespace vdvio
