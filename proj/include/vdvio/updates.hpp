#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "vdvio/feature_track.hpp"
#include "vdvio/sensors.hpp"
#include "vdvio/state.hpp"

namespace vdvio {

/// Residual and Jacobian linearized as r ~= H dx + n.
struct LinearizedMeasurement {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
};

// ---------------------------------------------------------------- DVL

/// Predicted DVL-frame velocity: R_ID^T (R v + [w]x p_D).
Vec3 predict_dvl_velocity(const ImuState& imu, const Extrinsics& ext, const Vec3& omega);

/// omega is the bias-corrected gyro rate at the measurement time.
LinearizedMeasurement dvl_velocity_residual(const FilterState& state, const DvlVelocity& z,
                                            const Extrinsics& ext, const Vec3& omega);

// ---------------------------------------------------------------- pressure

/// Global-z displacement implied by two depth readings:
/// s R^T R_ID R_DP ([0 0 d_in] - [0 0 d_k]).
double pressure_displacement(const UnitQuaternion& orientation, const Extrinsics& ext,
                             const PressureSample& initial, const PressureSample& current);

/// Residual = pressure_displacement - p_z. The Jacobian is that of
/// h(x) = p_z - pressure_displacement(x), which fills the position-z and
/// orientation columns.
LinearizedMeasurement pressure_residual(const FilterState& state, const PressureSample& z,
                                        const PressureSample& initial, const Extrinsics& ext);

// ---------------------------------------------------------------- visual

class BehindCameraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinFeatureDepth = 0.05;

/// Feature position in the camera frame of a clone.
Vec3 feature_in_camera(const ClonePose& clone, const Extrinsics& ext, const Vec3& p_f_global);
Vec2 project(const Vec3& p_cam);

struct VisualResidualBlock {
  Eigen::VectorXd residual;
  Eigen::MatrixXd H_x;  // rows x state dim
  Eigen::MatrixXd H_f;  // rows x 3 (empty after projection)
};

/// Stacks z - pi(p_C) over every measurement of the track. All measurement
/// timestamps must name clones in the window. Throws BehindCameraError when
/// any camera sees the feature closer than kMinFeatureDepth.
VisualResidualBlock visual_feature_residual(const FilterState& state, const Extrinsics& ext,
                                            const FeatureTrack& track, const Vec3& p_f_global);

/// Left-nullspace projection removing the feature-position dependence.
/// Output rows = input rows - 3. Throws DegenerateGeometryError when H_f is
/// not full column rank or leaves no rows.
VisualResidualBlock nullspace_project(const VisualResidualBlock& block);

/// Reduces a tall system with an orthonormal transform to at most H.cols() rows.
void compress_measurement(Eigen::MatrixXd& H, Eigen::VectorXd& r);

// ---------------------------------------------------------------- EKF

/// Chi-square quantile for dof degrees of freedom.
double chi2_quantile(int dof, double confidence);

/// Mahalanobis test of r against H P H^T + R. A singular innovation covariance rejects.
bool chi2_gate(const Eigen::VectorXd& r, const Eigen::MatrixXd& H, const Eigen::MatrixXd& P,
               const Eigen::MatrixXd& R_meas, double confidence = 0.95);

/// Joseph-form update applied in place. Returns false (state untouched) when
/// the innovation covariance cannot be factored.
bool try_ekf_update(FilterState& state, const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                    const Eigen::MatrixXd& R_meas);

FilterState ekf_update(FilterState state, const Eigen::VectorXd& r, const Eigen::MatrixXd& H,
                       const Eigen::MatrixXd& R_meas);

}  // namespace vdvio
