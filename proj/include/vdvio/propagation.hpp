#pragma once

#include <span>

#include <Eigen/Core>

#include "vdvio/sensors.hpp"
#include "vdvio/state.hpp"

namespace vdvio {

/// Continuous-time IMU noise densities.
struct ImuNoiseParams {
  double gyro_noise_density = 1.0e-4;    // rad/s/sqrt(Hz)
  double accel_noise_density = 2.0e-3;   // m/s^2/sqrt(Hz)
  double gyro_bias_walk = 1.0e-6;        // rad/s^2/sqrt(Hz)
  double accel_bias_walk = 1.0e-4;       // m/s^3/sqrt(Hz)
  double gravity_magnitude = 9.81;
};

/// Gravity in the z-up global frame.
inline Vec3 gravity_vector(double magnitude) { return Vec3(0.0, 0.0, -magnitude); }

inline constexpr double kMaxPropagationStep = 0.5;

/// Midpoint integration between two IMU samples with biases held constant.
/// Throws std::invalid_argument unless 0 < b.t - a.t <= kMaxPropagationStep.
ImuState propagate_mean(const ImuState& x, const ImuSample& a, const ImuSample& b,
                        double gravity_magnitude = 9.81);

struct PropagationJacobians {
  Eigen::Matrix<double, 15, 15> phi;
  /// Columns: gyro noise, accel noise, gyro bias walk, accel bias walk.
  Eigen::Matrix<double, 15, 12> noise;
  double dt = 0.0;
};

/// Exact linearization of propagate_mean in the error state.
PropagationJacobians propagation_jacobians(const ImuState& x, const ImuSample& a,
                                           const ImuSample& b, double gravity_magnitude = 9.81);

/// Discrete noise covariance for one step of length dt.
Eigen::Matrix<double, 12, 12> discrete_noise(const ImuNoiseParams& noise, double dt);

/// P' = Phi P Phi^T + G Q G^T on the IMU block; clone-IMU cross terms are
/// multiplied by Phi and clone-clone blocks are unchanged.
Eigen::MatrixXd propagate_covariance(const Eigen::MatrixXd& p,
                                     const Eigen::Matrix<double, 15, 15>& phi,
                                     const Eigen::Matrix<double, 15, 12>& g,
                                     const ImuNoiseParams& noise, double dt);

/// One mean + covariance step; updates state.timestamp to b.timestamp.
void propagate(FilterState& state, const ImuSample& a, const ImuSample& b,
               const ImuNoiseParams& noise);

/// Integrates consecutive samples of a batch. Gaps longer than
/// kMaxPropagationStep are bridged by holding the earlier sample, with a warning.
void propagate_batch(FilterState& state, std::span<const ImuSample> samples,
                     const ImuNoiseParams& noise);

/// Linear interpolation of an IMU sample at time t in [a.t, b.t].
ImuSample interpolate_imu(const ImuSample& a, const ImuSample& b, double t);

}  // namespace vdvio
