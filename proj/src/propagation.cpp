#include "vdvio/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace vdvio {

using Eigen::MatrixXd;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat15x12 = Eigen::Matrix<double, 15, 12>;

namespace {

double step_length(const ImuSample& a, const ImuSample& b) {
  const double dt = b.timestamp - a.timestamp;
  if (!(dt > 0.0)) {
    throw std::invalid_argument("IMU samples out of order");
  }
  if (dt > kMaxPropagationStep + 1e-12) {
    throw std::invalid_argument("IMU step exceeds the maximum propagation interval");
  }
  return dt;
}

}  // namespace

ImuState propagate_mean(const ImuState& x, const ImuSample& a, const ImuSample& b,
                        double gravity_magnitude) {
  const double dt = step_length(a, b);
  const Vec3 omega = 0.5 * (a.gyro + b.gyro) - x.gyro_bias;
  const Vec3 g = gravity_vector(gravity_magnitude);

  ImuState out = x;
  out.orientation = quat_boxplus(x.orientation, -omega * dt);
  const Mat3 r0 = x.rotation();
  const Mat3 r1 = out.rotation();
  const Vec3 acc = 0.5 * (r0.transpose() * (a.accel - x.accel_bias) +
                          r1.transpose() * (b.accel - x.accel_bias)) + g;
  out.velocity = x.velocity + acc * dt;
  out.position = x.position + x.velocity * dt + 0.5 * acc * dt * dt;
  return out;
}

PropagationJacobians propagation_jacobians(const ImuState& x, const ImuSample& a,
                                           const ImuSample& b, double gravity_magnitude) {
  using namespace layout;
  const double dt = step_length(a, b);
  (void)gravity_magnitude;  // gravity is state independent

  const Vec3 omega = 0.5 * (a.gyro + b.gyro) - x.gyro_bias;
  const Mat3 delta_r = so3_exp(-omega * dt);
  const Mat3 r0 = x.rotation();
  const Mat3 r1 = delta_r * r0;
  const Vec3 acc0 = a.accel - x.accel_bias;
  const Vec3 acc1 = b.accel - x.accel_bias;
  const Mat3 jl = so3_left_jacobian(-omega * dt);

  const Mat3 dtheta_dbg = jl * dt;
  const Mat3 dacc_dtheta =
      0.5 * (r0.transpose() * skew(acc0) + r1.transpose() * skew(acc1) * delta_r);
  const Mat3 dacc_dbg = 0.5 * r1.transpose() * skew(acc1) * dtheta_dbg;
  const Mat3 dacc_dba = -0.5 * (r0.transpose() + r1.transpose());

  PropagationJacobians j;
  j.dt = dt;
  Mat15& phi = j.phi;
  phi.setIdentity();
  phi.block<3, 3>(kTheta, kTheta) = delta_r;
  phi.block<3, 3>(kTheta, kBiasGyro) = dtheta_dbg;

  phi.block<3, 3>(kVel, kTheta) = dacc_dtheta * dt;
  phi.block<3, 3>(kVel, kBiasGyro) = dacc_dbg * dt;
  phi.block<3, 3>(kVel, kBiasAccel) = dacc_dba * dt;

  const double half_dt2 = 0.5 * dt * dt;
  phi.block<3, 3>(kPos, kTheta) = dacc_dtheta * half_dt2;
  phi.block<3, 3>(kPos, kVel) = Mat3::Identity() * dt;
  phi.block<3, 3>(kPos, kBiasGyro) = dacc_dbg * half_dt2;
  phi.block<3, 3>(kPos, kBiasAccel) = dacc_dba * half_dt2;

  // White measurement noise enters exactly like the matching bias.
  Mat15x12& g = j.noise;
  g.setZero();
  g.block<15, 3>(0, 0) = phi.block<15, 3>(0, kBiasGyro);
  g.block<15, 3>(0, 3) = phi.block<15, 3>(0, kBiasAccel);
  g.block<3, 3>(kTheta, 0) = dtheta_dbg;
  g.block<3, 3>(kBiasGyro, 0).setZero();
  g.block<3, 3>(kBiasAccel, 3).setZero();
  g.block<3, 3>(kBiasGyro, 6).setIdentity();
  g.block<3, 3>(kBiasAccel, 9).setIdentity();
  return j;
}

Eigen::Matrix<double, 12, 12> discrete_noise(const ImuNoiseParams& noise, double dt) {
  Eigen::Matrix<double, 12, 12> q = Eigen::Matrix<double, 12, 12>::Zero();
  const auto sq = [](double v) { return v * v; };
  q.diagonal().segment<3>(0).setConstant(sq(noise.gyro_noise_density) / dt);
  q.diagonal().segment<3>(3).setConstant(sq(noise.accel_noise_density) / dt);
  q.diagonal().segment<3>(6).setConstant(sq(noise.gyro_bias_walk) * dt);
  q.diagonal().segment<3>(9).setConstant(sq(noise.accel_bias_walk) * dt);
  return q;
}

MatrixXd propagate_covariance(const MatrixXd& p, const Mat15& phi, const Mat15x12& g,
                              const ImuNoiseParams& noise, double dt) {
  constexpr int k = layout::kImuDim;
  const int n = static_cast<int>(p.rows());
  const int rest = n - k;

  MatrixXd out = p;
  const Mat15 p_ii = p.topLeftCorner<k, k>();
  out.topLeftCorner<k, k>() =
      phi * p_ii * phi.transpose() + g * discrete_noise(noise, dt) * g.transpose();
  if (rest > 0) {
    out.topRightCorner(k, rest) = phi * p.topRightCorner(k, rest);
    out.bottomLeftCorner(rest, k) = out.topRightCorner(k, rest).transpose();
  }
  out.topLeftCorner<k, k>() = 0.5 * (out.topLeftCorner<k, k>() +
                                     out.topLeftCorner<k, k>().transpose()).eval();
  return out;
}

void propagate(FilterState& state, const ImuSample& a, const ImuSample& b,
               const ImuNoiseParams& noise) {
  const PropagationJacobians j = propagation_jacobians(state.imu, a, b, noise.gravity_magnitude);
  state.imu = propagate_mean(state.imu, a, b, noise.gravity_magnitude);

  // In-place equivalent of propagate_covariance that avoids copying the clone block.
  constexpr int k = layout::kImuDim;
  auto& p = state.covariance;
  const int rest = static_cast<int>(p.rows()) - k;
  const Mat15 p_ii = p.topLeftCorner<k, k>();
  Mat15 next = j.phi * p_ii * j.phi.transpose() +
               j.noise * discrete_noise(noise, j.dt) * j.noise.transpose();
  p.topLeftCorner<k, k>() = 0.5 * (next + next.transpose());
  if (rest > 0) {
    const MatrixXd cross = j.phi * p.topRightCorner(k, rest);
    p.topRightCorner(k, rest) = cross;
    p.bottomLeftCorner(rest, k) = cross.transpose();
  }
  state.timestamp = b.timestamp;
}

void propagate_batch(FilterState& state, std::span<const ImuSample> samples,
                     const ImuNoiseParams& noise) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const ImuSample& a = samples[i - 1];
    const ImuSample& b = samples[i];
    const double dt = b.timestamp - a.timestamp;
    if (dt <= kMaxPropagationStep) {
      propagate(state, a, b, noise);
      continue;
    }
    spdlog::warn("IMU data gap of {:.3f} s at t={:.3f}; holding last sample", dt, a.timestamp);
    ImuSample from = a;
    while (b.timestamp - from.timestamp > kMaxPropagationStep) {
      ImuSample to = from;
      to.timestamp = from.timestamp + kMaxPropagationStep;
      propagate(state, from, to, noise);
      from = to;
    }
    ImuSample last = a;
    last.timestamp = b.timestamp;
    propagate(state, from, last, noise);
  }
}

ImuSample interpolate_imu(const ImuSample& a, const ImuSample& b, double t) {
  if (b.timestamp == a.timestamp) return b;
  const double s = (t - a.timestamp) / (b.timestamp - a.timestamp);
  ImuSample out;
  out.timestamp = t;
  out.accel = (1.0 - s) * a.accel + s * b.accel;
  out.gyro = (1.0 - s) * a.gyro + s * b.gyro;
  return out;
}

}  // namespace vdvio
