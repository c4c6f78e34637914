#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "vdvio/estimator.hpp"
#include "vdvio/simulator.hpp"

using namespace vdvio;

namespace {

SimulationConfig short_mission(bool noisy) {
  SimulationConfig c;
  c.trajectory = lawnmower(2, 10.0, 0.3, 2.0, 5.0);
  c.trajectory.roll_amplitude = 2.0 * std::numbers::pi / 180.0;
  c.trajectory.pitch_amplitude = 1.5 * std::numbers::pi / 180.0;
  c.trajectory.heave_amplitude = 0.05;
  c.extrinsics = default_extrinsics();
  if (!noisy) c.noise = SimulationNoise::zero();
  return c;
}

double final_error(const SimulationConfig& sim, const EstimatorResult& r) {
  const GroundTruth truth(sim.trajectory);
  const auto& last = r.trajectory.points.back();
  return (last.position - truth.at(last.timestamp).position).norm();
}

}  // namespace

TEST(InitializeStatic, RecoversAttitudeAndGyroBias) {
  SimulationConfig c = short_mission(false);
  c.trajectory.initial_yaw = 0.0;
  c.noise.initial_gyro_bias = Vec3(1e-3, -2e-3, 5e-4);
  const auto sim = simulate(c, 3);
  const FilterState s = initialize_static(sim.log.imu, InitOptions{}, 9.81, 11);
  EXPECT_LT((s.imu.gyro_bias - c.noise.initial_gyro_bias).norm(), 1e-12);
  EXPECT_LT((s.imu.rotation() - Mat3::Identity()).norm(), 1e-12);
  EXPECT_EQ(s.imu.position, Vec3::Zero());
  EXPECT_EQ(s.covariance.rows(), 15);
  EXPECT_NEAR(s.timestamp, 5.0, 1e-9);
}

TEST(InitializeStatic, TiltedVehicleGivesGravityAlignedAttitude) {
  std::vector<ImuSample> imu;
  const Mat3 r = so3_exp(Vec3(0.1, -0.05, 0.0));  // global -> IMU
  for (int i = 0; i <= 600; ++i) imu.push_back({i * 0.01, r * Vec3(0, 0, 9.81), Vec3::Zero()});
  const FilterState s = initialize_static(imu, InitOptions{}, 9.81, 11);
  EXPECT_LT((s.imu.rotation() * Vec3::UnitZ() - r * Vec3::UnitZ()).norm(), 1e-12);
}

TEST(InitializeStatic, RejectsMotionAndShortLogs) {
  std::vector<ImuSample> imu;
  for (int i = 0; i <= 600; ++i) {
    imu.push_back({i * 0.01, Vec3(i % 2 ? 1.0 : -1.0, 0, 9.81), Vec3::Zero()});
  }
  EXPECT_THROW(initialize_static(imu, InitOptions{}, 9.81, 11), InitializationError);
  imu.resize(100);
  for (auto& m : imu) m.accel = Vec3(0, 0, 9.81);
  EXPECT_THROW(initialize_static(imu, InitOptions{}, 9.81, 11), InitializationError);
  EXPECT_THROW(initialize_static({}, InitOptions{}, 9.81, 11), InitializationError);
}

TEST(RunEstimator, ZeroNoiseTracksGroundTruth) {
  const SimulationConfig c = short_mission(false);
  const auto sim = simulate(c, 1);
  const auto r = run_estimator(sim.log, EstimatorConfig{});
  EXPECT_LT(final_error(c, r), 1e-3);
  EXPECT_FALSE(r.diagnostics.diverged);
  EXPECT_GT(r.diagnostics.keyframes, 10u);
  EXPECT_GT(r.diagnostics.visual_updates, 0u);
  EXPECT_GT(r.diagnostics.features_enhanced, 0u);
  EXPECT_EQ(r.diagnostics.features_gated, 0u);
  EXPECT_EQ(r.diagnostics.dvl_gated, 0u);
}

TEST(RunEstimator, OnePoseCovariancePerPose) {
  const auto sim = simulate(short_mission(true), 2);
  const auto r = run_estimator(sim.log, EstimatorConfig{});
  ASSERT_EQ(r.position_covariance.size(), r.trajectory.size());
  for (const auto& p : r.position_covariance) {
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(p).eigenvalues().minCoeff(), 0.0);
  }
  // Init pose, keyframes, final pose.
  EXPECT_EQ(r.trajectory.size(), r.diagnostics.keyframes + 2);
  EXPECT_NO_THROW(r.trajectory.validate());
}

TEST(RunEstimator, FixedRateOutputAddsPoses) {
  const auto sim = simulate(short_mission(true), 2);
  EstimatorConfig cfg;
  const auto base = run_estimator(sim.log, cfg);
  cfg.output_rate = 20.0;
  const auto dense = run_estimator(sim.log, cfg);
  EXPECT_GT(dense.trajectory.size(), base.trajectory.size());
  EXPECT_NO_THROW(dense.trajectory.validate());
}

TEST(RunEstimator, SensorAblationsRunToTheEnd) {
  const auto sim = simulate(short_mission(true), 4);
  const double end = sim.log.imu.back().timestamp;
  for (int variant = 0; variant < 5; ++variant) {
    EstimatorConfig cfg;
    if (variant == 0) cfg.dvl.enabled = false;
    if (variant == 1) cfg.visual.enabled = false;
    if (variant == 2) cfg.pressure.enabled = false;
    if (variant == 3) cfg.enhancement.enabled = false;
    if (variant == 4) cfg.keyframe.enabled = false;
    const auto r = run_estimator(sim.log, cfg);
    SCOPED_TRACE(variant);
    EXPECT_NEAR(r.trajectory.points.back().timestamp, end, 1e-9);
    EXPECT_GT(r.trajectory.size(), 10u);
    EXPECT_TRUE(r.final_state.covariance.allFinite());
    if (variant == 0) EXPECT_EQ(r.diagnostics.dvl_accepted, 0u);
    if (variant == 0 || variant == 3) EXPECT_EQ(r.diagnostics.features_enhanced, 0u);
    if (variant == 1) EXPECT_EQ(r.diagnostics.visual_updates, 0u);
    if (variant == 2) EXPECT_EQ(r.diagnostics.pressure_accepted, 0u);
  }
}

TEST(RunEstimator, KeyframeSwitchClonesEveryFrame) {
  const auto sim = simulate(short_mission(true), 5);
  EstimatorConfig cfg;
  cfg.keyframe.enabled = false;
  const auto r = run_estimator(sim.log, cfg);
  // Frames inside the initialization window or after the last IMU sample are skipped.
  std::size_t frames = 0;
  for (const auto& f : sim.log.camera) {
    frames += f.timestamp > cfg.init.duration && f.timestamp <= sim.log.imu.back().timestamp;
  }
  EXPECT_EQ(r.diagnostics.keyframes, frames);
  const auto full = run_estimator(sim.log, EstimatorConfig{});
  EXPECT_LT(full.diagnostics.keyframes, frames / 2);
}

TEST(RunEstimator, Deterministic) {
  const auto sim = simulate(short_mission(true), 7);
  const auto a = run_estimator(sim.log, EstimatorConfig{});
  const auto b = run_estimator(sim.log, EstimatorConfig{});
  EXPECT_EQ(format_trajectory(a.trajectory), format_trajectory(b.trajectory));
}

TEST(RunEstimator, RejectsBadConfig) {
  const auto sim = simulate(short_mission(false), 1);
  EstimatorConfig cfg;
  cfg.max_clones = 1;
  EXPECT_THROW(run_estimator(sim.log, cfg), std::invalid_argument);
}
