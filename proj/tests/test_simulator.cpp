#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "vdvio/feature.hpp"
#include "vdvio/simulator.hpp"
#include "vdvio/state.hpp"

using namespace vdvio;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

TrajectorySpec wobbly_mission() {
  TrajectorySpec spec;
  spec.segments = {{SegmentType::kHover, 5.0, 0.0, 0.0},
                   {SegmentType::kTransect, 30.0, 0.4, 0.0},
                   {SegmentType::kTurn, 20.0, 0.3, std::numbers::pi / 2},
                   {SegmentType::kTurn, 10.0, 0.0, -std::numbers::pi},
                   {SegmentType::kTransect, 12.0, 0.2, 0.0}};
  spec.initial_yaw = 0.4;
  spec.roll_amplitude = 3 * kDeg;
  spec.pitch_amplitude = 2 * kDeg;
  spec.heave_amplitude = 0.1;
  return spec;
}

SimulationConfig hover_config(double duration) {
  SimulationConfig c;
  c.trajectory.segments = {{SegmentType::kHover, duration, 0.0, 0.0}};
  c.ice.amplitude = 0.0;
  c.noise = SimulationNoise::zero();
  c.extrinsics = default_extrinsics();
  return c;
}

ClonePose pose_of(const TruthState& s) { return {s.timestamp, s.orientation, s.position, true}; }

}  // namespace

TEST(IceSurface, ZeroAmplitudeIsFlat) {
  IceSurface ice;
  ice.amplitude = 0.0;
  for (double x : {-3.0, 0.0, 7.5}) {
    for (double y : {-1.0, 2.0}) EXPECT_DOUBLE_EQ(*ice_height(ice, x, y), ice.base_height);
  }
}

TEST(IceSurface, OpeningHasNoSurface) {
  IceSurface ice;
  ice.openings.push_back({Vec2(10, 0), 0.5});
  EXPECT_FALSE(ice_height(ice, 10.2, 0.1).has_value());
  EXPECT_TRUE(ice_height(ice, 10.6, 0.0).has_value());
}

TEST(IceSurface, GradientMatchesFiniteDifferences) {
  IceSurface ice;
  ice.amplitude = 0.15;
  const double h = 1e-5;
  for (double x = -20; x <= 20; x += 3.7) {
    for (double y = -15; y <= 15; y += 4.1) {
      const Vec2 g = ice_gradient(ice, x, y);
      const double gx = (*ice_height(ice, x + h, y) - *ice_height(ice, x - h, y)) / (2 * h);
      const double gy = (*ice_height(ice, x, y + h) - *ice_height(ice, x, y - h)) / (2 * h);
      EXPECT_NEAR(g.x(), gx, 1e-6);
      EXPECT_NEAR(g.y(), gy, 1e-6);
    }
  }
}

TEST(GroundTruth, TransectDurationAndLength) {
  TrajectorySpec spec;
  spec.segments = {{SegmentType::kTransect, 40.0 / 0.4, 0.4, 0.0}};
  const GroundTruth gt(spec);
  EXPECT_DOUBLE_EQ(gt.duration(), 100.0);
  EXPECT_NEAR(gt.at(100.0).position.x(), 40.0, 1e-9);
  EXPECT_NEAR(gt.at(100.0).velocity.norm(), 0.0, 1e-12);
  EXPECT_NEAR(gt.at(50.0).velocity.x(), 40.0 / 95.0, 1e-12);
}

TEST(GroundTruth, HoverHasZeroVelocity) {
  TrajectorySpec spec;
  spec.segments = {{SegmentType::kHover, 10.0, 0.0, 0.0}};
  const GroundTruth gt(spec);
  for (double t = 0; t <= 10; t += 0.5) {
    const TruthState s = gt.at(t);
    EXPECT_EQ(s.velocity.norm(), 0.0);
    EXPECT_EQ(s.angular_velocity.norm(), 0.0);
    EXPECT_EQ(s.position.norm(), 0.0);
  }
}

TEST(GroundTruth, RejectsBadSpecs) {
  TrajectorySpec spec;
  EXPECT_THROW(GroundTruth{spec}, std::invalid_argument);
  spec.segments = {{SegmentType::kTransect, 10.0, 1.5, 0.0}};
  EXPECT_THROW(GroundTruth{spec}, std::invalid_argument);
  spec.segments = {{SegmentType::kHover, 0.0, 0.0, 0.0}};
  EXPECT_THROW(GroundTruth{spec}, std::invalid_argument);
  spec.segments = {{SegmentType::kHover, 1.0, 0.0, 0.0}};
  EXPECT_THROW(generate_ground_truth(spec, 0.02), std::invalid_argument);
}

TEST(GroundTruth, DerivativesMatchFiniteDifferences) {
  const GroundTruth gt(wobbly_mission());
  const double h = 1e-4;
  for (double t = h; t < gt.duration() - h; t += 0.37) {
    const TruthState s = gt.at(t), a = gt.at(t - h), b = gt.at(t + h);
    EXPECT_LT((s.velocity - (b.position - a.position) / (2 * h)).norm(), 1e-4) << t;
    EXPECT_LT((s.acceleration - (b.velocity - a.velocity) / (2 * h)).norm(), 1e-4) << t;
    // Body rates: C^T dC/dt = [w]x with C the body-to-global rotation.
    const Mat3 c = s.orientation.to_rotation().transpose();
    const Mat3 dc = (b.orientation.to_rotation().transpose() -
                     a.orientation.to_rotation().transpose()) / (2 * h);
    EXPECT_LT((s.angular_velocity - vee(c.transpose() * dc)).norm(), 1e-4) << t;
  }
}

TEST(GroundTruth, SecondDerivativeContinuousAtSegmentBoundaries) {
  const TrajectorySpec spec = wobbly_mission();
  const GroundTruth gt(spec);
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < spec.segments.size(); ++i) {
    t += spec.segments[i].duration;
    const TruthState a = gt.at(t - 1e-7), b = gt.at(t + 1e-7);
    EXPECT_LT((a.acceleration - b.acceleration).norm(), 1e-5) << t;
    EXPECT_LT((a.velocity - b.velocity).norm(), 1e-6) << t;
    EXPECT_LT((a.angular_velocity - b.angular_velocity).norm(), 1e-5) << t;
  }
}

TEST(GroundTruth, SamplesIncludeEndpoint) {
  const auto samples = generate_ground_truth(wobbly_mission(), 0.01);
  EXPECT_DOUBLE_EQ(samples.front().timestamp, 0.0);
  EXPECT_NEAR(samples.back().timestamp, 77.0, 1e-9);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    EXPECT_GT(samples[i].timestamp, samples[i - 1].timestamp);
  }
  EXPECT_NO_THROW(to_trajectory(samples).validate());
}

TEST(Lawnmower, LegLengthsAndDuration) {
  const TrajectorySpec spec = lawnmower(2, 40.0, 0.4, 2.0, 5.0, {0}, 60.0);
  const GroundTruth gt(spec);
  // hover, leg, hover, turn, lane, turn, leg
  ASSERT_EQ(spec.segments.size(), 7u);
  EXPECT_DOUBLE_EQ(gt.duration(), 5 + 100 + 60 + 10 + 8 + 10 + 100);
  const Vec3 end = gt.at(gt.duration()).position;
  EXPECT_NEAR(end.x(), 0.0, 1e-9);
  EXPECT_NEAR(end.y(), 2.0, 1e-9);
}

TEST(Simulator, BeamRangeOnFlatIce) {
  SimulationConfig c = hover_config(2.0);
  const auto result = simulate(c, 1);
  const Vec3 p_id = c.extrinsics.dvl_to_imu.translation;
  // DVL level with the body, so standoff is measured from the DVL origin.
  const double standoff = c.ice.base_height - p_id.z();
  ASSERT_FALSE(result.log.clouds.empty());
  for (const auto& cloud : result.log.clouds) {
    for (const auto& q : cloud.points) {
      EXPECT_NEAR(q.norm(), standoff / std::cos(25 * kDeg), 1e-9);
      EXPECT_NEAR(q.z(), standoff, 1e-9);
    }
  }
}

TEST(Simulator, TwoMeterStandoffBeamRange) {
  IceSurface ice;
  ice.amplitude = 0.0;
  ice.base_height = 2.0;
  Extrinsics ext;
  TruthState s;
  for (int k = 0; k < 4; ++k) {
    const auto hit = dvl_beam_hit(ice, ext, s, k, 25.0);
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->norm(), 2.0 / std::cos(25 * kDeg), 1e-12);
    const double az = std::atan2(hit->y(), hit->x());
    EXPECT_NEAR(std::remainder(az - (45 + 90 * k) * kDeg, 2 * std::numbers::pi), 0.0, 1e-12);
  }
}

TEST(Simulator, BeamHitsRoughIce) {
  IceSurface ice;
  ice.amplitude = 0.2;
  Extrinsics ext;
  TruthState s;
  s.position = Vec3(3.3, -1.2, -0.4);
  s.orientation = UnitQuaternion::from_rotation_vector(Vec3(0.05, -0.04, 0.7));
  for (int k = 0; k < 4; ++k) {
    const auto hit = dvl_beam_hit(ice, ext, s, k, 25.0);
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->z(), *ice_height(ice, hit->x(), hit->y()), 1e-10);
  }
}

TEST(Simulator, OpeningInvalidatesCloud) {
  SimulationConfig c = hover_config(2.0);
  const TruthState s = GroundTruth(c.trajectory).at(0.0);
  const auto hit = dvl_beam_hit(c.ice, c.extrinsics, s, 0, 25.0);
  ASSERT_TRUE(hit);
  c.ice.openings.push_back({hit->head<2>(), 0.3});
  const auto result = simulate(c, 1);
  EXPECT_TRUE(result.log.clouds.empty());
  EXPECT_EQ(result.log.dvl.size(), 9u);
}

TEST(Simulator, ZeroNoiseDvlEqualsBodyVelocity) {
  SimulationConfig c;
  c.trajectory = wobbly_mission();
  c.noise = SimulationNoise::zero();
  c.extrinsics = default_extrinsics();
  c.camera.landmark_spacing = 1.0;
  const auto result = simulate(c, 3);
  const GroundTruth gt(c.trajectory);
  const Mat3& r_id = c.extrinsics.dvl_to_imu.rotation;
  const Vec3& p_id = c.extrinsics.dvl_to_imu.translation;
  const double h = 1e-5;
  for (const auto& v : result.log.dvl) {
    if (v.timestamp < h || v.timestamp > gt.duration() - h) continue;
    // Velocity of the DVL origin by differencing its global position.
    const auto origin = [&](double t) {
      const TruthState s = gt.at(t);
      return Vec3(s.position + s.orientation.to_rotation().transpose() * p_id);
    };
    const Vec3 v_global = (origin(v.timestamp + h) - origin(v.timestamp - h)) / (2 * h);
    const Vec3 expected = r_id.transpose() * gt.at(v.timestamp).orientation.to_rotation() * v_global;
    EXPECT_LT((v.velocity - expected).norm(), 1e-7) << v.timestamp;
  }
}

TEST(Simulator, ZeroNoiseStaticImuMeasuresGravity) {
  const auto result = simulate(hover_config(1.0), 1);
  ASSERT_EQ(result.log.imu.size(), 101u);
  for (const auto& m : result.log.imu) {
    EXPECT_LT((m.accel - Vec3(0, 0, 9.81)).norm(), 1e-12);
    EXPECT_LT(m.gyro.norm(), 1e-12);
  }
  for (const auto& p : result.log.pressure) {
    EXPECT_NEAR(p.depth, 4.0, 1e-12);
  }
}

TEST(Simulator, Deterministic) {
  SimulationConfig c;
  c.trajectory = lawnmower(1, 8.0, 0.4, 2.0);
  c.extrinsics = default_extrinsics();
  const std::string a = format_log(simulate(c, 42).log);
  const std::string b = format_log(simulate(c, 42).log);
  const std::string d = format_log(simulate(c, 43).log);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d);
}

TEST(Simulator, StreamRatesAndOrdering) {
  SimulationConfig c;
  c.trajectory = lawnmower(1, 4.0, 0.4, 2.0);
  c.extrinsics = default_extrinsics();
  const auto r = simulate(c, 7);
  const double duration = c.trajectory.duration();
  EXPECT_EQ(r.log.imu.size(), static_cast<std::size_t>(std::floor(duration * 100 + 1e-9)) + 1);
  EXPECT_EQ(r.log.dvl.size(), static_cast<std::size_t>(std::floor(duration * 4 + 1e-9)) + 1);
  EXPECT_EQ(r.log.camera.size(), static_cast<std::size_t>(std::floor(duration * 15 + 1e-9)) + 1);
  EXPECT_NO_THROW(r.log.validate());
}

TEST(Simulator, VisibleLandmarkCountAtTwoMeters) {
  SimulationConfig c = hover_config(1.0);
  c.extrinsics.imu_to_cam.translation = Vec3::Zero();
  const auto r = simulate(c, 5);
  for (const auto& f : r.log.camera) {
    EXPECT_GE(f.features.size(), 50u);
    EXPECT_LE(f.features.size(), 150u);
  }
}

TEST(Simulator, TrackSurvivalRate) {
  SimulationConfig c = hover_config(20.0);
  c.noise = SimulationNoise::zero();
  const auto r = simulate(c, 9);
  // In a static hover every feature stays in view, so drop-outs are the survival draws.
  std::size_t continued = 0, total = 0;
  for (std::size_t i = 1; i < r.log.camera.size(); ++i) {
    std::map<std::uint64_t, bool> now;
    for (const auto& f : r.log.camera[i].features) now[f.id] = true;
    for (const auto& f : r.log.camera[i - 1].features) {
      ++total;
      continued += now.count(f.id);
    }
  }
  const double rate = static_cast<double>(continued) / total;
  EXPECT_NEAR(rate, 0.98, 0.005);
}

TEST(Simulator, ZeroNoiseProjectionsTriangulateLandmarks) {
  SimulationConfig c;
  c.trajectory = wobbly_mission();
  c.noise = SimulationNoise::zero();
  c.extrinsics = default_extrinsics();
  const auto r = simulate(c, 11);
  const GroundTruth gt(c.trajectory);

  // Rebuild per-id tracks over a short window and triangulate with true poses.
  std::map<std::uint64_t, FeatureTrack> tracks;
  std::vector<ClonePose> poses;
  for (std::size_t i = 150; i < 240; i += 6) {
    const auto& frame = r.log.camera[i];
    poses.push_back(pose_of(gt.at(frame.timestamp)));
    for (const auto& f : frame.features) {
      tracks[f.id].id = f.id;
      tracks[f.id].measurements.push_back({frame.timestamp, f.uv});
    }
  }
  int checked = 0;
  for (const auto& [id, track] : tracks) {
    if (track.size() < 5) continue;
    const Vec3 p = triangulate_dlt(track, poses, c.extrinsics);
    double best = 1e9;
    for (const auto& l : r.landmarks) best = std::min(best, (l - p).norm());
    EXPECT_LT(best, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Simulator, FlatIceFeatureDepthsMatchCloudDepths) {
  SimulationConfig c = hover_config(3.0);
  const auto r = simulate(c, 2);
  const TruthState s = GroundTruth(c.trajectory).at(0.0);
  const Mat3 a = c.extrinsics.imu_to_cam.rotation * s.orientation.to_rotation();
  const Mat3& r_id = c.extrinsics.dvl_to_imu.rotation;
  const Vec3& p_id = c.extrinsics.dvl_to_imu.translation;
  const auto depth_in_cam = [&](const Vec3& p_global) {
    return (a * (p_global - s.position) + c.extrinsics.imu_to_cam.translation).z();
  };
  const auto& cloud = r.log.clouds.front();
  double lo = 1e9, hi = -1e9;
  for (const auto& q : cloud.points) {
    const Vec3 global = s.position + s.orientation.to_rotation().transpose() * (r_id * q + p_id);
    lo = std::min(lo, depth_in_cam(global));
    hi = std::max(hi, depth_in_cam(global));
  }
  for (const auto& l : r.landmarks) {
    const double z = depth_in_cam(l);
    EXPECT_GE(z, lo - 1e-9);
    EXPECT_LE(z, hi + 1e-9);
  }
}

TEST(PoissonDisk, SpacingAndCoverage) {
  const double r = 0.3;
  const auto pts = poisson_disk(Vec2(0, 0), Vec2(6, 4), r, 17);
  ASSERT_GT(pts.size(), 100u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) EXPECT_GE((pts[i] - pts[j]).norm(), r);
  }
  // Interior points lie within 2r of a sample.
  for (double x = 0.5; x < 5.5; x += 0.25) {
    for (double y = 0.5; y < 3.5; y += 0.25) {
      double best = 1e9;
      for (const auto& p : pts) best = std::min(best, (p - Vec2(x, y)).norm());
      EXPECT_LT(best, 2 * r);
    }
  }
  EXPECT_EQ(pts, poisson_disk(Vec2(0, 0), Vec2(6, 4), r, 17));
}
