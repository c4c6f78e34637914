#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "vdvio/sensor_log.hpp"
#include "vdvio/simulator.hpp"
#include "vdvio/trajectory.hpp"

using namespace vdvio;

namespace {

TrajectoryRecord spiral(std::size_t n, double dt = 0.1) {
  TrajectoryRecord t;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) * dt;
    t.points.push_back({s, Vec3(3 * std::cos(0.2 * s) + 0.1 * s, 2 * std::sin(0.3 * s), 0.05 * s),
                        UnitQuaternion::from_rotation_vector(Vec3(0.01 * s, 0, 0.2 * s))});
  }
  return t;
}

SensorLog small_log() {
  SimulationConfig c;
  c.trajectory = lawnmower(1, 2.0, 0.4, 1.0, 2.0);
  c.extrinsics = default_extrinsics();
  c.camera.landmark_spacing = 0.5;
  c.ice.amplitude = 0.1;
  return simulate(c, 77).log;
}

std::size_t error_line(const std::string& text) {
  try {
    parse_log(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

}  // namespace

TEST(TrajectoryIo, RoundTripIsLossless) {
  TrajectoryRecord t = spiral(50);
  t.points[3].orientation.reset();
  const std::string text = format_trajectory(t);
  const TrajectoryRecord back = parse_trajectory(text);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.points[i].timestamp, t.points[i].timestamp);
    EXPECT_EQ(back.points[i].position, t.points[i].position);
    EXPECT_EQ(back.points[i].orientation.has_value(), t.points[i].orientation.has_value());
    if (t.points[i].orientation) EXPECT_EQ(*back.points[i].orientation, *t.points[i].orientation);
  }
  EXPECT_EQ(format_trajectory(back), text);
}

TEST(TrajectoryIo, ParseErrorsCarryLineNumbers) {
  const auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_trajectory(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("# c\n0 0 0 0\n1 0 0\n"), 3u);
  EXPECT_EQ(line_of("0 0 0 0\n1 0 x 0\n"), 2u);
  EXPECT_EQ(line_of("0 0 0 0\n0 1 0 0\n"), 2u);
  EXPECT_EQ(line_of("0 0 0 0 0 0 0 0\n"), 1u);
}

TEST(TrajectoryIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "vdvio_traj_test.txt";
  const TrajectoryRecord t = spiral(10);
  write_trajectory(path, t);
  EXPECT_EQ(format_trajectory(read_trajectory(path)), format_trajectory(t));
  std::filesystem::remove(path);
  EXPECT_THROW(read_trajectory(path), std::runtime_error);
}

TEST(SensorLogIo, RoundTripIsByteIdentical) {
  const SensorLog log = small_log();
  ASSERT_FALSE(log.clouds.empty());
  const std::string text = format_log(log);
  const SensorLog back = parse_log(text);
  EXPECT_EQ(format_log(back), text);
  EXPECT_EQ(back.imu.size(), log.imu.size());
  EXPECT_EQ(back.clouds.size(), log.clouds.size());
  EXPECT_EQ(back.header.seed, 77u);
  EXPECT_EQ(back.imu[17].accel, log.imu[17].accel);
  EXPECT_EQ(back.camera[5].features.size(), log.camera[5].features.size());
  EXPECT_EQ(back.header.extrinsics.imu_to_cam.rotation, log.header.extrinsics.imu_to_cam.rotation);

  const auto path = std::filesystem::temp_directory_path() / "vdvio_log_test.jsonl";
  write_log(path, back);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), text);
  EXPECT_EQ(format_log(read_log(path)), text);
  std::filesystem::remove(path);
}

TEST(SensorLogIo, OutOfOrderImuIsRejected) {
  auto lines = lines_of(format_log(small_log()));
  // Move a later IMU record in front of an earlier one.
  std::size_t a = 0, b = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].find("\"type\":\"imu\"") == std::string::npos) continue;
    if (a == 0) {
      a = i;
    } else if (i > a + 3) {
      b = i;
      break;
    }
  }
  std::swap(lines[a], lines[b]);
  EXPECT_EQ(error_line(join(lines)), b + 1);
}

TEST(SensorLogIo, TruncatedFinalLineIsRejected) {
  std::string text = format_log(small_log());
  const std::size_t n = lines_of(text).size();
  text.resize(text.size() - 20);
  EXPECT_EQ(error_line(text), n);
}

TEST(SensorLogIo, HeaderChecks) {
  auto lines = lines_of(format_log(small_log()));
  auto bad_version = lines;
  const auto pos = bad_version[0].find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  bad_version[0].replace(pos, 11, "\"version\":7");
  EXPECT_EQ(error_line(join(bad_version)), 1u);
  EXPECT_EQ(error_line(join({lines.begin() + 1, lines.end()})), 1u);
  EXPECT_THROW(parse_log(""), ParseError);
}

TEST(SensorLogIo, MalformedRecordsNameTheLine) {
  auto lines = lines_of(format_log(small_log()));
  auto unknown = lines;
  unknown.insert(unknown.begin() + 4, R"({"type":"sonar","t":0.0})");
  EXPECT_EQ(error_line(join(unknown)), 5u);
  auto short_vec = lines;
  ASSERT_NE(short_vec[1].find("\"imu\""), std::string::npos);
  short_vec[1] = R"({"type":"imu","t":0.0,"accel":[1,2],"gyro":[0,0,0]})";
  EXPECT_EQ(error_line(join(short_vec)), 2u);
}

TEST(SensorLog, ValidateRejectsOrphanCloud) {
  SensorLog log;
  log.dvl.push_back({0.0, Vec3::Zero(), 0.05});
  log.clouds.push_back({0.1, {}});
  EXPECT_THROW(log.validate(), std::invalid_argument);
}

TEST(Alignment, IdentityWhenEqual) {
  const TrajectoryRecord t = spiral(200);
  const Similarity s = align_umeyama(t, t, 1e9);
  EXPECT_LT((s.rotation - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT(s.translation.norm(), 1e-12);
  EXPECT_NEAR(s.scale, 1.0, 1e-12);
}

TEST(Alignment, RecoversKnownSimilarity) {
  const TrajectoryRecord gt = spiral(300);
  Similarity truth;
  truth.scale = 1.2;
  truth.rotation = Eigen::AngleAxisd(30.0 * std::numbers::pi / 180, Vec3::UnitZ()).toRotationMatrix();
  truth.translation = Vec3(5, -3, 1);
  // est maps onto gt through `truth`: gt = s R est + t.
  TrajectoryRecord est = gt;
  for (auto& p : est.points) {
    p.position = truth.rotation.transpose() * (p.position - truth.translation) / truth.scale;
  }
  const Similarity s = align_umeyama(est, gt, 1e9);
  EXPECT_NEAR(s.scale, 1.2, 1e-9);
  EXPECT_LT((s.rotation - truth.rotation).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((s.translation - truth.translation).cwiseAbs().maxCoeff(), 1e-9);
  const AteReport r = evaluate_trajectory(est, gt, 1e9);
  EXPECT_LT(r.rmse_xy, 1e-9);
}

TEST(Alignment, UsesOnlyTheWindow) {
  const TrajectoryRecord gt = spiral(400);  // 40 s
  TrajectoryRecord est = gt;
  for (auto& p : est.points) {
    if (p.timestamp > 9.0) p.position += Vec3(0.5 * (p.timestamp - 9.0), 0, 0);
  }
  const Similarity s = align_umeyama(est, gt, 9.0);
  EXPECT_LT((s.rotation - Mat3::Identity()).norm(), 1e-9);
  EXPECT_NEAR(s.scale, 1.0, 1e-9);
  const Similarity all = align_umeyama(est, gt, 1e9);
  EXPECT_GT((all.rotation - Mat3::Identity()).norm() + std::abs(all.scale - 1), 1e-3);
}

TEST(Alignment, TooFewPairsThrows) {
  const TrajectoryRecord gt = spiral(100);
  EXPECT_THROW(align_umeyama(gt, gt, 0.15), AlignmentError);
  TrajectoryRecord shifted = gt;
  for (auto& p : shifted.points) p.timestamp += 0.05;
  EXPECT_THROW(align_umeyama(shifted, gt, 1e9), AlignmentError);
}

TEST(Association, NearestWithinTolerance) {
  TrajectoryRecord est, gt;
  for (double t : {0.0, 0.1, 0.2, 0.3}) gt.points.push_back({t, Vec3::Zero(), std::nullopt});
  for (double t : {0.011, 0.19, 0.26}) est.points.push_back({t, Vec3::Zero(), std::nullopt});
  const auto pairs = associate(est, gt);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(pairs[1], (std::pair<std::size_t, std::size_t>{1, 2}));
}

TEST(Ate, IdenticalIsZero) {
  const TrajectoryRecord t = spiral(100);
  const AteReport r = compute_ate(t, t);
  EXPECT_EQ(r.rmse_x, 0.0);
  EXPECT_EQ(r.rmse_y, 0.0);
  EXPECT_EQ(r.rmse_xy, 0.0);
  EXPECT_EQ(r.pairs, 100u);
}

TEST(Ate, ConstantOffsetPinsFormula) {
  const TrajectoryRecord gt = spiral(100);
  TrajectoryRecord est = gt;
  for (auto& p : est.points) p.position += Vec3(3, 4, 0);
  const AteReport r = compute_ate(est, gt);
  EXPECT_NEAR(r.rmse_x, 3.0, 1e-12);
  EXPECT_NEAR(r.rmse_y, 4.0, 1e-12);
  EXPECT_NEAR(r.rmse_xy, 3.5, 1e-12);
  EXPECT_NEAR(r.rmse_planar, 5.0, 1e-12);
  EXPECT_NEAR(r.rmse_z, 0.0, 1e-12);
  ASSERT_EQ(r.series.size(), 100u);
  EXPECT_LT((r.series[7].error - Vec3(3, 4, 0)).norm(), 1e-12);
}

TEST(Ate, PublishedColumnsSatisfyMeanRelation) {
  // 0.39, 1.82 -> 1.11 (rounded), while the root-sum-square would give 1.86.
  EXPECT_NEAR(0.5 * (0.39 + 1.82), 1.11, 0.006);
  EXPECT_GT(std::abs(std::sqrt(0.39 * 0.39 + 1.82 * 1.82) - 1.11), 0.5);
}

TEST(Ate, InvariantToCommonRigidTransform) {
  const TrajectoryRecord gt = spiral(300);
  TrajectoryRecord est = gt;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.2);
  for (auto& p : est.points) p.position += Vec3(n(rng), n(rng), n(rng)) + Vec3(0.02 * p.timestamp, 0, 0);
  const AteReport a = evaluate_trajectory(est, gt, 10.0);
  const auto moved = [&](const Vec3& rotvec, const Vec3& t) {
    Similarity rigid;
    rigid.rotation = UnitQuaternion::from_rotation_vector(rotvec).to_rotation();
    rigid.translation = t;
    return evaluate_trajectory(apply_similarity(est, rigid), apply_similarity(gt, rigid), 10.0);
  };
  const auto total = [](const AteReport& r) {
    return r.rmse_x * r.rmse_x + r.rmse_y * r.rmse_y + r.rmse_z * r.rmse_z;
  };

  // Per-axis figures survive translations; horizontal and vertical figures
  // survive yaw; only the full 3-D error survives an arbitrary rotation.
  const AteReport shifted = moved(Vec3::Zero(), Vec3(10, -4, 2));
  EXPECT_NEAR(a.rmse_x, shifted.rmse_x, 1e-9);
  EXPECT_NEAR(a.rmse_y, shifted.rmse_y, 1e-9);
  EXPECT_NEAR(a.rmse_xy, shifted.rmse_xy, 1e-9);
  EXPECT_NEAR(a.rmse_z, shifted.rmse_z, 1e-9);
  const AteReport yawed = moved(Vec3(0, 0, 1.1), Vec3(10, -4, 2));
  EXPECT_NEAR(a.rmse_planar, yawed.rmse_planar, 1e-9);
  EXPECT_NEAR(a.rmse_z, yawed.rmse_z, 1e-9);
  const AteReport rotated = moved(Vec3(0.3, -0.2, 1.1), Vec3(10, -4, 2));
  EXPECT_NEAR(total(a), total(rotated), 1e-9);
  EXPECT_NEAR(a.alignment.scale, rotated.alignment.scale, 1e-9);
}

TEST(Ate, ReportAndCsvFormat) {
  const TrajectoryRecord gt = spiral(50);
  TrajectoryRecord est = gt;
  for (auto& p : est.points) p.position += Vec3(3, 4, 0);
  AteReport r = compute_ate(est, gt);
  const std::string report = format_ate_report(r, 90.0);
  EXPECT_NE(report.find("rmse_x_m = 3.000000"), std::string::npos);
  EXPECT_NE(report.find("rmse_xy_m = 3.500000"), std::string::npos);
  EXPECT_NE(report.find("window_s = 90"), std::string::npos);
  const auto csv = lines_of(format_error_csv(r));
  ASSERT_EQ(csv.size(), 51u);
  EXPECT_EQ(csv[0], "t,ex,ey,ez,e_xy");
  EXPECT_EQ(csv[1], "0.000000,3.000000,4.000000,0.000000,5.000000");
}
