#include "vdvio/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "vdvio/state.hpp"

namespace vdvio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Quintic smoothstep and its integral/derivatives on [0, 1].
double smooth(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smooth_d1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
double smooth_d2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }
double smooth_integral(double x) { return x * x * x * x * (2.5 + x * (-3.0 + x)); }

struct Scalar {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Scalar operator*(const Scalar& a, const Scalar& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

Scalar sine(double amplitude, double omega, double phase, double t) {
  const double s = std::sin(omega * t + phase), c = std::cos(omega * t + phase);
  return {amplitude * s, amplitude * omega * c, -amplitude * omega * omega * s};
}

// Distance, speed and acceleration along a rest-to-rest segment.
struct Profile {
  double d, v, a;
};

Profile speed_profile(double length, double duration, double ramp, double tau) {
  const double tr = std::min(ramp, 0.5 * duration);
  const double peak = length / (duration - tr);
  if (tau <= tr) {
    const double x = tau / tr;
    return {peak * tr * smooth_integral(x), peak * smooth(x), peak * smooth_d1(x) / tr};
  }
  if (tau >= duration - tr) {
    const double x = (duration - tau) / tr;
    return {length - peak * tr * smooth_integral(x), peak * smooth(x), -peak * smooth_d1(x) / tr};
  }
  return {0.5 * peak * tr + peak * (tau - tr), peak, 0.0};
}

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

enum StreamId : std::uint64_t { kImuStream = 1, kDvlStream, kPressureStream, kCameraStream, kWorldStream };

}  // namespace

std::optional<double> ice_height(const IceSurface& surface, double x, double y) {
  for (const auto& o : surface.openings) {
    if ((Vec2(x, y) - o.center).squaredNorm() <= o.radius * o.radius) return std::nullopt;
  }
  return surface.base_height +
         surface.amplitude * std::sin(kTwoPi * surface.frequency.x() * x + surface.phase.x()) *
             std::cos(kTwoPi * surface.frequency.y() * y + surface.phase.y());
}

Vec2 ice_gradient(const IceSurface& surface, double x, double y) {
  const double ax = kTwoPi * surface.frequency.x() * x + surface.phase.x();
  const double ay = kTwoPi * surface.frequency.y() * y + surface.phase.y();
  return surface.amplitude *
         Vec2(kTwoPi * surface.frequency.x() * std::cos(ax) * std::cos(ay),
              -kTwoPi * surface.frequency.y() * std::sin(ax) * std::sin(ay));
}

double TrajectorySpec::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

void TrajectorySpec::validate() const {
  if (segments.empty()) throw std::invalid_argument("trajectory has no segments");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0)) throw std::invalid_argument("segment duration must be positive");
    if (s.speed < 0.0 || s.speed > 1.0) {
      throw std::invalid_argument("segment speed must lie in [0, 1] m/s");
    }
    if (s.type == SegmentType::kTransect && s.speed == 0.0) {
      throw std::invalid_argument("transect needs a positive speed");
    }
  }
  if (ramp_time <= 0.0) throw std::invalid_argument("ramp_time must be positive");
}

GroundTruth::GroundTruth(TrajectorySpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  double t = 0.0;
  Vec2 p = Vec2::Zero();
  double yaw = spec_.initial_yaw;
  for (const auto& seg : spec_.segments) {
    Piece piece{seg, t, p, yaw};
    pieces_.push_back(piece);
    const Planar end = planar(piece, seg.duration);
    p = end.p;
    yaw = end.yaw;
    t += seg.duration;
  }
  duration_ = t;
}

GroundTruth::Planar GroundTruth::planar(const Piece& piece, double tau) const {
  const Segment& seg = piece.segment;
  Planar out{piece.start, Vec2::Zero(), Vec2::Zero(), piece.yaw0, 0.0, 0.0};
  if (seg.type == SegmentType::kHover) return out;

  if (seg.type == SegmentType::kTurn && seg.speed == 0.0) {
    const double x = std::clamp(tau / seg.duration, 0.0, 1.0);
    out.yaw = piece.yaw0 + seg.turn_angle * smooth(x);
    out.dyaw = seg.turn_angle * smooth_d1(x) / seg.duration;
    out.ddyaw = seg.turn_angle * smooth_d2(x) / (seg.duration * seg.duration);
    return out;
  }

  const double length = seg.speed * seg.duration;
  const Profile pr = speed_profile(length, seg.duration, spec_.ramp_time, tau);
  const double kappa = seg.type == SegmentType::kTurn ? seg.turn_angle / length : 0.0;
  out.yaw = piece.yaw0 + kappa * pr.d;
  out.dyaw = kappa * pr.v;
  out.ddyaw = kappa * pr.a;
  const Vec2 heading(std::cos(out.yaw), std::sin(out.yaw));
  const Vec2 normal(-heading.y(), heading.x());
  if (std::abs(kappa) < 1e-12) {
    out.p = piece.start + pr.d * Vec2(std::cos(piece.yaw0), std::sin(piece.yaw0));
  } else {
    out.p = piece.start + Vec2(std::sin(out.yaw) - std::sin(piece.yaw0),
                               std::cos(piece.yaw0) - std::cos(out.yaw)) / kappa;
  }
  out.dp = pr.v * heading;
  out.ddp = pr.a * heading + pr.v * out.dyaw * normal;
  return out;
}

TruthState GroundTruth::at(double t) const {
  if (t < -1e-12 || t > duration_ + 1e-9) throw std::out_of_range("time outside trajectory");
  t = std::clamp(t, 0.0, duration_);
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const Piece& p) { return v < p.t0; });
  const Piece& piece = *std::prev(it);
  const Planar pl = planar(piece, t - piece.t0);

  // Wobble fades in after the first segment so the initial hover is static.
  const double start = spec_.segments.front().type == SegmentType::kHover
                           ? spec_.segments.front().duration
                           : 0.0;
  Scalar envelope;
  if (t > start) {
    const double x = std::min((t - start) / spec_.ramp_time, 1.0);
    envelope = {smooth(x), x < 1.0 ? smooth_d1(x) / spec_.ramp_time : 0.0,
                x < 1.0 ? smooth_d2(x) / (spec_.ramp_time * spec_.ramp_time) : 0.0};
  }
  const double w = kTwoPi / spec_.wobble_period;
  const Scalar roll = envelope * sine(spec_.roll_amplitude, w, 0.0, t);
  const Scalar pitch = envelope * sine(spec_.pitch_amplitude, 0.77 * w, 0.5, t);
  const Scalar heave = envelope * sine(spec_.heave_amplitude, 0.61 * w, 1.3, t);

  TruthState s;
  s.timestamp = t;
  s.position = Vec3(pl.p.x(), pl.p.y(), heave.v);
  s.velocity = Vec3(pl.dp.x(), pl.dp.y(), heave.d1);
  s.acceleration = Vec3(pl.ddp.x(), pl.ddp.y(), heave.d2);
  const Mat3 body_to_global = rot_z(pl.yaw) * rot_y(pitch.v) * rot_x(roll.v);
  s.orientation = UnitQuaternion::from_rotation(body_to_global.transpose());
  const double sr = std::sin(roll.v), cr = std::cos(roll.v);
  const double sp = std::sin(pitch.v), cp = std::cos(pitch.v);
  s.angular_velocity = Vec3(roll.d1 - pl.dyaw * sp, pitch.d1 * cr + pl.dyaw * cp * sr,
                            -pitch.d1 * sr + pl.dyaw * cp * cr);
  return s;
}

std::vector<TruthState> generate_ground_truth(const TrajectorySpec& spec, double dt) {
  if (!(dt > 0.0) || dt > 0.01 + 1e-12) {
    throw std::invalid_argument("ground-truth step must lie in (0, 0.01] s");
  }
  const GroundTruth gt(spec);
  std::vector<TruthState> out;
  const auto n = static_cast<std::size_t>(std::floor(gt.duration() / dt + 1e-9));
  out.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(gt.at(static_cast<double>(i) * dt));
  if (gt.duration() - out.back().timestamp > 1e-9) out.push_back(gt.at(gt.duration()));
  return out;
}

TrajectoryRecord to_trajectory(const std::vector<TruthState>& states) {
  TrajectoryRecord traj;
  traj.points.reserve(states.size());
  for (const auto& s : states) traj.points.push_back({s.timestamp, s.position, s.orientation});
  return traj;
}

SimulationNoise SimulationNoise::zero() {
  SimulationNoise n;
  n.gyro_noise_density = n.accel_noise_density = n.gyro_bias_walk = n.accel_bias_walk = 0.0;
  n.dvl_velocity_sd = n.dvl_range_sd = n.pressure_sd = n.camera_sd = 0.0;
  return n;
}

Extrinsics default_extrinsics() {
  Extrinsics e;
  // DVL mounted forward of the IMU, slightly yawed.
  e.dvl_to_imu.rotation = rot_z(3.0 * std::numbers::pi / 180);
  e.dvl_to_imu.translation = Vec3(0.25, 0.0, 0.15);
  e.pressure_to_dvl = Mat3::Identity();
  // Camera looks up; its x axis is the body y axis.
  e.imu_to_cam.rotation = rot_z(-std::numbers::pi / 2);
  e.imu_to_cam.translation = Vec3(0.02, -0.1, -0.05);
  return e;
}

std::optional<Vec3> dvl_beam_hit(const IceSurface& surface, const Extrinsics& ext,
                                 const TruthState& state, int beam, double beam_angle_deg) {
  const double beta = beam_angle_deg * std::numbers::pi / 180.0;
  const double az = (45.0 + 90.0 * beam) * std::numbers::pi / 180.0;
  const Vec3 d(std::sin(beta) * std::cos(az), std::sin(beta) * std::sin(az), std::cos(beta));
  const Mat3 body_to_global = state.orientation.to_rotation().transpose();
  const Vec3 origin = state.position + body_to_global * ext.dvl_to_imu.translation;
  const Vec3 dir = body_to_global * ext.dvl_to_imu.rotation * d;
  if (!(dir.z() > 1e-6)) return std::nullopt;

  const auto smooth_height = [&](double x, double y) {
    IceSurface closed = surface;
    closed.openings.clear();
    return *ice_height(closed, x, y);
  };
  double t = (surface.base_height - origin.z()) / dir.z();
  for (int i = 0; i < 50; ++i) {
    const Vec3 q = origin + t * dir;
    const double f = q.z() - smooth_height(q.x(), q.y());
    const double df = dir.z() - ice_gradient(surface, q.x(), q.y()).dot(dir.head<2>());
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-13) break;
  }
  const Vec3 hit = origin + t * dir;
  if (!(t > 0.0) || !ice_height(surface, hit.x(), hit.y())) return std::nullopt;
  return hit;
}

std::vector<Vec2> poisson_disk(const Vec2& min_corner, const Vec2& max_corner, double radius,
                               std::uint64_t seed, int attempts) {
  if (!(radius > 0.0)) throw std::invalid_argument("poisson_disk: radius must be positive");
  const double cell = radius / std::sqrt(2.0);
  const Vec2 size = max_corner - min_corner;
  const int nx = std::max(1, static_cast<int>(std::ceil(size.x() / cell)));
  const int ny = std::max(1, static_cast<int>(std::ceil(size.y() / cell)));
  std::vector<int> grid(static_cast<std::size_t>(nx) * ny, -1);
  std::vector<Vec2> points;
  std::vector<int> active;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto cell_of = [&](const Vec2& p) {
    return std::pair<int, int>{std::min(nx - 1, static_cast<int>((p.x() - min_corner.x()) / cell)),
                               std::min(ny - 1, static_cast<int>((p.y() - min_corner.y()) / cell))};
  };
  const auto insert = [&](const Vec2& p) {
    const auto [cx, cy] = cell_of(p);
    grid[static_cast<std::size_t>(cy) * nx + cx] = static_cast<int>(points.size());
    active.push_back(static_cast<int>(points.size()));
    points.push_back(p);
  };
  const auto fits = [&](const Vec2& p) {
    if (p.x() < min_corner.x() || p.y() < min_corner.y() || p.x() >= max_corner.x() ||
        p.y() >= max_corner.y()) {
      return false;
    }
    const auto [cx, cy] = cell_of(p);
    for (int y = std::max(0, cy - 2); y <= std::min(ny - 1, cy + 2); ++y) {
      for (int x = std::max(0, cx - 2); x <= std::min(nx - 1, cx + 2); ++x) {
        const int idx = grid[static_cast<std::size_t>(y) * nx + x];
        if (idx >= 0 && (points[idx] - p).squaredNorm() < radius * radius) return false;
      }
    }
    return true;
  };

  insert(min_corner + Vec2(unit(rng) * size.x(), unit(rng) * size.y()));
  while (!active.empty()) {
    const std::size_t pick = static_cast<std::size_t>(unit(rng) * active.size()) % active.size();
    const Vec2 base = points[active[pick]];
    bool placed = false;
    for (int k = 0; k < attempts; ++k) {
      const double r = radius * (1.0 + unit(rng));
      const double a = kTwoPi * unit(rng);
      const Vec2 cand = base + r * Vec2(std::cos(a), std::sin(a));
      if (fits(cand)) {
        insert(cand);
        placed = true;
        break;
      }
    }
    if (!placed) {
      active[pick] = active.back();
      active.pop_back();
    }
  }
  return points;
}

namespace {

// Uniform grid over landmark x-y for visibility queries.
class LandmarkGrid {
 public:
  LandmarkGrid(const std::vector<Vec3>& landmarks, double cell) : cell_(cell) {
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      cells_[key(landmarks[i].x(), landmarks[i].y())].push_back(static_cast<int>(i));
    }
  }

  std::vector<int> query(const Vec2& center, double radius) const {
    std::vector<int> out;
    const auto lo = index(center.x() - radius, center.y() - radius);
    const auto hi = index(center.x() + radius, center.y() + radius);
    for (long long y = lo.second; y <= hi.second; ++y) {
      for (long long x = lo.first; x <= hi.first; ++x) {
        const auto it = cells_.find(pack(x, y));
        if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::pair<long long, long long> index(double x, double y) const {
    return {static_cast<long long>(std::floor(x / cell_)),
            static_cast<long long>(std::floor(y / cell_))};
  }
  static long long pack(long long x, long long y) { return (x << 32) ^ (y & 0xffffffffLL); }
  long long key(double x, double y) const {
    const auto [ix, iy] = index(x, y);
    return pack(ix, iy);
  }

  double cell_;
  std::unordered_map<long long, std::vector<int>> cells_;
};

std::vector<double> sample_times(double rate, double duration) {
  std::vector<double> t;
  const double dt = 1.0 / rate;
  for (std::size_t i = 0;; ++i) {
    const double s = static_cast<double>(i) * dt;
    if (s > duration + 1e-9) break;
    t.push_back(s);
  }
  return t;
}

}  // namespace

SimulationResult simulate(const SimulationConfig& config, std::uint64_t seed) {
  const GroundTruth gt(config.trajectory);
  const double duration = gt.duration();
  const SimulationNoise& noise = config.noise;
  const Extrinsics& ext = config.extrinsics;
  const Vec3 gravity(0.0, 0.0, -config.gravity);

  SimulationResult result;
  result.truth = generate_ground_truth(config.trajectory, config.truth_dt);
  SensorLog& log = result.log;
  log.header.seed = seed;
  log.header.imu_rate = config.rates.imu;
  log.header.dvl_rate = config.rates.dvl;
  log.header.pressure_rate = config.rates.pressure;
  log.header.camera_rate = config.rates.camera;
  log.header.extrinsics = ext;
  log.header.gyro_noise_density = noise.gyro_noise_density;
  log.header.accel_noise_density = noise.accel_noise_density;
  log.header.gyro_bias_walk = noise.gyro_bias_walk;
  log.header.accel_bias_walk = noise.accel_bias_walk;
  log.header.camera_sd = noise.camera_sd;
  log.header.gravity = config.gravity;

  // IMU with bias random walks.
  {
    auto rng = stream(seed, kImuStream);
    std::normal_distribution<double> n(0.0, 1.0);
    const double dt = 1.0 / config.rates.imu;
    const double sg = noise.gyro_noise_density * std::sqrt(config.rates.imu);
    const double sa = noise.accel_noise_density * std::sqrt(config.rates.imu);
    Vec3 bg = noise.initial_gyro_bias;
    Vec3 ba = noise.initial_accel_bias;
    for (double t : sample_times(config.rates.imu, duration)) {
      const TruthState s = gt.at(t);
      const Mat3 r = s.orientation.to_rotation();
      ImuSample m;
      m.timestamp = t;
      const Vec3 wn(n(rng), n(rng), n(rng));
      const Vec3 an(n(rng), n(rng), n(rng));
      m.gyro = s.angular_velocity + bg + sg * wn;
      m.accel = r * (s.acceleration - gravity) + ba + sa * an;
      log.imu.push_back(m);
      const Vec3 wg(n(rng), n(rng), n(rng));
      const Vec3 wa(n(rng), n(rng), n(rng));
      bg += noise.gyro_bias_walk * std::sqrt(dt) * wg;
      ba += noise.accel_bias_walk * std::sqrt(dt) * wa;
    }
  }

  // DVL velocity and beam point cloud.
  {
    auto rng = stream(seed, kDvlStream);
    std::normal_distribution<double> n(0.0, 1.0);
    const Mat3& r_id = ext.dvl_to_imu.rotation;
    const Vec3& p_id = ext.dvl_to_imu.translation;
    const double beta = config.dvl.beam_angle_deg * std::numbers::pi / 180.0;
    for (double t : sample_times(config.rates.dvl, duration)) {
      const TruthState s = gt.at(t);
      DvlVelocity v;
      v.timestamp = t;
      v.noise_sd = noise.dvl_velocity_sd;
      const Vec3 vn(n(rng), n(rng), n(rng));
      v.velocity = r_id.transpose() * (s.orientation.to_rotation() * s.velocity +
                                       s.angular_velocity.cross(p_id)) +
                   noise.dvl_velocity_sd * vn;
      log.dvl.push_back(v);

      DvlPointCloud cloud;
      cloud.timestamp = t;
      bool valid = true;
      const Mat3 global_to_dvl = r_id.transpose() * s.orientation.to_rotation();
      const Vec3 origin = s.position + s.orientation.to_rotation().transpose() * p_id;
      for (int k = 0; k < 4; ++k) {
        const double range_noise = noise.dvl_range_sd * n(rng);
        const auto hit = dvl_beam_hit(config.ice, ext, s, k, config.dvl.beam_angle_deg);
        if (!hit) {
          valid = false;
          continue;
        }
        const Vec3 local = global_to_dvl * (*hit - origin);
        const double range = local.norm() + range_noise;
        const double az = (45.0 + 90.0 * k) * std::numbers::pi / 180.0;
        cloud.points[k] = range * Vec3(std::sin(beta) * std::cos(az),
                                       std::sin(beta) * std::sin(az), std::cos(beta));
        if (range <= config.dvl.min_range || range >= config.dvl.max_range) valid = false;
      }
      if (valid) log.clouds.push_back(cloud);
    }
  }

  // Depth of the IMU origin, positive down. The pressure model carries no
  // lever arm, so the port is placed level with the IMU.
  {
    auto rng = stream(seed, kPressureStream);
    std::normal_distribution<double> n(0.0, 1.0);
    for (double t : sample_times(config.rates.pressure, duration)) {
      const TruthState s = gt.at(t);
      log.pressure.push_back({t, config.initial_depth - s.position.z() + noise.pressure_sd * n(rng),
                              noise.pressure_sd});
    }
  }

  // Landmarks on the ice underside around the path.
  {
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::max());
    Vec2 hi = Vec2::Constant(std::numeric_limits<double>::lowest());
    for (const auto& s : result.truth) {
      lo = lo.cwiseMin(s.position.head<2>());
      hi = hi.cwiseMax(s.position.head<2>());
    }
    lo.array() -= config.camera.landmark_margin;
    hi.array() += config.camera.landmark_margin;
    auto world = stream(seed, kWorldStream);
    const auto xy = poisson_disk(lo, hi, config.camera.landmark_spacing, world());
    for (const auto& p : xy) {
      if (const auto z = ice_height(config.ice, p.x(), p.y())) {
        result.landmarks.emplace_back(p.x(), p.y(), *z);
      }
    }
  }

  // Camera tracks with per-frame survival and re-detection under a new id.
  {
    auto rng = stream(seed, kCameraStream);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const LandmarkGrid grid(result.landmarks, 1.0);
    const double half = std::tan(0.5 * config.camera.fov_deg * std::numbers::pi / 180.0);
    const double reach = (config.ice.base_height + std::abs(config.ice.amplitude) + 1.0) *
                             (half + 0.3) * std::sqrt(2.0) + 1.0;
    std::vector<std::uint64_t> track_of(result.landmarks.size(), 0);
    std::vector<std::uint64_t> seen_frame(result.landmarks.size(), 0);
    std::uint64_t next_id = 1;
    std::uint64_t frame_index = 0;

    for (double t : sample_times(config.rates.camera, duration)) {
      ++frame_index;
      const TruthState s = gt.at(t);
      const ClonePose pose{t, s.orientation, s.position, false};
      const Mat3 a = ext.imu_to_cam.rotation * pose.rotation();
      const Vec3 c = s.position - a.transpose() * ext.imu_to_cam.translation;

      CameraFrame frame;
      frame.timestamp = t;
      for (int idx : grid.query(c.head<2>(), reach)) {
        const Vec3 pc = a * (result.landmarks[idx] - s.position) + ext.imu_to_cam.translation;
        const bool visible = pc.z() > config.camera.min_depth && pc.z() < config.camera.max_depth &&
                             std::abs(pc.x()) <= half * pc.z() && std::abs(pc.y()) <= half * pc.z();
        if (!visible) continue;
        const bool continuing = track_of[idx] != 0 && seen_frame[idx] + 1 == frame_index;
        if (continuing && unit(rng) >= config.camera.track_survival) {
          // Lost this frame; a fresh id is assigned if it is detected again.
          track_of[idx] = 0;
          continue;
        }
        if (!continuing) track_of[idx] = next_id++;
        seen_frame[idx] = frame_index;
        const Vec2 uv = pc.head<2>() / pc.z() + noise.camera_sd * Vec2(n(rng), n(rng));
        frame.features.push_back({track_of[idx], uv});
      }
      std::sort(frame.features.begin(), frame.features.end(),
                [](const auto& x, const auto& y) { return x.id < y.id; });
      log.camera.push_back(std::move(frame));
    }
  }

  result.landmarks.shrink_to_fit();
  return result;
}

TrajectorySpec lawnmower(int legs, double leg_length, double speed, double lane_spacing,
                         double initial_hover, const std::vector<int>& hover_after_leg,
                         double hover_duration) {
  TrajectorySpec spec;
  if (initial_hover > 0.0) spec.segments.push_back({SegmentType::kHover, initial_hover, 0.0, 0.0});
  const double half_pi = std::numbers::pi / 2;
  for (int leg = 0; leg < legs; ++leg) {
    spec.segments.push_back({SegmentType::kTransect, leg_length / speed, speed, 0.0});
    if (std::find(hover_after_leg.begin(), hover_after_leg.end(), leg) != hover_after_leg.end()) {
      spec.segments.push_back({SegmentType::kHover, hover_duration, 0.0, 0.0});
    }
    if (leg + 1 == legs) break;
    const double turn = (leg % 2 == 0) ? half_pi : -half_pi;
    spec.segments.push_back({SegmentType::kTurn, 10.0, 0.0, turn});
    spec.segments.push_back(
        {SegmentType::kTransect, std::max(lane_spacing / speed, 8.0),
         lane_spacing / std::max(lane_spacing / speed, 8.0), 0.0});
    spec.segments.push_back({SegmentType::kTurn, 10.0, 0.0, turn});
  }
  return spec;
}

}  // namespace vdvio
