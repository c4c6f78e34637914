#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vdvio/sensor_log.hpp"
#include "vdvio/sensors.hpp"
#include "vdvio/trajectory.hpp"

namespace vdvio {

struct IceOpening {
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
};

/// Underside of the ice as a height field over the global x-y plane (z up).
/// z = base_height + amplitude * sin(2 pi fx x + phx) * cos(2 pi fy y + phy).
struct IceSurface {
  double base_height = 2.0;
  double amplitude = 0.05;
  Vec2 frequency = Vec2(0.11, 0.07);  // cycles per meter
  Vec2 phase = Vec2(0.3, 1.1);        // radians
  std::vector<IceOpening> openings;
};

/// Empty inside an opening.
std::optional<double> ice_height(const IceSurface& surface, double x, double y);
/// Analytic gradient (dz/dx, dz/dy) of the height field, ignoring openings.
Vec2 ice_gradient(const IceSurface& surface, double x, double y);

enum class SegmentType { kHover, kTransect, kTurn };

/// Each segment starts and ends at rest. `speed` is the mean speed over the
/// segment, so a transect covers speed * duration meters; turns follow an arc
/// of that length (or rotate in place at zero speed) through `turn_angle`.
struct Segment {
  SegmentType type = SegmentType::kHover;
  double duration = 0.0;
  double speed = 0.0;
  double turn_angle = 0.0;  // radians, positive counter-clockwise
};

struct TrajectorySpec {
  std::vector<Segment> segments;
  double initial_yaw = 0.0;
  double ramp_time = 5.0;  // speed ramp at each end of a moving segment
  /// Gentle platform motion layered on the path.
  double roll_amplitude = 0.0;   // rad
  double pitch_amplitude = 0.0;  // rad
  double heave_amplitude = 0.0;  // m
  double wobble_period = 8.0;    // s

  double duration() const;
  /// Throws std::invalid_argument on empty, non-positive or over-speed segments.
  void validate() const;
};

struct TruthState {
  double timestamp = 0.0;
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;  // global -> body
  Vec3 velocity = Vec3::Zero();       // global
  Vec3 acceleration = Vec3::Zero();   // global
  Vec3 angular_velocity = Vec3::Zero();  // body frame
};

/// Analytic trajectory; evaluates at any time in [0, duration].
class GroundTruth {
 public:
  explicit GroundTruth(TrajectorySpec spec);

  double duration() const { return duration_; }
  TruthState at(double t) const;
  const TrajectorySpec& spec() const { return spec_; }

 private:
  struct Piece {
    Segment segment;
    double t0 = 0.0;
    Vec2 start = Vec2::Zero();
    double yaw0 = 0.0;
  };
  // Planar position, yaw and their first two time derivatives.
  struct Planar {
    Vec2 p, dp, ddp;
    double yaw, dyaw, ddyaw;
  };
  Planar planar(const Piece& piece, double tau) const;

  TrajectorySpec spec_;
  std::vector<Piece> pieces_;
  double duration_ = 0.0;
};

/// Samples the analytic trajectory every dt seconds (dt <= 0.01) including the end.
std::vector<TruthState> generate_ground_truth(const TrajectorySpec& spec, double dt);
TrajectoryRecord to_trajectory(const std::vector<TruthState>& states);

struct SensorRates {
  double imu = 100.0;
  double dvl = 4.0;
  double pressure = 2.0;
  double camera = 15.0;
};

struct SimulationNoise {
  double gyro_noise_density = 1.0e-4;
  double accel_noise_density = 2.0e-3;
  double gyro_bias_walk = 1.0e-6;
  double accel_bias_walk = 1.0e-4;
  Vec3 initial_gyro_bias = Vec3::Zero();
  Vec3 initial_accel_bias = Vec3::Zero();
  double dvl_velocity_sd = 0.05;
  double dvl_range_sd = 0.0;
  double pressure_sd = 0.01;
  double camera_sd = 0.001;  // normalized image plane

  static SimulationNoise zero();
};

struct CameraModel {
  double fov_deg = 60.0;
  double min_depth = 0.1;
  double max_depth = 20.0;
  double landmark_spacing = 0.2;    // Poisson-disk radius on the ice, m
  double track_survival = 0.98;     // per frame
  double landmark_margin = 4.0;     // m around the path bounding box
};

struct DvlModel {
  double beam_angle_deg = 25.0;
  double min_range = 0.3;
  double max_range = 100.0;
};

struct SimulationConfig {
  TrajectorySpec trajectory;
  IceSurface ice;
  SensorRates rates;
  SimulationNoise noise;
  CameraModel camera;
  DvlModel dvl;
  Extrinsics extrinsics;
  double initial_depth = 4.0;  // m below the surface at the start
  double gravity = 9.81;
  double truth_dt = 0.01;
};

/// Reasonable mounting for an upward looking camera and DVL on a z-up body.
Extrinsics default_extrinsics();

/// Global position of DVL beam k for a vehicle state, or empty when the beam
/// misses the ice. Beam k points at azimuth 45 + 90 k degrees in the DVL frame.
std::optional<Vec3> dvl_beam_hit(const IceSurface& surface, const Extrinsics& ext,
                                 const TruthState& state, int beam, double beam_angle_deg);

/// Bridson Poisson-disk sampling over a rectangle.
std::vector<Vec2> poisson_disk(const Vec2& min_corner, const Vec2& max_corner, double radius,
                               std::uint64_t seed, int attempts = 30);

struct SimulationResult {
  SensorLog log;
  std::vector<TruthState> truth;
  std::vector<Vec3> landmarks;
};

/// Deterministic in (config, seed). Each sensor draws from its own random stream.
SimulationResult simulate(const SimulationConfig& config, std::uint64_t seed);

/// Lawnmower pattern: `legs` transects of `leg_length` meters joined by
/// in-place turns and lane shifts, with optional hovers after given legs.
TrajectorySpec lawnmower(int legs, double leg_length, double speed, double lane_spacing,
                         double initial_hover = 5.0, const std::vector<int>& hover_after_leg = {},
                         double hover_duration = 60.0);

}  // namespace vdvio
