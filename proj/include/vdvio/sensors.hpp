#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vdvio/geom.hpp"

namespace vdvio {

struct ImuSample {
  double timestamp = 0.0;
  Vec3 accel = Vec3::Zero();  // specific force, m/s^2, IMU frame
  Vec3 gyro = Vec3::Zero();   // rad/s, IMU frame
};

/// Body-frame velocity reported by the DVL, in the DVL frame.
struct DvlVelocity {
  double timestamp = 0.0;
  Vec3 velocity = Vec3::Zero();
  double noise_sd = 0.05;
};

/// Four beam/surface intersections, DVL frame, meters.
struct DvlPointCloud {
  double timestamp = 0.0;
  std::array<Vec3, 4> points{};
};

/// Depth below the surface in meters (pressure already converted to length).
struct PressureSample {
  double timestamp = 0.0;
  double depth = 0.0;
  double noise_sd = 0.01;
};

struct FeatureObservation {
  std::uint64_t id = 0;
  Vec2 uv = Vec2::Zero();  // normalized image plane
};

struct CameraFrame {
  double timestamp = 0.0;
  std::vector<FeatureObservation> features;
};

/// Rigid mounting of the auxiliary sensors on the IMU.
struct Extrinsics {
  RigidTransform dvl_to_imu;           // p_I = R p_D + p_D_in_I
  Mat3 pressure_to_dvl = Mat3::Identity();
  RigidTransform imu_to_cam;           // p_C = R p_I + p_I_in_C
};

/// Converts a gauge pressure in Pa to depth-equivalent meters.
inline double pressure_to_depth(double gauge_pressure_pa, double fluid_density = 1000.0,
                                double gravity = 9.81) {
  return gauge_pressure_pa / (fluid_density * gravity);
}

}  // namespace vdvio
