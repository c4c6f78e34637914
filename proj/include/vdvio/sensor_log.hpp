#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vdvio/sensors.hpp"
#include "vdvio/trajectory.hpp"

namespace vdvio {

inline constexpr const char* kLogFormat = "vdvio-sensor-log";
inline constexpr int kLogVersion = 1;

struct LogHeader {
  int version = kLogVersion;
  std::uint64_t seed = 0;
  double imu_rate = 100.0;
  double dvl_rate = 4.0;
  double pressure_rate = 2.0;
  double camera_rate = 15.0;
  Extrinsics extrinsics;
  /// Noise used to generate the log (informational).
  double gyro_noise_density = 0.0;
  double accel_noise_density = 0.0;
  double gyro_bias_walk = 0.0;
  double accel_bias_walk = 0.0;
  double camera_sd = 0.0;
  double gravity = 9.81;
};

/// Four time-ordered streams. Every cloud timestamp equals a DVL velocity
/// timestamp; pings whose cloud was invalid simply have no cloud entry.
struct SensorLog {
  LogHeader header;
  std::vector<ImuSample> imu;
  std::vector<DvlVelocity> dvl;
  std::vector<DvlPointCloud> clouds;
  std::vector<PressureSample> pressure;
  std::vector<CameraFrame> camera;

  /// Throws std::invalid_argument naming the stream when timestamps are not
  /// strictly increasing or a cloud has no matching DVL ping.
  void validate() const;
};

/// One JSON object per line: a header line, then records merged by
/// (timestamp, stream) with the stream order imu, dvl, pressure, camera.
std::string format_log(const SensorLog& log);
SensorLog parse_log(const std::string& text, const std::string& source = "<string>");

void write_log(const std::filesystem::path& path, const SensorLog& log);
/// Throws ParseError (with the 1-based line number) on malformed input.
SensorLog read_log(const std::filesystem::path& path);

}  // namespace vdvio
