#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vdvio/geom.hpp"

namespace vdvio {

/// One feature's normalized-plane measurements, each taken at a clone timestamp.
struct FeatureTrack {
  struct Measurement {
    double timestamp = 0.0;
    Vec2 uv = Vec2::Zero();
  };

  std::uint64_t id = 0;
  std::vector<Measurement> measurements;  // increasing timestamps

  std::size_t size() const { return measurements.size(); }
  bool observed_at(double t) const;
  std::optional<Vec2> measurement_at(double t) const;
};

}  // namespace vdvio
