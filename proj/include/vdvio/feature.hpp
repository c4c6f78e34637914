#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vdvio/feature_track.hpp"
#include "vdvio/sensors.hpp"
#include "vdvio/state.hpp"

namespace vdvio {

class TriangulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadMappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinBaseline = 1e-4;
inline constexpr double kMaxDltCondition = 1e8;

/// Linear triangulation from the normalized measurements of a track. Every
/// measurement timestamp must match a clone in `poses`. Returns the global
/// position. Throws TriangulationError with fewer than three measurements,
/// a baseline under kMinBaseline, or a condition number above kMaxDltCondition.
Vec3 triangulate_dlt(const FeatureTrack& track, const std::vector<ClonePose>& poses,
                     const Extrinsics& ext);

struct RefinedFeature {
  Vec3 position = Vec3::Zero();
  bool refined = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

/// Levenberg-Marquardt on (u, v, 1/z) in the anchor camera. Only cost
/// decreasing steps are taken, so the final cost never exceeds the initial
/// one; `refined` is false when no step could be accepted.
RefinedFeature refine_inverse_depth(const Vec3& p0, const FeatureTrack& track,
                                    const std::vector<ClonePose>& poses, const Extrinsics& ext);

/// Timestamp of the measurement closest to the principal point; earliest wins ties.
double select_anchor_frame(const FeatureTrack& track);

/// Accepts iff every point's z lies within sigma_z of the four-point mean (inclusive).
bool filter_cloud_outlier(const std::array<Vec3, 4>& cloud_global, double sigma_z);

/// Angle sort about the centroid. Returns the permutation applied, so callers
/// can reorder data attached to the vertices the same way.
std::array<int, 4> order_quad_ccw(std::array<Vec2, 4>& quad);

/// Strictly convex with counter-clockwise winding.
bool is_convex_ccw(const std::array<Vec2, 4>& quad);

/// Inside-or-on-boundary test for a convex, counter-clockwise quad.
bool point_in_quad(const std::array<Vec2, 4>& quad, const Vec2& p);

/// u = a0 + a1 xi + a2 eta + a3 xi eta, v likewise with beta. The unit square
/// corners (0,0), (1,0), (1,1), (0,1) map to quad vertices 0..3.
struct QuadMapping {
  Vec4 alpha = Vec4::Zero();
  Vec4 beta = Vec4::Zero();

  Vec2 operator()(double xi, double eta) const;
};

/// Throws QuadMappingError for a degenerate quad.
QuadMapping solve_quad_mapping(const std::array<Vec2, 4>& quad);

/// Returns (xi, eta) clamped to the unit square. Throws QuadMappingError when
/// no solution lies in the unit square.
Vec2 invert_quad_mapping(const QuadMapping& mapping, const Vec2& p);

double interpolate_depth(const std::array<Vec3, 4>& cloud_cam, double xi, double eta);

/// Rescales the ray to depth z_a. Empty when either depth is not usable.
std::optional<Vec3> enhance_feature(const Vec3& p_anchor_cam, double z_a);

struct CloudMatch {
  double cloud_timestamp = 0.0;
  std::array<Vec3, 4> points_cam{};  // anchor camera frame, same order as quad
  std::array<Vec2, 4> quad{};        // normalized projections, counter-clockwise
};

struct CloudMatchOptions {
  int max_candidates = 4;
  double sigma_z = 0.2;
};

/// Feature/cloud association for the anchor measurement of a track. Clouds
/// are tried in order of time distance to the anchor; clouds outside every
/// clone interval, failing the depth-spread test, with a point behind the
/// anchor camera, forming a non-convex quad, or not containing the feature
/// are skipped.
std::optional<CloudMatch> match_feature_cloud(const FeatureTrack& track, double anchor_time,
                                              const std::vector<DvlPointCloud>& clouds,
                                              const std::vector<ClonePose>& clones,
                                              const Extrinsics& ext,
                                              const CloudMatchOptions& options = {});

struct EnhancedFeature {
  std::uint64_t id = 0;
  Vec3 position = Vec3::Zero();  // global
  bool enhanced = false;
  bool refined = false;
  double anchor_timestamp = 0.0;
};

struct FeatureRecoveryOptions {
  bool enable_enhancement = true;
  CloudMatchOptions match;
};

/// Triangulation, refinement and (optionally) cloud-based depth correction.
/// Empty when the track cannot be triangulated.
std::optional<EnhancedFeature> recover_feature(const FeatureTrack& track,
                                               const std::vector<ClonePose>& clones,
                                               const Extrinsics& ext,
                                               const std::vector<DvlPointCloud>& clouds,
                                               const FeatureRecoveryOptions& options = {});

}  // namespace vdvio
