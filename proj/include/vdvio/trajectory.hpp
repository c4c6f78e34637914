#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdvio/geom.hpp"

namespace vdvio {

struct TrajectoryPoint {
  double timestamp = 0.0;
  Vec3 position = Vec3::Zero();
  /// Global-to-body rotation; empty for position-only trajectories.
  std::optional<UnitQuaternion> orientation;
};

struct TrajectoryRecord {
  std::vector<TrajectoryPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  /// Throws std::invalid_argument unless timestamps strictly increase.
  void validate() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Whitespace separated text, one pose per line: "t px py pz qx qy qz qw" or
/// "t px py pz" for position-only poses. Lines starting with '#' are comments.
TrajectoryRecord read_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const TrajectoryRecord& traj);
TrajectoryRecord parse_trajectory(const std::string& text, const std::string& source = "<string>");
std::string format_trajectory(const TrajectoryRecord& traj);

/// p_gt ~= scale * rotation * p_est + translation.
struct Similarity {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kAssociationTolerance = 0.02;

/// Index pairs (est, gt) matched by nearest timestamp within tolerance.
std::vector<std::pair<std::size_t, std::size_t>> associate(const TrajectoryRecord& est,
                                                           const TrajectoryRecord& gt,
                                                           double tolerance = kAssociationTolerance);

/// Closed-form similarity fit on positions. Only pairs whose ground-truth
/// time lies within `window` seconds of the first ground-truth sample are used.
/// Throws AlignmentError with fewer than three pairs or degenerate geometry.
Similarity align_umeyama(const TrajectoryRecord& est, const TrajectoryRecord& gt, double window);

/// Position-only Umeyama on matched point sets.
Similarity umeyama(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                   bool with_scale = true);

TrajectoryRecord apply_similarity(const TrajectoryRecord& traj, const Similarity& s);

struct AteSample {
  double timestamp = 0.0;
  Vec3 error = Vec3::Zero();  // estimate - ground truth
};

/// rmse_xy is the mean of the two per-axis RMSEs, (rmse_x + rmse_y) / 2.
/// rmse_planar is the RMSE of the horizontal error norm.
struct AteReport {
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  double rmse_xy = 0.0;
  double rmse_planar = 0.0;
  double rmse_z = 0.0;
  std::size_t pairs = 0;
  Similarity alignment;
  std::vector<AteSample> series;
};

/// Errors of already aligned estimates against ground truth. Throws
/// AlignmentError when no timestamps associate.
AteReport compute_ate(const TrajectoryRecord& est_aligned, const TrajectoryRecord& gt);

/// align_umeyama followed by compute_ate on the whole trajectory.
AteReport evaluate_trajectory(const TrajectoryRecord& est, const TrajectoryRecord& gt,
                              double align_window);

std::string format_ate_report(const AteReport& report, double align_window);
std::string format_error_csv(const AteReport& report);

}  // namespace vdvio
