#include "vdvio/feature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "vdvio/updates.hpp"

namespace vdvio {

namespace {

// Global-to-camera transform of a clone: p_C = A p_G + b.
struct CameraPose {
  Mat3 A;
  Vec3 b;
};

CameraPose camera_pose(const ClonePose& clone, const Extrinsics& ext) {
  CameraPose c;
  c.A = ext.imu_to_cam.rotation * clone.rotation();
  c.b = ext.imu_to_cam.translation - c.A * clone.position;
  return c;
}

const ClonePose& clone_at(const std::vector<ClonePose>& poses, double t) {
  for (const auto& p : poses) {
    if (p.timestamp == t) return p;
  }
  throw std::invalid_argument("feature measurement has no matching pose");
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Vec3 triangulate_dlt(const FeatureTrack& track, const std::vector<ClonePose>& poses,
                     const Extrinsics& ext) {
  const int m = static_cast<int>(track.size());
  if (m < 3) {
    throw TriangulationError("triangulation needs more than two observations");
  }

  Eigen::MatrixXd a(2 * m, 3);
  Eigen::VectorXd rhs(2 * m);
  std::vector<Vec3> centers;
  centers.reserve(m);
  for (int k = 0; k < m; ++k) {
    const auto& meas = track.measurements[k];
    const CameraPose c = camera_pose(clone_at(poses, meas.timestamp), ext);
    centers.push_back(-c.A.transpose() * c.b);
    const double u = meas.uv.x();
    const double v = meas.uv.y();
    // x - u z = 0 and y - v z = 0 in the camera frame.
    a.row(2 * k) = c.A.row(0) - u * c.A.row(2);
    a.row(2 * k + 1) = c.A.row(1) - v * c.A.row(2);
    rhs[2 * k] = -(c.b.x() - u * c.b.z());
    rhs[2 * k + 1] = -(c.b.y() - v * c.b.z());
  }

  double baseline = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      baseline = std::max(baseline, (centers[i] - centers[j]).norm());
    }
  }
  if (!(baseline > kMinBaseline)) {
    throw TriangulationError("triangulation baseline too small");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s[2] > 0.0) || s[0] / s[2] > kMaxDltCondition) {
    throw TriangulationError("triangulation system is ill-conditioned");
  }
  return svd.solve(rhs);
}

RefinedFeature refine_inverse_depth(const Vec3& p0, const FeatureTrack& track,
                                    const std::vector<ClonePose>& poses, const Extrinsics& ext) {
  RefinedFeature out;
  out.position = p0;

  const CameraPose anchor = camera_pose(clone_at(poses, select_anchor_frame(track)), ext);
  const Vec3 pa = anchor.A * p0 + anchor.b;
  if (!(pa.z() > kMinFeatureDepth)) return out;

  struct Relative {
    Mat3 R;
    Vec3 t;
    Vec2 uv;
  };
  std::vector<Relative> rel;
  rel.reserve(track.size());
  for (const auto& meas : track.measurements) {
    const CameraPose c = camera_pose(clone_at(poses, meas.timestamp), ext);
    const Mat3 r = c.A * anchor.A.transpose();
    rel.push_back({r, c.b - r * anchor.b, meas.uv});
  }

  // Returns +inf when any camera sees the point too close or behind it.
  const auto cost_of = [&](const Vec3& x) {
    double cost = 0.0;
    for (const auto& f : rel) {
      const Vec3 h = f.R * Vec3(x[0], x[1], 1.0) + x[2] * f.t;
      if (!(h.z() > 0.0) || !(x[2] > 0.0)) return std::numeric_limits<double>::infinity();
      cost += (f.uv - h.head<2>() / h.z()).squaredNorm();
    }
    return cost;
  };

  Vec3 x(pa.x() / pa.z(), pa.y() / pa.z(), 1.0 / pa.z());
  double cost = cost_of(x);
  out.initial_cost = cost;
  out.final_cost = cost;
  double lambda = 1e-3;
  int failures = 0;

  for (int it = 0; it < 20; ++it) {
    out.iterations = it + 1;
    Mat3 jtj = Mat3::Zero();
    Vec3 jte = Vec3::Zero();
    for (const auto& f : rel) {
      const Vec3 h = f.R * Vec3(x[0], x[1], 1.0) + x[2] * f.t;
      const double iz = 1.0 / h.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << iz, 0.0, -h.x() * iz * iz, 0.0, iz, -h.y() * iz * iz;
      Mat3 dh;
      dh << f.R.col(0), f.R.col(1), f.t;
      const Eigen::Matrix<double, 2, 3> j = -dpi * dh;
      const Vec2 e = f.uv - h.head<2>() * iz;
      jtj += j.transpose() * j;
      jte += j.transpose() * e;
    }
    Mat3 damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal();
    const Vec3 dx = damped.ldlt().solve(-jte);
    const Vec3 candidate = x + dx;
    const double next = dx.allFinite() ? cost_of(candidate) : std::numeric_limits<double>::infinity();

    if (next < cost) {
      const double decrease = cost - next;
      x = candidate;
      cost = next;
      out.refined = true;
      lambda = std::max(lambda * 0.1, 1e-10);
      failures = 0;
      if (decrease < 1e-10) break;
    } else {
      lambda *= 10.0;
      if (++failures >= 3) break;
    }
  }

  if (out.refined) {
    const Vec3 p_anchor = Vec3(x[0], x[1], 1.0) / x[2];
    out.position = anchor.A.transpose() * (p_anchor - anchor.b);
    out.final_cost = cost;
  }
  return out;
}

double select_anchor_frame(const FeatureTrack& track) {
  if (track.measurements.empty()) {
    throw std::invalid_argument("select_anchor_frame: empty track");
  }
  const auto best = std::min_element(
      track.measurements.begin(), track.measurements.end(),
      [](const auto& a, const auto& b) { return a.uv.norm() < b.uv.norm(); });
  return best->timestamp;
}

bool filter_cloud_outlier(const std::array<Vec3, 4>& cloud_global, double sigma_z) {
  double mean = 0.0;
  for (const auto& p : cloud_global) mean += p.z();
  mean /= 4.0;
  return std::all_of(cloud_global.begin(), cloud_global.end(),
                     [&](const Vec3& p) { return std::abs(p.z() - mean) <= sigma_z; });
}

std::array<int, 4> order_quad_ccw(std::array<Vec2, 4>& quad) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& q : quad) centroid += q / 4.0;
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<double, 4> angle{};
  for (int i = 0; i < 4; ++i) {
    const Vec2 d = quad[i] - centroid;
    angle[i] = std::atan2(d.y(), d.x());
  }
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return angle[a] < angle[b]; });
  const std::array<Vec2, 4> original = quad;
  for (int i = 0; i < 4; ++i) quad[i] = original[perm[i]];
  return perm;
}

bool is_convex_ccw(const std::array<Vec2, 4>& quad) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 e0 = quad[(i + 1) % 4] - quad[i];
    const Vec2 e1 = quad[(i + 2) % 4] - quad[(i + 1) % 4];
    if (!(cross2(e0, e1) > 0.0)) return false;
  }
  return true;
}

bool point_in_quad(const std::array<Vec2, 4>& quad, const Vec2& p) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 edge = quad[(i + 1) % 4] - quad[i];
    const Vec2 to_p = p - quad[i];
    const double tol = 1e-12 * std::max(1.0, edge.norm() * to_p.norm());
    if (cross2(edge, to_p) < -tol) return false;
  }
  return true;
}

Vec2 QuadMapping::operator()(double xi, double eta) const {
  const Vec4 basis(1.0, xi, eta, xi * eta);
  return {alpha.dot(basis), beta.dot(basis)};
}

QuadMapping solve_quad_mapping(const std::array<Vec2, 4>& quad) {
  double area = 0.0;
  for (int i = 0; i < 4; ++i) area += 0.5 * cross2(quad[i], quad[(i + 1) % 4]);
  if (!(std::abs(area) > 1e-12)) {
    throw QuadMappingError("degenerate quad");
  }

  Eigen::Matrix4d m;
  m << 1, 0, 0, 0,
       1, 1, 0, 0,
       1, 1, 1, 1,
       1, 0, 1, 0;
  Vec4 u, v;
  for (int i = 0; i < 4; ++i) {
    u[i] = quad[i].x();
    v[i] = quad[i].y();
  }
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
  if (!lu.isInvertible()) {
    throw QuadMappingError("singular quad mapping system");
  }
  QuadMapping out;
  out.alpha = lu.solve(u);
  out.beta = lu.solve(v);
  return out;
}

Vec2 invert_quad_mapping(const QuadMapping& mapping, const Vec2& p) {
  const double a0 = mapping.alpha[0], a1 = mapping.alpha[1], a2 = mapping.alpha[2],
               a3 = mapping.alpha[3];
  const double b0 = mapping.beta[0], b1 = mapping.beta[1], b2 = mapping.beta[2],
               b3 = mapping.beta[3];
  const double du = p.x() - a0;
  const double dv = p.y() - b0;

  // Eliminating xi leaves A eta^2 + B eta + C = 0.
  const double qa = -a2 * b3 + b2 * a3;
  const double qb = du * b3 - a2 * b1 - dv * a3 + b2 * a1;
  const double qc = du * b1 - dv * a1;

  std::vector<double> roots;
  const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc), 1e-300});
  if (std::abs(qa) <= 1e-12 * scale) {
    if (std::abs(qb) > 0.0) roots.push_back(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= -1e-12 * scale * scale) {
      const double sq = std::sqrt(std::max(disc, 0.0));
      // Numerically stable pair of roots.
      const double q = -0.5 * (qb + std::copysign(sq, qb));
      if (q != 0.0) {
        roots.push_back(q / qa);
        roots.push_back(qc / q);
      } else {
        roots.push_back(0.0);
      }
    }
  }

  constexpr double kTol = 1e-9;
  const auto in_range = [](double s) { return s >= -kTol && s <= 1.0 + kTol; };
  for (const double eta : roots) {
    if (!in_range(eta)) continue;
    const double den_u = a1 + a3 * eta;
    const double den_v = b1 + b3 * eta;
    double xi;
    if (std::abs(den_u) >= std::abs(den_v)) {
      if (den_u == 0.0) continue;
      xi = (du - a2 * eta) / den_u;
    } else {
      xi = (dv - b2 * eta) / den_v;
    }
    if (in_range(xi)) {
      return {std::clamp(xi, 0.0, 1.0), std::clamp(eta, 0.0, 1.0)};
    }
  }
  throw QuadMappingError("point does not map into the unit square");
}

double interpolate_depth(const std::array<Vec3, 4>& cloud_cam, double xi, double eta) {
  return (1.0 - xi) * (1.0 - eta) * cloud_cam[0].z() + xi * (1.0 - eta) * cloud_cam[1].z() +
         xi * eta * cloud_cam[2].z() + (1.0 - xi) * eta * cloud_cam[3].z();
}

std::optional<Vec3> enhance_feature(const Vec3& p_anchor_cam, double z_a) {
  const double z_b = p_anchor_cam.z();
  if (!(z_b > kMinFeatureDepth) || !(z_a > 0.0)) return std::nullopt;
  return Vec3((z_a / z_b) * p_anchor_cam);
}

std::optional<CloudMatch> match_feature_cloud(const FeatureTrack& track, double anchor_time,
                                              const std::vector<DvlPointCloud>& clouds,
                                              const std::vector<ClonePose>& clones,
                                              const Extrinsics& ext,
                                              const CloudMatchOptions& options) {
  const auto uv = track.measurement_at(anchor_time);
  if (!uv || clones.empty()) return std::nullopt;
  const ClonePose& anchor = clone_at(clones, anchor_time);

  std::vector<const DvlPointCloud*> candidates;
  candidates.reserve(clouds.size());
  for (const auto& c : clouds) candidates.push_back(&c);
  std::stable_sort(candidates.begin(), candidates.end(), [&](const auto* a, const auto* b) {
    return std::abs(a->timestamp - anchor_time) < std::abs(b->timestamp - anchor_time);
  });
  if (static_cast<int>(candidates.size()) > options.max_candidates) {
    candidates.resize(options.max_candidates);
  }

  for (const DvlPointCloud* cloud : candidates) {
    const double t = cloud->timestamp;

    // Step 1: IMU pose at the cloud time from the bracketing clones.
    std::optional<RigidTransform> imu_to_global;
    for (std::size_t i = 0; i < clones.size() && !imu_to_global; ++i) {
      if (clones[i].timestamp == t) {
        imu_to_global = clones[i].imu_to_global();
      } else if (i + 1 < clones.size() && clones[i].timestamp < t &&
                 t <= clones[i + 1].timestamp) {
        imu_to_global = pose_interpolate(clones[i].imu_to_global(),
                                         clones[i + 1].imu_to_global(), clones[i].timestamp,
                                         clones[i + 1].timestamp, t);
      }
    }
    if (!imu_to_global) {
      spdlog::trace("cloud {:.3f}: outside clone intervals", t);
      continue;
    }

    // Step 2: depth-spread filter in the global frame.
    std::array<Vec3, 4> global{};
    for (int k = 0; k < 4; ++k) {
      global[k] = imu_to_global->apply(ext.dvl_to_imu.apply(cloud->points[k]));
    }
    if (!filter_cloud_outlier(global, options.sigma_z)) {
      spdlog::trace("cloud {:.3f}: rejected by depth spread", t);
      continue;
    }

    // Step 3: project into the anchor camera and test containment.
    std::array<Vec3, 4> cam{};
    std::array<Vec2, 4> quad{};
    bool visible = true;
    for (int k = 0; k < 4; ++k) {
      cam[k] = feature_in_camera(anchor, ext, global[k]);
      if (!(cam[k].z() > kMinFeatureDepth)) {
        visible = false;
        break;
      }
      quad[k] = project(cam[k]);
    }
    if (!visible) continue;

    const std::array<int, 4> perm = order_quad_ccw(quad);
    if (!is_convex_ccw(quad)) {
      spdlog::debug("cloud {:.3f}: projected quad is not convex", t);
      continue;
    }
    if (!point_in_quad(quad, *uv)) continue;

    CloudMatch match;
    match.cloud_timestamp = t;
    match.quad = quad;
    for (int k = 0; k < 4; ++k) match.points_cam[k] = cam[perm[k]];
    return match;
  }
  return std::nullopt;
}

std::optional<EnhancedFeature> recover_feature(const FeatureTrack& track,
                                               const std::vector<ClonePose>& clones,
                                               const Extrinsics& ext,
                                               const std::vector<DvlPointCloud>& clouds,
                                               const FeatureRecoveryOptions& options) {
  Vec3 p;
  try {
    p = triangulate_dlt(track, clones, ext);
  } catch (const TriangulationError& e) {
    spdlog::trace("feature {}: {}", track.id, e.what());
    return std::nullopt;
  }

  EnhancedFeature out;
  out.id = track.id;
  const RefinedFeature refined = refine_inverse_depth(p, track, clones, ext);
  out.position = refined.position;
  out.refined = refined.refined;
  out.anchor_timestamp = select_anchor_frame(track);
  if (!options.enable_enhancement || clouds.empty()) return out;

  const auto match =
      match_feature_cloud(track, out.anchor_timestamp, clouds, clones, ext, options.match);
  if (!match) return out;

  const ClonePose& anchor = clone_at(clones, out.anchor_timestamp);
  const Vec3 p_cam = feature_in_camera(anchor, ext, out.position);
  try {
    const QuadMapping mapping = solve_quad_mapping(match->quad);
    const Vec2 st = invert_quad_mapping(mapping, *track.measurement_at(out.anchor_timestamp));
    const double z_a = interpolate_depth(match->points_cam, st.x(), st.y());
    const auto scaled = enhance_feature(p_cam, z_a);
    if (!scaled) return out;
    const CameraPose c = camera_pose(anchor, ext);
    out.position = c.A.transpose() * (*scaled - c.b);
    out.enhanced = true;
  } catch (const QuadMappingError& e) {
    spdlog::debug("feature {}: {}", track.id, e.what());
  }
  return out;
}

}  // namespace vdvio
