#include "vdvio/trajectory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

namespace vdvio {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", source, line, what)), line_(line) {}

void TrajectoryRecord::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].timestamp > points[i - 1].timestamp)) {
      throw std::invalid_argument(
          fmt::format("trajectory timestamps not increasing at index {}", i));
    }
  }
}

TrajectoryRecord parse_trajectory(const std::string& text, const std::string& source) {
  TrajectoryRecord traj;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> v;
    std::string tok;
    while (fields >> tok) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(x)) {
        throw ParseError(source, line_no, fmt::format("bad number '{}'", tok));
      }
      v.push_back(x);
    }
    if (v.size() != 4 && v.size() != 8) {
      throw ParseError(source, line_no, fmt::format("expected 4 or 8 fields, got {}", v.size()));
    }
    TrajectoryPoint p;
    p.timestamp = v[0];
    p.position = Vec3(v[1], v[2], v[3]);
    if (v.size() == 8) {
      try {
        p.orientation = UnitQuaternion::from_xyzw(v[4], v[5], v[6], v[7]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    if (!traj.points.empty() && !(p.timestamp > traj.points.back().timestamp)) {
      throw ParseError(source, line_no, "timestamps must strictly increase");
    }
    traj.points.push_back(p);
  }
  return traj;
}

std::string format_trajectory(const TrajectoryRecord& traj) {
  std::string out = "# t px py pz qx qy qz qw\n";
  for (const auto& p : traj.points) {
    out += fmt::format("{} {} {} {}", p.timestamp, p.position.x(), p.position.y(), p.position.z());
    if (p.orientation) {
      const auto& q = *p.orientation;
      out += fmt::format(" {} {} {} {}", q.x(), q.y(), q.z(), q.w());
    }
    out += '\n';
  }
  return out;
}

TrajectoryRecord read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trajectory(buf.str(), path.string());
}

void write_trajectory(const std::filesystem::path& path, const TrajectoryRecord& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << format_trajectory(traj);
}

std::vector<std::pair<std::size_t, std::size_t>> associate(const TrajectoryRecord& est,
                                                           const TrajectoryRecord& gt,
                                                           double tolerance) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (gt.empty()) return pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double t = est.points[i].timestamp;
    while (j + 1 < gt.size() && gt.points[j + 1].timestamp <= t) ++j;
    std::size_t best = j;
    if (j + 1 < gt.size() &&
        std::abs(gt.points[j + 1].timestamp - t) < std::abs(gt.points[j].timestamp - t)) {
      best = j + 1;
    }
    if (std::abs(gt.points[best].timestamp - t) <= tolerance) pairs.emplace_back(i, best);
  }
  return pairs;
}

Similarity umeyama(const std::vector<Vec3>& src, const std::vector<Vec3>& dst, bool with_scale) {
  if (src.size() != dst.size()) throw std::invalid_argument("umeyama: size mismatch");
  if (src.size() < 3) throw AlignmentError("umeyama: need at least three pairs");
  const double n = static_cast<double>(src.size());
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;
  Mat3 cov = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    cov += (dst[i] - mu_d) * (src[i] - mu_s).transpose();
    var_s += (src[i] - mu_s).squaredNorm();
  }
  cov /= n;
  var_s /= n;
  if (var_s < 1e-12) throw AlignmentError("umeyama: source points are coincident");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (sv(1) < 1e-9 * std::max(sv(0), 1e-300)) {
    throw AlignmentError("umeyama: points are collinear");
  }
  Mat3 s = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  Similarity out;
  out.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  out.scale = with_scale ? (sv.asDiagonal() * s).trace() / var_s : 1.0;
  out.translation = mu_d - out.scale * out.rotation * mu_s;
  return out;
}

Similarity align_umeyama(const TrajectoryRecord& est, const TrajectoryRecord& gt, double window) {
  if (gt.empty()) throw AlignmentError("empty ground truth");
  const double t0 = gt.points.front().timestamp;
  std::vector<Vec3> src, dst;
  for (const auto& [i, j] : associate(est, gt)) {
    if (gt.points[j].timestamp - t0 > window) continue;
    src.push_back(est.points[i].position);
    dst.push_back(gt.points[j].position);
  }
  if (src.size() < 3) {
    throw AlignmentError(fmt::format("only {} pairs inside the {} s alignment window",
                                     src.size(), window));
  }
  return umeyama(src, dst, true);
}

TrajectoryRecord apply_similarity(const TrajectoryRecord& traj, const Similarity& s) {
  TrajectoryRecord out = traj;
  const auto rot = UnitQuaternion::from_rotation(s.rotation);
  for (auto& p : out.points) {
    p.position = s.apply(p.position);
    // Global-to-body composed with the inverse of the aligning rotation.
    if (p.orientation) p.orientation = *p.orientation * rot.inverse();
  }
  return out;
}

AteReport compute_ate(const TrajectoryRecord& est_aligned, const TrajectoryRecord& gt) {
  const auto pairs = associate(est_aligned, gt);
  if (pairs.empty()) throw AlignmentError("no associated timestamps");
  AteReport r;
  Vec3 sq = Vec3::Zero();
  double planar = 0.0;
  for (const auto& [i, j] : pairs) {
    const Vec3 e = est_aligned.points[i].position - gt.points[j].position;
    r.series.push_back({gt.points[j].timestamp, e});
    sq += e.cwiseAbs2();
    planar += e.head<2>().squaredNorm();
  }
  const double n = static_cast<double>(pairs.size());
  r.pairs = pairs.size();
  r.rmse_x = std::sqrt(sq.x() / n);
  r.rmse_y = std::sqrt(sq.y() / n);
  r.rmse_z = std::sqrt(sq.z() / n);
  r.rmse_xy = 0.5 * (r.rmse_x + r.rmse_y);
  r.rmse_planar = std::sqrt(planar / n);
  return r;
}

AteReport evaluate_trajectory(const TrajectoryRecord& est, const TrajectoryRecord& gt,
                              double align_window) {
  const Similarity s = align_umeyama(est, gt, align_window);
  AteReport r = compute_ate(apply_similarity(est, s), gt);
  r.alignment = s;
  return r;
}

std::string format_ate_report(const AteReport& r, double align_window) {
  const Mat3& R = r.alignment.rotation;
  const Vec3& t = r.alignment.translation;
  std::string out;
  out += "[alignment]\n";
  out += fmt::format("window_s = {}\n", align_window);
  out += fmt::format("scale = {:.9f}\n", r.alignment.scale);
  out += fmt::format("rotation = [{:.9f}, {:.9f}, {:.9f}; {:.9f}, {:.9f}, {:.9f}; {:.9f}, {:.9f}, {:.9f}]\n",
                     R(0, 0), R(0, 1), R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0), R(2, 1), R(2, 2));
  out += fmt::format("translation = [{:.9f}, {:.9f}, {:.9f}]\n", t.x(), t.y(), t.z());
  out += "\n[ate]\n";
  out += fmt::format("pairs = {}\n", r.pairs);
  out += fmt::format("rmse_x_m = {:.6f}\n", r.rmse_x);
  out += fmt::format("rmse_y_m = {:.6f}\n", r.rmse_y);
  out += fmt::format("rmse_xy_m = {:.6f}\n", r.rmse_xy);
  out += fmt::format("rmse_planar_m = {:.6f}\n", r.rmse_planar);
  out += fmt::format("rmse_z_m = {:.6f}\n", r.rmse_z);
  return out;
}

std::string format_error_csv(const AteReport& r) {
  std::string out = "t,ex,ey,ez,e_xy\n";
  for (const auto& s : r.series) {
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.timestamp, s.error.x(),
                       s.error.y(), s.error.z(), s.error.head<2>().norm());
  }
  return out;
}

}  // namespace vdvio
