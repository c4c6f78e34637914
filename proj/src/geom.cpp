#include "vdvio/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace vdvio {

namespace {

constexpr double kSmallAngle = 1e-7;

}  // namespace

UnitQuaternion UnitQuaternion::from_xyzw(double x, double y, double z, double w) {
  Vec4 q(x, y, z, w);
  if (!q.allFinite()) {
    throw std::invalid_argument("quaternion has non-finite components");
  }
  const double n = q.norm();
  if (n < 1e-12) {
    throw std::invalid_argument("quaternion norm is zero");
  }
  // Already-normalized input is kept bit-exact so serialization round-trips.
  if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q /= n;
  if (q[3] < 0.0) q = -q;
  return UnitQuaternion(q);
}

UnitQuaternion UnitQuaternion::from_rotation(const Mat3& rotation) {
  const Eigen::Quaterniond q(rotation);
  return from_xyzw(q.x(), q.y(), q.z(), q.w());
}

UnitQuaternion UnitQuaternion::from_rotation_vector(const Vec3& phi) {
  if (!phi.allFinite()) {
    throw std::invalid_argument("rotation vector has non-finite components");
  }
  const double theta = phi.norm();
  if (theta < kSmallAngle) {
    const Vec3 v = 0.5 * phi * (1.0 - theta * theta / 24.0);
    return from_xyzw(v.x(), v.y(), v.z(), 1.0 - theta * theta / 8.0);
  }
  const Vec3 v = std::sin(0.5 * theta) / theta * phi;
  return from_xyzw(v.x(), v.y(), v.z(), std::cos(0.5 * theta));
}

Mat3 UnitQuaternion::to_rotation() const {
  return Eigen::Quaterniond(w(), x(), y(), z()).toRotationMatrix();
}

UnitQuaternion UnitQuaternion::inverse() const {
  return UnitQuaternion(Vec4(-x(), -y(), -z(), w()));
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& rhs) const {
  const Vec3 pv = vec();
  const Vec3 qv = rhs.vec();
  const double pw = w();
  const double qw = rhs.w();
  const Vec3 v = pw * qv + qw * pv + pv.cross(qv);
  const double s = pw * qw - pv.dot(qv);
  return from_xyzw(v.x(), v.y(), v.z(), s);
}

UnitQuaternion quat_boxplus(const UnitQuaternion& q, const Vec3& dtheta) {
  return UnitQuaternion::from_rotation_vector(dtheta) * q;
}

Vec3 quat_boxminus(const UnitQuaternion& a, const UnitQuaternion& b) {
  const UnitQuaternion e = a * b.inverse();
  const Vec3 v = e.vec();
  const double n = v.norm();
  if (n < 1e-12) {
    return 2.0 * v / e.w();
  }
  return (2.0 * std::atan2(n, e.w()) / n) * v;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + (std::sin(theta) / theta) * k + ((1.0 - std::cos(theta)) / t2) * k * k;
}

Vec3 so3_log(const Mat3& rotation) {
  const Vec3 axis_sin = 0.5 * vee(rotation - rotation.transpose());  // sin(theta) * axis
  const double cos_theta = std::clamp(0.5 * (rotation.trace() - 1.0), -1.0, 1.0);
  const double sin_theta = axis_sin.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    return axis_sin * (1.0 + theta * theta / 6.0);
  }
  if (cos_theta > 0.0) {
    return (theta / sin_theta) * axis_sin;
  }

  // Beyond pi/2 the symmetric part gives a well-conditioned axis:
  // (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) a a^T.
  const Mat3 sym = 0.5 * (rotation + rotation.transpose());
  const Mat3 aat = (sym - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(axis_sin) < 0.0) axis = -axis;
  return theta * axis;
}

Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-5) {
    return Mat3::Identity() + 0.5 * k + k * k / 6.0;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * k +
         ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  return (m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

RigidTransform pose_interpolate(const RigidTransform& ta_pose, const RigidTransform& tb_pose,
                                double ta, double tb, double t) {
  if (!(tb > ta)) {
    throw std::invalid_argument("pose_interpolate: degenerate interval");
  }
  if (t < ta || t > tb) {
    throw std::out_of_range("pose_interpolate: t outside [ta, tb]");
  }
  if (t == ta) return ta_pose;
  if (t == tb) return tb_pose;

  const double lambda = (t - ta) / (tb - ta);
  RigidTransform out;
  const Vec3 delta = so3_log(tb_pose.rotation * ta_pose.rotation.transpose());
  out.rotation = so3_exp(lambda * delta) * ta_pose.rotation;
  out.translation = (1.0 - lambda) * ta_pose.translation + lambda * tb_pose.translation;
  return out;
}

}  // namespace vdvio
