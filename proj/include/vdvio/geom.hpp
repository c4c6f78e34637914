#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vdvio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion stored scalar-last as (x, y, z, w).
///
/// The product follows the Hamilton rule so that rotation(a * b) equals
/// rotation(a) * rotation(b). Every instance is normalized and canonical
/// (w >= 0), so q and -q compare equal after construction.
class UnitQuaternion {
 public:
  UnitQuaternion() : xyzw_(0.0, 0.0, 0.0, 1.0) {}

  /// Normalizes and canonicalizes. Throws std::invalid_argument on a zero or
  /// non-finite input.
  static UnitQuaternion from_xyzw(double x, double y, double z, double w);
  static UnitQuaternion from_xyzw(const Vec4& xyzw) {
    return from_xyzw(xyzw[0], xyzw[1], xyzw[2], xyzw[3]);
  }
  static UnitQuaternion from_rotation(const Mat3& rotation);
  /// Exact exponential map of a rotation vector.
  static UnitQuaternion from_rotation_vector(const Vec3& phi);

  double x() const { return xyzw_[0]; }
  double y() const { return xyzw_[1]; }
  double z() const { return xyzw_[2]; }
  double w() const { return xyzw_[3]; }
  const Vec4& xyzw() const { return xyzw_; }
  Vec3 vec() const { return xyzw_.head<3>(); }

  Mat3 to_rotation() const;
  UnitQuaternion inverse() const;
  UnitQuaternion operator*(const UnitQuaternion& rhs) const;

  bool operator==(const UnitQuaternion& rhs) const { return xyzw_ == rhs.xyzw_; }

 private:
  explicit UnitQuaternion(const Vec4& xyzw) : xyzw_(xyzw) {}
  Vec4 xyzw_;
};

/// Left-error boxplus: exp(dtheta) applied on the left of q.
/// To first order this is [dtheta/2; 1] (x) q.
UnitQuaternion quat_boxplus(const UnitQuaternion& q, const Vec3& dtheta);

/// Inverse of quat_boxplus: returns log(a * b^-1) so that
/// quat_boxplus(b, quat_boxminus(a, b)) == a.
Vec3 quat_boxminus(const UnitQuaternion& a, const UnitQuaternion& b);

Mat3 skew(const Vec3& w);
Vec3 vee(const Mat3& m);

Mat3 so3_exp(const Vec3& phi);
/// Angle in [0, pi]. At exactly pi the axis sign is taken positive on the
/// component with the largest diagonal element.
Vec3 so3_log(const Mat3& rotation);

/// Left Jacobian of SO(3): exp(phi + d) ~= exp(J_l(phi) d) exp(phi).
Mat3 so3_left_jacobian(const Vec3& phi);

bool is_rotation(const Mat3& m, double tol = 1e-9);
/// Projects a nearly orthonormal matrix onto SO(3).
Mat3 orthonormalize(const Mat3& m);

/// Maps points from a source frame into a target frame: p_target = R p_source + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  /// (*this) after rhs: p -> this(rhs(p)).
  RigidTransform compose(const RigidTransform& rhs) const;
};

/// Geodesic interpolation between two transforms at time t in [ta, tb]:
/// R = exp(l log(Rb Ra^T)) Ra and p = (1 - l) pa + l pb with l = (t-ta)/(tb-ta).
/// Exact at both ends. Throws std::invalid_argument when tb <= ta and
/// std::out_of_range when t lies outside [ta, tb].
RigidTransform pose_interpolate(const RigidTransform& ta_pose, const RigidTransform& tb_pose,
                                double ta, double tb, double t);

}  // namespace vdvio
