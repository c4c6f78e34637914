#include "vdvio/updates.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

namespace vdvio {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Vec3 predict_dvl_velocity(const ImuState& imu, const Extrinsics& ext, const Vec3& omega) {
  const Mat3& r_id = ext.dvl_to_imu.rotation;
  const Vec3& p_id = ext.dvl_to_imu.translation;
  return r_id.transpose() * (imu.rotation() * imu.velocity + omega.cross(p_id));
}

LinearizedMeasurement dvl_velocity_residual(const FilterState& state, const DvlVelocity& z,
                                            const Extrinsics& ext, const Vec3& omega) {
  using namespace layout;
  const Mat3 r_id_t = ext.dvl_to_imu.rotation.transpose();
  const Mat3 r = state.imu.rotation();

  LinearizedMeasurement out;
  out.residual = z.velocity - predict_dvl_velocity(state.imu, ext, omega);
  out.jacobian = MatrixXd::Zero(3, state.dim());
  out.jacobian.block<3, 3>(0, kTheta) = -r_id_t * skew(r * state.imu.velocity);
  out.jacobian.block<3, 3>(0, kVel) = r_id_t * r;
  return out;
}

namespace {

// Global-frame direction that the depth difference is rotated through before
// the rotation into the global frame: R_ID R_DP [0 0 d].
Vec3 pressure_lever(const Extrinsics& ext, double depth_difference) {
  return ext.dvl_to_imu.rotation * ext.pressure_to_dvl * Vec3(0.0, 0.0, depth_difference);
}

}  // namespace

double pressure_displacement(const UnitQuaternion& orientation, const Extrinsics& ext,
                             const PressureSample& initial, const PressureSample& current) {
  const Vec3 w = pressure_lever(ext, initial.depth - current.depth);
  return (orientation.to_rotation().transpose() * w)[2];
}

LinearizedMeasurement pressure_residual(const FilterState& state, const PressureSample& z,
                                        const PressureSample& initial, const Extrinsics& ext) {
  using namespace layout;
  const Vec3 w = pressure_lever(ext, initial.depth - z.depth);
  const Mat3 r = state.imu.rotation();

  LinearizedMeasurement out;
  out.residual.resize(1);
  out.residual[0] = (r.transpose() * w)[2] - state.imu.position.z();
  out.jacobian = MatrixXd::Zero(1, state.dim());
  out.jacobian(0, kPos + 2) = 1.0;
  // d(R^T w)/dtheta = R^T [w]x under R = exp(theta) R_hat.
  out.jacobian.block<1, 3>(0, kTheta) = -(r.transpose() * skew(w)).row(2);
  return out;
}

Vec3 feature_in_camera(const ClonePose& clone, const Extrinsics& ext, const Vec3& p_f_global) {
  return ext.imu_to_cam.rotation * (clone.rotation() * (p_f_global - clone.position)) +
         ext.imu_to_cam.translation;
}

Vec2 project(const Vec3& p_cam) { return p_cam.head<2>() / p_cam.z(); }

VisualResidualBlock visual_feature_residual(const FilterState& state, const Extrinsics& ext,
                                            const FeatureTrack& track, const Vec3& p_f_global) {
  const int m = static_cast<int>(track.size());
  VisualResidualBlock out;
  out.residual = VectorXd::Zero(2 * m);
  out.H_x = MatrixXd::Zero(2 * m, state.dim());
  out.H_f = MatrixXd::Zero(2 * m, 3);

  const Mat3& r_ci = ext.imu_to_cam.rotation;
  for (int k = 0; k < m; ++k) {
    const auto& meas = track.measurements[k];
    const int idx = state.clone_index(meas.timestamp);
    if (idx < 0) {
      throw std::invalid_argument("feature measurement has no matching clone");
    }
    const ClonePose& clone = state.clones[idx];
    const Mat3 r = clone.rotation();
    const Vec3 rel = r * (p_f_global - clone.position);
    const Vec3 pc = r_ci * rel + ext.imu_to_cam.translation;
    if (!(pc.z() > kMinFeatureDepth)) {
      throw BehindCameraError("feature " + std::to_string(track.id) + " is behind camera");
    }

    Eigen::Matrix<double, 2, 3> dpi;
    const double iz = 1.0 / pc.z();
    dpi << iz, 0.0, -pc.x() * iz * iz, 0.0, iz, -pc.y() * iz * iz;

    const int o = layout::clone_offset(idx);
    out.residual.segment<2>(2 * k) = meas.uv - project(pc);
    out.H_x.block<2, 3>(2 * k, o) = -dpi * r_ci * skew(rel);
    out.H_x.block<2, 3>(2 * k, o + 3) = -dpi * r_ci * r;
    out.H_f.block<2, 3>(2 * k, 0) = dpi * r_ci * r;
  }
  return out;
}

VisualResidualBlock nullspace_project(const VisualResidualBlock& block) {
  const int rows = static_cast<int>(block.H_f.rows());
  if (block.H_f.cols() != 3 || rows <= 3) {
    throw DegenerateGeometryError("feature Jacobian needs more than three rows");
  }
  Eigen::HouseholderQR<MatrixXd> qr(block.H_f);
  const auto r_diag = qr.matrixQR().diagonal().head<3>().cwiseAbs();
  const double scale = block.H_f.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || r_diag.minCoeff() <= 1e-9 * scale) {
    throw DegenerateGeometryError("feature Jacobian is rank deficient");
  }

  // Q^T applied in place; the last rows - 3 rows span the left nullspace.
  MatrixXd hx = block.H_x;
  VectorXd r = block.residual;
  hx.applyOnTheLeft(qr.householderQ().transpose());
  r.applyOnTheLeft(qr.householderQ().transpose());

  VisualResidualBlock out;
  out.H_x = hx.bottomRows(rows - 3);
  out.residual = r.tail(rows - 3);
  out.H_f = MatrixXd(0, 3);
  return out;
}

void compress_measurement(MatrixXd& H, VectorXd& r) {
  const int n = static_cast<int>(H.cols());
  if (H.rows() <= n) return;
  Eigen::HouseholderQR<MatrixXd> qr(H);
  r.applyOnTheLeft(qr.householderQ().transpose());
  H = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  r.conservativeResize(n);
}

double chi2_quantile(int dof, double confidence) {
  if (dof <= 0 || !(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("chi2_quantile: need dof > 0 and confidence in (0, 1)");
  }
  return boost::math::quantile(boost::math::chi_squared(dof), confidence);
}

bool chi2_gate(const VectorXd& r, const MatrixXd& H, const MatrixXd& P, const MatrixXd& R_meas,
               double confidence) {
  const MatrixXd s = H * P.selfadjointView<Eigen::Lower>() * H.transpose() + R_meas;
  Eigen::LDLT<MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    spdlog::debug("chi2_gate: innovation covariance is singular, rejecting");
    return false;
  }
  const double d2 = r.dot(ldlt.solve(r));
  return d2 < chi2_quantile(static_cast<int>(r.size()), confidence);
}

bool try_ekf_update(FilterState& state, const VectorXd& r, const MatrixXd& H,
                    const MatrixXd& R_meas) {
  MatrixXd& p = state.covariance;
  if (H.cols() != p.rows() || H.rows() != r.size() || R_meas.rows() != r.size()) {
    throw std::invalid_argument("ekf_update: dimension mismatch");
  }
  const MatrixXd pht = p * H.transpose();
  const MatrixXd s = H * pht + R_meas;
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    spdlog::warn("ekf_update: innovation covariance not positive definite, update skipped");
    return false;
  }
  const MatrixXd k = llt.solve(pht.transpose()).transpose();
  const VectorXd dx = k * r;
  if (!dx.allFinite()) {
    spdlog::warn("ekf_update: non-finite correction, update skipped");
    return false;
  }

  // Joseph form (I-KH) P (I-KH)^T + K R K^T, expanded so no n x n product is formed.
  const MatrixXd khp = k * pht.transpose();
  p += k * s * k.transpose() - khp - khp.transpose();
  symmetrize(p);
  apply_correction(state, dx);
  return true;
}

FilterState ekf_update(FilterState state, const VectorXd& r, const MatrixXd& H,
                       const MatrixXd& R_meas) {
  try_ekf_update(state, r, H, R_meas);
  return state;
}

}  // namespace vdvio
