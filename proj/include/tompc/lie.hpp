#pragma once
// SE(3) pose algebra: exp/log maps, the pose difference operator, and the
// Jacobians of the log map used by Gauss-Newton cost expansions.
//
// All 6-vectors (twists, wrenches, se(3) coordinates) are ordered
// (linear; angular).

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tompc {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Thrown when the rotation log is evaluated at (or numerically near) angle pi.
class BranchSingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  static Pose from_translation(const Eigen::Vector3d& t) {
    Pose p;
    p.translation = t;
    return p;
  }

  static Pose from_rotation(const Eigen::Matrix3d& r) {
    Pose p;
    p.rotation = r;
    return p;
  }

  Pose inverse() const {
    Pose p;
    p.rotation = rotation.transpose();
    p.translation = -(p.rotation * translation);
    return p;
  }

  Eigen::Vector3d act(const Eigen::Vector3d& point) const {
    return rotation * point + translation;
  }

  friend Pose operator*(const Pose& a, const Pose& b) {
    Pose p;
    p.rotation = a.rotation * b.rotation;
    p.translation = a.rotation * b.translation + a.translation;
    return p;
  }
};

/// Spatial velocity of a frame.
struct Twist {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();

  Vector6 vector() const {
    Vector6 v;
    v << linear, angular;
    return v;
  }
  static Twist from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Spatial force applied to a frame.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();

  Vector6 vector() const {
    Vector6 v;
    v << force, moment;
    return v;
  }
  static Wrench from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

namespace detail {

constexpr double kSmallAngle = 1e-6;
constexpr double kSeriesAngle = 5e-2;
constexpr double kPiMargin = 1e-6;

// Series expansions are used below kSeriesAngle where the closed forms lose
// most of their significant digits.
inline double coeff_a(double th) {  // sin(th)/th
  return th < kSeriesAngle ? 1.0 - th * th / 6.0 + th * th * th * th / 120.0 : std::sin(th) / th;
}
inline double coeff_b(double th) {  // (1-cos th)/th^2
  return th < kSeriesAngle ? 0.5 - th * th / 24.0 + th * th * th * th / 720.0
                           : (1.0 - std::cos(th)) / (th * th);
}
inline double coeff_c(double th) {  // (th - sin th)/th^3
  return th < kSeriesAngle ? 1.0 / 6.0 - th * th / 120.0 + th * th * th * th / 5040.0
                           : (th - std::sin(th)) / (th * th * th);
}
inline double coeff_d(double th) {  // (th^2 + 2cos th - 2)/(2 th^4)
  const double t2 = th * th;
  return th < kSeriesAngle ? 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0
                           : (t2 + 2.0 * std::cos(th) - 2.0) / (2.0 * t2 * t2);
}
inline double coeff_e(double th) {  // (2th - 3sin th + th cos th)/(2 th^5)
  const double t2 = th * th;
  return th < kSeriesAngle
             ? 1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0
             : (2.0 * th - 3.0 * std::sin(th) + th * std::cos(th)) / (2.0 * t2 * t2 * th);
}
inline double coeff_vinv(double th) {  // (1 - th sin th / (2(1-cos th)))/th^2
  const double t2 = th * th;
  return th < kSeriesAngle ? 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
                           : (1.0 - th * std::sin(th) / (2.0 * (1.0 - std::cos(th)))) / t2;
}

}  // namespace detail

inline Eigen::Matrix3d exp_rotation(const Eigen::Vector3d& phi) {
  const double th = phi.norm();
  const Eigen::Matrix3d w = skew(phi);
  return Eigen::Matrix3d::Identity() + detail::coeff_a(th) * w + detail::coeff_b(th) * w * w;
}

/// Principal rotation vector of R. Throws BranchSingularityError for angles
/// within 1e-6 of pi.
inline Eigen::Vector3d log_rotation(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * w.norm();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double th = std::atan2(s, c);
  if (th > M_PI - detail::kPiMargin) {
    throw BranchSingularityError("rotation log evaluated at angle near pi");
  }
  if (th < detail::kSmallAngle) {
    return 0.5 * (1.0 + th * th / 6.0) * w;
  }
  return (th / (2.0 * s)) * w;
}

/// Left Jacobian of SO(3) (also the V matrix of the SE(3) exponential).
inline Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi) {
  const double th = phi.norm();
  const Eigen::Matrix3d w = skew(phi);
  return Eigen::Matrix3d::Identity() + detail::coeff_b(th) * w + detail::coeff_c(th) * w * w;
}

inline Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double th = phi.norm();
  const Eigen::Matrix3d w = skew(phi);
  return Eigen::Matrix3d::Identity() - 0.5 * w + detail::coeff_vinv(th) * w * w;
}

inline Pose exp_pose(const Vector6& v) {
  const Eigen::Vector3d rho = v.head<3>();
  const Eigen::Vector3d phi = v.tail<3>();
  Pose p;
  p.rotation = exp_rotation(phi);
  p.translation = so3_left_jacobian(phi) * rho;
  return p;
}

inline Vector6 log_pose(const Pose& x) {
  const Eigen::Vector3d phi = log_rotation(x.rotation);
  Vector6 v;
  v << so3_left_jacobian_inverse(phi) * x.translation, phi;
  return v;
}

/// Pose difference X1 (-) X2 = log(X1^-1 X2).
inline Vector6 pose_diff(const Pose& x1, const Pose& x2) {
  return log_pose(x1.inverse() * x2);
}

/// Coupling block Q(rho, phi) of the SE(3) left Jacobian.
inline Eigen::Matrix3d se3_left_jacobian_coupling(const Vector6& xi) {
  const Eigen::Vector3d phi = xi.tail<3>();
  const double th = phi.norm();
  const Eigen::Matrix3d p = skew(phi);
  const Eigen::Matrix3d r = skew(xi.head<3>());
  const Eigen::Matrix3d prp = p * r * p;
  return 0.5 * r + detail::coeff_c(th) * (p * r + r * p + prp) +
         detail::coeff_d(th) * (p * p * r + r * p * p - 3.0 * prp) +
         detail::coeff_e(th) * (prp * p + p * prp);
}

inline Matrix6 se3_left_jacobian_inverse(const Vector6& xi) {
  const Eigen::Matrix3d jinv = so3_left_jacobian_inverse(xi.tail<3>());
  const Eigen::Matrix3d q = se3_left_jacobian_coupling(xi);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = jinv;
  out.bottomRightCorner<3, 3>() = jinv;
  out.topRightCorner<3, 3>() = -jinv * q * jinv;
  return out;
}

/// d log(E exp(delta)) / d delta at delta = 0, for xi = log(E).
inline Matrix6 se3_right_jacobian_inverse(const Vector6& xi) {
  return se3_left_jacobian_inverse(-xi);
}

/// Rotation angle between two rotations via the trace formula.
inline double geodesic_angle(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  const double c = std::clamp(0.5 * ((r1.transpose() * r2).trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

/// Poses serialize as translation plus a unit quaternion (w, x, y, z).
inline Pose pose_from_quaternion(const Eigen::Vector3d& translation, double w, double x, double y,
                                 double z) {
  Eigen::Quaterniond q(w, x, y, z);
  if (q.norm() < 1e-12) throw std::invalid_argument("zero quaternion");
  q.normalize();
  Pose p;
  p.rotation = q.toRotationMatrix();
  p.translation = translation;
  return p;
}

inline Eigen::Vector4d quaternion_wxyz(const Pose& p) {
  Eigen::Quaterniond q(p.rotation);
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

}  // namespace tompc
