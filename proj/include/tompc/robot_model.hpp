#pragma once
// Serial-chain revolute manipulator: forward kinematics, world-aligned frame
// Jacobians, null-space projection, and rigid-body dynamics (CRBA for the
// mass matrix, recursive Newton-Euler for bias forces).

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tompc/lie.hpp"

namespace tompc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using FrameId = std::size_t;

struct RevoluteJoint {
  std::string name;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // in the joint frame
  Pose origin;                                      // parent link frame -> joint frame
};

struct LinkInertia {
  double mass = 1.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();  // about the COM, link axes
};

/// Capsule attached to a link: segment endpoints in the link frame plus radius.
struct LinkCapsule {
  std::size_t link = 0;  // 1-based link index
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  double radius = 0.05;
};

struct JointLimits {
  VectorXd q_min, q_max;
  VectorXd qd_min, qd_max;
  VectorXd tau_min, tau_max;
};

struct Frame {
  std::string name;
  std::size_t link = 0;  // 0 is the fixed base
  Pose placement;
};

class RobotModel {
 public:
  std::vector<RevoluteJoint> joints;
  std::vector<LinkInertia> links;  // links[i] is carried by joints[i]
  std::vector<LinkCapsule> capsules;
  std::vector<Frame> frames;
  JointLimits limits;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};

  int dof() const { return static_cast<int>(joints.size()); }

  FrameId frame_id(const std::string& name) const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i].name == name) return i;
    }
    throw std::out_of_range("unknown frame '" + name + "'");
  }

  const Frame& frame(FrameId id) const {
    if (id >= frames.size()) throw std::out_of_range("unknown frame id " + std::to_string(id));
    return frames[id];
  }

  /// Adds "link1".."linkN" frames (identity placement) if missing.
  void add_link_frames() {
    for (std::size_t i = 1; i <= joints.size(); ++i) {
      const std::string name = "link" + std::to_string(i);
      bool present = false;
      for (const auto& f : frames) present = present || f.name == name;
      if (!present) frames.push_back({name, i, Pose::identity()});
    }
  }

  /// Checks the structural invariants; throws std::invalid_argument.
  void validate() const {
    const auto n = joints.size();
    if (n == 0) throw std::invalid_argument("robot has no joints");
    if (links.size() != n) throw std::invalid_argument("one inertial record per joint required");
    for (const auto& l : links) {
      if (!(l.mass > 0.0)) throw std::invalid_argument("link mass must be positive");
      if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("link inertia must be symmetric");
      }
      if (l.inertia.llt().info() != Eigen::Success) {
        throw std::invalid_argument("link inertia must be positive definite");
      }
    }
    for (const auto& j : joints) {
      if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw std::invalid_argument("joint axis must be unit");
    }
    auto sized = [n](const VectorXd& v) { return static_cast<std::size_t>(v.size()) == n; };
    const auto& L = limits;
    if (!sized(L.q_min) || !sized(L.q_max) || !sized(L.qd_min) || !sized(L.qd_max) ||
        !sized(L.tau_min) || !sized(L.tau_max)) {
      throw std::invalid_argument("limit vectors must have one entry per joint");
    }
    if ((L.q_min.array() >= L.q_max.array()).any()) throw std::invalid_argument("q_min < q_max required");
    if ((L.qd_min.array() > L.qd_max.array()).any() || (L.tau_min.array() > L.tau_max.array()).any()) {
      throw std::invalid_argument("inverted velocity or torque limits");
    }
    for (const auto& c : capsules) {
      if (c.link == 0 || c.link > n || !(c.radius > 0.0)) throw std::invalid_argument("bad link capsule");
    }
    for (const auto& f : frames) {
      if (f.link > n) throw std::invalid_argument("frame '" + f.name + "' on unknown link");
    }
  }
};

struct StateVector {
  VectorXd q;
  VectorXd qd;

  static StateVector from_stacked(const VectorXd& x) {
    const auto n = x.size() / 2;
    return {x.head(n), x.tail(n)};
  }
  VectorXd stacked() const {
    VectorXd x(q.size() + qd.size());
    x << q, qd;
    return x;
  }
};

struct ControlVector {
  VectorXd tau;
};

// ---------------------------------------------------------------------------
// Kinematics

/// World poses of the base (index 0) and of every link frame (1..n).
inline std::vector<Pose> link_poses(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  std::vector<Pose> poses(n + 1);
  for (int i = 0; i < n; ++i) {
    const auto& j = model.joints[i];
    Pose rot;
    rot.rotation = Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix();
    poses[i + 1] = poses[i] * j.origin * rot;
  }
  return poses;
}

inline Pose frame_pose(const RobotModel& model, const std::vector<Pose>& poses, FrameId frame) {
  const auto& f = model.frame(frame);
  return poses[f.link] * f.placement;
}

inline Pose forward_kinematics(const RobotModel& model, const VectorXd& q, FrameId frame) {
  return frame_pose(model, link_poses(model, q), frame);
}

/// Translational Jacobian of a point rigidly attached to `link`, given in world
/// coordinates. Columns of joints that do not carry the link are zero.
inline Matrix3X point_jacobian(const RobotModel& model, const std::vector<Pose>& poses,
                               std::size_t link, const Eigen::Vector3d& point) {
  const int n = model.dof();
  Matrix3X jac = Matrix3X::Zero(3, n);
  for (std::size_t i = 1; i <= link; ++i) {
    const Eigen::Vector3d z = poses[i].rotation * model.joints[i - 1].axis;
    jac.col(i - 1) = z.cross(point - poses[i].translation);
  }
  return jac;
}

/// Jacobian of a frame in the world-aligned convention: rows 0..2 give the
/// linear velocity of the frame origin, rows 3..5 the angular velocity, both
/// in world coordinates.
inline Matrix6X frame_jacobian(const RobotModel& model, const std::vector<Pose>& poses, FrameId frame) {
  const auto& f = model.frame(frame);
  const Eigen::Vector3d p = frame_pose(model, poses, frame).translation;
  const int n = model.dof();
  Matrix6X jac = Matrix6X::Zero(6, n);
  for (std::size_t i = 1; i <= f.link; ++i) {
    const Eigen::Vector3d z = poses[i].rotation * model.joints[i - 1].axis;
    jac.block<3, 1>(0, i - 1) = z.cross(p - poses[i].translation);
    jac.block<3, 1>(3, i - 1) = z;
  }
  return jac;
}

inline Matrix6X frame_jacobian(const RobotModel& model, const VectorXd& q, FrameId frame) {
  return frame_jacobian(model, link_poses(model, q), frame);
}

/// Body-frame Jacobian (twist expressed in the frame's own axes).
inline Matrix6X body_jacobian(const RobotModel& model, const std::vector<Pose>& poses, FrameId frame) {
  const Eigen::Matrix3d rt = frame_pose(model, poses, frame).rotation.transpose();
  Matrix6X jac = frame_jacobian(model, poses, frame);
  jac.topRows<3>() = rt * jac.topRows<3>();
  jac.bottomRows<3>() = rt * jac.bottomRows<3>();
  return jac;
}

constexpr double kSingularThreshold = 1e-8;
constexpr double kPinvDamping = 1e-4;

/// Right pseudo-inverse J^T (J J^T)^-1, switching to the damped form
/// J^T (J J^T + eps^2 I)^-1 when the smallest singular value drops below 1e-8.
inline MatrixXd pseudo_inverse(const MatrixXd& jac) {
  const MatrixXd jjt = jac * jac.transpose();
  const Eigen::JacobiSVD<MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  const bool full_rank = jac.rows() <= jac.cols() && sv.size() == jac.rows() &&
                         sv[sv.size() - 1] >= kSingularThreshold;
  MatrixXd gram = jjt;
  if (!full_rank) gram.diagonal().array() += kPinvDamping * kPinvDamping;
  return jac.transpose() * gram.ldlt().solve(MatrixXd::Identity(jac.rows(), jac.rows()));
}

/// N = I - pinv(J) J.
inline MatrixXd null_space_projector(const MatrixXd& jac) {
  return MatrixXd::Identity(jac.cols(), jac.cols()) - pseudo_inverse(jac) * jac;
}

// ---------------------------------------------------------------------------
// Dynamics

/// Recursive Newton-Euler inverse dynamics (world coordinates).
/// Returns M(q) qdd + C(q, qd) qd + g(q).
inline VectorXd inverse_dynamics(const RobotModel& model, const std::vector<Pose>& poses,
                                 const VectorXd& qd, const VectorXd& qdd) {
  const int n = model.dof();
  std::vector<Eigen::Vector3d> z(n + 1), w(n + 1), dw(n + 1), com(n + 1);

  Eigen::Vector3d w_prev = Eigen::Vector3d::Zero();
  Eigen::Vector3d dw_prev = Eigen::Vector3d::Zero();
  Eigen::Vector3d a_prev = -model.gravity;  // acceleration of the base origin
  Eigen::Vector3d o_prev = poses[0].translation;

  std::vector<Eigen::Vector3d> f_link(n + 1), n_link(n + 1);
  for (int i = 1; i <= n; ++i) {
    const Pose& T = poses[i];
    z[i] = T.rotation * model.joints[i - 1].axis;
    const Eigen::Vector3d r = T.translation - o_prev;
    const Eigen::Vector3d a_o = a_prev + dw_prev.cross(r) + w_prev.cross(w_prev.cross(r));
    w[i] = w_prev + z[i] * qd[i - 1];
    dw[i] = dw_prev + z[i] * qdd[i - 1] + w_prev.cross(z[i] * qd[i - 1]);

    const LinkInertia& L = model.links[i - 1];
    const Eigen::Vector3d rc = T.rotation * L.com;
    com[i] = rc;
    const Eigen::Vector3d a_c = a_o + dw[i].cross(rc) + w[i].cross(w[i].cross(rc));
    const Eigen::Matrix3d I_w = T.rotation * L.inertia * T.rotation.transpose();
    f_link[i] = L.mass * a_c;
    n_link[i] = I_w * dw[i] + w[i].cross(I_w * w[i]);

    w_prev = w[i];
    dw_prev = dw[i];
    a_prev = a_o;
    o_prev = T.translation;
  }

  VectorXd tau(n);
  Eigen::Vector3d f_next = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_next = Eigen::Vector3d::Zero();
  Eigen::Vector3d o_next = Eigen::Vector3d::Zero();
  for (int i = n; i >= 1; --i) {
    const Eigen::Vector3d o = poses[i].translation;
    const Eigen::Vector3d n_i = n_link[i] + com[i].cross(f_link[i]) + n_next + (o_next - o).cross(f_next);
    const Eigen::Vector3d f_i = f_link[i] + f_next;
    tau[i - 1] = z[i].dot(n_i);
    f_next = f_i;
    n_next = n_i;
    o_next = o;
  }
  return tau;
}

inline VectorXd inverse_dynamics(const RobotModel& model, const VectorXd& q, const VectorXd& qd,
                                 const VectorXd& qdd) {
  return inverse_dynamics(model, link_poses(model, q), qd, qdd);
}

/// C(q, qd) qd + g(q).
inline VectorXd bias_forces(const RobotModel& model, const VectorXd& q, const VectorXd& qd) {
  return inverse_dynamics(model, q, qd, VectorXd::Zero(model.dof()));
}

inline VectorXd gravity_vector(const RobotModel& model, const VectorXd& q) {
  const VectorXd zero = VectorXd::Zero(model.dof());
  return inverse_dynamics(model, q, zero, zero);
}

/// Composite-rigid-body mass matrix using world-frame spatial inertias
/// (angular; linear ordering, taken about the world origin).
inline MatrixXd mass_matrix(const RobotModel& model, const std::vector<Pose>& poses) {
  using Matrix6d = Eigen::Matrix<double, 6, 6>;
  const int n = model.dof();
  std::vector<Matrix6d> composite(n + 2, Matrix6d::Zero());
  Matrix6X motion(6, n);
  for (int i = 1; i <= n; ++i) {
    const Pose& T = poses[i];
    const LinkInertia& L = model.links[i - 1];
    const Eigen::Vector3d c = T.act(L.com);
    const Eigen::Matrix3d cx = skew(c);
    Matrix6d I = Matrix6d::Zero();
    I.topLeftCorner<3, 3>() = T.rotation * L.inertia * T.rotation.transpose() + L.mass * cx.transpose() * cx;
    I.topRightCorner<3, 3>() = L.mass * cx;
    I.bottomLeftCorner<3, 3>() = L.mass * cx.transpose();
    I.bottomRightCorner<3, 3>() = L.mass * Eigen::Matrix3d::Identity();
    composite[i] = I;
    const Eigen::Vector3d z = T.rotation * model.joints[i - 1].axis;
    motion.block<3, 1>(0, i - 1) = z;
    motion.block<3, 1>(3, i - 1) = T.translation.cross(z);
  }
  for (int i = n - 1; i >= 1; --i) composite[i] += composite[i + 1];

  MatrixXd M(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const double v = motion.col(i - 1).dot(composite[j] * motion.col(j - 1));
      M(i - 1, j - 1) = v;
      M(j - 1, i - 1) = v;
    }
  }
  return M;
}

inline MatrixXd mass_matrix(const RobotModel& model, const VectorXd& q) {
  return mass_matrix(model, link_poses(model, q));
}

/// qdd = M^-1 (tau + Jc^T F - C qd - g).
inline VectorXd forward_dynamics(const RobotModel& model, const StateVector& x, const ControlVector& u,
                                 const Wrench& wrench, const Matrix6X& contact_jacobian) {
  const auto poses = link_poses(model, x.q);
  const MatrixXd M = mass_matrix(model, poses);
  const VectorXd bias = inverse_dynamics(model, poses, x.qd, VectorXd::Zero(model.dof()));
  VectorXd rhs = u.tau - bias;
  if (contact_jacobian.cols() == model.dof()) rhs += contact_jacobian.transpose() * wrench.vector();
  return M.llt().solve(rhs);
}

}  // namespace tompc
