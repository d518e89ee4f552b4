#pragma once
// Spring-damper environment model: wrench from the contact-frame pose error
// and twist, plus its partial derivatives.
//
//   F = s * (K (X_ref (-) X) + D V)
//
// X_ref (-) X = log(X_ref^-1 X) and V are both expressed in the anchor frame,
// and the contact Jacobian Jc maps qd to that twist. With s = +1 the formula is
// the literal one; the default s = -1 makes the spring restoring and the damper
// dissipative.

#include "tompc/robot_model.hpp"

namespace tompc {

struct InteractionParams {
  Vector6 k_env = Vector6::Zero();  // diagonal of K_env
  Vector6 d_env = Vector6::Zero();  // diagonal of D_env
  FrameId contact_frame = 0;
  Pose anchor_ref;
  bool active = false;
  double sign = -1.0;
};

/// Jc = blockdiag(R_ref^T, R_ref^T) J_world.
inline Matrix6X contact_jacobian(const InteractionParams& params, const RobotModel& model,
                                 const std::vector<Pose>& poses) {
  Matrix6X jac = frame_jacobian(model, poses, params.contact_frame);
  const Eigen::Matrix3d rt = params.anchor_ref.rotation.transpose();
  jac.topRows<3>() = rt * jac.topRows<3>();
  jac.bottomRows<3>() = rt * jac.bottomRows<3>();
  return jac;
}

inline Wrench interaction_wrench(const InteractionParams& params, const RobotModel& model,
                                 const std::vector<Pose>& poses, const VectorXd& qd,
                                 Matrix6X* jc_out = nullptr) {
  if (!params.active) {
    if (jc_out) *jc_out = Matrix6X::Zero(6, model.dof());
    return {};
  }
  const Matrix6X jc = contact_jacobian(params, model, poses);
  const Pose x = frame_pose(model, poses, params.contact_frame);
  const Vector6 err = pose_diff(params.anchor_ref, x);
  const Vector6 twist = jc * qd;
  if (jc_out) *jc_out = jc;
  const Vector6 f = params.sign * (params.k_env.cwiseProduct(err) + params.d_env.cwiseProduct(twist));
  return Wrench::from_vector(f);
}

inline Wrench interaction_wrench(const InteractionParams& params, const RobotModel& model,
                                 const StateVector& x) {
  return interaction_wrench(params, model, link_poses(model, x.q), x.qd);
}

struct WrenchPartials {
  Matrix6X dq;   // dF/dq = s K Jc
  Matrix6X dqd;  // dF/dqd = s D Jc
  Matrix6X du;   // dF/du = 0
};

inline WrenchPartials wrench_partials(const InteractionParams& params, const RobotModel& model,
                                      const std::vector<Pose>& poses) {
  const int n = model.dof();
  WrenchPartials p{Matrix6X::Zero(6, n), Matrix6X::Zero(6, n), Matrix6X::Zero(6, n)};
  if (!params.active) return p;
  const Matrix6X jc = contact_jacobian(params, model, poses);
  p.dq = params.sign * params.k_env.asDiagonal() * jc;
  p.dqd = params.sign * params.d_env.asDiagonal() * jc;
  return p;
}

inline WrenchPartials wrench_partials(const InteractionParams& params, const RobotModel& model,
                                      const StateVector& x) {
  return wrench_partials(params, model, link_poses(model, x.q));
}

}  // namespace tompc
