#pragma once
// Discrete state transition x+ = x + [qd; FD(x, u)] dt (explicit Euler) and its
// Jacobians. The rigid-body part of dFD/dq and dFD/dqd comes from central
// differences of inverse dynamics at the current acceleration; the
// interaction part uses dF/dq = s K Jc, dF/dqd = s D Jc.

#include "tompc/interaction.hpp"

namespace tompc {

struct StepDerivatives {
  MatrixXd A;  // 2n x 2n
  MatrixXd B;  // 2n x n
};

constexpr double kDynamicsFdStep = 1e-6;

inline VectorXd step(const RobotModel& model, const InteractionParams& interaction, const VectorXd& x,
                     const VectorXd& u, double dt) {
  const int n = model.dof();
  const StateVector s = StateVector::from_stacked(x);
  const auto poses = link_poses(model, s.q);
  Matrix6X jc;
  const Wrench f = interaction_wrench(interaction, model, poses, s.qd, &jc);
  const MatrixXd M = mass_matrix(model, poses);
  VectorXd rhs = u - inverse_dynamics(model, poses, s.qd, VectorXd::Zero(n));
  if (interaction.active) rhs += jc.transpose() * f.vector();
  const VectorXd qdd = M.llt().solve(rhs);
  VectorXd next(2 * n);
  next.head(n) = s.q + s.qd * dt;
  next.tail(n) = s.qd + qdd * dt;
  return next;
}

inline StateVector step(const RobotModel& model, const StateVector& x, const ControlVector& u,
                        const InteractionParams& interaction, double dt) {
  return StateVector::from_stacked(step(model, interaction, x.stacked(), u.tau, dt));
}

/// Also returns x+ through `next` when non-null.
inline StepDerivatives step_derivatives(const RobotModel& model, const InteractionParams& interaction,
                                        const VectorXd& x, const VectorXd& u, double dt,
                                        VectorXd* next = nullptr) {
  const int n = model.dof();
  const VectorXd q = x.head(n);
  const VectorXd qd = x.tail(n);
  const auto poses = link_poses(model, q);
  Matrix6X jc;
  const Wrench f = interaction_wrench(interaction, model, poses, qd, &jc);
  const MatrixXd M = mass_matrix(model, poses);
  const Eigen::LLT<MatrixXd> llt(M);
  VectorXd rhs = u - inverse_dynamics(model, poses, qd, VectorXd::Zero(n));
  if (interaction.active) rhs += jc.transpose() * f.vector();
  const VectorXd qdd = llt.solve(rhs);

  // d(ID)/dq and d(ID)/dqd at fixed qdd; FD satisfies ID(q, qd, FD) = u + Jc^T F.
  // The Jc(q)^T F term is differentiated at fixed F (geometric stiffness of
  // the contact wrench); F's own dependence on q comes from wrench_partials.
  MatrixXd did_dq(n, n), did_dqd(n, n);
  const double h = kDynamicsFdStep;
  const Vector6 fv = f.vector();
  VectorXd qp = q, qdp = qd;
  for (int j = 0; j < n; ++j) {
    qp[j] = q[j] + h;
    const auto poses_hi = link_poses(model, qp);
    VectorXd hi = inverse_dynamics(model, poses_hi, qd, qdd);
    if (interaction.active) hi -= contact_jacobian(interaction, model, poses_hi).transpose() * fv;
    qp[j] = q[j] - h;
    const auto poses_lo = link_poses(model, qp);
    VectorXd lo = inverse_dynamics(model, poses_lo, qd, qdd);
    if (interaction.active) lo -= contact_jacobian(interaction, model, poses_lo).transpose() * fv;
    qp[j] = q[j];
    did_dq.col(j) = (hi - lo) / (2.0 * h);

    qdp[j] = qd[j] + h;
    const VectorXd vhi = inverse_dynamics(model, poses, qdp, qdd);
    qdp[j] = qd[j] - h;
    const VectorXd vlo = inverse_dynamics(model, poses, qdp, qdd);
    qdp[j] = qd[j];
    did_dqd.col(j) = (vhi - vlo) / (2.0 * h);
  }
  MatrixXd rhs_q = -did_dq;
  MatrixXd rhs_qd = -did_dqd;
  if (interaction.active) {
    const WrenchPartials p = wrench_partials(interaction, model, poses);
    rhs_q += jc.transpose() * p.dq;
    rhs_qd += jc.transpose() * p.dqd;
  }
  const MatrixXd minv = llt.solve(MatrixXd::Identity(n, n));

  StepDerivatives d;
  d.A = MatrixXd::Identity(2 * n, 2 * n);
  d.A.topRightCorner(n, n).diagonal().array() += dt;
  d.A.bottomLeftCorner(n, n) = dt * minv * rhs_q;
  d.A.bottomRightCorner(n, n) += dt * minv * rhs_qd;
  d.B = MatrixXd::Zero(2 * n, n);
  d.B.bottomRows(n) = dt * minv;
  if (next) {
    next->resize(2 * n);
    next->head(n) = q + qd * dt;
    next->tail(n) = qd + qdd * dt;
  }
  return d;
}

}  // namespace tompc
