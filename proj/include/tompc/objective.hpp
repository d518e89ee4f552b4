#pragma once
// Cost terms: motion and force tracking, task-oriented avoidance with a
// repulsive velocity and goal relaxation, gravity-referenced control effort,
// and the quadratic barrier used by the penalty baseline. Expansions are
// Gauss-Newton (residual Jacobian outer products).

#include <cmath>
#include <vector>

#include "tompc/collision.hpp"
#include "tompc/ddp.hpp"
#include "tompc/interaction.hpp"

namespace tompc {

struct TaskWeights {
  Vector6 q_m = (Vector6() << 500, 500, 500, 50, 50, 50).finished();
  VectorXd q_s;  // n; empty means 0.1
  Vector6 q_f = Vector6::Zero();
  VectorXd q_rep;  // n; empty means 1
  VectorXd r;      // n; empty means 1e-3
  Vector6 s = Vector6::Ones();
  double alpha = 2.0;
  double k_rep = 2.0;
  double d_th1 = 0.02;
  double d_th2 = 0.15;
  double sigma = 2.0;

  /// Fills per-joint defaults for an n-joint robot.
  void resize(int n) {
    if (q_s.size() == 0) q_s = VectorXd::Constant(n, 0.1);
    if (q_rep.size() == 0) q_rep = VectorXd::Constant(n, 1.0);
    if (r.size() == 0) r = VectorXd::Constant(n, 1e-3);
  }

  void validate(int n) const {
    if (q_s.size() != n || q_rep.size() != n || r.size() != n) throw std::invalid_argument("weight sizes");
    if ((q_m.array() < 0).any() || (q_f.array() < 0).any() || (q_s.array() < 0).any() || (q_rep.array() < 0).any())
      throw std::invalid_argument("weights must be nonnegative");
    if (!((r.array() > 0).all())) throw std::invalid_argument("control weight must be positive");
    for (int j = 0; j < 6; ++j) {
      if (q_m[j] * q_f[j] != 0.0) throw std::invalid_argument("motion and force weights must be complementary");
      if (s[j] != 0.0 && s[j] != 1.0) throw std::invalid_argument("selection entries must be 0 or 1");
    }
    if (!(d_th2 > d_th1)) throw std::invalid_argument("d_th2 must exceed d_th1");
    if (!(alpha > 0) || !(k_rep > 0) || !(sigma > 0)) throw std::invalid_argument("alpha, k_rep, sigma must be positive");
  }
};

struct StageReference {
  Pose x_ref;
  Wrench f_ref;
};

struct RepulsiveContext {
  std::size_t pair = 0;
  double d = 0.0;
  Eigen::Vector3d n_hat = Eigen::Vector3d::UnitZ();
  Matrix3X j_a;  // translational Jacobian at the robot witness point
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // j_a * qd
};

// ---------------------------------------------------------------------------
// Scalar terms

inline double goal_relaxation(double d, const TaskWeights& w) {
  if (d > w.d_th2) return 1.0;
  return std::exp(-w.alpha * (w.d_th2 - d) / (w.d_th2 - w.d_th1));
}

inline Eigen::Vector3d repulsive_velocity(const RepulsiveContext& ctx, const TaskWeights& w) {
  return w.k_rep * (w.d_th2 - ctx.d) * ctx.n_hat;
}

inline Eigen::Vector3d total_velocity(const RepulsiveContext& ctx, const TaskWeights& w) {
  return ctx.v + repulsive_velocity(ctx, w);
}

inline double motion_cost(const RobotModel& model, FrameId frame, const VectorXd& x, const Pose& x_ref,
                          const TaskWeights& w, double xi) {
  const int n = model.dof();
  const Vector6 r = pose_diff(x_ref, forward_kinematics(model, x.head(n), frame));
  const VectorXd qd = x.tail(n);
  return xi * r.dot(w.s.cwiseProduct(w.q_m).cwiseProduct(r)) + qd.dot(w.q_s.cwiseProduct(qd));
}

inline double force_cost(const RobotModel& model, const VectorXd& x, const Wrench& f_ref, const TaskWeights& w,
                         const InteractionParams& ip, double xi) {
  if (!ip.active) return 0.0;
  const int n = model.dof();
  const Wrench f = interaction_wrench(ip, model, StateVector{x.head(n), x.tail(n)});
  const Vector6 e = f_ref.vector() - f.vector();
  return xi * e.dot(w.s.cwiseProduct(w.q_f).cwiseProduct(e));
}

inline double control_cost(const RobotModel& model, const VectorXd& x, const VectorXd& u, const TaskWeights& w) {
  const VectorXd e = u - gravity_vector(model, x.head(model.dof()));
  return e.dot(w.r.cwiseProduct(e));
}

/// Velocity target sum_i pinv(J_A^i) v^{i+} of the avoidance residual.
inline VectorXd avoidance_target(const std::vector<RepulsiveContext>& ctx, const TaskWeights& w, int n) {
  VectorXd c = VectorXd::Zero(n);
  for (const auto& k : ctx) {
    if (k.d > w.d_th2) continue;
    c += pseudo_inverse(k.j_a) * total_velocity(k, w);
  }
  return c;
}

/// ||N_task (qd - sum_i pinv(J_A^i) v^{i+})||^2_{Q_rep}; zero when no pair is
/// inside the repulsive band.
inline double avoidance_cost(const VectorXd& qd, const std::vector<RepulsiveContext>& ctx, const TaskWeights& w,
                             const MatrixXd& n_task) {
  bool any = false;
  for (const auto& k : ctx) any = any || k.d <= w.d_th2;
  if (!any) return 0.0;
  const VectorXd r = n_task * (qd - avoidance_target(ctx, w, static_cast<int>(qd.size())));
  return r.dot(w.q_rep.cwiseProduct(r));
}

inline double barrier_cost(const std::vector<double>& distances, const TaskWeights& w) {
  double c = 0.0;
  for (double d : distances) {
    if (d <= w.d_th1) c += 0.5 * w.sigma * (d - w.d_th1) * (d - w.d_th1);
  }
  return c;
}

/// Per link, the pair with the smallest distance inside the repulsive band.
inline std::vector<RepulsiveContext> repulsive_contexts(const RobotModel& model, const CollisionWorld& world,
                                                        const std::vector<Pose>& poses, const VectorXd& qd,
                                                        const std::vector<DistanceResult>& results,
                                                        const TaskWeights& w) {
  std::vector<RepulsiveContext> out;
  std::vector<long> best(static_cast<std::size_t>(model.dof()) + 1, -1);
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].d > w.d_th2) continue;
    const std::size_t link = world.pairs[i].link;
    if (best[link] < 0 || results[i].d < results[static_cast<std::size_t>(best[link])].d) best[link] = static_cast<long>(i);
  }
  for (std::size_t link = 1; link < best.size(); ++link) {
    if (best[link] < 0) continue;
    const auto i = static_cast<std::size_t>(best[link]);
    RepulsiveContext c;
    c.pair = i;
    c.d = results[i].d;
    c.n_hat = results[i].n_hat;
    c.j_a = point_jacobian(model, poses, link, results[i].p_a);
    c.v = c.j_a * qd;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gauss-Newton expansions

inline MatrixXd gravity_jacobian(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  MatrixXd g(n, n);
  const double h = 1e-6;
  VectorXd qp = q;
  for (int j = 0; j < n; ++j) {
    qp[j] = q[j] + h;
    const VectorXd hi = gravity_vector(model, qp);
    qp[j] = q[j] - h;
    const VectorXd lo = gravity_vector(model, qp);
    qp[j] = q[j];
    g.col(j) = (hi - lo) / (2.0 * h);
  }
  return g;
}

/// Task cost l_m + l_f + l_u (stage) and l_m + l_f (terminal), with the
/// relaxation factor xi applied to the motion and force weights.
class TaskCost {
 public:
  const RobotModel* model = nullptr;
  FrameId task_frame = 0;
  TaskWeights weights;
  InteractionParams interaction;
  double xi = 1.0;

  double stage(const VectorXd& x, const VectorXd& u, const StageReference& ref) const {
    return terminal(x, ref) + control_cost(*model, x, u, weights);
  }

  double terminal(const VectorXd& x, const StageReference& ref) const {
    return motion_cost(*model, task_frame, x, ref.x_ref, weights, xi) +
           force_cost(*model, x, ref.f_ref, weights, interaction, xi);
  }

  void terminal_expansion(const VectorXd& x, const StageReference& ref, CostExpansion& e,
                          const std::vector<Pose>* poses_in = nullptr) const {
    const int n = model->dof();
    e.reset(2 * n, n);
    const VectorXd q = x.head(n), qd = x.tail(n);
    const std::vector<Pose> poses = poses_in ? *poses_in : link_poses(*model, q);

    // Motion residual r = log(X_ref^-1 X), dr/dq = Jr^-1(r) J_body.
    const Vector6 wm = xi * weights.s.cwiseProduct(weights.q_m);
    if (wm.any()) {
      const Vector6 r = pose_diff(ref.x_ref, frame_pose(*model, poses, task_frame));
      const Eigen::Matrix<double, 6, Eigen::Dynamic> jr =
          se3_right_jacobian_inverse(r) * body_jacobian(*model, poses, task_frame);
      e.l += r.dot(wm.cwiseProduct(r));
      e.lx.head(n) += 2.0 * jr.transpose() * wm.cwiseProduct(r);
      e.lxx.topLeftCorner(n, n) += 2.0 * jr.transpose() * wm.asDiagonal() * jr;
    }
    e.l += qd.dot(weights.q_s.cwiseProduct(qd));
    e.lx.tail(n) += 2.0 * weights.q_s.cwiseProduct(qd);
    e.lxx.bottomRightCorner(n, n).diagonal() += 2.0 * weights.q_s;

    // Force residual e_f = F_ref - F, de_f/dq = -s K Jc, de_f/dqd = -s D Jc.
    const Vector6 wf = xi * weights.s.cwiseProduct(weights.q_f);
    if (interaction.active && wf.any()) {
      const Wrench f = interaction_wrench(interaction, *model, poses, qd);
      const Vector6 ef = ref.f_ref.vector() - f.vector();
      const WrenchPartials p = wrench_partials(interaction, *model, poses);
      Eigen::Matrix<double, 6, Eigen::Dynamic> jf(6, 2 * n);
      jf << -p.dq, -p.dqd;
      e.l += ef.dot(wf.cwiseProduct(ef));
      e.lx += 2.0 * jf.transpose() * wf.cwiseProduct(ef);
      e.lxx += 2.0 * jf.transpose() * wf.asDiagonal() * jf;
    }
  }

  void stage_expansion(const VectorXd& x, const VectorXd& u, const StageReference& ref, CostExpansion& e,
                       const std::vector<Pose>* poses_in = nullptr) const {
    const int n = model->dof();
    const VectorXd q = x.head(n);
    const std::vector<Pose> poses = poses_in ? *poses_in : link_poses(*model, q);
    terminal_expansion(x, ref, e, &poses);
    const VectorXd eu = u - inverse_dynamics(*model, poses, VectorXd::Zero(n), VectorXd::Zero(n));
    const MatrixXd gq = gravity_jacobian(*model, q);
    const VectorXd reu = weights.r.cwiseProduct(eu);
    e.l += eu.dot(reu);
    e.lu += 2.0 * reu;
    e.lx.head(n) -= 2.0 * gq.transpose() * reu;
    e.luu.diagonal() += 2.0 * weights.r;
    e.lux.leftCols(n) -= 2.0 * weights.r.asDiagonal() * gq;
    e.lxx.topLeftCorner(n, n) += 2.0 * gq.transpose() * weights.r.asDiagonal() * gq;
  }
};

/// Quadratic barrier expansion from exact distance queries at q (penalty
/// baseline). Adds to e.l, e.lx, e.lxx.
inline void barrier_expansion(const RobotModel& model, const CollisionWorld& world, const std::vector<Pose>& poses,
                              const TaskWeights& w, CostExpansion& e) {
  const int n = model.dof();
  for (std::size_t i = 0; i < world.pairs.size(); ++i) {
    const DistanceResult r = world.query(poses, i);
    if (r.d > w.d_th1) continue;
    const VectorXd g = world.gradient(model, poses, i, r);
    const double res = r.d - w.d_th1;
    e.l += 0.5 * w.sigma * res * res;
    e.lx.head(n) += w.sigma * res * g;
    e.lxx.topLeftCorner(n, n) += w.sigma * g * g.transpose();
  }
}

}  // namespace tompc
