#pragma once
// Oracle checks run by `tompc check`: every analytic derivative against
// central differences, the solvers against brute-force references, and the
// distance queries against dense surface sampling.

#include <Eigen/Eigenvalues>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tompc/admm_planner.hpp"

namespace tompc {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
};

namespace check_detail {

constexpr double kFdStep = 1e-6;

class Draw {
 public:
  explicit Draw(unsigned seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  VectorXd vector(Eigen::Index n, double lo, double hi) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  VectorXd config(const RobotModel& m) {
    VectorXd q(m.dof());
    for (int i = 0; i < m.dof(); ++i) q[i] = uniform(m.limits.q_min[i], m.limits.q_max[i]);
    return q;
  }

 private:
  std::mt19937_64 gen_;
};

inline double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(1e-9, b.norm()); }

inline CheckResult finish(std::string name, double worst, double limit, const std::string& what) {
  std::ostringstream os;
  os << what << " worst " << worst << " (limit " << limit << ")";
  return {std::move(name), worst <= limit, worst, limit, os.str()};
}

inline CheckResult exp_log(unsigned seed) {
  Draw d(seed);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    Vector6 v = d.vector(6, -1, 1);
    v.tail<3>() *= 2.5 / std::max(1.0, v.tail<3>().norm());  // angle below pi
    worst = std::max(worst, (log_pose(exp_pose(v)) - v).cwiseAbs().maxCoeff());
    const Pose x = exp_pose(v);
    const Pose y = exp_pose(log_pose(x));
    worst = std::max({worst, (x.translation - y.translation).cwiseAbs().maxCoeff(),
                      (x.rotation - y.rotation).cwiseAbs().maxCoeff()});
  }
  return finish("exp/log roundtrip", worst, 1e-9, "max abs error");
}

inline CheckResult kinematic_jacobian(const RobotModel& m, FrameId frame, unsigned seed) {
  Draw d(seed);
  double worst = 0.0;
  const int n = m.dof();
  for (int k = 0; k < 50; ++k) {
    const VectorXd q = d.config(m);
    const Matrix6X jac = frame_jacobian(m, q, frame);
    Matrix6X fd(6, n);
    for (int j = 0; j < n; ++j) {
      VectorXd a = q, b = q;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      const Pose pa = forward_kinematics(m, a, frame), pb = forward_kinematics(m, b, frame);
      fd.block<3, 1>(0, j) = (pa.translation - pb.translation) / (2 * kFdStep);
      fd.block<3, 1>(3, j) = log_rotation(pa.rotation * pb.rotation.transpose()) / (2 * kFdStep);
    }
    worst = std::max(worst, rel(jac, fd));
  }
  return finish("frame Jacobian vs finite differences", worst, 1e-5, "relative error");
}

inline CheckResult mass_matrix_spd(const RobotModel& m, unsigned seed) {
  Draw d(seed);
  double worst_sym = 0.0, min_eig = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const MatrixXd M = mass_matrix(m, d.config(m));
    worst_sym = std::max(worst_sym, (M - M.transpose()).norm() / M.norm());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues().minCoeff());
  }
  CheckResult r = finish("mass matrix symmetric positive definite", worst_sym, 1e-12, "relative asymmetry");
  r.passed = r.passed && min_eig > 0.0;
  r.detail += ", smallest eigenvalue " + std::to_string(min_eig);
  return r;
}

inline CheckResult step_jacobians(const RobotModel& m, unsigned seed) {
  Draw d(seed);
  const int n = m.dof();
  double worst = 0.0;
  InteractionParams ip;
  for (int k = 0; k < 10; ++k) {
    VectorXd x(2 * n);
    x << d.config(m), d.vector(n, -1, 1);
    const VectorXd u = d.vector(n, -10, 10);
    const StepDerivatives an = step_derivatives(m, ip, x, u, 0.05);
    MatrixXd A(2 * n, 2 * n), B(2 * n, n);
    for (int j = 0; j < 2 * n; ++j) {
      VectorXd a = x, b = x;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      A.col(j) = (step(m, ip, a, u, 0.05) - step(m, ip, b, u, 0.05)) / (2 * kFdStep);
    }
    for (int j = 0; j < n; ++j) {
      VectorXd a = u, b = u;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      B.col(j) = (step(m, ip, x, a, 0.05) - step(m, ip, x, b, 0.05)) / (2 * kFdStep);
    }
    worst = std::max({worst, rel(an.A, A), rel(an.B, B)});
  }
  return finish("step derivatives vs finite differences", worst, 1e-4, "relative error");
}

inline CollisionWorld check_world(const RobotModel& m) {
  CollisionWorld w;
  Obstacle ball;
  ball.name = "ball";
  ball.geom = CollisionPrimitive::sphere(0.06);
  ball.pose = Pose::from_translation({0.45, 0.1, 0.35});
  Obstacle block;
  block.name = "block";
  block.geom = CollisionPrimitive::box({0.1, 0.2, 0.05});
  block.pose = Pose::from_translation({0.5, 0.0, 0.1});
  w.obstacles = {ball, block};
  w.build_pairs(m);
  return w;
}

inline CheckResult distance_gradients(const RobotModel& m, unsigned seed) {
  Draw d(seed);
  const CollisionWorld w = check_world(m);
  double worst = 0.0;
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    const VectorXd q = d.config(m);
    for (std::size_t i = 0; i < w.pairs.size(); ++i) {
      if (w.query(m, q, i).d < 1e-3) continue;
      const VectorXd g = w.gradient(m, q, i);
      VectorXd fd(m.dof());
      for (int j = 0; j < m.dof(); ++j) {
        VectorXd a = q, b = q;
        a[j] += kFdStep;
        b[j] -= kFdStep;
        fd[j] = (w.query(m, a, i).d - w.query(m, b, i).d) / (2 * kFdStep);
      }
      // Links below the pair's link give exact zeros; compare on the scale of
      // the full gradient.
      worst = std::max(worst, (g - fd).norm() / std::max(1e-2, fd.norm()));
      ++checked;
    }
  }
  return finish("distance gradients vs finite differences", worst, 1e-4,
                std::to_string(checked) + " pairs, relative error");
}

inline CheckResult cost_gradients(const RobotModel& m, FrameId frame, unsigned seed) {
  Draw d(seed);
  const int n = m.dof();
  TaskCost cost;
  cost.model = &m;
  cost.task_frame = frame;
  cost.weights.resize(n);
  cost.weights.r = VectorXd::Constant(n, 0.05);
  cost.xi = 0.7;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const VectorXd q = d.config(m);
    VectorXd x(2 * n);
    x << q, d.vector(n, -1, 1);
    const VectorXd u = d.vector(n, -10, 10);
    StageReference ref{forward_kinematics(m, q, frame) * Pose::from_translation(d.vector(3, -0.1, 0.1)), Wrench{}};
    CostExpansion e;
    cost.stage_expansion(x, u, ref, e);
    VectorXd gx(2 * n), gu(n);
    for (int j = 0; j < 2 * n; ++j) {
      VectorXd a = x, b = x;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      gx[j] = (cost.stage(a, u, ref) - cost.stage(b, u, ref)) / (2 * kFdStep);
    }
    for (int j = 0; j < n; ++j) {
      VectorXd a = u, b = u;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      gu[j] = (cost.stage(x, a, ref) - cost.stage(x, b, ref)) / (2 * kFdStep);
    }
    worst = std::max({worst, rel(e.lx, gx), rel(e.lu, gu)});
  }
  return finish("cost gradients vs finite differences", worst, 1e-4, "relative error");
}

inline CheckResult ddp_riccati() {
  // Two decoupled double integrators with a linear state cost.
  const int T = 20, nx = 4, nu = 2;
  const double dt = 0.1;
  MatrixXd A = MatrixXd::Identity(nx, nx), B = MatrixXd::Zero(nx, nu);
  A.topRightCorner(2, 2) = dt * MatrixXd::Identity(2, 2);
  B.topRows(2) = 0.5 * dt * dt * MatrixXd::Identity(2, 2);
  B.bottomRows(2) = dt * MatrixXd::Identity(2, 2);
  MatrixXd Q = MatrixXd::Identity(nx, nx), R = 0.01 * MatrixXd::Identity(nu, nu), Qf = 10.0 * Q;
  VectorXd lin(nx);
  lin << 0.3, -0.2, 0.0, 0.1;
  VectorXd x0(nx);
  x0 << 1.0, -0.5, 0.2, 0.3;

  OCProblem p;
  p.T = T;
  p.nx = nx;
  p.nu = nu;
  p.x0 = x0;
  p.dynamics = [A, B](int, const VectorXd& x, const VectorXd& u, MatrixXd* a, MatrixXd* b) {
    if (a) *a = A;
    if (b) *b = B;
    return VectorXd(A * x + B * u);
  };
  p.stage_cost = [Q, R, lin](int, const VectorXd& x, const VectorXd& u, CostExpansion* e) {
    if (e) {
      e->lx = Q * x + lin;
      e->lu = R * u;
      e->lxx = Q;
      e->luu = R;
    }
    return 0.5 * x.dot(Q * x) + lin.dot(x) + 0.5 * u.dot(R * u);
  };
  p.terminal_cost = [Qf](const VectorXd& x, CostExpansion* e) {
    if (e) {
      e->lx = Qf * x;
      e->lxx = Qf;
    }
    return 0.5 * x.dot(Qf * x);
  };

  // Backward Riccati recursion with the affine term.
  std::vector<MatrixXd> K(T);
  std::vector<VectorXd> k(T);
  MatrixXd P = Qf;
  VectorXd pv = VectorXd::Zero(nx);
  for (int t = T - 1; t >= 0; --t) {
    const MatrixXd S = R + B.transpose() * P * B;
    K[t] = -S.ldlt().solve(B.transpose() * P * A);
    k[t] = -S.ldlt().solve(B.transpose() * pv);
    const MatrixXd Acl = A + B * K[t];
    pv = lin + Acl.transpose() * pv + K[t].transpose() * R * k[t] + Acl.transpose() * P * B * k[t];
    P = Q + A.transpose() * P * Acl;
    P = 0.5 * (P + P.transpose()).eval();
  }
  std::vector<VectorXd> xs(T + 1, VectorXd::Zero(nx)), us(T, VectorXd::Zero(nu));
  const auto sol = ddp_solve(p, xs, us);
  double worst = sol.failed ? std::numeric_limits<double>::infinity() : 0.0;
  VectorXd x = x0;
  for (int t = 0; t < T && !sol.failed; ++t) {
    const VectorXd u = K[t] * x + k[t];
    worst = std::max({worst, (sol.us[t] - u).cwiseAbs().maxCoeff(), (sol.xs[t] - x).cwiseAbs().maxCoeff()});
    x = A * x + B * u;
  }
  return finish("DDP vs Riccati on LQR", worst, 1e-6, "max abs error");
}

inline bool enumerate_qp(const QPProblem& p, VectorXd& best) {
  const int n = static_cast<int>(p.n()), m = static_cast<int>(p.rows());
  double best_obj = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i) {
      if (mask & (1 << i)) rows.push_back(i);
    }
    const int a = static_cast<int>(rows.size());
    MatrixXd kkt = MatrixXd::Zero(n + a, n + a);
    VectorXd rhs(n + a);
    kkt.topLeftCorner(n, n) = p.h;
    rhs.head(n) = -p.g;
    for (int r = 0; r < a; ++r) {
      kkt.block(0, n + r, n, 1) = -p.c.row(rows[r]).transpose();
      kkt.block(n + r, 0, 1, n) = p.c.row(rows[r]);
      rhs[n + r] = p.c_lb[rows[r]];
    }
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    if (lu.rank() < n + a) continue;
    const VectorXd sol = lu.solve(rhs);
    const VectorXd z = sol.head(n);
    if ((sol.tail(a).array() < -1e-12).any() || ((p.c * z - p.c_lb).array() < -1e-10).any()) continue;
    const double obj = 0.5 * z.dot(p.h * z) + p.g.dot(z);
    if (obj < best_obj) {
      best_obj = obj;
      best = z;
    }
  }
  return std::isfinite(best_obj);
}

inline CheckResult qp_enumeration(unsigned seed) {
  Draw d(seed);
  double worst = 0.0;
  int mismatched_status = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5, m = 1 + trial % 4;
    QPProblem p;
    const MatrixXd a = MatrixXd::NullaryExpr(n, n, [&]() { return d.uniform(-1, 1); });
    p.h = a * a.transpose() + 0.1 * MatrixXd::Identity(n, n);
    p.g = d.vector(n, -2, 2);
    p.c = MatrixXd::NullaryExpr(m, n, [&]() { return d.uniform(-1, 1); });
    p.c_lb = p.c * (-p.h.llt().solve(p.g)) + d.vector(m, -0.5, 1.0);
    VectorXd oracle;
    const QPSolution s = qp_solve(p);
    if (!enumerate_qp(p, oracle)) {
      mismatched_status += s.status != QPStatus::Infeasible;
      continue;
    }
    if (!s.ok()) {
      ++mismatched_status;
      continue;
    }
    worst = std::max(worst, (s.z - oracle).cwiseAbs().maxCoeff());
  }
  CheckResult r = finish("QP vs active-set enumeration", worst, 1e-8, "100 problems, max abs error");
  r.passed = r.passed && mismatched_status == 0;
  return r;
}

/// Distance from a point to a capsule (segment a-b, radius r).
inline double point_capsule(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b, double r) {
  const Eigen::Vector3d ab = b - a;
  const double t = ab.squaredNorm() > 0 ? std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm() - r;
}

inline std::vector<Eigen::Vector3d> sphere_samples(const Eigen::Vector3d& c, double r, int count) {
  std::vector<Eigen::Vector3d> pts;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count, rad = std::sqrt(1.0 - z * z);
    pts.emplace_back(c + r * Eigen::Vector3d(rad * std::cos(golden * i), rad * std::sin(golden * i), z));
  }
  return pts;
}

inline std::vector<Eigen::Vector3d> box_samples(const Pose& pose, const Eigen::Vector3d& h, double spacing) {
  std::vector<Eigen::Vector3d> pts;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const int nu = static_cast<int>(std::ceil(2 * h[u] / spacing)), nv = static_cast<int>(std::ceil(2 * h[v] / spacing));
    for (double side : {-1.0, 1.0}) {
      for (int i = 0; i <= nu; ++i) {
        for (int j = 0; j <= nv; ++j) {
          Eigen::Vector3d p;
          p[axis] = side * h[axis];
          p[u] = -h[u] + 2 * h[u] * i / nu;
          p[v] = -h[v] + 2 * h[v] * j / nv;
          pts.push_back(pose.act(p));
        }
      }
    }
  }
  return pts;
}

inline CheckResult distance_sampling(const RobotModel& m, unsigned seed) {
  Draw d(seed);
  const CollisionWorld w = check_world(m);
  double worst = 0.0;
  int checked = 0;
  for (int k = 0; k < 10; ++k) {
    const VectorXd q = d.config(m);
    const auto poses = link_poses(m, q);
    for (std::size_t i = 0; i < w.pairs.size(); ++i) {
      const DistanceResult exact = w.query(poses, i);
      if (exact.d < 0 || exact.d > 0.3) continue;
      const CollisionPair& pair = w.pairs[i];
      const Pose link = poses[pair.link] * pair.robot_geom.local_pose;
      const Eigen::Vector3d a = link.act(pair.robot_geom.a), b = link.act(pair.robot_geom.b);
      const Obstacle& o = w.obstacles[pair.obstacle];
      const Pose op = o.pose * o.geom.local_pose;
      const auto pts = o.geom.kind == ShapeKind::Sphere ? sphere_samples(op.translation, o.geom.radius, 20000)
                                                        : box_samples(op, o.geom.half_extents, 2e-3);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, point_capsule(p, a, b, pair.robot_geom.radius));
      worst = std::max(worst, std::abs(best - exact.d));
      ++checked;
    }
  }
  return finish("distance queries vs surface sampling", worst, 1e-3, std::to_string(checked) + " pairs, abs error m");
}

inline CheckResult admm_residual(const RobotModel& m, FrameId frame, const VectorXd& q0) {
  PlannerConfig cfg;
  cfg.T = 10;
  cfg.threads = 1;
  Planner planner(m, cfg);
  const Pose start = forward_kinematics(m, q0, frame);
  CollisionWorld w;
  Obstacle ball;
  ball.name = "ball";
  ball.geom = CollisionPrimitive::sphere(0.05);
  ball.pose = Pose::from_translation(start.translation + Eigen::Vector3d(0.12, 0.0, -0.08));
  w.obstacles = {ball};
  w.build_pairs(m);
  PlanInputs in;
  in.task_frame = frame;
  in.weights.resize(m.dof());
  in.world = &w;
  StageReference ref;
  ref.x_ref = start;
  ref.x_ref.translation += Eigen::Vector3d(0.25, 0.0, -0.16);
  in.refs.assign(static_cast<std::size_t>(cfg.T) + 1, ref);
  StateVector x{q0, VectorXd::Zero(m.dof())};
  ADMMState s;
  bool warm = false;
  double worst = 0.0;
  int converged = 0;
  for (int c = 0; c < 20; ++c) {
    auto [out, next] = planner.plan_cycle(in, x, warm ? &s : nullptr);
    if (out.diag.converged) {
      worst = std::max(worst, out.diag.residual / cfg.r_th);
      worst = std::max(worst, residual(next) / cfg.r_th);
      ++converged;
    }
    s = next;
    warm = true;
    x = StateVector{out.q_des, out.qd_des};
  }
  CheckResult r = finish("ADMM residual within threshold on converged cycles", worst, 1.0,
                         std::to_string(converged) + " converged cycles, residual / r_th");
  r.passed = r.passed && converged > 0;
  return r;
}

}  // namespace check_detail

/// Runs every oracle check against `model`; the Jacobian, cost and planner
/// checks use the frame named "ee" and a configuration near the middle of the
/// joint range unless `q0` is given.
inline CheckReport run_self_check(const RobotModel& model, std::optional<VectorXd> q0 = std::nullopt,
                                  unsigned seed = 7) {
  namespace cd = check_detail;
  const FrameId frame = model.frame_id("ee");
  const VectorXd q = q0 ? *q0 : VectorXd(0.5 * (model.limits.q_min + model.limits.q_max));
  CheckReport r;
  r.checks.push_back(cd::exp_log(seed));
  r.checks.push_back(cd::kinematic_jacobian(model, frame, seed + 1));
  r.checks.push_back(cd::mass_matrix_spd(model, seed + 2));
  r.checks.push_back(cd::step_jacobians(model, seed + 3));
  r.checks.push_back(cd::distance_gradients(model, seed + 4));
  r.checks.push_back(cd::cost_gradients(model, frame, seed + 5));
  r.checks.push_back(cd::ddp_riccati());
  r.checks.push_back(cd::qp_enumeration(seed + 6));
  r.checks.push_back(cd::distance_sampling(model, seed + 7));
  r.checks.push_back(cd::admm_residual(model, frame, q));
  return r;
}

}  // namespace tompc
