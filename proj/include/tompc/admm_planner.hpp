#pragma once
// ADMM planner. The horizon problem is split into
//   y-step: FDDP on the task cost (motion, force, control effort) plus the
//           proximal term (rho/2)||y - z + lambda/rho||^2,
//   z-step: one small QP per step on (u_t, x_{t+1}) holding the avoidance
//           cost, joint/velocity boxes and linearized distance rows; the
//           control block is a closed-form clamp,
// followed by lambda += rho (G y - z) until ||G y - z||_inf <= r_th.
//
// Layout: y = (u_0, x_1, u_1, x_2, ..., u_{T-1}, x_T), one block of nu + nx
// entries per step; z and lambda share it. G scales the control entries by
// control_scale and leaves the states alone, so z and lambda are in scaled
// units on the control part.

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tompc/ddp.hpp"
#include "tompc/dynamics.hpp"
#include "tompc/objective.hpp"
#include "tompc/qp.hpp"
#include "tompc/worker_pool.hpp"

namespace tompc {

enum class PlannerMode { ToMPC, OaMPC, FddpBarrier };

inline std::string to_string(PlannerMode m) {
  switch (m) {
    case PlannerMode::ToMPC:
      return "tompc";
    case PlannerMode::OaMPC:
      return "oampc";
    case PlannerMode::FddpBarrier:
      return "fddp";
  }
  return "?";
}

inline PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "tompc") return PlannerMode::ToMPC;
  if (s == "oampc") return PlannerMode::OaMPC;
  if (s == "fddp") return PlannerMode::FddpBarrier;
  throw std::invalid_argument("unknown planner mode: " + s);
}

/// Which cost and constraint terms a mode switches on.
struct ModeTerms {
  bool avoidance_cost = false;   // l_rep in the z-step
  bool goal_relaxation = false;  // xi < 1 near obstacles
  bool qp_projection = false;    // ADMM z-step with hard rows
  bool barrier = false;          // quadratic barrier in the DDP cost

  bool operator==(const ModeTerms&) const = default;
};

inline ModeTerms mode_terms(PlannerMode m) {
  switch (m) {
    case PlannerMode::ToMPC:
      return {true, true, true, false};
    case PlannerMode::OaMPC:
      return {false, false, true, false};
    case PlannerMode::FddpBarrier:
      return {false, false, false, true};
  }
  return {};
}

struct PlannerConfig {
  int T = 30;
  double dt = 0.05;
  double rho = 10.0;
  double r_th = 1e-3;
  int max_iterations = 20;
  PlannerMode mode = PlannerMode::ToMPC;
  DDPOptions ddp;
  QPOptions qp;
  double slack_weight = 1e4;
  int barrier_ddp_iterations = 10;
  double control_scale = 0.01;  // G on the torque block
  int threads = 0;  // 0: TOMPC_THREADS or hardware default

  void validate() const {
    if (T < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    if (!(rho > 0)) throw std::invalid_argument("rho must be positive");
    if (!(r_th > 0)) throw std::invalid_argument("r_th must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(control_scale > 0)) throw std::invalid_argument("control_scale must be positive");
  }
};

struct ADMMState {
  VectorXd y, z, lambda;
  double rho = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool valid = false;
  std::vector<QPSolution> qp_warm;  // per step, reused as active-set hints
  int nu = 0;             // control entries at the head of each block
  int block = 0;          // nu + nx; 0 treats G as the identity
  double u_scale = 1.0;

  /// G y.
  VectorXd gy() const {
    VectorXd v = y;
    if (block > 0 && u_scale != 1.0) {
      for (Eigen::Index i = 0; i + block <= v.size(); i += block) v.segment(i, nu) *= u_scale;
    }
    return v;
  }
};

/// ||G y - z||_inf.
inline double residual(const ADMMState& s) {
  if (s.y.size() == 0) return 0.0;
  return (s.gy() - s.z).cwiseAbs().maxCoeff();
}

struct PlannerDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool degraded = false;
  std::string note;
  double wall_us = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();  // measured at x_0
  double min_predicted_distance = std::numeric_limits<double>::infinity();
  double xi = 1.0;
  int ddp_iterations = 0;
  int qp_solves = 0;
  int qp_fallbacks = 0;
  std::size_t exact_queries = 0;
  double max_row_violation = 0.0;  // linearized rows, worst over all z iterates
  double max_box_violation = 0.0;
};

struct PlannerOutput {
  VectorXd q_des, qd_des, tau_mpc;
  PlannerDiagnostics diag;
};

/// Per-cycle inputs that stay fixed while the cycle runs.
struct PlanInputs {
  FrameId task_frame = 0;
  TaskWeights weights;
  InteractionParams interaction;
  CollisionWorld* world = nullptr;     // obstacle poses already set for this cycle
  std::vector<StageReference> refs;    // T + 1 entries, stage t at t_now + t dt
};

class Planner {
 public:
  Planner(const RobotModel& model, PlannerConfig config)
      : model_(&model), config_(std::move(config)),
        pool_(config_.threads > 0 ? config_.threads : default_thread_count()) {
    config_.validate();
  }

  const PlannerConfig& config() const { return config_; }
  const RobotModel& model() const { return *model_; }
  std::size_t qp_constructions() const { return qp_count_.value(); }
  int threads() const { return pool_.size(); }

  int nx() const { return 2 * model_->dof(); }
  int nu() const { return model_->dof(); }
  int block() const { return nx() + nu(); }

  /// Cold start: x_t = x_measured, u_t = g(q), lambda = 0, z = G y.
  ADMMState cold_start(const StateVector& x) const {
    ADMMState s = empty_state();
    const int T = config_.T, b = block();
    s.y.resize(static_cast<Eigen::Index>(T) * b);
    const VectorXd g = gravity_vector(*model_, x.q);
    const VectorXd xs = x.stacked();
    for (int t = 0; t < T; ++t) {
      s.y.segment(t * b, nu()) = g;
      s.y.segment(t * b + nu(), nx()) = xs;
    }
    s.z = s.gy();
    s.lambda = VectorXd::Zero(s.y.size());
    s.valid = true;
    return s;
  }

  /// Previous y, lambda and QP hints shifted one step forward (the last block
  /// is repeated); z is re-projected as G y.
  ADMMState warm_start(const ADMMState& prev, const StateVector& x) const {
    const int T = config_.T, b = block();
    const auto want = static_cast<Eigen::Index>(T) * b;
    if (!prev.valid || prev.y.size() != want || prev.lambda.size() != want || prev.u_scale != config_.control_scale)
      return cold_start(x);
    ADMMState s = empty_state();
    s.y = prev.y;
    s.lambda = prev.lambda;
    if (T > 1) {
      const Eigen::Index keep = static_cast<Eigen::Index>(T - 1) * b;
      s.y.head(keep) = prev.y.tail(keep);
      s.lambda.head(keep) = prev.lambda.tail(keep);
    }
    s.qp_warm = prev.qp_warm;
    if (s.qp_warm.size() == static_cast<std::size_t>(T) && T > 1) {
      std::rotate(s.qp_warm.begin(), s.qp_warm.begin() + 1, s.qp_warm.end());
      s.qp_warm.back() = s.qp_warm[s.qp_warm.size() - 2];
    }
    s.z = s.gy();
    s.valid = true;
    return s;
  }

  ADMMState empty_state() const {
    ADMMState s;
    s.rho = config_.rho;
    s.nu = nu();
    s.block = block();
    s.u_scale = config_.control_scale;
    return s;
  }

  std::pair<PlannerOutput, ADMMState> plan_cycle(const PlanInputs& in, const StateVector& x_measured,
                                                 const ADMMState* warm = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    if (!x_measured.q.allFinite() || !x_measured.qd.allFinite()) throw std::invalid_argument("non-finite state");
    if (static_cast<int>(in.refs.size()) != config_.T + 1) throw std::invalid_argument("need T + 1 references");

    PlannerOutput out;
    ADMMState state = warm ? warm_start(*warm, x_measured) : cold_start(x_measured);
    const std::size_t queries_before = in.world ? in.world->exact_queries.value() : 0;
    if (config_.mode == PlannerMode::FddpBarrier) {
      run_barrier(in, x_measured, state, out);
    } else {
      run_admm(in, x_measured, state, out);
    }
    if (out.diag.degraded) {
      fill_degraded(x_measured, warm, out);
      if (warm) {
        state = *warm;
      } else {
        state.valid = false;
      }
    }
    out.diag.exact_queries = (in.world ? in.world->exact_queries.value() : 0) - queries_before;
    out.diag.wall_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    return {out, state};
  }

  /// OCProblem for the y-step (or the whole barrier problem).
  OCProblem build_ocp(const PlanInputs& in, const StateVector& x0, double xi, bool barrier) const {
    OCProblem p;
    p.T = config_.T;
    p.dt = config_.dt;
    p.nx = nx();
    p.nu = nu();
    p.x0 = x0.stacked();
    const RobotModel* model = model_;
    const double dt = config_.dt;
    const InteractionParams ip = in.interaction;
    p.dynamics = [model, ip, dt](int, const VectorXd& x, const VectorXd& u, MatrixXd* A, MatrixXd* B) {
      if (!A) return step(*model, ip, x, u, dt);
      VectorXd next;
      StepDerivatives d = step_derivatives(*model, ip, x, u, dt, &next);
      *A = std::move(d.A);
      if (B) *B = std::move(d.B);
      return next;
    };
    auto cost = std::make_shared<TaskCost>();
    cost->model = model_;
    cost->task_frame = in.task_frame;
    cost->weights = in.weights;
    cost->weights.resize(model_->dof());
    cost->interaction = in.interaction;
    cost->xi = xi;
    const auto refs = std::make_shared<std::vector<StageReference>>(in.refs);
    const CollisionWorld* world = barrier ? in.world : nullptr;
    const int n = model_->dof();
    auto barrier_value = [model, world, cost](const VectorXd& q) {
      if (!world) return 0.0;
      const auto poses = link_poses(*model, q);
      std::vector<double> d;
      d.reserve(world->pairs.size());
      for (std::size_t i = 0; i < world->pairs.size(); ++i) d.push_back(world->query(poses, i).d);
      return barrier_cost(d, cost->weights);
    };
    p.stage_cost = [cost, refs, world, model, n, barrier_value](int t, const VectorXd& x, const VectorXd& u,
                                                               CostExpansion* e) {
      const StageReference& r = (*refs)[static_cast<std::size_t>(t)];
      if (!e) return cost->stage(x, u, r) + barrier_value(x.head(n));
      const auto poses = link_poses(*model, x.head(n));
      cost->stage_expansion(x, u, r, *e, &poses);
      if (world) barrier_expansion(*model, *world, poses, cost->weights, *e);
      return e->l;
    };
    p.terminal_cost = [cost, refs, world, model, n, barrier_value](const VectorXd& x, CostExpansion* e) {
      const StageReference& r = refs->back();
      if (!e) return cost->terminal(x, r) + barrier_value(x.head(n));
      const auto poses = link_poses(*model, x.head(n));
      cost->terminal_expansion(x, r, *e, &poses);
      if (world) barrier_expansion(*model, *world, poses, cost->weights, *e);
      return e->l;
    };
    return p;
  }

  /// The per-step z-step QP over x_{t+1}: 1/2 x'Hx + g'x with H = rho I +
  /// 2 N'QN on the velocity block, boxes on q and qd, rows C q >= lb.
  QPProblem build_state_qp(const VectorXd& target, const MatrixXd* rep_h, const VectorXd* rep_c,
                           const AvoidanceRows& rows) const {
    qp_count_.bump();
    const int n = model_->dof();
    QPProblem p;
    p.h = config_.rho * MatrixXd::Identity(2 * n, 2 * n);
    p.g = -config_.rho * target;
    if (rep_h) {
      p.h.bottomRightCorner(n, n) += *rep_h;
      p.g.tail(n) -= *rep_h * *rep_c;
    }
    p.lb.resize(2 * n);
    p.ub.resize(2 * n);
    p.lb << model_->limits.q_min, model_->limits.qd_min;
    p.ub << model_->limits.q_max, model_->limits.qd_max;
    p.c = MatrixXd::Zero(rows.c.rows(), 2 * n);
    if (rows.c.rows() > 0) p.c.leftCols(n) = rows.c;
    p.c_lb = rows.lb;
    return p;
  }

 private:
  void run_admm(const PlanInputs& in, const StateVector& x0, ADMMState& s, PlannerOutput& out) {
    const ModeTerms terms = mode_terms(config_.mode);
    const int T = config_.T, n = model_->dof(), b = block();
    TaskWeights w = in.weights;
    w.resize(n);
    PlannerDiagnostics& diag = out.diag;

    // Query once at x_0: linearizations, xi, repulsive targets.
    std::vector<DistanceLinearization> lins;
    std::vector<DistanceResult> results;
    if (in.world) lins = in.world->linearize_all(*model_, x0.q, &results);
    for (const auto& r : results) diag.min_distance = std::min(diag.min_distance, r.d);
    const AvoidanceRows rows = assemble_constraints(lins, w.d_th1);
    diag.xi = terms.goal_relaxation ? goal_relaxation(diag.min_distance, w) : 1.0;

    std::optional<MatrixXd> rep_h;
    std::optional<VectorXd> rep_c;
    if (terms.avoidance_cost && in.world) {
      const auto poses = link_poses(*model_, x0.q);
      const auto ctx = repulsive_contexts(*model_, *in.world, poses, x0.qd, results, w);
      if (!ctx.empty()) {
        const MatrixXd nproj = null_space_projector(frame_jacobian(*model_, poses, in.task_frame));
        rep_h = 2.0 * nproj.transpose() * w.q_rep.asDiagonal() * nproj;
        rep_c = avoidance_target(ctx, w, n);
      }
    }

    OCProblem ocp = build_ocp(in, x0, diag.xi, false);
    ocp.prox_rho = config_.rho;
    ocp.prox_u_scale = config_.control_scale;
    ocp.prox_target.resize(static_cast<std::size_t>(T));
    if (s.qp_warm.size() != static_cast<std::size_t>(T)) s.qp_warm.assign(static_cast<std::size_t>(T), QPSolution{});

    std::vector<VectorXd> xs(static_cast<std::size_t>(T) + 1), us(static_cast<std::size_t>(T));
    std::vector<char> failed(static_cast<std::size_t>(T), 0), fell_back(static_cast<std::size_t>(T), 0);

    for (int k = 0; k < config_.max_iterations; ++k) {
      // y-step
      xs[0] = ocp.x0;
      for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        us[ts] = s.y.segment(t * b, nu());
        xs[ts + 1] = s.y.segment(t * b + nu(), nx());
        ocp.prox_target[ts] = s.z.segment(t * b, b) - s.lambda.segment(t * b, b) / s.rho;
      }
      DDPOptions dopt = config_.ddp;
      const DDPSolution sol = ddp_solve(ocp, xs, us, dopt);
      diag.ddp_iterations += sol.iterations;
      if (sol.failed) {
        diag.degraded = true;
        diag.note = "ddp: " + sol.message;
        return;
      }
      for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        s.y.segment(t * b, nu()) = sol.us[ts];
        s.y.segment(t * b + nu(), nx()) = sol.xs[ts + 1];
      }

      // z-step, one QP per step.
      pool_.parallel_for(T, [&](int t) {
        const auto ts = static_cast<std::size_t>(t);
        const double su = config_.control_scale;
        VectorXd v = s.y.segment(t * b, b) + s.lambda.segment(t * b, b) / s.rho;
        v.head(nu()) = su * s.y.segment(t * b, nu()) + s.lambda.segment(t * b, nu()) / s.rho;
        s.z.segment(t * b, nu()) =
            clamp_controls(v.head(nu()), su * model_->limits.tau_min, su * model_->limits.tau_max);
        const QPProblem qp = build_state_qp(v.tail(nx()), rep_h ? &*rep_h : nullptr, rep_c ? &*rep_c : nullptr, rows);
        QPSolution qs = qp_solve(qp, &s.qp_warm[ts], config_.qp);
        if (qs.status == QPStatus::Infeasible || qs.status == QPStatus::MaxIterations) {
          fell_back[ts] = 1;
          qs = solve_with_slack(qp);
        }
        if (!qs.ok()) {
          failed[ts] = 1;
          return;
        }
        s.z.segment(t * b + nu(), nx()) = qs.z.head(nx());
        s.qp_warm[ts] = std::move(qs);
      });
      diag.qp_solves += T;
      for (int t = 0; t < T; ++t) {
        diag.qp_fallbacks += fell_back[static_cast<std::size_t>(t)];
        fell_back[static_cast<std::size_t>(t)] = 0;
        if (failed[static_cast<std::size_t>(t)]) {
          diag.degraded = true;
          diag.note = "qp infeasible after slack relaxation";
          return;
        }
      }
      record_violations(s, rows, diag);

      // Dual update.
      s.lambda += s.rho * (s.gy() - s.z);
      s.residual = residual(s);
      s.iterations = k + 1;
      diag.iterations = k + 1;
      diag.residual = s.residual;
      if (s.residual <= config_.r_th) {
        diag.converged = true;
        break;
      }
    }

    for (int t = 0; t < T; ++t) {
      const VectorXd q = s.z.segment(t * b + nu(), n);
      for (const auto& l : lins) diag.min_predicted_distance = std::min(diag.min_predicted_distance, l.predict(q));
    }
    out.tau_mpc = s.z.head(n) / config_.control_scale;
    out.q_des = s.z.segment(nu(), n);
    out.qd_des = s.z.segment(nu() + n, n);
  }

  void run_barrier(const PlanInputs& in, const StateVector& x0, ADMMState& s, PlannerOutput& out) {
    const int T = config_.T, n = model_->dof(), b = block();
    PlannerDiagnostics& diag = out.diag;
    if (in.world) diag.min_distance = in.world->min_distance(*model_, x0.q);
    const OCProblem ocp = build_ocp(in, x0, 1.0, true);
    std::vector<VectorXd> xs(static_cast<std::size_t>(T) + 1), us(static_cast<std::size_t>(T));
    xs[0] = ocp.x0;
    for (int t = 0; t < T; ++t) {
      us[static_cast<std::size_t>(t)] = s.y.segment(t * b, nu());
      xs[static_cast<std::size_t>(t) + 1] = s.y.segment(t * b + nu(), nx());
    }
    DDPOptions dopt = config_.ddp;
    dopt.max_iterations = config_.barrier_ddp_iterations;
    const DDPSolution sol = ddp_solve(ocp, xs, us, dopt);
    diag.ddp_iterations = sol.iterations;
    diag.iterations = 1;
    diag.converged = sol.converged;
    if (sol.failed) {
      diag.degraded = true;
      diag.note = "ddp: " + sol.message;
      return;
    }
    for (int t = 0; t < T; ++t) {
      s.y.segment(t * b, nu()) = sol.us[static_cast<std::size_t>(t)];
      s.y.segment(t * b + nu(), nx()) = sol.xs[static_cast<std::size_t>(t) + 1];
    }
    s.z = s.gy();
    s.residual = 0.0;
    s.iterations = 1;
    out.tau_mpc = s.y.head(n);
    out.q_des = s.y.segment(nu(), n);
    out.qd_des = s.y.segment(nu() + n, n);
  }

  /// Distance rows relaxed with nonnegative slacks penalized at slack_weight.
  QPSolution solve_with_slack(const QPProblem& p) const {
    const Eigen::Index nz = p.n(), m = p.rows();
    if (m == 0) return qp_solve(p, nullptr, config_.qp);
    QPProblem r;
    r.h = MatrixXd::Zero(nz + m, nz + m);
    r.h.topLeftCorner(nz, nz) = p.h;
    r.h.bottomRightCorner(m, m).diagonal().setConstant(config_.slack_weight);
    r.g = VectorXd::Zero(nz + m);
    r.g.head(nz) = p.g;
    r.g.tail(m).setConstant(config_.slack_weight);
    r.lb.resize(nz + m);
    r.ub.resize(nz + m);
    r.lb << p.lb, VectorXd::Zero(m);
    r.ub << p.ub, VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    r.c = MatrixXd::Zero(m, nz + m);
    r.c.leftCols(nz) = p.c;
    r.c.rightCols(m) = MatrixXd::Identity(m, m);
    r.c_lb = p.c_lb;
    QPOptions opt = config_.qp;
    opt.max_iterations = std::max(opt.max_iterations, static_cast<int>(2 * (nz + m)));
    QPSolution s = qp_solve(r, nullptr, opt);
    s.z.conservativeResize(nz);
    s.active.clear();
    s.multipliers.resize(0);
    return s;
  }

  void record_violations(const ADMMState& s, const AvoidanceRows& rows, PlannerDiagnostics& diag) const {
    const int T = config_.T, n = model_->dof(), b = block();
    const auto& lim = model_->limits;
    for (int t = 0; t < T; ++t) {
      const VectorXd zu = s.z.segment(t * b, n) / s.u_scale;
      const VectorXd q = s.z.segment(t * b + n, n), qd = s.z.segment(t * b + 2 * n, n);
      double box = std::max({(lim.tau_min - zu).maxCoeff(), (zu - lim.tau_max).maxCoeff(), (lim.q_min - q).maxCoeff(),
                             (q - lim.q_max).maxCoeff(), (lim.qd_min - qd).maxCoeff(), (qd - lim.qd_max).maxCoeff()});
      diag.max_box_violation = std::max(diag.max_box_violation, std::max(0.0, box));
      if (rows.c.rows() > 0) {
        diag.max_row_violation = std::max(diag.max_row_violation, std::max(0.0, (rows.lb - rows.c * q).maxCoeff()));
      }
    }
  }

  void fill_degraded(const StateVector& x, const ADMMState* warm, PlannerOutput& out) const {
    const int n = model_->dof(), b = block();
    if (warm && warm->valid && warm->z.size() == static_cast<Eigen::Index>(config_.T) * b) {
      // Previous plan shifted by one step.
      const int t = std::min(1, config_.T - 1);
      out.tau_mpc = warm->z.segment(t * b, n) / warm->u_scale;
      out.q_des = warm->z.segment(t * b + n, n);
      out.qd_des = warm->z.segment(t * b + 2 * n, n);
    } else {
      out.tau_mpc = gravity_vector(*model_, x.q);
      out.q_des = x.q;
      out.qd_des = VectorXd::Zero(n);
    }
  }

  const RobotModel* model_;
  PlannerConfig config_;
  mutable QueryCounter qp_count_;
  WorkerPool pool_;
};

}  // namespace tompc
