#pragma once
// Feasibility-driven DDP (FDDP) for a discrete optimal control problem
//
//   min  sum_t l_t(x_t, u_t) + l_T(x_T)   s.t.  x_{t+1} = f_t(x_t, u_t),  x_0 fixed
//
// Gauss-Newton backward pass with Levenberg regularization on Quu and a
// backtracking line search. Shooting gaps are carried through the backward
// pass and closed proportionally to the step length in the forward pass.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace tompc {

struct CostExpansion {
  double l = 0.0;
  Eigen::VectorXd lx, lu;
  Eigen::MatrixXd lxx, luu, lux;

  void reset(int nx, int nu) {
    l = 0.0;
    lx.setZero(nx);
    lu.setZero(nu);
    lxx.setZero(nx, nx);
    luu.setZero(nu, nu);
    lux.setZero(nu, nx);
  }
};

struct OCProblem {
  int T = 1;
  double dt = 0.05;
  int nx = 0, nu = 0;
  Eigen::VectorXd x0;

  // x_{t+1}; fills A, B when non-null.
  std::function<Eigen::VectorXd(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd* A,
                                Eigen::MatrixXd* B)>
      dynamics;
  // Stage cost; fills the expansion (already reset) when non-null.
  std::function<double(int t, const Eigen::VectorXd& x, const Eigen::VectorXd& u, CostExpansion* e)> stage_cost;
  std::function<double(const Eigen::VectorXd& x, CostExpansion* e)> terminal_cost;

  // Proximal term (rho/2)||(s u_t, x_{t+1}) - target_t||^2 for t = 0..T-1, with
  // target_t = z_t - lambda_t / rho and s = prox_u_scale. Disabled when rho == 0.
  double prox_rho = 0.0;
  double prox_u_scale = 1.0;
  std::vector<Eigen::VectorXd> prox_target;
};

struct DDPOptions {
  int max_iterations = 5;
  double reg_init = 1e-9;
  double reg_growth = 10.0;
  double reg_max = 1e6;
  int line_search_steps = 7;  // alpha = 1, 1/2, ..., 1/64
  double cost_tol = 1e-9;
  double grad_tol = 1e-9;
  double gap_tol = 1e-8;
  double accept_ratio = 0.1;
  double accept_negative = 2.0;  // tolerated increase on gap-closing steps
};

struct DDPSolution {
  std::vector<Eigen::VectorXd> xs;  // T + 1
  std::vector<Eigen::VectorXd> us;  // T
  std::vector<Eigen::MatrixXd> gains;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string message;
  std::vector<double> cost_history;  // cost after every accepted step
  std::vector<double> gap_history;   // max gap after every accepted step
};

namespace detail {

inline double total_cost(const OCProblem& p, const std::vector<Eigen::VectorXd>& xs,
                         const std::vector<Eigen::VectorXd>& us) {
  double c = 0.0;
  const bool prox = p.prox_rho > 0.0;
  for (int t = 0; t < p.T; ++t) {
    c += p.stage_cost(t, xs[t], us[t], nullptr);
    if (prox) {
      const auto& tg = p.prox_target[static_cast<std::size_t>(t)];
      c += 0.5 * p.prox_rho *
           ((p.prox_u_scale * us[t] - tg.head(p.nu)).squaredNorm() + (xs[t + 1] - tg.tail(p.nx)).squaredNorm());
    }
  }
  return c + p.terminal_cost(xs[static_cast<std::size_t>(p.T)], nullptr);
}

}  // namespace detail

inline double ddp_cost(const OCProblem& p, const std::vector<Eigen::VectorXd>& xs,
                       const std::vector<Eigen::VectorXd>& us) {
  return detail::total_cost(p, xs, us);
}

/// Max-norm of the shooting gaps f(x_t, u_t) - x_{t+1}.
inline double ddp_max_gap(const OCProblem& p, const std::vector<Eigen::VectorXd>& xs,
                          const std::vector<Eigen::VectorXd>& us) {
  double g = 0.0;
  for (int t = 0; t < p.T; ++t) {
    g = std::max(g, (p.dynamics(t, xs[t], us[t], nullptr, nullptr) - xs[t + 1]).cwiseAbs().maxCoeff());
  }
  return g;
}

inline DDPSolution ddp_solve(const OCProblem& p, std::vector<Eigen::VectorXd> xs, std::vector<Eigen::VectorXd> us,
                             const DDPOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int T = p.T, nx = p.nx, nu = p.nu;
  const auto Tz = static_cast<std::size_t>(T);
  DDPSolution sol;
  if (T < 1 || xs.size() != Tz + 1 || us.size() != Tz) {
    sol.failed = true;
    sol.message = "initial guess has wrong length";
    return sol;
  }
  const bool prox = p.prox_rho > 0.0;
  if (prox && p.prox_target.size() != Tz) {
    sol.failed = true;
    sol.message = "proximal target has wrong length";
    return sol;
  }
  xs[0] = p.x0;

  std::vector<MatrixXd> A(Tz), B(Tz), K(Tz, MatrixXd::Zero(nu, nx));
  std::vector<VectorXd> f(Tz), gap(Tz), k(Tz, VectorXd::Zero(nu));
  std::vector<CostExpansion> ex(Tz + 1);

  double cost = detail::total_cost(p, xs, us);
  if (!std::isfinite(cost)) {
    sol.failed = true;
    sol.message = "non-finite cost at initial guess";
  }
  double mu = opt.reg_init;

  for (int iter = 0; iter < opt.max_iterations && !sol.failed; ++iter) {
    sol.iterations = iter + 1;
    // Linearize about the current trajectory.
    double max_gap = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      f[ts] = p.dynamics(t, xs[ts], us[ts], &A[ts], &B[ts]);
      gap[ts] = f[ts] - xs[ts + 1];
      max_gap = std::max(max_gap, gap[ts].cwiseAbs().maxCoeff());
      CostExpansion& e = ex[ts];
      e.reset(nx, nu);
      e.l = p.stage_cost(t, xs[ts], us[ts], &e);
      if (prox) {
        const VectorXd& tg = p.prox_target[ts];
        const double su = p.prox_u_scale;
        e.lu += p.prox_rho * su * (su * us[ts] - tg.head(nu));
        e.luu.diagonal().array() += p.prox_rho * su * su;
      }
      if (prox && t > 0) {
        e.lx += p.prox_rho * (xs[ts] - p.prox_target[ts - 1].tail(nx));
        e.lxx.diagonal().array() += p.prox_rho;
      }
    }
    CostExpansion& et = ex[Tz];
    et.reset(nx, 0);
    et.l = p.terminal_cost(xs[Tz], &et);
    if (prox) {
      et.lx += p.prox_rho * (xs[Tz] - p.prox_target[Tz - 1].tail(nx));
      et.lxx.diagonal().array() += p.prox_rho;
    }

    // Backward pass; grow the regularization until every Quu factors.
    double grad = 0.0;
    bool ok = false;
    while (!ok) {
      VectorXd vx = et.lx;
      MatrixXd vxx = et.lxx;
      ok = true;
      grad = 0.0;
      for (int t = T - 1; t >= 0; --t) {
        const auto ts = static_cast<std::size_t>(t);
        const CostExpansion& e = ex[ts];
        const VectorXd vxp = vx + vxx * gap[ts];
        const MatrixXd vxx_a = vxx * A[ts];
        const MatrixXd vxx_b = vxx * B[ts];
        const VectorXd qx = e.lx + A[ts].transpose() * vxp;
        const VectorXd qu = e.lu + B[ts].transpose() * vxp;
        const MatrixXd qxx = e.lxx + A[ts].transpose() * vxx_a;
        const MatrixXd quu = e.luu + B[ts].transpose() * vxx_b;
        const MatrixXd qux = e.lux + B[ts].transpose() * vxx_a;
        const Eigen::LLT<MatrixXd> llt(quu + mu * MatrixXd::Identity(nu, nu));
        if (llt.info() != Eigen::Success || !qu.allFinite()) {
          ok = false;
          break;
        }
        k[ts] = -llt.solve(qu);
        K[ts] = -llt.solve(qux);
        grad = std::max(grad, qu.cwiseAbs().maxCoeff());
        vx = qx + K[ts].transpose() * (quu * k[ts] + qu) + qux.transpose() * k[ts];
        vxx = qxx + K[ts].transpose() * quu * K[ts] + K[ts].transpose() * qux + qux.transpose() * K[ts];
        vxx = 0.5 * (vxx + vxx.transpose()).eval();
      }
      if (!ok) {
        mu *= opt.reg_growth;
        if (mu > opt.reg_max) {
          sol.failed = true;
          sol.message = "backward pass failed at regularization cap";
          break;
        }
      }
    }
    if (sol.failed) break;
    sol.gains = K;

    if (grad < opt.grad_tol && max_gap <= opt.gap_tol) {
      sol.converged = true;
      break;
    }

    // Predicted change d(alpha) = alpha g1 + alpha^2 h2 / 2 from the local model.
    double g1 = 0.0, h2 = 0.0;
    {
      VectorXd dx = VectorXd::Zero(nx);
      for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const CostExpansion& e = ex[ts];
        const VectorXd du = k[ts] + K[ts] * dx;
        g1 += e.lx.dot(dx) + e.lu.dot(du);
        h2 += dx.dot(e.lxx * dx) + 2.0 * du.dot(e.lux * dx) + du.dot(e.luu * du);
        dx = A[ts] * dx + B[ts] * du + gap[ts];
      }
      g1 += et.lx.dot(dx);
      h2 += dx.dot(et.lxx * dx);
    }
    // Near a stationary point: take the full (tiny) step to remove the
    // regularization bias, then stop.
    const bool final_step = -g1 - 0.5 * h2 < opt.cost_tol && max_gap <= opt.gap_tol;

    // Line search.
    bool accepted = false;
    std::vector<VectorXd> xt(Tz + 1), ut(Tz);
    double alpha = 1.0;
    for (int ls = 0; ls < opt.line_search_steps; ++ls, alpha *= 0.5) {
      xt[0] = p.x0;
      bool finite = true;
      for (int t = 0; t < T && finite; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        ut[ts] = us[ts] + alpha * k[ts] + K[ts] * (xt[ts] - xs[ts]);
        xt[ts + 1] = p.dynamics(t, xt[ts], ut[ts], nullptr, nullptr) - (1.0 - alpha) * gap[ts];
        finite = ut[ts].allFinite() && xt[ts + 1].allFinite();
      }
      if (!finite) continue;
      const double c_try = detail::total_cost(p, xt, ut);
      if (!std::isfinite(c_try)) continue;
      const double expected = -(alpha * g1 + 0.5 * alpha * alpha * h2);
      const double actual = cost - c_try;
      bool take;
      if (final_step) {
        take = actual >= -1e-12 * std::max(1.0, std::abs(cost));
        if (!take) break;
      } else if (expected > 0.0) {
        take = actual >= opt.accept_ratio * expected;
      } else {
        // Gap-closing step whose model predicts no decrease.
        take = max_gap > opt.gap_tol && actual >= opt.accept_negative * expected;
      }
      if (take) {
        accepted = true;
        xs.swap(xt);
        us.swap(ut);
        const double drop = cost - c_try;
        cost = c_try;
        sol.cost_history.push_back(cost);
        double gmax = 0.0;
        if (alpha < 1.0) {
          for (const auto& gp : gap) gmax = std::max(gmax, (1.0 - alpha) * gp.cwiseAbs().maxCoeff());
        }
        sol.gap_history.push_back(gmax);
        mu = std::max(opt.reg_init, mu / opt.reg_growth);
        if (final_step || (std::abs(drop) < opt.cost_tol && gmax <= opt.gap_tol)) sol.converged = true;
        break;
      }
    }
    if (sol.converged) break;
    if (!accepted && final_step) {
      sol.converged = true;
      break;
    }
    if (!accepted) {
      mu *= opt.reg_growth;
      if (mu > opt.reg_max) {
        sol.message = "line search failed at regularization cap";
        break;
      }
    }
  }

  // Close any remaining gaps with a closed-loop rollout about the current plan.
  if (!sol.failed && ddp_max_gap(p, xs, us) > opt.gap_tol) {
    std::vector<VectorXd> xr(Tz + 1);
    xr[0] = p.x0;
    for (int t = 0; t < T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      us[ts] += K[ts] * (xr[ts] - xs[ts]);
      xr[ts + 1] = p.dynamics(t, xr[ts], us[ts], nullptr, nullptr);
    }
    xs.swap(xr);
    cost = detail::total_cost(p, xs, us);
  }
  for (const auto& x : xs) {
    if (!x.allFinite()) {
      sol.failed = true;
      sol.message = "non-finite state in rollout";
    }
  }
  sol.xs = std::move(xs);
  sol.us = std::move(us);
  sol.cost = cost;
  return sol;
}

}  // namespace tompc
