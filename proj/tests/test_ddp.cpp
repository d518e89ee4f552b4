#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "test_support.hpp"
#include "tompc/ddp.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using tompc::CostExpansion;
using tompc::OCProblem;

namespace {

// Time-invariant LQ problem: 1/2 x'Qx + q'x + 1/2 u'Ru stage, 1/2 x'Qf x terminal.
struct Lq {
  MatrixXd A, B, Q, R, Qf;
  VectorXd q;
};

Lq double_integrator(int dims) {
  const double dt = 0.1;
  Lq lq;
  const int nx = 2 * dims, nu = dims;
  lq.A = MatrixXd::Identity(nx, nx);
  lq.A.topRightCorner(dims, dims) = dt * MatrixXd::Identity(dims, dims);
  lq.B = MatrixXd::Zero(nx, nu);
  lq.B.topRows(dims) = 0.5 * dt * dt * MatrixXd::Identity(dims, dims);
  lq.B.bottomRows(dims) = dt * MatrixXd::Identity(dims, dims);
  lq.Q = MatrixXd::Identity(nx, nx);
  lq.Q.bottomRightCorner(dims, dims) *= 0.1;
  lq.R = 0.01 * MatrixXd::Identity(nu, nu);
  lq.Qf = 10.0 * MatrixXd::Identity(nx, nx);
  lq.q = VectorXd::Zero(nx);
  return lq;
}

OCProblem make_problem(const Lq& lq, int T, const VectorXd& x0) {
  OCProblem p;
  p.T = T;
  p.nx = static_cast<int>(lq.A.rows());
  p.nu = static_cast<int>(lq.B.cols());
  p.x0 = x0;
  p.dynamics = [lq](int, const VectorXd& x, const VectorXd& u, MatrixXd* A, MatrixXd* B) {
    if (A) *A = lq.A;
    if (B) *B = lq.B;
    return VectorXd(lq.A * x + lq.B * u);
  };
  p.stage_cost = [lq](int, const VectorXd& x, const VectorXd& u, CostExpansion* e) {
    if (e) {
      e->lx = lq.Q * x + lq.q;
      e->lu = lq.R * u;
      e->lxx = lq.Q;
      e->luu = lq.R;
    }
    return 0.5 * x.dot(lq.Q * x) + lq.q.dot(x) + 0.5 * u.dot(lq.R * u);
  };
  p.terminal_cost = [lq](const VectorXd& x, CostExpansion* e) {
    if (e) {
      e->lx = lq.Qf * x;
      e->lxx = lq.Qf;
    }
    return 0.5 * x.dot(lq.Qf * x);
  };
  return p;
}

struct RiccatiResult {
  std::vector<VectorXd> xs, us;
  std::vector<MatrixXd> K;
};

// Backward Riccati with affine term, then forward rollout.
RiccatiResult riccati(const Lq& lq, int T, const VectorXd& x0) {
  const auto n = static_cast<std::size_t>(T);
  std::vector<MatrixXd> K(n);
  std::vector<VectorXd> kff(n);
  MatrixXd P = lq.Qf;
  VectorXd p = VectorXd::Zero(lq.A.rows());
  for (int t = T - 1; t >= 0; --t) {
    const MatrixXd S = lq.R + lq.B.transpose() * P * lq.B;
    const MatrixXd Si = S.inverse();
    K[t] = -Si * lq.B.transpose() * P * lq.A;
    kff[t] = -Si * lq.B.transpose() * p;
    const MatrixXd Acl = lq.A + lq.B * K[t];
    p = lq.q + Acl.transpose() * p + K[t].transpose() * lq.R * kff[t] + Acl.transpose() * P * lq.B * kff[t];
    P = lq.Q + lq.A.transpose() * P * Acl;
    P = 0.5 * (P + P.transpose()).eval();
  }
  RiccatiResult r;
  r.K = K;
  r.xs.push_back(x0);
  for (std::size_t t = 0; t < n; ++t) {
    r.us.push_back(K[t] * r.xs[t] + kff[t]);
    r.xs.push_back(lq.A * r.xs[t] + lq.B * r.us[t]);
  }
  return r;
}

std::vector<VectorXd> repeat(const VectorXd& v, int count) { return std::vector<VectorXd>(count, v); }

}  // namespace

TEST(Ddp, MatchesRiccatiOnDoubleIntegrator) {
  Lq lq = double_integrator(2);
  lq.q << 0.3, -0.2, 0.0, 0.1;
  const int T = 20;
  VectorXd x0(4);
  x0 << 1.0, -0.5, 0.2, 0.3;
  const OCProblem p = make_problem(lq, T, x0);
  const auto ref = riccati(lq, T, x0);

  // Arbitrary infeasible initial guess; gaps are closed by the full step.
  tompc::testing::Rng rng(3);
  std::vector<VectorXd> xs, us;
  for (int t = 0; t <= T; ++t) xs.push_back(rng.vector(4, -1, 1));
  for (int t = 0; t < T; ++t) us.push_back(rng.vector(2, -1, 1));
  const auto sol = tompc::ddp_solve(p, xs, us);
  ASSERT_FALSE(sol.failed) << sol.message;
  EXPECT_TRUE(sol.converged);
  for (int t = 0; t <= T; ++t) EXPECT_LE((sol.xs[t] - ref.xs[t]).cwiseAbs().maxCoeff(), 1e-6) << t;
  for (int t = 0; t < T; ++t) {
    EXPECT_LE((sol.us[t] - ref.us[t]).cwiseAbs().maxCoeff(), 1e-6) << t;
    EXPECT_LE((sol.gains[t] - ref.K[t]).cwiseAbs().maxCoeff(), 1e-6) << t;
  }
}

TEST(Ddp, OptimalGuessConvergesWithoutStep) {
  const Lq lq = double_integrator(1);
  VectorXd x0(2);
  x0 << 0.7, -0.1;
  const OCProblem p = make_problem(lq, 20, x0);
  const auto ref = riccati(lq, 20, x0);
  const auto sol = tompc::ddp_solve(p, ref.xs, ref.us);
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(sol.iterations, 2);
  for (int t = 0; t < 20; ++t) EXPECT_LE((sol.us[t] - ref.us[t]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ddp, SingleStepMatchesClosedForm) {
  Lq lq = double_integrator(2);
  lq.q << 0.5, 0.1, -0.3, 0.2;
  VectorXd x0(4);
  x0 << 0.2, 0.4, -0.1, 0.3;
  const OCProblem p = make_problem(lq, 1, x0);
  // min_u 1/2 u'Ru + 1/2 (Ax0 + Bu)' Qf (Ax0 + Bu)
  const MatrixXd H = lq.R + lq.B.transpose() * lq.Qf * lq.B;
  const VectorXd u_star = -H.ldlt().solve(lq.B.transpose() * lq.Qf * lq.A * x0);
  const auto sol = tompc::ddp_solve(p, repeat(x0, 2), repeat(VectorXd::Zero(2), 1));
  ASSERT_FALSE(sol.failed);
  EXPECT_LE((sol.us[0] - u_star).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ddp, ProximalTermShiftsSolution) {
  // With rho -> large the controls follow the proximal target.
  const Lq lq = double_integrator(1);
  VectorXd x0(2);
  x0 << 0.5, 0.0;
  OCProblem p = make_problem(lq, 10, x0);
  p.prox_rho = 1e6;
  // Build a dynamically consistent target trajectory.
  std::vector<VectorXd> xs{x0}, us;
  for (int t = 0; t < 10; ++t) {
    us.push_back(VectorXd::Constant(1, 0.2 * std::sin(t)));
    xs.push_back(lq.A * xs.back() + lq.B * us.back());
    VectorXd tg(3);
    tg << us.back(), xs.back();
    p.prox_target.push_back(tg);
  }
  const auto sol = tompc::ddp_solve(p, repeat(x0, 11), repeat(VectorXd::Zero(1), 10));
  for (int t = 0; t < 10; ++t) EXPECT_NEAR(sol.us[t][0], us[t][0], 1e-3);

  // Proximal optimum equals the Riccati solution of the augmented problem:
  // compare against a direct KKT solve of the stacked LQ program.
  p.prox_rho = 3.0;
  const int T = 10, nx = 2, nu = 1;
  const int nvar = T * (nu + nx);
  MatrixXd H = MatrixXd::Zero(nvar, nvar);
  VectorXd g = VectorXd::Zero(nvar);
  MatrixXd Aeq = MatrixXd::Zero(T * nx, nvar);
  VectorXd beq = VectorXd::Zero(T * nx);
  for (int t = 0; t < T; ++t) {
    const int iu = t * (nu + nx), ix = iu + nu;
    H.block(iu, iu, nu, nu) = lq.R + p.prox_rho * MatrixXd::Identity(nu, nu);
    g.segment(iu, nu) = -p.prox_rho * p.prox_target[t].head(nu);
    H.block(ix, ix, nx, nx) = (t + 1 < T ? lq.Q : lq.Qf) + p.prox_rho * MatrixXd::Identity(nx, nx);
    g.segment(ix, nx) = -p.prox_rho * p.prox_target[t].tail(nx) + (t + 1 < T ? lq.q : VectorXd::Zero(nx));
    Aeq.block(t * nx, ix, nx, nx) = -MatrixXd::Identity(nx, nx);
    Aeq.block(t * nx, iu, nx, nu) = lq.B;
    if (t == 0) {
      beq.segment(0, nx) = -lq.A * x0;
    } else {
      Aeq.block(t * nx, iu - nx, nx, nx) = lq.A;
    }
  }
  MatrixXd kkt = MatrixXd::Zero(nvar + T * nx, nvar + T * nx);
  kkt.topLeftCorner(nvar, nvar) = H;
  kkt.topRightCorner(nvar, T * nx) = Aeq.transpose();
  kkt.bottomLeftCorner(T * nx, nvar) = Aeq;
  VectorXd rhs(nvar + T * nx);
  rhs << -g, beq;
  const VectorXd w = kkt.fullPivLu().solve(rhs);
  const auto sol2 = tompc::ddp_solve(p, repeat(x0, 11), repeat(VectorXd::Zero(1), 10));
  for (int t = 0; t < T; ++t) {
    EXPECT_NEAR(sol2.us[t][0], w[t * (nu + nx)], 1e-6);
    EXPECT_LE((sol2.xs[t + 1] - w.segment(t * (nu + nx) + nu, nx)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

namespace {

// Damped pendulum with torque input, explicit Euler.
OCProblem pendulum(int T, double target) {
  OCProblem p;
  p.T = T;
  p.nx = 2;
  p.nu = 1;
  p.dt = 0.05;
  p.x0 = VectorXd::Zero(2);
  const double dt = p.dt;
  p.dynamics = [dt](int, const VectorXd& x, const VectorXd& u, MatrixXd* A, MatrixXd* B) {
    VectorXd n(2);
    n << x[0] + dt * x[1], x[1] + dt * (-9.81 * std::sin(x[0]) - 0.1 * x[1] + u[0]);
    if (A) {
      A->resize(2, 2);
      *A << 1, dt, -dt * 9.81 * std::cos(x[0]), 1 - 0.1 * dt;
    }
    if (B) {
      B->resize(2, 1);
      *B << 0, dt;
    }
    return n;
  };
  p.stage_cost = [](int, const VectorXd&, const VectorXd& u, CostExpansion* e) {
    if (e) {
      e->lu = 0.02 * u;
      e->luu = 0.02 * MatrixXd::Identity(1, 1);
    }
    return 0.01 * u.squaredNorm();
  };
  p.terminal_cost = [target](const VectorXd& x, CostExpansion* e) {
    VectorXd r = x;
    r[0] -= target;
    if (e) {
      e->lx = 200.0 * r;
      e->lxx = 200.0 * MatrixXd::Identity(2, 2);
    }
    return 100.0 * r.squaredNorm();
  };
  return p;
}

}  // namespace

TEST(Ddp, NonlinearCostMonotoneAndFeasible) {
  const OCProblem p = pendulum(40, 1.2);
  tompc::DDPOptions opt;
  opt.max_iterations = 50;
  // Feasible start: the zero-torque rollout.
  std::vector<VectorXd> us = repeat(VectorXd::Zero(1), 40), xs{p.x0};
  for (int t = 0; t < 40; ++t) xs.push_back(p.dynamics(t, xs.back(), us[t], nullptr, nullptr));
  const double c0 = tompc::ddp_cost(p, xs, us);
  const auto sol = tompc::ddp_solve(p, xs, us, opt);
  ASSERT_FALSE(sol.failed) << sol.message;
  EXPECT_TRUE(sol.converged);
  double prev = c0;
  for (double c : sol.cost_history) {
    EXPECT_LE(c, prev + 1e-12);
    prev = c;
  }
  EXPECT_EQ(sol.xs[0], p.x0);
  EXPECT_LE(tompc::ddp_max_gap(p, sol.xs, sol.us), 1e-8);
  EXPECT_NEAR(sol.xs.back()[0], 1.2, 0.05);
}

TEST(Ddp, InfeasibleStartEndsFeasibleAndKeepsInitialState) {
  const OCProblem p = pendulum(30, -0.8);
  tompc::testing::Rng rng(9);
  std::vector<VectorXd> xs, us;
  for (int t = 0; t <= 30; ++t) xs.push_back(rng.vector(2, -1, 1));
  for (int t = 0; t < 30; ++t) us.push_back(rng.vector(1, -2, 2));
  const auto sol = tompc::ddp_solve(p, xs, us);
  ASSERT_FALSE(sol.failed) << sol.message;
  EXPECT_EQ(sol.xs[0], p.x0);
  EXPECT_LE(tompc::ddp_max_gap(p, sol.xs, sol.us), 1e-8);
}

TEST(Ddp, WrongLengthsReportFailure) {
  const OCProblem p = pendulum(5, 0.0);
  const auto sol = tompc::ddp_solve(p, repeat(p.x0, 3), repeat(VectorXd::Zero(1), 5));
  EXPECT_TRUE(sol.failed);
}

TEST(Ddp, NanRolloutReportsFailure) {
  OCProblem p = pendulum(5, 0.0);
  p.terminal_cost = [](const VectorXd&, CostExpansion*) { return std::numeric_limits<double>::quiet_NaN(); };
  const auto sol = tompc::ddp_solve(p, repeat(p.x0, 6), repeat(VectorXd::Zero(1), 5));
  EXPECT_TRUE(sol.failed);
}
