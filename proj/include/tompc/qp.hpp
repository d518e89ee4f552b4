#pragma once
// Dense strictly convex QP
//
//   min 1/2 z^T H z + g^T z   s.t.  C z >= c_lb,  lb <= z <= ub
//
// solved with the Goldfarb-Idnani dual active-set method. The factorization
// of L^-1 N (N = active normals) is recomputed on every active-set change,
// which is cheap at the sizes used here (<= ~30 variables). A warm start
// biases the order in which violated constraints enter.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tompc {

struct QPProblem {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  Eigen::VectorXd lb, ub;  // empty or size n; +-inf for missing bounds
  Eigen::MatrixXd c;       // m x n general rows
  Eigen::VectorXd c_lb;

  Eigen::Index n() const { return g.size(); }
  Eigen::Index rows() const { return c.rows(); }
};

enum class QPStatus { Solved, Infeasible, MaxIterations, NotConvex };

struct QPSolution {
  Eigen::VectorXd z;
  QPStatus status = QPStatus::Solved;
  // Constraint numbering: general rows [0, m), lower bounds [m, m + n),
  // upper bounds [m + n, m + 2n).
  std::vector<int> active;
  Eigen::VectorXd multipliers;  // one per numbered constraint, >= 0
  double kkt_residual = 0.0;
  int iterations = 0;

  bool ok() const { return status == QPStatus::Solved; }
};

struct QPOptions {
  int max_iterations = 50;
  double feasibility_tol = 1e-10;
};

namespace detail {

struct QPConstraintView {
  const QPProblem& p;
  Eigen::Index m, n;

  Eigen::Index count() const { return m + 2 * n; }
  bool exists(Eigen::Index i) const {
    if (i < m) return true;
    if (i < m + n) return p.lb.size() == n && std::isfinite(p.lb[i - m]);
    return p.ub.size() == n && std::isfinite(p.ub[i - m - n]);
  }
  Eigen::VectorXd normal(Eigen::Index i) const {
    if (i < m) return p.c.row(i).transpose();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    if (i < m + n) {
      e[i - m] = 1.0;
    } else {
      e[i - m - n] = -1.0;
    }
    return e;
  }
  double rhs(Eigen::Index i) const {
    if (i < m) return p.c_lb[i];
    if (i < m + n) return p.lb[i - m];
    return -p.ub[i - m - n];
  }
  double slack(Eigen::Index i, const Eigen::VectorXd& z) const {
    if (i < m) return p.c.row(i).dot(z) - p.c_lb[i];
    if (i < m + n) return z[i - m] - p.lb[i - m];
    return p.ub[i - m - n] - z[i - m - n];
  }
};

}  // namespace detail

inline double qp_kkt_residual(const QPProblem& p, const QPSolution& s) {
  const Eigen::Index n = p.n(), m = p.rows();
  const detail::QPConstraintView cv{p, m, n};
  Eigen::VectorXd stat = p.h * s.z + p.g;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < cv.count(); ++i) {
    if (!cv.exists(i)) continue;
    const double mu = s.multipliers.size() ? s.multipliers[i] : 0.0;
    const double sl = cv.slack(i, s.z);
    if (mu != 0.0) stat -= mu * cv.normal(i);
    worst = std::max(worst, std::max(0.0, -sl));
    worst = std::max(worst, std::max(0.0, -mu));
    worst = std::max(worst, std::abs(mu * sl));
  }
  return std::max(worst, stat.cwiseAbs().maxCoeff());
}

inline QPSolution qp_solve(const QPProblem& p, const QPSolution* warm = nullptr, const QPOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Eigen::Index n = p.n(), m = p.rows();
  const detail::QPConstraintView cv{p, m, n};
  QPSolution sol;
  sol.multipliers = VectorXd::Zero(cv.count());

  Eigen::LLT<MatrixXd> llt(p.h);
  if (llt.info() != Eigen::Success) {
    const double reg = 1e-10 * std::max(1.0, p.h.cwiseAbs().maxCoeff());
    llt.compute(p.h + reg * MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) {
      sol.status = QPStatus::NotConvex;
      sol.z = VectorXd::Zero(n);
      return sol;
    }
  }
  const MatrixXd l_inv = llt.matrixL().solve(MatrixXd::Identity(n, n));

  VectorXd z = -llt.solve(p.g);
  std::vector<int> act;  // active constraint indices
  VectorXd u;            // their multipliers
  MatrixXd j1, j2, r;    // J = L^-T Q = [J1 J2], R upper triangular

  auto refactor = [&]() {
    const auto q = static_cast<Eigen::Index>(act.size());
    if (q == 0) {
      j1.resize(n, 0);
      j2 = l_inv.transpose();
      r.resize(0, 0);
      return;
    }
    MatrixXd nm(n, q);
    for (Eigen::Index k = 0; k < q; ++k) nm.col(k) = cv.normal(act[static_cast<std::size_t>(k)]);
    const Eigen::HouseholderQR<MatrixXd> qr(l_inv * nm);
    const MatrixXd qfull = qr.householderQ() * MatrixXd::Identity(n, n);
    const MatrixXd jfull = l_inv.transpose() * qfull;
    j1 = jfull.leftCols(q);
    j2 = jfull.rightCols(n - q);
    r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  };
  refactor();

  std::vector<char> in_warm(static_cast<std::size_t>(cv.count()), 0);
  if (warm && warm->multipliers.size() == cv.count()) {
    for (int i : warm->active) in_warm[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<char> is_active(static_cast<std::size_t>(cv.count()), 0);

  const double inf = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (true) {
    // Most violated inactive constraint, warm-set members first.
    Eigen::Index pick = -1;
    double worst = 0.0;
    bool pick_warm = false;
    for (Eigen::Index i = 0; i < cv.count(); ++i) {
      if (!cv.exists(i) || is_active[static_cast<std::size_t>(i)]) continue;
      const double s = cv.slack(i, z);
      const double scale = 1.0 + std::abs(cv.rhs(i));
      if (s >= -opt.feasibility_tol * scale) continue;
      const bool w = in_warm[static_cast<std::size_t>(i)];
      if (pick < 0 || (w && !pick_warm) || (w == pick_warm && s < worst)) {
        pick = i;
        worst = s;
        pick_warm = w;
      }
    }
    if (pick < 0) break;
    if (++iter > opt.max_iterations) {
      sol.status = QPStatus::MaxIterations;
      break;
    }

    const VectorXd np = cv.normal(pick);
    double up = 0.0;  // multiplier of the entering constraint
    bool added = false;
    while (!added) {
      const auto q = static_cast<Eigen::Index>(act.size());
      const VectorXd step = j2 * (j2.transpose() * np);
      VectorXd rr = VectorXd::Zero(q);
      if (q > 0) rr = r.triangularView<Eigen::Upper>().solve(j1.transpose() * np);

      double t1 = inf;
      Eigen::Index drop = -1;
      for (Eigen::Index k = 0; k < q; ++k) {
        if (rr[k] > 1e-14 && u[k] / rr[k] < t1) {
          t1 = u[k] / rr[k];
          drop = k;
        }
      }
      const double curv = step.dot(np);
      const double t2 = std::abs(curv) > 1e-14 * np.squaredNorm() ? -cv.slack(pick, z) / curv : inf;

      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        sol.status = QPStatus::Infeasible;
        break;
      }
      const double t = std::min(t1, t2);
      if (std::isfinite(t2)) z += t * step;
      if (q > 0) u -= t * rr;
      up += t;
      if (t2 <= t1) {
        act.push_back(static_cast<int>(pick));
        is_active[static_cast<std::size_t>(pick)] = 1;
        u.conservativeResize(q + 1);
        u[q] = up;
        added = true;
      } else {
        is_active[static_cast<std::size_t>(act[static_cast<std::size_t>(drop)])] = 0;
        act.erase(act.begin() + drop);
        for (Eigen::Index k = drop; k + 1 < q; ++k) u[k] = u[k + 1];
        u.conservativeResize(q - 1);
      }
      refactor();
    }
    if (sol.status == QPStatus::Infeasible) break;
  }

  sol.z = z;
  sol.iterations = iter;
  sol.active = act;
  for (std::size_t k = 0; k < act.size(); ++k) sol.multipliers[act[k]] = std::max(0.0, u[static_cast<Eigen::Index>(k)]);
  sol.kkt_residual = qp_kkt_residual(p, sol);
  return sol;
}

/// Closed-form box projection of a control vector.
inline Eigen::VectorXd clamp_controls(const Eigen::VectorXd& u, const Eigen::VectorXd& u_min,
                                      const Eigen::VectorXd& u_max) {
  return u.cwiseMax(u_min).cwiseMin(u_max);
}

}  // namespace tompc
