#pragma once
// Closed-loop simulation: RK4 plant with contact, 1 kHz joint PD around the
// planner output (zero-order hold between planner cycles), an inverse-dynamics
// baseline, metrics and the output files of a run.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <string>
#include <vector>

#include "tompc/admm_planner.hpp"
#include "tompc/scenario.hpp"

namespace tompc {

/// tau = tau_mpc + Kp (q_des - q) + Kd (qd_des - qd), diagonal gains.
inline VectorXd pd_wrap(const PlannerOutput& out, const StateVector& x, const VectorXd& kp, const VectorXd& kd) {
  return out.tau_mpc + kp.cwiseProduct(out.q_des - x.q) + kd.cwiseProduct(out.qd_des - x.qd);
}

inline VectorXd pd_wrap(const PlannerOutput& out, const StateVector& x, double kp, double kd) {
  const auto n = x.q.size();
  return pd_wrap(out, x, VectorXd::Constant(n, kp), VectorXd::Constant(n, kd));
}

// ---------------------------------------------------------------------------
// Plant

/// Rigid-body arm plus the spring-damper surface. The surface stiffness can
/// differ from the planner's by `stiffness_factor`; with `unilateral` the
/// surface only pushes: no wrench unless the contact frame is past the anchor
/// along the anchor z axis (which points into the surface), and the normal
/// component never pulls.
class Plant {
 public:
  Plant(const RobotModel& model, InteractionParams contact, double stiffness_factor, bool unilateral)
      : model_(&model), contact_(std::move(contact)), unilateral_(unilateral) {
    contact_.k_env *= stiffness_factor;
  }

  Wrench wrench(const std::vector<Pose>& poses, const VectorXd& qd, Matrix6X* jc = nullptr) const {
    if (!contact_.active) {
      if (jc) *jc = Matrix6X::Zero(6, model_->dof());
      return {};
    }
    Wrench f = interaction_wrench(contact_, *model_, poses, qd, jc);
    if (!unilateral_) return f;
    const Vector6 err = pose_diff(contact_.anchor_ref, frame_pose(*model_, poses, contact_.contact_frame));
    if (err[2] <= 0.0) return {};
    // Pushing out of the surface is -z in the anchor frame.
    if (f.force.z() > 0.0) f.force.z() = 0.0;
    return f;
  }

  Wrench wrench(const StateVector& x) const { return wrench(link_poses(*model_, x.q), x.qd); }

  VectorXd acceleration(const StateVector& x, const VectorXd& tau) const {
    const auto poses = link_poses(*model_, x.q);
    Matrix6X jc;
    const Wrench f = wrench(poses, x.qd, &jc);
    VectorXd rhs = tau - inverse_dynamics(*model_, poses, x.qd, VectorXd::Zero(model_->dof()));
    if (contact_.active) rhs += jc.transpose() * f.vector();
    return mass_matrix(*model_, poses).llt().solve(rhs);
  }

  /// Integrates `duration` seconds with constant torque in RK4 steps of at
  /// most `h`.
  void advance(StateVector& x, const VectorXd& tau, double duration, double h) const {
    const int steps = std::max(1, static_cast<int>(std::lround(duration / h)));
    const double dt = duration / steps;
    for (int i = 0; i < steps; ++i) {
      const StateVector s1 = x;
      const VectorXd a1 = acceleration(s1, tau);
      const StateVector s2{x.q + 0.5 * dt * s1.qd, x.qd + 0.5 * dt * a1};
      const VectorXd a2 = acceleration(s2, tau);
      const StateVector s3{x.q + 0.5 * dt * s2.qd, x.qd + 0.5 * dt * a2};
      const VectorXd a3 = acceleration(s3, tau);
      const StateVector s4{x.q + dt * s3.qd, x.qd + dt * a3};
      const VectorXd a4 = acceleration(s4, tau);
      x.q += dt / 6.0 * (s1.qd + 2.0 * s2.qd + 2.0 * s3.qd + s4.qd);
      x.qd += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    }
  }

  const InteractionParams& contact() const { return contact_; }

 private:
  const RobotModel* model_;
  InteractionParams contact_;
  bool unilateral_;
};

// ---------------------------------------------------------------------------
// Inverse-dynamics baseline

/// tau = M qdd_cmd + C qd + g - Jc^T F. The task acceleration is a PD law on
/// the reference pose; on force-controlled axes the position target is the
/// penetration at which the interaction model gives the reference force.
inline VectorXd inverse_dynamics_control(const Scenario& sc, const Plant& plant, const StateVector& x, double t) {
  const RobotModel& model = sc.robot;
  const int n = model.dof();
  const FrameId frame = sc.task_frame_id();
  const auto poses = link_poses(model, x.q);
  const Pose X = frame_pose(model, poses, frame);
  const Pose ref = sc.motion.at(t);
  Eigen::Vector3d p_cmd = ref.translation;

  const InteractionParams& ip = sc.interaction;
  if (ip.active && sc.force.active) {
    const Pose& a = ip.anchor_ref;
    Eigen::Vector3d c = a.rotation.transpose() * (p_cmd - a.translation);
    const Vector6 f_ref = sc.force.at(t).vector();
    for (int i = 0; i < 3; ++i) {
      if (sc.weights.q_f[i] > 0.0 && ip.k_env[i] > 0.0) c[i] = f_ref[i] / (ip.sign * ip.k_env[i]);
    }
    p_cmd = a.translation + a.rotation * c;
  }

  const Matrix6X J = frame_jacobian(model, poses, frame);
  const Vector6 v = J * x.qd;
  Vector6 acc;
  acc.head<3>() = sc.id_kp * (p_cmd - X.translation) - sc.id_kd * v.head<3>();
  acc.tail<3>() = sc.id_kp * log_rotation(ref.rotation * X.rotation.transpose()) - sc.id_kd * v.tail<3>();
  const MatrixXd pinv = pseudo_inverse(J);
  const VectorXd qdd = pinv * acc - (MatrixXd::Identity(n, n) - pinv * J) * (sc.id_null_kd * x.qd);

  Matrix6X jc;
  const Wrench f = plant.wrench(poses, x.qd, &jc);
  VectorXd tau = mass_matrix(model, poses) * qdd + inverse_dynamics(model, poses, x.qd, VectorXd::Zero(n));
  if (ip.active) tau -= jc.transpose() * f.vector();
  return tau;
}

// ---------------------------------------------------------------------------
// Log

struct SimSample {
  double t = 0.0;
  VectorXd q, qd, tau_des, tau_mpc, tau_pd;
  Eigen::Vector3d ee = Eigen::Vector3d::Zero(), ee_ref = Eigen::Vector3d::Zero();
  Eigen::Vector3d pos_err = Eigen::Vector3d::Zero();  // in the reference frame
  Vector6 wrench = Vector6::Zero(), wrench_ref = Vector6::Zero();  // anchor frame
  VectorXd distances;  // one per collision pair
};

struct CycleRecord {
  int cycle = 0;
  double t = 0.0;
  int iterations = 0;
  int ddp_iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool degraded = false;
  double wall_us = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();       // at the measured state
  double plan_min_distance = std::numeric_limits<double>::infinity();  // exact re-query of the plan
  double max_row_violation = 0.0;
  double max_box_violation = 0.0;
};

struct SimLog {
  std::string scenario;
  ControlMode mode = ControlMode::ToMPC;
  std::vector<std::string> pair_names;
  std::vector<SimSample> samples;
  std::vector<CycleRecord> cycles;
  bool aborted = false;
  std::string abort_reason;
};

struct SimOverrides {
  std::optional<ControlMode> mode;
  std::optional<unsigned> seed;
};

inline Scenario apply_overrides(Scenario sc, const SimOverrides& o) {
  if (o.mode) {
    sc.mode = *o.mode;
    sc.planner.mode = planner_mode(sc.mode);
  }
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

inline std::vector<StageReference> stage_references(const Scenario& sc, double t0) {
  std::vector<StageReference> refs(static_cast<std::size_t>(sc.planner.T) + 1);
  for (int i = 0; i <= sc.planner.T; ++i) {
    const double t = t0 + i * sc.planner.dt;
    refs[static_cast<std::size_t>(i)].x_ref = sc.motion.at(t);
    refs[static_cast<std::size_t>(i)].f_ref = sc.force.at(t);
  }
  return refs;
}

/// Minimum exact distance over the planned states of a returned ADMM state.
inline double plan_min_distance(const RobotModel& model, const CollisionWorld& world, const ADMMState& s) {
  double d = std::numeric_limits<double>::infinity();
  if (world.pairs.empty() || s.block == 0) return d;
  const int n = model.dof();
  for (Eigen::Index i = 0; i + s.block <= s.z.size(); i += s.block) {
    d = std::min(d, world.min_distance(model, s.z.segment(i + s.nu, n)));
  }
  return d;
}

inline SimLog simulate(const Scenario& sc) {
  sc.validate();
  const RobotModel& model = sc.robot;
  const int n = model.dof();
  const FrameId frame = sc.task_frame_id();
  SimLog log;
  log.scenario = sc.name;
  log.mode = sc.mode;

  CollisionWorld world = sc.make_world();  // planner copy
  CollisionWorld probe = sc.make_world();  // logging and plan checks
  for (const auto& p : probe.pairs) {
    log.pair_names.push_back(probe.obstacles[p.obstacle].name + "_link" + std::to_string(p.link));
  }
  const Plant plant(model, sc.interaction, sc.plant_stiffness_factor, sc.unilateral_contact);
  std::optional<Planner> planner;
  if (sc.mode != ControlMode::InverseDynamics) planner.emplace(model, sc.planner);

  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto measure = [&](const StateVector& x) {
    StateVector m = x;
    if (sc.noise_q > 0 || sc.noise_qd > 0) {
      for (int i = 0; i < n; ++i) {
        m.q[i] += sc.noise_q * gauss(rng);
        m.qd[i] += sc.noise_qd * gauss(rng);
      }
    }
    return m;
  };

  const long steps = std::lround(sc.duration / sc.control_dt);
  const long per_cycle = std::max(1L, std::lround(sc.planner.dt / sc.control_dt));
  StateVector x{sc.q0, VectorXd::Zero(n)};
  PlannerOutput held;
  ADMMState warm;
  bool have_warm = false;
  log.samples.reserve(static_cast<std::size_t>(steps));

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * sc.control_dt;
    const StateVector xm = measure(x);
    SimSample s;
    s.t = t;
    s.q = x.q;
    s.qd = x.qd;

    if (planner) {
      if (k % per_cycle == 0) {
        world.set_time(t);
        PlanInputs in;
        in.task_frame = frame;
        in.weights = sc.weights;
        in.interaction = sc.interaction;
        in.world = world.pairs.empty() ? nullptr : &world;
        in.refs = stage_references(sc, t);
        auto [out, next] = planner->plan_cycle(in, xm, have_warm ? &warm : nullptr);
        CycleRecord c;
        c.cycle = static_cast<int>(log.cycles.size());
        c.t = t;
        c.iterations = out.diag.iterations;
        c.ddp_iterations = out.diag.ddp_iterations;
        c.residual = out.diag.residual;
        c.converged = out.diag.converged;
        c.degraded = out.diag.degraded;
        c.wall_us = out.diag.wall_us;
        c.min_distance = out.diag.min_distance;
        c.max_row_violation = out.diag.max_row_violation;
        c.max_box_violation = out.diag.max_box_violation;
        probe.set_time(t);
        if (!out.diag.degraded) c.plan_min_distance = plan_min_distance(model, probe, next);
        log.cycles.push_back(c);
        held = out;
        warm = std::move(next);
        have_warm = warm.valid;
      }
      s.tau_mpc = held.tau_mpc;
      s.tau_pd = pd_wrap(held, xm, sc.kp, sc.kd) - held.tau_mpc;
      s.tau_des = s.tau_mpc + s.tau_pd;
    } else {
      s.tau_des = inverse_dynamics_control(sc, plant, xm, t);
      s.tau_mpc = VectorXd::Zero(n);
      s.tau_pd = VectorXd::Zero(n);
    }
    s.tau_des = clamp_controls(s.tau_des, model.limits.tau_min, model.limits.tau_max);

    const auto poses = link_poses(model, x.q);
    const Pose X = frame_pose(model, poses, frame);
    const Pose ref = sc.motion.at(t);
    s.ee = X.translation;
    s.ee_ref = ref.translation;
    s.pos_err = ref.rotation.transpose() * (X.translation - ref.translation);
    s.wrench = plant.wrench(poses, x.qd).vector();
    s.wrench_ref = sc.force.at(t).vector();
    probe.set_time(t);
    s.distances.resize(static_cast<Eigen::Index>(probe.pairs.size()));
    for (std::size_t i = 0; i < probe.pairs.size(); ++i) s.distances[static_cast<Eigen::Index>(i)] = probe.query(poses, i).d;
    log.samples.push_back(std::move(s));

    plant.advance(x, log.samples.back().tau_des, sc.control_dt, sc.plant_dt);
    if (!x.q.allFinite() || !x.qd.allFinite()) {
      log.aborted = true;
      log.abort_reason = "non-finite state at t = " + std::to_string(t);
      break;
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Metrics

/// Zero-phase second-order Butterworth high-pass (forward and backward pass).
inline std::vector<double> highpass(const std::vector<double>& x, double fs, double fc) {
  if (x.size() < 3) return std::vector<double>(x.size(), 0.0);
  const double w0 = 2.0 * M_PI * fc / fs, alpha = std::sin(w0) / std::sqrt(2.0), cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 + cw) / 2.0 / a0, b1 = -(1.0 + cw) / a0, b2 = b0;
  const double a1 = -2.0 * cw / a0, a2 = (1.0 - alpha) / a0;
  auto pass = [&](const std::vector<double>& in) {
    std::vector<double> out(in.size());
    double x1 = in[0], x2 = in[0], y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double y = b0 * in[i] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = in[i];
      y2 = y1;
      y1 = y;
      out[i] = y;
    }
    return out;
  };
  std::vector<double> y = pass(x);
  std::reverse(y.begin(), y.end());
  y = pass(y);
  std::reverse(y.begin(), y.end());
  return y;
}

inline double peak_to_peak(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

constexpr double kContactThreshold = 0.5;    // N, force magnitude that counts as contact
constexpr double kContactWindow = 1.5;       // s after first contact
constexpr double kHighFrequencyCut = 5.0;    // Hz

/// Peak-to-peak of the >5 Hz part of the contact force norm during the
/// first 1.5 s of contact. Zero when contact never happens.
inline double first_contact_oscillation(const SimLog& log) {
  std::size_t first = log.samples.size();
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    if (log.samples[i].wrench.head<3>().norm() > kContactThreshold) {
      first = i;
      break;
    }
  }
  if (first >= log.samples.size() || log.samples.size() < 2) return 0.0;
  const double dt = log.samples[1].t - log.samples[0].t;
  // Include a short lead-in so the filter sees the force rise.
  const std::size_t begin = first >= 50 ? first - 50 : 0;
  std::vector<double> f;
  for (std::size_t i = begin; i < log.samples.size() && log.samples[i].t <= log.samples[first].t + kContactWindow; ++i) {
    f.push_back(log.samples[i].wrench.head<3>().norm());
  }
  const std::vector<double> hp = highpass(f, 1.0 / dt, kHighFrequencyCut);
  return peak_to_peak(std::vector<double>(hp.begin() + static_cast<long>(first - begin), hp.end()));
}

struct Metrics {
  double min_distance = std::numeric_limits<double>::infinity();
  double pos_err_mean = 0.0, pos_err_rms = 0.0;
  double force_err_mean = 0.0, force_err_rms = 0.0;
  double torque_share = 0.0;  // mean |tau_mpc| / (|tau_mpc| + |tau_pd|)
  double contact_oscillation = 0.0;
  double mean_cycle_time = 0.0, max_cycle_time = 0.0;  // s, wall clock
  double plan_min_distance = std::numeric_limits<double>::infinity();
  double max_row_violation = 0.0;
  int cycles = 0, degraded_cycles = 0, unconverged_cycles = 0;
  std::size_t samples = 0;
  bool aborted = false;
};

inline Metrics compute_metrics(const SimLog& log, const Scenario& sc) {
  Metrics m;
  m.aborted = log.aborted;
  m.samples = log.samples.size();
  double pe = 0, pe2 = 0, fe = 0, fe2 = 0, share = 0;
  std::size_t windowed = 0, shared = 0;
  for (const auto& s : log.samples) {
    if (s.distances.size() > 0) m.min_distance = std::min(m.min_distance, s.distances.minCoeff());
    const double a = s.tau_mpc.norm(), b = s.tau_pd.norm();
    if (a + b > 0) {
      share += a / (a + b);
      ++shared;
    }
    if (s.t < sc.metrics_t0 || s.t > sc.metrics_t1) continue;
    double p = 0, f = 0;
    for (int i = 0; i < 3; ++i) {
      if (sc.weights.q_m[i] > 0) p += s.pos_err[i] * s.pos_err[i];
    }
    for (int i = 0; i < 6; ++i) {
      const double e = s.wrench[i] - s.wrench_ref[i];
      if (sc.weights.q_f[i] > 0) f += e * e;
    }
    pe += std::sqrt(p);
    pe2 += p;
    fe += std::sqrt(f);
    fe2 += f;
    ++windowed;
  }
  if (windowed > 0) {
    const auto w = static_cast<double>(windowed);
    m.pos_err_mean = pe / w;
    m.pos_err_rms = std::sqrt(pe2 / w);
    m.force_err_mean = fe / w;
    m.force_err_rms = std::sqrt(fe2 / w);
  }
  if (shared > 0) m.torque_share = share / static_cast<double>(shared);
  if (sc.interaction.active) m.contact_oscillation = first_contact_oscillation(log);
  for (const auto& c : log.cycles) {
    m.mean_cycle_time += c.wall_us * 1e-6;
    m.max_cycle_time = std::max(m.max_cycle_time, c.wall_us * 1e-6);
    m.plan_min_distance = std::min(m.plan_min_distance, c.plan_min_distance);
    m.max_row_violation = std::max(m.max_row_violation, c.max_row_violation);
    m.degraded_cycles += c.degraded;
    m.unconverged_cycles += !c.converged;
  }
  m.cycles = static_cast<int>(log.cycles.size());
  if (m.cycles > 0) m.mean_cycle_time /= m.cycles;
  return m;
}

/// Metrics that depend only on the simulated trajectory (no wall-clock data).
inline Json metrics_json(const Metrics& m, const SimLog& log) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"scenario", log.scenario},
              {"mode", to_string(log.mode)},
              {"min_distance", finite_or_null(m.min_distance)},
              {"plan_min_distance", finite_or_null(m.plan_min_distance)},
              {"position_error_mean", m.pos_err_mean},
              {"position_error_rms", m.pos_err_rms},
              {"force_error_mean", m.force_err_mean},
              {"force_error_rms", m.force_err_rms},
              {"torque_share", m.torque_share},
              {"contact_oscillation", m.contact_oscillation},
              {"max_row_violation", m.max_row_violation},
              {"cycles", m.cycles},
              {"degraded_cycles", m.degraded_cycles},
              {"unconverged_cycles", m.unconverged_cycles},
              {"samples", m.samples},
              {"aborted", m.aborted}};
}

// ---------------------------------------------------------------------------
// Output files

namespace detail {

inline void csv_vec(std::ostream& os, const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << v[i];
}

inline std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << std::setprecision(10);
  return os;
}

}  // namespace detail

/// trajectory.csv, distance.csv, force.csv and metrics.json; diagnostics.csv
/// (per-cycle, includes wall time) only when asked for.
inline void write_outputs(const SimLog& log, const Metrics& m, const std::filesystem::path& dir,
                          bool diagnostics = false) {
  std::filesystem::create_directories(dir);
  const int n = log.samples.empty() ? 0 : static_cast<int>(log.samples.front().q.size());
  {
    auto os = detail::open_csv(dir / "trajectory.csv");
    os << "t";
    for (const char* p : {"q", "qd", "tau_des", "tau_mpc"}) {
      for (int i = 1; i <= n; ++i) os << ',' << p << i;
    }
    os << ",ee_x,ee_y,ee_z,ref_x,ref_y,ref_z\n";
    for (const auto& s : log.samples) {
      os << s.t;
      detail::csv_vec(os, s.q);
      detail::csv_vec(os, s.qd);
      detail::csv_vec(os, s.tau_des);
      detail::csv_vec(os, s.tau_mpc);
      detail::csv_vec(os, s.ee);
      detail::csv_vec(os, s.ee_ref);
      os << '\n';
    }
  }
  {
    auto os = detail::open_csv(dir / "distance.csv");
    os << "t,min";
    for (const auto& name : log.pair_names) os << ',' << name;
    os << '\n';
    for (const auto& s : log.samples) {
      os << s.t << ',';
      if (s.distances.size() > 0) os << s.distances.minCoeff();
      detail::csv_vec(os, s.distances);
      os << '\n';
    }
  }
  {
    auto os = detail::open_csv(dir / "force.csv");
    os << "t,fx,fy,fz,mx,my,mz,fx_ref,fy_ref,fz_ref,mx_ref,my_ref,mz_ref\n";
    for (const auto& s : log.samples) {
      os << s.t;
      detail::csv_vec(os, s.wrench);
      detail::csv_vec(os, s.wrench_ref);
      os << '\n';
    }
  }
  {
    std::ofstream os(dir / "metrics.json");
    os << metrics_json(m, log).dump(2) << '\n';
  }
  if (diagnostics) {
    auto os = detail::open_csv(dir / "diagnostics.csv");
    os << "cycle,iterations,ddp_iterations,residual,wall_us,min_distance\n";
    for (const auto& c : log.cycles) {
      os << c.cycle << ',' << c.iterations << ',' << c.ddp_iterations << ',' << c.residual << ',' << c.wall_us << ','
         << c.min_distance << '\n';
    }
  }
}

/// Runs each scenario file and writes its outputs to out_dir/<name>.
/// Returns 0 when every run finished, 1 otherwise.
inline int run_suite(const std::vector<std::string>& files, const std::filesystem::path& out_dir,
                     const SimOverrides& overrides = {}, bool diagnostics = false, std::ostream* report = nullptr) {
  int status = 0;
  for (const auto& f : files) {
    const Scenario sc = apply_overrides(load_scenario(f), overrides);
    const SimLog log = simulate(sc);
    const Metrics m = compute_metrics(log, sc);
    write_outputs(log, m, out_dir / sc.name, diagnostics);
    if (report) {
      *report << sc.name << " [" << to_string(sc.mode) << "] min_distance " << m.min_distance << " pos_rms "
              << m.pos_err_rms << " force_rms " << m.force_err_rms << " mean_cycle_ms " << m.mean_cycle_time * 1e3
              << (log.aborted ? "  ABORTED: " + log.abort_reason : "") << '\n';
    }
    if (log.aborted) status = 1;
  }
  return status;
}

struct SweepResult {
  std::string label;
  Scenario scenario;
  SimLog log;
  Metrics metrics;
};

/// The six runs of the constraint comparison: ADMM planner with rho = 2 at
/// T = 10, 30, 50 and the barrier DDP baseline with sigma = 2, 3, 10 at T = 10.
inline std::vector<Scenario> table1_scenarios(const Scenario& base) {
  std::vector<Scenario> out;
  for (int T : {10, 30, 50}) {
    Scenario s = base;
    s.mode = ControlMode::ToMPC;
    s.planner.mode = PlannerMode::ToMPC;
    s.planner.rho = 2.0;
    s.planner.T = T;
    s.name = "tompc_rho2_T" + std::to_string(T);
    out.push_back(s);
  }
  for (double sigma : {2.0, 3.0, 10.0}) {
    Scenario s = base;
    s.mode = ControlMode::FddpBarrier;
    s.planner.mode = PlannerMode::FddpBarrier;
    s.planner.T = 10;
    s.weights.sigma = sigma;
    s.name = "fddp_sigma" + std::to_string(static_cast<int>(sigma)) + "_T10";
    out.push_back(s);
  }
  return out;
}

/// Runs the six configurations; writes out_dir/<label>/ when out_dir is non-empty.
inline std::vector<SweepResult> run_table1(const Scenario& base, const std::filesystem::path& out_dir,
                                           bool diagnostics = false) {
  std::vector<SweepResult> results;
  for (const Scenario& sc : table1_scenarios(base)) {
    SweepResult r{sc.name, sc, simulate(sc), {}};
    r.metrics = compute_metrics(r.log, sc);
    if (!out_dir.empty()) write_outputs(r.log, r.metrics, out_dir / sc.name, diagnostics);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace tompc
