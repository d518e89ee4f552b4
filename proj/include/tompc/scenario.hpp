#pragma once
// Scenario files: robot, initial state, obstacles, references, weights and
// planner settings for one closed-loop run.
//
// Poses in a scenario accept {"xyz": [..], "rpy" | "quat_wxyz": [..]} in world
// coordinates or {"offset": [..]} relative to the task frame at q0 (rotation
// taken from q0 unless "rpy"/"quat_wxyz" is also given).

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tompc/admm_planner.hpp"
#include "tompc/robot_io.hpp"

namespace tompc {

enum class ControlMode { ToMPC, OaMPC, FddpBarrier, InverseDynamics };

inline std::string to_string(ControlMode m) {
  switch (m) {
    case ControlMode::ToMPC:
      return "tompc";
    case ControlMode::OaMPC:
      return "oampc";
    case ControlMode::FddpBarrier:
      return "fddp";
    case ControlMode::InverseDynamics:
      return "id";
  }
  return "?";
}

inline ControlMode control_mode_from_string(const std::string& s) {
  if (s == "id") return ControlMode::InverseDynamics;
  switch (planner_mode_from_string(s)) {
    case PlannerMode::ToMPC:
      return ControlMode::ToMPC;
    case PlannerMode::OaMPC:
      return ControlMode::OaMPC;
    case PlannerMode::FddpBarrier:
      return ControlMode::FddpBarrier;
  }
  return ControlMode::ToMPC;
}

inline PlannerMode planner_mode(ControlMode m) {
  switch (m) {
    case ControlMode::OaMPC:
      return PlannerMode::OaMPC;
    case ControlMode::FddpBarrier:
      return PlannerMode::FddpBarrier;
    default:
      return PlannerMode::ToMPC;
  }
}

/// Task-frame pose reference over time.
struct MotionReference {
  enum class Kind { SetPoint, Lemniscate, Circle, Waypoints };
  Kind kind = Kind::SetPoint;
  Pose pose;            // set point, or the curve's starting pose
  double size = 0.0;    // lemniscate half-width a, or circle radius
  double period = 1.0;  // time for one loop
  double start = 0.0;   // curve is held at its first point before this time
  PoseTrack track;

  Pose at(double t) const {
    switch (kind) {
      case Kind::SetPoint:
        return pose;
      case Kind::Waypoints:
        return track.at(t);
      case Kind::Lemniscate: {
        // Lemniscate of Bernoulli in the world xy plane, starting at its
        // crossing point.
        const double s = 2.0 * M_PI * std::max(0.0, t - start) / period + 0.5 * M_PI;
        const double den = 1.0 + std::sin(s) * std::sin(s);
        Pose p = pose;
        p.translation.x() += size * std::cos(s) / den;
        p.translation.y() += size * std::sin(s) * std::cos(s) / den;
        return p;
      }
      case Kind::Circle: {
        const double s = 2.0 * M_PI * std::max(0.0, t - start) / period;
        Pose p = pose;
        p.translation.x() += size * (std::cos(s) - 1.0);
        p.translation.y() += size * std::sin(s);
        return p;
      }
    }
    return pose;
  }
};

/// f(t) = (offset + amplitude sin(omega t + phase)) * direction, expressed in
/// the interaction anchor frame.
struct ForceReference {
  bool active = false;
  double offset = 0.0, amplitude = 0.0, omega = 0.0, phase = 0.0;
  Vector6 direction = Vector6::Zero();

  double magnitude(double t) const { return active ? offset + amplitude * std::sin(omega * t + phase) : 0.0; }
  Wrench at(double t) const { return Wrench::from_vector(magnitude(t) * direction); }
};

struct Scenario {
  std::string name = "scenario";
  std::string robot_path;
  RobotModel robot;
  std::string task_frame = "ee";
  VectorXd q0;
  double duration = 1.0;
  ControlMode mode = ControlMode::ToMPC;
  unsigned seed = 0;

  double kp = 30.0, kd = 3.0;  // joint PD around the planned state
  double control_dt = 1e-3;
  double plant_dt = 1e-4;
  double noise_q = 0.0, noise_qd = 0.0;  // measurement noise std

  // Inverse-dynamics baseline gains (task space, then joint-space damping
  // in the null space).
  double id_kp = 2500.0, id_kd = 100.0, id_null_kd = 5.0;

  PlannerConfig planner;
  TaskWeights weights;
  InteractionParams interaction;
  double plant_stiffness_factor = 1.0;
  bool unilateral_contact = false;
  std::vector<Obstacle> obstacles;
  MotionReference motion;
  ForceReference force;
  double metrics_t0 = 0.0, metrics_t1 = std::numeric_limits<double>::infinity();

  FrameId task_frame_id() const { return robot.frame_id(task_frame); }
  Pose initial_task_pose() const { return forward_kinematics(robot, q0, task_frame_id()); }

  CollisionWorld make_world() const {
    CollisionWorld w;
    w.obstacles = obstacles;
    w.build_pairs(robot);
    w.set_time(0.0);
    return w;
  }

  void validate() const {
    const int n = robot.dof();
    if (q0.size() != n) throw std::invalid_argument("q0 size does not match the robot");
    if (!(duration > 0)) throw std::invalid_argument("duration must be positive");
    if (!(control_dt > 0) || !(plant_dt > 0) || plant_dt > control_dt) throw std::invalid_argument("bad rates");
    if (!(kp >= 0) || !(kd >= 0)) throw std::invalid_argument("PD gains must be nonnegative");
    planner.validate();
    TaskWeights w = weights;
    w.resize(n);
    w.validate(n);
    for (const auto& o : obstacles) o.geom.validate();
  }
};

namespace detail {

inline Pose scenario_pose(const Json& j, const Pose& start) {
  if (!j.contains("offset")) return pose_from_json(j);
  Pose p = start;
  if (j.contains("quat_wxyz") || j.contains("rpy")) p.rotation = pose_from_json(j).rotation;
  p.translation = start.translation + json_vec3(j.at("offset"));
  return p;
}

inline VectorXd per_joint(const Json& j, int n) {
  if (j.is_number()) return VectorXd::Constant(n, j.get<double>());
  VectorXd v = json_vecx(j);
  if (v.size() != n) throw std::invalid_argument("per-joint weight has the wrong size");
  return v;
}

inline Vector6 vec6(const Json& j) {
  const VectorXd v = json_vecx(j);
  if (v.size() != 6) throw std::invalid_argument("expected a 6-vector");
  return v;
}

inline CollisionPrimitive shape_from_json(const Json& j) {
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "sphere") return CollisionPrimitive::sphere(j.at("radius").get<double>());
  if (shape == "capsule") {
    return CollisionPrimitive::capsule(j.at("radius").get<double>(), json_vec3(j.at("a")), json_vec3(j.at("b")));
  }
  if (shape == "box") return CollisionPrimitive::box(json_vec3(j.at("half_extents")));
  throw std::invalid_argument("unknown obstacle shape: " + shape);
}

inline void read_planner(const Json& j, PlannerConfig& c) {
  c.T = j.value("T", c.T);
  c.dt = j.value("dt", c.dt);
  c.rho = j.value("rho", c.rho);
  c.r_th = j.value("r_th", c.r_th);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.ddp.max_iterations = j.value("ddp_iterations", c.ddp.max_iterations);
  c.qp.max_iterations = j.value("qp_iterations", c.qp.max_iterations);
  c.slack_weight = j.value("slack_weight", c.slack_weight);
  c.barrier_ddp_iterations = j.value("barrier_ddp_iterations", c.barrier_ddp_iterations);
  c.control_scale = j.value("control_scale", c.control_scale);
  c.threads = j.value("threads", c.threads);
}

inline void read_weights(const Json& j, int n, TaskWeights& w) {
  if (j.contains("q_m")) w.q_m = vec6(j.at("q_m"));
  if (j.contains("q_f")) w.q_f = vec6(j.at("q_f"));
  if (j.contains("s")) w.s = vec6(j.at("s"));
  if (j.contains("q_s")) w.q_s = per_joint(j.at("q_s"), n);
  if (j.contains("q_rep")) w.q_rep = per_joint(j.at("q_rep"), n);
  if (j.contains("r")) w.r = per_joint(j.at("r"), n);
  w.alpha = j.value("alpha", w.alpha);
  w.k_rep = j.value("k_rep", w.k_rep);
  w.d_th1 = j.value("d_th1", w.d_th1);
  w.d_th2 = j.value("d_th2", w.d_th2);
  w.sigma = j.value("sigma", w.sigma);
  w.resize(n);
}

inline MotionReference read_motion(const Json& j, const Pose& start) {
  MotionReference m;
  m.pose = start;
  const std::string type = j.value("type", "set_point");
  if (j.contains("pose")) m.pose = scenario_pose(j.at("pose"), start);
  m.start = j.value("start", 0.0);
  if (type == "set_point") {
    m.kind = MotionReference::Kind::SetPoint;
  } else if (type == "lemniscate" || type == "circle") {
    m.kind = type == "circle" ? MotionReference::Kind::Circle : MotionReference::Kind::Lemniscate;
    m.size = j.at("size").get<double>();
    m.period = j.at("period").get<double>();
    if (!(m.period > 0)) throw std::invalid_argument("period must be positive");
  } else if (type == "waypoints") {
    m.kind = MotionReference::Kind::Waypoints;
    for (const auto& w : j.at("points")) {
      m.track.times.push_back(w.at("t").get<double>());
      m.track.poses.push_back(scenario_pose(w.at("pose"), start));
    }
    if (m.track.empty()) throw std::invalid_argument("waypoint reference needs points");
  } else {
    throw std::invalid_argument("unknown motion reference: " + type);
  }
  return m;
}

}  // namespace detail

/// Builds a scenario from JSON; relative robot paths resolve against `base_dir`.
inline Scenario scenario_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  Scenario s;
  s.name = doc.value("name", s.name);
  s.robot_path = (base_dir / doc.at("robot").get<std::string>()).lexically_normal().string();
  s.robot = load_robot(s.robot_path);
  const int n = s.robot.dof();
  s.task_frame = doc.value("task_frame", s.task_frame);
  s.q0 = json_vecx(doc.at("q0"));
  if (s.q0.size() != n) throw std::invalid_argument("q0 size does not match the robot");
  s.duration = doc.at("duration").get<double>();
  s.mode = control_mode_from_string(doc.value("mode", "tompc"));
  s.seed = doc.value("seed", 0u);
  if (doc.contains("control")) {
    const auto& c = doc.at("control");
    s.kp = c.value("kp", s.kp);
    s.kd = c.value("kd", s.kd);
    s.control_dt = c.value("control_dt", s.control_dt);
    s.plant_dt = c.value("plant_dt", s.plant_dt);
    s.id_kp = c.value("id_kp", s.id_kp);
    s.id_kd = c.value("id_kd", s.id_kd);
    s.id_null_kd = c.value("id_null_kd", s.id_null_kd);
  }
  if (doc.contains("noise")) {
    s.noise_q = doc.at("noise").value("q", 0.0);
    s.noise_qd = doc.at("noise").value("qd", 0.0);
  }
  if (doc.contains("planner")) detail::read_planner(doc.at("planner"), s.planner);
  s.planner.mode = planner_mode(s.mode);
  s.weights.resize(n);
  if (doc.contains("weights")) detail::read_weights(doc.at("weights"), n, s.weights);

  const Pose start = s.initial_task_pose();
  if (doc.contains("interaction")) {
    const auto& j = doc.at("interaction");
    s.interaction.active = j.value("active", true);
    s.interaction.k_env = detail::vec6(j.at("k_env"));
    s.interaction.d_env = detail::vec6(j.at("d_env"));
    s.interaction.contact_frame = s.robot.frame_id(j.value("frame", s.task_frame));
    s.interaction.anchor_ref = detail::scenario_pose(j.at("anchor"), start);
    s.plant_stiffness_factor = j.value("plant_stiffness_factor", 1.0);
    s.unilateral_contact = j.value("unilateral", false);
  }
  if (doc.contains("obstacles")) {
    for (const auto& jo : doc.at("obstacles")) {
      Obstacle o;
      o.name = jo.value("name", "obstacle" + std::to_string(s.obstacles.size()));
      o.geom = detail::shape_from_json(jo);
      o.pose = detail::scenario_pose(jo.at("pose"), start);
      if (jo.contains("track")) {
        for (const auto& w : jo.at("track")) {
          o.track.times.push_back(w.at("t").get<double>());
          o.track.poses.push_back(detail::scenario_pose(w.at("pose"), start));
        }
      }
      s.obstacles.push_back(o);
    }
  }
  if (doc.contains("motion")) s.motion = detail::read_motion(doc.at("motion"), start);
  else s.motion.pose = start;
  if (doc.contains("force")) {
    const auto& j = doc.at("force");
    s.force.active = true;
    s.force.offset = j.value("offset", 0.0);
    s.force.amplitude = j.value("amplitude", 0.0);
    s.force.omega = j.value("omega", 0.0);
    s.force.phase = j.value("phase", 0.0);
    s.force.direction = detail::vec6(j.at("direction"));
  }
  if (doc.contains("metrics_window")) {
    const auto& w = doc.at("metrics_window");
    s.metrics_t0 = w.at(0).get<double>();
    s.metrics_t1 = w.at(1).get<double>();
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  const std::filesystem::path p(path);
  return scenario_from_json(read_json_file(path), p.parent_path());
}

}  // namespace tompc
