#pragma once
// JSON loading for robot descriptions.
//
// {
//   "gravity": [0, 0, -9.81],
//   "joints": [ {"name": "j1", "axis": [0,0,1],
//                "origin": {"xyz": [..], "quat_wxyz": [..]} | {"xyz": [..], "rpy": [..]}}, ... ],
//   "links":  [ {"mass": m, "com": [..], "inertia": [ixx, iyy, izz, ixy, ixz, iyz]}, ... ],
//   "capsules": [ {"link": 1, "a": [..], "b": [..], "radius": r}, ... ],
//   "frames": [ {"name": "ee", "link": 7, "pose": {...}}, ... ],
//   "limits": {"q_min": [..], "q_max": [..], "qd_max": [..], "tau_max": [..]}
// }
//
// qd_min / tau_min default to the negated maxima. Links are numbered from 1.

#include <fstream>
#include <string>

#include "json.hpp"
#include "tompc/robot_model.hpp"

namespace tompc {

using Json = nlohmann::json;

inline Eigen::Vector3d json_vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline VectorXd json_vecx(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline Eigen::Matrix3d rpy_rotation(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// Pose from {"xyz": [..], "quat_wxyz": [..]} or {"xyz": [..], "rpy": [..]}.
inline Pose pose_from_json(const Json& j) {
  Pose p;
  if (j.contains("xyz")) p.translation = json_vec3(j.at("xyz"));
  if (j.contains("quat_wxyz")) {
    const auto& q = j.at("quat_wxyz");
    if (!q.is_array() || q.size() != 4) throw std::invalid_argument("quat_wxyz needs 4 entries");
    p = pose_from_quaternion(p.translation, q[0], q[1], q[2], q[3]);
  } else if (j.contains("rpy")) {
    p.rotation = rpy_rotation(json_vec3(j.at("rpy")));
  }
  return p;
}

inline Json pose_to_json(const Pose& p) {
  const Eigen::Vector4d q = quaternion_wxyz(p);
  return {{"xyz", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"quat_wxyz", {q[0], q[1], q[2], q[3]}}};
}

inline RobotModel robot_from_json(const Json& doc) {
  RobotModel model;
  if (doc.contains("gravity")) model.gravity = json_vec3(doc.at("gravity"));
  for (const auto& jj : doc.at("joints")) {
    RevoluteJoint joint;
    joint.name = jj.value("name", "j" + std::to_string(model.joints.size() + 1));
    joint.axis = json_vec3(jj.at("axis"));
    if (joint.axis.norm() < 1e-12) throw std::invalid_argument("zero joint axis");
    joint.axis.normalize();
    if (jj.contains("origin")) joint.origin = pose_from_json(jj.at("origin"));
    model.joints.push_back(joint);
  }
  for (const auto& jl : doc.at("links")) {
    LinkInertia link;
    link.mass = jl.at("mass").get<double>();
    link.com = json_vec3(jl.at("com"));
    const VectorXd in = json_vecx(jl.at("inertia"));
    if (in.size() != 6) throw std::invalid_argument("inertia needs [ixx, iyy, izz, ixy, ixz, iyz]");
    link.inertia << in[0], in[3], in[4],
                    in[3], in[1], in[5],
                    in[4], in[5], in[2];
    model.links.push_back(link);
  }
  if (doc.contains("capsules")) {
    for (const auto& jc : doc.at("capsules")) {
      LinkCapsule c;
      c.link = jc.at("link").get<std::size_t>();
      c.a = json_vec3(jc.at("a"));
      c.b = json_vec3(jc.at("b"));
      c.radius = jc.at("radius").get<double>();
      model.capsules.push_back(c);
    }
  }
  model.add_link_frames();
  if (doc.contains("frames")) {
    for (const auto& jf : doc.at("frames")) {
      Frame f{jf.at("name").get<std::string>(), jf.at("link").get<std::size_t>(), Pose::identity()};
      if (jf.contains("pose")) f.placement = pose_from_json(jf.at("pose"));
      model.frames.push_back(f);
    }
  }
  const auto& jl = doc.at("limits");
  auto& L = model.limits;
  L.q_min = json_vecx(jl.at("q_min"));
  L.q_max = json_vecx(jl.at("q_max"));
  L.qd_max = json_vecx(jl.at("qd_max"));
  L.qd_min = jl.contains("qd_min") ? json_vecx(jl.at("qd_min")) : VectorXd(-L.qd_max);
  L.tau_max = json_vecx(jl.at("tau_max"));
  L.tau_min = jl.contains("tau_min") ? json_vecx(jl.at("tau_min")) : VectorXd(-L.tau_max);
  model.validate();
  return model;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

inline RobotModel load_robot(const std::string& path) { return robot_from_json(read_json_file(path)); }

}  // namespace tompc
