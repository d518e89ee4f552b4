#pragma once
// Distance queries between robot link capsules and obstacle primitives,
// distance gradients, per-cycle linearization and the linearized
// avoidance rows  C q >= lb.
//
// Sphere, capsule and their pairings are closed form (closest points between
// segments). Anything involving a box minimizes the signed distance from a
// segment to the box, which is convex along the segment, by golden-section
// search; box-box pairs use separating axes when overlapping.

#include <array>
#include <atomic>
#include <limits>
#include <optional>
#include <utility>

#include "tompc/robot_model.hpp"

namespace tompc {

enum class ShapeKind { Sphere, Capsule, Box };

struct CollisionPrimitive {
  ShapeKind kind = ShapeKind::Sphere;
  double radius = 0.0;                                    // sphere, capsule
  Eigen::Vector3d a = Eigen::Vector3d::Zero();            // capsule segment, local frame
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();  // box
  Pose local_pose;

  static CollisionPrimitive sphere(double r, const Pose& local = Pose::identity()) {
    CollisionPrimitive p;
    p.kind = ShapeKind::Sphere;
    p.radius = r;
    p.local_pose = local;
    return p;
  }
  static CollisionPrimitive capsule(double r, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                    const Pose& local = Pose::identity()) {
    CollisionPrimitive p;
    p.kind = ShapeKind::Capsule;
    p.radius = r;
    p.a = a;
    p.b = b;
    p.local_pose = local;
    return p;
  }
  static CollisionPrimitive box(const Eigen::Vector3d& half, const Pose& local = Pose::identity()) {
    CollisionPrimitive p;
    p.kind = ShapeKind::Box;
    p.half_extents = half;
    p.local_pose = local;
    return p;
  }

  void validate() const {
    if (kind == ShapeKind::Box) {
      if (!(half_extents.minCoeff() > 0.0)) throw std::invalid_argument("box half-extents must be positive");
    } else if (!(radius > 0.0)) {
      throw std::invalid_argument("radius must be positive");
    }
  }
};

/// A primitive placed in the world: `pose` maps primitive-local to world.
struct PlacedShape {
  const CollisionPrimitive* shape = nullptr;
  Pose pose;

  Eigen::Vector3d seg_a() const {
    return shape->kind == ShapeKind::Capsule ? pose.act(shape->a) : pose.translation;
  }
  Eigen::Vector3d seg_b() const {
    return shape->kind == ShapeKind::Capsule ? pose.act(shape->b) : pose.translation;
  }
};

struct DistanceResult {
  double d = std::numeric_limits<double>::infinity();
  Eigen::Vector3d p_a = Eigen::Vector3d::Zero();  // witness on A (robot)
  Eigen::Vector3d p_b = Eigen::Vector3d::Zero();  // witness on B (obstacle)
  Eigen::Vector3d n_hat = Eigen::Vector3d::UnitZ();  // unit, from B toward A
  bool penetrating = false;
  bool approximate = false;  // normal is a fallback, not a separating direction
};

namespace detail {

/// Closest points between segments [p1, q1] and [p2, q2].
inline std::pair<double, double> closest_segment_params(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                                        const Eigen::Vector3d& p2, const Eigen::Vector3d& q2) {
  constexpr double eps = 1e-14;
  const Eigen::Vector3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return {0.0, 0.0};
  if (a <= eps) {
    return {0.0, std::clamp(f / e, 0.0, 1.0)};
  }
  const double c = d1.dot(r);
  if (e <= eps) {
    return {std::clamp(-c / a, 0.0, 1.0), 0.0};
  }
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;
  s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return {s, t};
}

/// Signed distance from a point to a box (negative inside), the closest
/// surface point and the outward normal there, all in the box frame.
inline double point_box(const Eigen::Vector3d& p, const Eigen::Vector3d& h, Eigen::Vector3d* surface,
                        Eigen::Vector3d* normal) {
  const Eigen::Vector3d clamped = p.cwiseMax(-h).cwiseMin(h);
  const Eigen::Vector3d diff = p - clamped;
  const double outside = diff.norm();
  if (outside > 0.0) {
    if (surface) *surface = clamped;
    if (normal) *normal = diff / outside;
    return outside;
  }
  // Inside: nearest face.
  int axis = 0;
  double depth = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double di = h[i] - std::abs(p[i]);
    if (di < depth) {
      depth = di;
      axis = i;
    }
  }
  const double s = p[axis] >= 0.0 ? 1.0 : -1.0;
  if (surface) {
    *surface = p;
    (*surface)[axis] = s * h[axis];
  }
  if (normal) {
    *normal = Eigen::Vector3d::Zero();
    (*normal)[axis] = s;
  }
  return -depth;
}

/// Minimizes the signed point-box distance along a segment (box frame).
inline double segment_box_param(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& h) {
  auto f = [&](double t) { return point_box(a + t * (b - a), h, nullptr, nullptr); };
  if ((b - a).squaredNorm() < 1e-28) return 0.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  double best = 0.5 * (lo + hi);
  double fbest = f(best);
  for (double t : {0.0, 1.0}) {
    const double ft = f(t);
    if (ft < fbest) {
      fbest = ft;
      best = t;
    }
  }
  return best;
}

inline DistanceResult core_core(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1, double ra,
                                const Eigen::Vector3d& b0, const Eigen::Vector3d& b1, double rb) {
  const auto [s, t] = closest_segment_params(a0, a1, b0, b1);
  const Eigen::Vector3d ca = a0 + s * (a1 - a0);
  const Eigen::Vector3d cb = b0 + t * (b1 - b0);
  const Eigen::Vector3d diff = ca - cb;
  const double dist = diff.norm();
  DistanceResult r;
  if (dist > 1e-12) {
    r.n_hat = diff / dist;
  } else {
    // Degenerate: pick any direction orthogonal to the segments if possible.
    Eigen::Vector3d axis = (a1 - a0).cross(b1 - b0);
    if (axis.norm() < 1e-12) {
      const Eigen::Vector3d dir = (a1 - a0).norm() > 1e-12 ? Eigen::Vector3d(a1 - a0) : Eigen::Vector3d(b1 - b0);
      axis = dir.norm() > 1e-12 ? dir.unitOrthogonal() : Eigen::Vector3d::UnitZ();
    }
    r.n_hat = axis.normalized();
    r.approximate = true;
  }
  r.d = dist - ra - rb;
  r.p_a = ca - ra * r.n_hat;
  r.p_b = cb + rb * r.n_hat;
  r.penetrating = r.d < 0.0;
  return r;
}

/// Segment (or point) with radius against a box.
inline DistanceResult core_box(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1, double ra, const Pose& box,
                               const Eigen::Vector3d& h) {
  const Pose inv = box.inverse();
  const Eigen::Vector3d la = inv.act(a0), lb = inv.act(a1);
  const double t = segment_box_param(la, lb, h);
  const Eigen::Vector3d p = la + t * (lb - la);
  Eigen::Vector3d surf, normal;
  const double sd = point_box(p, h, &surf, &normal);
  DistanceResult r;
  r.n_hat = box.rotation * normal;
  r.d = sd - ra;
  r.p_b = box.act(surf);
  r.p_a = box.act(p) - ra * r.n_hat;
  r.penetrating = r.d < 0.0;
  r.approximate = sd <= 0.0;
  return r;
}

inline std::array<Eigen::Vector3d, 8> box_corners(const Pose& box, const Eigen::Vector3d& h) {
  std::array<Eigen::Vector3d, 8> c;
  for (int i = 0; i < 8; ++i) {
    c[i] = box.act(Eigen::Vector3d((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z()));
  }
  return c;
}

inline DistanceResult box_box(const Pose& pa, const Eigen::Vector3d& ha, const Pose& pb, const Eigen::Vector3d& hb) {
  // Separating-axis test over the 15 candidate axes; smallest overlap gives
  // the penetration estimate.
  std::vector<Eigen::Vector3d> axes;
  for (int i = 0; i < 3; ++i) axes.push_back(pa.rotation.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(pb.rotation.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector3d c = pa.rotation.col(i).cross(pb.rotation.col(j));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  }
  const Eigen::Vector3d delta = pa.translation - pb.translation;
  bool separated = false;
  double min_overlap = std::numeric_limits<double>::infinity();
  Eigen::Vector3d min_axis = Eigen::Vector3d::UnitZ();
  for (const auto& ax : axes) {
    const double ra = (pa.rotation.transpose() * ax).cwiseAbs().dot(ha);
    const double rb = (pb.rotation.transpose() * ax).cwiseAbs().dot(hb);
    const double proj = ax.dot(delta);
    const double overlap = ra + rb - std::abs(proj);
    if (overlap < 0.0) {
      separated = true;
      break;
    }
    if (overlap < min_overlap) {
      min_overlap = overlap;
      min_axis = proj >= 0.0 ? ax : Eigen::Vector3d(-ax);
    }
  }
  if (!separated) {
    DistanceResult r;
    r.d = -min_overlap;
    r.n_hat = min_axis;
    r.penetrating = true;
    r.approximate = true;
    r.p_a = pa.translation - (pa.rotation.transpose() * min_axis).cwiseAbs().dot(ha) * min_axis;
    r.p_b = r.p_a + min_overlap * min_axis;
    return r;
  }
  // Separated: the closest pair lies on an edge of one of the boxes.
  DistanceResult best;
  const auto ca = box_corners(pa, ha), cb = box_corners(pb, hb);
  static constexpr std::array<std::array<int, 2>, 12> edges{{{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                                             {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};
  for (const auto& e : edges) {
    DistanceResult r = core_box(ca[e[0]], ca[e[1]], 0.0, pb, hb);
    if (r.d < best.d) best = r;
    DistanceResult s = core_box(cb[e[0]], cb[e[1]], 0.0, pa, ha);
    if (s.d < best.d) {
      best = s;
      std::swap(best.p_a, best.p_b);
      best.n_hat = -best.n_hat;
    }
  }
  return best;
}

}  // namespace detail

/// Signed distance between two placed primitives, normal from B toward A.
inline DistanceResult shape_distance(const PlacedShape& a, const PlacedShape& b) {
  const ShapeKind ka = a.shape->kind, kb = b.shape->kind;
  if (ka != ShapeKind::Box && kb != ShapeKind::Box) {
    return detail::core_core(a.seg_a(), a.seg_b(), a.shape->radius, b.seg_a(), b.seg_b(), b.shape->radius);
  }
  if (ka != ShapeKind::Box) {
    return detail::core_box(a.seg_a(), a.seg_b(), a.shape->radius, b.pose, b.shape->half_extents);
  }
  if (kb != ShapeKind::Box) {
    DistanceResult r = detail::core_box(b.seg_a(), b.seg_b(), b.shape->radius, a.pose, a.shape->half_extents);
    std::swap(r.p_a, r.p_b);
    r.n_hat = -r.n_hat;
    return r;
  }
  return detail::box_box(a.pose, a.shape->half_extents, b.pose, b.shape->half_extents);
}

// ---------------------------------------------------------------------------
// Obstacles, pairs, world

/// Piecewise-linear pose track: translation interpolated linearly, rotation by
/// slerp; held constant outside the waypoint span.
struct PoseTrack {
  std::vector<double> times;
  std::vector<Pose> poses;

  bool empty() const { return times.empty(); }

  Pose at(double t) const {
    if (times.empty()) throw std::logic_error("empty pose track");
    if (t <= times.front()) return poses.front();
    if (t >= times.back()) return poses.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
    Pose p;
    p.translation = (1.0 - s) * poses[i - 1].translation + s * poses[i].translation;
    const Eigen::Quaterniond q0(poses[i - 1].rotation), q1(poses[i].rotation);
    p.rotation = q0.slerp(s, q1).toRotationMatrix();
    return p;
  }
};

struct Obstacle {
  std::string name;
  CollisionPrimitive geom;
  Pose pose;  // world pose (used when the track is empty)
  PoseTrack track;

  Pose pose_at(double t) const { return track.empty() ? pose : track.at(t); }
};

struct CollisionPair {
  std::size_t id = 0;
  std::size_t link = 0;  // robot link carrying the primitive
  CollisionPrimitive robot_geom;
  std::size_t obstacle = 0;
};

struct DistanceLinearization {
  std::size_t pair = 0;
  double d0 = 0.0;
  VectorXd grad;  // dd/dq, 1 x n stored as a vector
  VectorXd q_bar;
  bool approximate = false;

  double predict(const VectorXd& q) const { return d0 + grad.dot(q - q_bar); }
};

struct AvoidanceRows {
  MatrixXd c;  // N_pairs x n
  VectorXd lb;  // C q >= lb
};

/// Counter that survives copies of its owner (copies start from the same value).
class QueryCounter {
 public:
  QueryCounter() = default;
  QueryCounter(const QueryCounter& o) : n_(o.n_.load()) {}
  QueryCounter& operator=(const QueryCounter& o) {
    n_ = o.n_.load();
    return *this;
  }
  void bump() { n_.fetch_add(1, std::memory_order_relaxed); }
  std::size_t value() const { return n_.load(); }
  void reset() { n_ = 0; }

 private:
  std::atomic<std::size_t> n_{0};
};

class CollisionWorld {
 public:
  std::vector<Obstacle> obstacles;
  std::vector<CollisionPair> pairs;
  mutable QueryCounter exact_queries;

  /// One pair per (robot capsule, obstacle).
  void build_pairs(const RobotModel& model) {
    pairs.clear();
    for (std::size_t o = 0; o < obstacles.size(); ++o) {
      for (const auto& c : model.capsules) {
        CollisionPair p;
        p.id = pairs.size();
        p.link = c.link;
        p.robot_geom = CollisionPrimitive::capsule(c.radius, c.a, c.b);
        p.obstacle = o;
        pairs.push_back(p);
      }
    }
    last_normal_.assign(pairs.size(), std::nullopt);
  }

  /// Freezes obstacle poses at simulation time t.
  void set_time(double t) {
    time_ = t;
    for (auto& o : obstacles) {
      if (!o.track.empty()) o.pose = o.track.at(t);
    }
  }
  double time() const { return time_; }

  DistanceResult query(const std::vector<Pose>& poses, std::size_t pair_id) const {
    exact_queries.bump();
    const CollisionPair& p = pairs.at(pair_id);
    const Obstacle& o = obstacles.at(p.obstacle);
    const PlacedShape a{&p.robot_geom, poses[p.link] * p.robot_geom.local_pose};
    const PlacedShape b{&o.geom, o.pose * o.geom.local_pose};
    return shape_distance(a, b);
  }

  DistanceResult query(const RobotModel& model, const VectorXd& q, std::size_t pair_id) const {
    return query(link_poses(model, q), pair_id);
  }

  /// n_hat^T J_A(p_A); J_B = 0 for static obstacles. For touching or
  /// penetrating pairs the normal from the last well-separated linearization
  /// is used when available.
  VectorXd gradient(const RobotModel& model, const std::vector<Pose>& poses, std::size_t pair_id,
                    const DistanceResult& r, bool* approximate = nullptr) const {
    const CollisionPair& p = pairs.at(pair_id);
    Eigen::Vector3d n = r.n_hat;
    bool approx = r.approximate;
    if (r.d <= 1e-6) {
      approx = true;
      if (pair_id < last_normal_.size() && last_normal_[pair_id]) n = *last_normal_[pair_id];
    }
    if (approximate) *approximate = approx;
    return (n.transpose() * point_jacobian(model, poses, p.link, r.p_a)).transpose();
  }

  VectorXd gradient(const RobotModel& model, const VectorXd& q, std::size_t pair_id) const {
    const auto poses = link_poses(model, q);
    return gradient(model, poses, pair_id, query(poses, pair_id));
  }

  DistanceLinearization linearize(const RobotModel& model, const std::vector<Pose>& poses, const VectorXd& q_bar,
                                  std::size_t pair_id, DistanceResult* out = nullptr) {
    const DistanceResult r = query(poses, pair_id);
    DistanceLinearization lin;
    lin.pair = pair_id;
    lin.d0 = r.d;
    lin.q_bar = q_bar;
    lin.grad = gradient(model, poses, pair_id, r, &lin.approximate);
    if (r.d > 1e-6 && !r.approximate) last_normal_[pair_id] = r.n_hat;
    if (out) *out = r;
    return lin;
  }

  /// Linearizes every pair at q_bar (the only exact queries of a cycle).
  std::vector<DistanceLinearization> linearize_all(const RobotModel& model, const VectorXd& q_bar,
                                                   std::vector<DistanceResult>* results = nullptr) {
    const auto poses = link_poses(model, q_bar);
    std::vector<DistanceLinearization> out;
    out.reserve(pairs.size());
    if (results) results->resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.push_back(linearize(model, poses, q_bar, i, results ? &(*results)[i] : nullptr));
    }
    return out;
  }

  double min_distance(const RobotModel& model, const VectorXd& q) const {
    const auto poses = link_poses(model, q);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs.size(); ++i) m = std::min(m, query(poses, i).d);
    return m;
  }

 private:
  std::vector<std::optional<Eigen::Vector3d>> last_normal_;
  double time_ = 0.0;
};

/// Rows grad_i q >= d_th1 - d0_i + grad_i q_bar, the linearized d_i(q) >= d_th1.
inline AvoidanceRows assemble_constraints(const std::vector<DistanceLinearization>& lins, double d_th1) {
  AvoidanceRows rows;
  if (lins.empty()) return rows;
  const auto n = lins.front().grad.size();
  rows.c.resize(static_cast<Eigen::Index>(lins.size()), n);
  rows.lb.resize(static_cast<Eigen::Index>(lins.size()));
  for (std::size_t i = 0; i < lins.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    rows.c.row(r) = lins[i].grad.transpose();
    rows.lb[r] = d_th1 - lins[i].d0 + lins[i].grad.dot(lins[i].q_bar);
  }
  return rows;
}

}  // namespace tompc
