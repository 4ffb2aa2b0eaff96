#include "tetrt/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tetrt/errors.hpp"

namespace tetrt::reference {

namespace {

Vec3d sub(const Vec3d& a, const Vec3d& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double dot3(const Vec3d& a, const Vec3d& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3d cross3(const Vec3d& a, const Vec3d& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double volume(const Vec3d& a, const Vec3d& b, const Vec3d& c, const Vec3d& d) {
  return dot3(cross3(sub(b, a), sub(c, a)), sub(d, a));
}

// Distance from p to segment ab.
double segment_distance(const Vec3d& p, const Vec3d& a, const Vec3d& b) {
  const Vec3d ab = sub(b, a);
  const double len2 = dot3(ab, ab);
  double s = len2 > 0 ? dot3(sub(p, a), ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const Vec3d q{a.x + ab.x * s, a.y + ab.y * s, a.z + ab.z * s};
  const Vec3d d = sub(p, q);
  return std::sqrt(dot3(d, d));
}

bool slab(const Rayd& ray, const Vec3d& lo, const Vec3d& hi, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    const double inv = 1.0 / ray.direction[k];
    double a = (lo[k] - ray.origin[k]) * inv;
    double b = (hi[k] - ray.origin[k]) * inv;
    if (std::isnan(a) || std::isnan(b)) {
      if (ray.origin[k] < lo[k] || ray.origin[k] > hi[k]) return false;
      continue;
    }
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<double> moller_trumbore(const Rayd& ray, const std::array<Vec3d, 3>& tri) {
  const Vec3d e1 = sub(tri[1], tri[0]);
  const Vec3d e2 = sub(tri[2], tri[0]);
  const Vec3d p = cross3(ray.direction, e2);
  const double det = dot3(e1, p);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3d s = sub(ray.origin, tri[0]);
  const double u = dot3(s, p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3d q = cross3(s, e1);
  const double v = dot3(ray.direction, q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot3(e2, q) * inv;
  if (!(t >= 0.0)) return std::nullopt;
  return t;
}

std::optional<Hit> brute_force_cast(const Rayd& ray, const SceneTriangleSoup& scene,
                                    double t_min, std::uint32_t skip) {
  std::optional<Hit> best;
  for (std::uint32_t i = 0; i < scene.size(); ++i) {
    if (i == skip) continue;
    const auto t = moller_trumbore(ray, scene.corners(i));
    if (t && *t >= t_min && (!best || *t < best->t)) best = Hit{i, *t};
  }
  return best;
}

bool brute_force_occluded(const Rayd& ray, const SceneTriangleSoup& scene, double t_min,
                          double t_max) {
  for (std::uint32_t i = 0; i < scene.size(); ++i) {
    const auto t = moller_trumbore(ray, scene.corners(i));
    if (t && *t > t_min && *t < t_max) return true;
  }
  return false;
}

double edge_clearance(const Rayd& ray, const SceneTriangleSoup& scene) {
  const double scale = std::sqrt(dot3(ray.direction, ray.direction));
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < scene.size(); ++i) {
    const auto c = scene.corners(i);
    const Vec3d n = cross3(sub(c[1], c[0]), sub(c[2], c[0]));
    const double denom = dot3(n, ray.direction);
    if (denom == 0.0) continue;
    const double t = dot3(n, sub(c[0], ray.origin)) / denom;
    if (!(t > 0.0)) continue;
    const Vec3d p{ray.origin.x + ray.direction.x * t, ray.origin.y + ray.direction.y * t,
                  ray.origin.z + ray.direction.z * t};
    for (int k = 0; k < 3; ++k) {
      best = std::min(best, segment_distance(p, c[k], c[(k + 1) % 3]) / scale);
    }
  }
  return best;
}

bool point_in_triangle_2d(const Vec2d& q, const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  auto edge = [&](const Vec2d& p0, const Vec2d& p1) {
    return (p1.x - p0.x) * (q.y - p0.y) - (p1.y - p0.y) * (q.x - p0.x);
  };
  const double e0 = edge(a, b);
  const double e1 = edge(b, c);
  const double e2 = edge(c, a);
  return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
}

bool barycentric_contains(const Vec3d& q, const std::array<Vec3d, 4>& tet, double eps) {
  const double vol = volume(tet[0], tet[1], tet[2], tet[3]);
  if (vol == 0.0 || !std::isfinite(vol)) {
    throw InvalidArgument("barycentric_contains: degenerate tetrahedron");
  }
  const double sign = vol > 0 ? 1.0 : -1.0;
  const double slack = -eps * std::abs(vol);
  return sign * volume(q, tet[1], tet[2], tet[3]) >= slack &&
         sign * volume(tet[0], q, tet[2], tet[3]) >= slack &&
         sign * volume(tet[0], tet[1], q, tet[3]) >= slack &&
         sign * volume(tet[0], tet[1], tet[2], q) >= slack;
}

Bvh::Bvh(const SceneTriangleSoup& scene, std::size_t leaf_size) {
  tris_.reserve(scene.size());
  for (std::uint32_t i = 0; i < scene.size(); ++i) tris_.push_back(scene.corners(i));
  ids_.resize(scene.size());
  std::iota(ids_.begin(), ids_.end(), 0u);
  if (!ids_.empty()) build(0, static_cast<std::uint32_t>(ids_.size()), std::max<std::size_t>(1, leaf_size));
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3d lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3d hi = {-lo.x, -lo.y, -lo.z};
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const Vec3d& v : tris_[ids_[i]]) {
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], v[k]);
        hi[k] = std::max(hi[k], v[k]);
      }
    }
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;
  if (end - begin <= leaf_size) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  const Vec3d extent = sub(hi, lo);
  const int axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : (extent.y >= extent.z ? 1 : 2);
  auto centroid = [&](std::uint32_t id) {
    const auto& t = tris_[id];
    return t[0][axis] + t[1][axis] + t[2][axis];
  };
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroid(a);
                     const double cb = centroid(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  build(begin, mid, leaf_size);
  const std::uint32_t right = build(mid, end, leaf_size);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

std::optional<Hit> Bvh::cast(const Rayd& ray, double t_min, std::uint32_t skip) const {
  std::optional<Hit> best;
  if (nodes_.empty()) return best;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t self = stack.back();
    const Node& node = nodes_[self];
    stack.pop_back();
    const double limit = best ? best->t : std::numeric_limits<double>::infinity();
    if (!slab(ray, node.lo, node.hi, limit)) continue;
    if (node.count == 0) {
      stack.push_back(node.first);
      stack.push_back(self + 1);
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const std::uint32_t id = ids_[i];
      if (id == skip) continue;
      const auto t = moller_trumbore(ray, tris_[id]);
      if (t && *t >= t_min && (!best || *t < best->t || (*t == best->t && id < best->triangle_id))) {
        best = Hit{id, *t};
      }
    }
  }
  return best;
}

bool Bvh::occluded(const Rayd& ray, double t_min, double t_max) const {
  if (nodes_.empty()) return false;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t self = stack.back();
    const Node& node = nodes_[self];
    stack.pop_back();
    if (!slab(ray, node.lo, node.hi, t_max)) continue;
    if (node.count == 0) {
      stack.push_back(node.first);
      stack.push_back(self + 1);
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const auto t = moller_trumbore(ray, tris_[ids_[i]]);
      if (t && *t > t_min && *t < t_max) return true;
    }
  }
  return false;
}

std::size_t Bvh::bytes() const noexcept {
  return nodes_.size() * sizeof(Node) + ids_.size() * sizeof(std::uint32_t) +
         tris_.size() * sizeof(std::array<Vec3d, 3>);
}

}  // namespace tetrt::reference
