#include "tetrt/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tetrt {

namespace {

// Outward-facing vertex triples of a positively oriented tet; face i omits vertex i.
constexpr int kOutwardFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

// Containment slack for ray origins, relative to the tet volume.
constexpr double kStartTolerance = 1e-5;

// Below this relative exit-face margin the ray is taken to graze the start tet.
constexpr double kTouchMargin = 1e-6;
// Restart distance along a grazing ray, relative to the start tet's longest edge.
constexpr double kRestartStep = 1e-3;

void check_ray(const Ray& ray) {
  if (!is_finite(ray.origin) || !is_finite(ray.direction)) {
    throw InvalidArgument("ray has non-finite components");
  }
  if (ray.direction.x == 0 && ray.direction.y == 0 && ray.direction.z == 0) {
    throw InvalidArgument("ray direction is zero");
  }
}

double plane_t(const Rayd& ray, const std::array<Vec3d, 3>& tri) {
  const Vec3d n = cross(tri[1] - tri[0], tri[2] - tri[0]);
  const double denom = dot(n, ray.direction);
  if (denom == 0.0) return 0.0;
  const double t = dot(n, tri[0] - ray.origin) / denom;
  return std::isfinite(t) ? std::max(0.0, t) : 0.0;
}

// Moves the projected origin half an ulp off the grid of `real`.
void nudge_origin(ScaledBasis& b) {
  using O = OriginT<real>;
  constexpr real inf = std::numeric_limits<real>::infinity();
  for (O* c : {&b.projected_origin.x, &b.projected_origin.y}) {
    const real f = real(*c);
    *c = (O(f) + O(std::nextafter(f, inf))) / 2;
  }
}

HitRecord make_hit(const TraversalState& s, const Ray& ray, const CompactMesh& mesh,
                   const SceneTriangleSoup& scene, std::uint32_t visited) {
  const std::uint32_t c = s.tet.payload();
  const ConstrainedFace& face = mesh.constrained_faces[c];
  const Rayd r{ray.origin.as<double>(), ray.direction.as<double>()};
  HitRecord hit;
  hit.constrained_face = c;
  hit.triangle_id = face.triangle_id;
  hit.t = plane_t(r, scene.corners(face.triangle_id));
  hit.hit_point = r.origin + r.direction * hit.t;
  hit.tet_front = s.current;
  hit.tet_back = face.other(s.current);
  hit.visited_tets = visited;
  return hit;
}

struct Recording : walk::StopAtSurface {
  std::vector<std::uint32_t>* trace = nullptr;
  bool enter(std::uint32_t tet) {
    if (trace) trace->push_back(tet);
    return true;
  }
};

}  // namespace

bool tet_contains(const CompactMesh& mesh, std::uint32_t tet, const Vec3d& q, double eps) {
  const Vec3d a = mesh.vertex(tet, 0);
  const Vec3d b = mesh.vertex(tet, 1);
  const Vec3d c = mesh.vertex(tet, 2);
  const Vec3d d = mesh.vertex(tet, 3);
  const double vol = orient3d(a, b, c, d);
  if (vol == 0.0) return false;
  const double slack = -eps * std::abs(vol);
  const double s = vol > 0 ? 1.0 : -1.0;
  return s * orient3d(q, b, c, d) >= slack && s * orient3d(a, q, c, d) >= slack &&
         s * orient3d(a, b, q, d) >= slack && s * orient3d(a, b, c, q) >= slack;
}

namespace {

// Exit face of `start_tet` for a ray through it. `margin` receives the worst
// edge determinant of that face relative to the projected tet size; it is near
// zero or negative when the ray only touches the tet.
TraversalState init_in_tet(const Ray& ray, std::uint32_t start_tet, const CompactMesh& mesh,
                           double& margin) {
  TraversalState s;
  s.basis = build_scaled_basis(ray);
  nudge_origin(s.basis);

  const TetVertices& sorted = mesh.cold_vertices[start_tet];
  std::array<int, 4> local{0, 1, 2, 3};
  if (orient3d(mesh.vertex(start_tet, 0), mesh.vertex(start_tet, 1), mesh.vertex(start_tet, 2),
               mesh.vertex(start_tet, 3)) < 0) {
    std::swap(local[0], local[1]);
  }
  std::array<Vec2, 4> q;
  for (int i = 0; i < 4; ++i) q[i] = project_point(s.basis, mesh.points[sorted[local[i]]]);

  // The exit face projects counter-clockwise (right-handed frame) and contains
  // the origin; take the face whose worst edge test is best.
  int best = 0;
  real best_score = -std::numeric_limits<real>::infinity();
  for (int i = 0; i < 4; ++i) {
    const auto& f = kOutwardFace[i];
    const real score = std::min({det2(q[f[0]], q[f[1]]), det2(q[f[1]], q[f[2]]),
                                 det2(q[f[2]], q[f[0]])});
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  const auto& f = kOutwardFace[best];
  for (int k = 0; k < 3; ++k) {
    s.idx[k] = sorted[local[f[k]]];
    s.p[k] = q[f[k]];
  }
  s.idx[3] = sorted[local[best]];
  s.p[3] = q[best];
  s.current = start_tet;
  s.tet = mesh.cold_neighbors[start_tet][local[best]];
  s.prev_tet = NeighborRef::tet(start_tet);

  double extent = 0.0;
  for (const Vec2& p : q) extent = std::max({extent, std::abs(double(p.x)), std::abs(double(p.y))});
  margin = extent > 0.0 ? double(best_score) / (extent * extent) : 0.0;
  return s;
}

}  // namespace

TraversalState init_traversal(const Ray& ray, std::uint32_t start_tet, const CompactMesh& mesh) {
  check_ray(ray);
  if (start_tet >= mesh.tet_count()) {
    throw InvalidStartError("start tet " + std::to_string(start_tet) + " out of range");
  }
  if (!tet_contains(mesh, start_tet, ray.origin.as<double>(), kStartTolerance)) {
    throw InvalidStartError("ray origin is not inside tet " + std::to_string(start_tet));
  }
  double margin = 0.0;
  TraversalState s = init_in_tet(ray, start_tet, mesh, margin);
  if (margin > kTouchMargin) return s;

  // The origin sits on a vertex or edge of start_tet and the ray does not pass
  // through it: restart in the tet holding a point a short way along the ray.
  double edge = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      edge = std::max(edge, length(mesh.vertex(start_tet, a) - mesh.vertex(start_tet, b)));
    }
  }
  const Vec3d d = ray.direction.as<double>();
  const Vec3d ahead = ray.origin.as<double>() + d * (kRestartStep * edge / length(d));
  const auto next = locate_point(ahead.as<real>(), mesh, start_tet);
  if (!next) {
    s.tet = NeighborRef::boundary();
    return s;
  }
  if (*next == start_tet) return s;
  double next_margin = 0.0;
  TraversalState r = init_in_tet(ray, *next, mesh, next_margin);
  return next_margin > margin ? r : s;
}

TraversalState enter_through_face(const Ray& ray, std::uint32_t tet,
                                  const std::array<std::uint32_t, 3>& face,
                                  NeighborRef entry_link, const CompactMesh& mesh) {
  check_ray(ray);
  if (tet >= mesh.tet_count()) {
    throw InvalidStartError("entry tet " + std::to_string(tet) + " out of range");
  }
  TraversalState s;
  s.basis = build_scaled_basis(ray);
  nudge_origin(s.basis);
  for (int k = 0; k < 3; ++k) {
    s.idx[k] = face[k];
    s.p[k] = project_point(s.basis, mesh.points[face[k]]);
  }
  if (det2(s.p[1] - s.p[0], s.p[2] - s.p[0]) < 0) {
    std::swap(s.idx[1], s.idx[2]);
    std::swap(s.p[1], s.p[2]);
  }
  s.idx[3] = s.idx[0];
  s.p[3] = s.p[0];
  s.current = kNoTet;
  s.tet = NeighborRef::tet(tet);
  s.prev_tet = entry_link;
  return s;
}

CastResult cast_from_state(const Ray& ray, TraversalState state, std::uint32_t visited_so_far,
                           const CompactMesh& mesh, const SceneTriangleSoup& scene,
                           std::vector<std::uint32_t>* trace) {
  Recording hooks;
  hooks.trace = trace;
  std::uint32_t visited = visited_so_far;
  const walk::End end = walk::dispatch(mesh, state, visited, hooks);
  CastResult result;
  result.visited_tets = visited;
  if (end == walk::End::constrained) result.hit = make_hit(state, ray, mesh, scene, visited);
  return result;
}

CastResult cast_ray(const Ray& ray, std::uint32_t start_tet, const CompactMesh& mesh,
                    const SceneTriangleSoup& scene, std::vector<std::uint32_t>* trace) {
  TraversalState s = init_traversal(ray, start_tet, mesh);
  if (trace) trace->push_back(start_tet);
  return cast_from_state(ray, s, 1, mesh, scene, trace);
}

CastResult cast_secondary(const SecondaryRay& secondary, const CompactMesh& mesh,
                          const SceneTriangleSoup& scene, std::vector<std::uint32_t>* trace) {
  const ConstrainedFace& face = mesh.constrained_faces.at(secondary.entry_face);
  TraversalState s = enter_through_face(secondary.ray, secondary.start_tet, face.vertex_ids,
                                        NeighborRef::face(secondary.entry_face), mesh);
  return cast_from_state(secondary.ray, s, 0, mesh, scene, trace);
}

namespace {

struct HullEntry {
  std::uint32_t tet = kNoTet;
  int slot = -1;
  double t = std::numeric_limits<double>::infinity();
};

// Nearest hull face hit by the ray (brute force over boundary slots).
HullEntry clip_to_hull(const Rayd& ray, const CompactMesh& mesh) {
  HullEntry best;
  for (std::uint32_t t = 0; t < mesh.tet_count(); ++t) {
    for (int j = 0; j < 4; ++j) {
      const NeighborRef r = mesh.cold_neighbors[t][j];
      const bool hull = r.is_boundary() ||
                        (r.is_constrained() && mesh.constrained_faces[r.payload()].tet_back == kNoTet);
      if (!hull) continue;
      std::array<Vec3d, 3> tri;
      int k = 0;
      for (int i = 0; i < 4; ++i) {
        if (i != j) tri[k++] = mesh.vertex(t, i);
      }
      // Moller-Trumbore, inclusive edges.
      const Vec3d e1 = tri[1] - tri[0];
      const Vec3d e2 = tri[2] - tri[0];
      const Vec3d pv = cross(ray.direction, e2);
      const double det = dot(e1, pv);
      if (det == 0.0) continue;
      const double inv = 1.0 / det;
      const Vec3d tv = ray.origin - tri[0];
      const double u = dot(tv, pv) * inv;
      if (u < 0.0 || u > 1.0) continue;
      const Vec3d qv = cross(tv, e1);
      const double v = dot(ray.direction, qv) * inv;
      if (v < 0.0 || u + v > 1.0) continue;
      const double th = dot(e2, qv) * inv;
      if (th > 0.0 && th < best.t) best = {t, j, th};
    }
  }
  return best;
}

}  // namespace

CastResult trace_ray(const Ray& ray, const CompactMesh& mesh, const SceneTriangleSoup& scene,
                     std::uint32_t hint_tet) {
  check_ray(ray);
  if (const auto start = locate_point(ray.origin, mesh, hint_tet)) {
    return cast_ray(ray, *start, mesh, scene);
  }
  const Rayd r{ray.origin.as<double>(), ray.direction.as<double>()};
  const HullEntry entry = clip_to_hull(r, mesh);
  CastResult result;
  if (entry.tet == kNoTet) return result;
  const NeighborRef link = mesh.cold_neighbors[entry.tet][entry.slot];
  if (link.is_constrained()) {
    const ConstrainedFace& face = mesh.constrained_faces[link.payload()];
    HitRecord hit;
    hit.constrained_face = link.payload();
    hit.triangle_id = face.triangle_id;
    hit.t = plane_t(r, scene.corners(face.triangle_id));
    hit.hit_point = r.origin + r.direction * hit.t;
    hit.tet_front = kNoTet;
    hit.tet_back = entry.tet;
    result.hit = hit;
    return result;
  }
  const std::array<std::uint32_t, 3> face = face_key(mesh.cold_vertices[entry.tet], entry.slot);
  return cast_from_state(ray, enter_through_face(ray, entry.tet, face, link, mesh), 0, mesh,
                         scene);
}

std::uint32_t next_tet_16(std::uint32_t tet, std::uint32_t prev_tet_raw, int order_a, int order_b,
                          const CompactMesh& mesh) {
  return next_tet_16(mesh.get<Tet16Record>()[tet], prev_tet_raw, order_a, order_b);
}

namespace {

struct LocateHooks {
  const CompactMesh* mesh;
  Vec3d target;
  std::uint32_t found = kNoTet;

  bool enter(std::uint32_t) { return true; }
  bool pass_constrained(std::uint32_t, const TraversalState&) { return true; }
  bool after_step(const TraversalState& s, int) {
    if (tet_contains(*mesh, s.current, target)) {
      found = s.current;
      return true;
    }
    return false;
  }
};

}  // namespace

std::optional<std::uint32_t> locate_point(const Vec3& q, const CompactMesh& mesh,
                                          std::uint32_t hint_tet) {
  if (!is_finite(q)) throw InvalidArgument("locate_point: non-finite query point");
  if (mesh.tet_count() == 0) return std::nullopt;
  if (hint_tet >= mesh.tet_count()) hint_tet = mesh.source_tet;
  const Vec3d target = q.as<double>();
  if (tet_contains(mesh, hint_tet, target)) return hint_tet;

  const Vec3 origin = mesh.centroid(hint_tet).as<real>();
  const Vec3 direction = q - origin;
  if (direction.x == 0 && direction.y == 0 && direction.z == 0) return hint_tet;

  TraversalState s = init_traversal(Ray{origin, direction}, hint_tet, mesh);
  LocateHooks hooks{&mesh, target};
  std::uint32_t visited = 1;
  walk::dispatch(mesh, s, visited, hooks);
  if (hooks.found != kNoTet) return hooks.found;
  return std::nullopt;
}

namespace {

struct ShadowHooks {
  const CompactMesh* mesh;
  const SceneTriangleSoup* scene;
  Rayd segment;
  std::uint32_t light_tet;
  double hit_t = -1.0;

  bool enter(std::uint32_t tet) { return tet != light_tet; }
  bool pass_constrained(std::uint32_t face, const TraversalState&) {
    const double t = plane_t(segment, scene->corners(mesh->constrained_faces[face].triangle_id));
    if (t <= kShadowEpsilon) return true;
    hit_t = t;
    return false;
  }
  bool after_step(const TraversalState&, int) { return false; }
};

}  // namespace

bool cast_shadow_ray(const Vec3& from, std::uint32_t from_tet, const Vec3& light,
                     std::uint32_t light_tet, const CompactMesh& mesh,
                     const SceneTriangleSoup& scene, std::uint32_t* visited_out) {
  if (from_tet == light_tet) {
    if (visited_out) *visited_out = 1;
    return false;
  }
  const Ray ray{from, light - from};
  TraversalState s = init_traversal(ray, from_tet, mesh);
  ShadowHooks hooks{&mesh, &scene, Rayd{from.as<double>(), (light - from).as<double>()}, light_tet};
  std::uint32_t visited = 1;
  const walk::End end = walk::dispatch(mesh, s, visited, hooks);
  if (visited_out) *visited_out = visited;
  if (end != walk::End::constrained) return false;
  return hooks.hit_t < 1.0 - kShadowEpsilon;
}

std::optional<SecondaryRay> spawn_secondary(const HitRecord& hit, const Ray& incident,
                                            SecondaryKind kind, const CompactMesh& mesh,
                                            const SceneTriangleSoup& scene, double ior) {
  const Vec3d d = normalize(incident.direction.as<double>());
  const Vec3d geometric = normalize(scene.normal(hit.triangle_id));
  const bool front_facing = dot(geometric, d) < 0.0;
  const Vec3d n = front_facing ? geometric : -geometric;

  auto reflected = [&]() -> SecondaryRay {
    return {Ray{hit.hit_point.as<real>(), reflect(d, n).as<real>()}, hit.tet_front,
            hit.constrained_face};
  };

  if (kind == SecondaryKind::reflection) {
    if (hit.tet_front == kNoTet) return std::nullopt;
    return reflected();
  }

  Vec3d r;
  if (!refract(d, n, front_facing ? 1.0 / ior : ior, r)) {
    if (hit.tet_front == kNoTet) return std::nullopt;
    return reflected();
  }
  if (hit.tet_back == kNoTet || hit.tet_back >= mesh.tet_count()) return std::nullopt;
  return SecondaryRay{Ray{hit.hit_point.as<real>(), r.as<real>()}, hit.tet_back,
                      hit.constrained_face};
}

int sctp_exit_face(const Rayd& ray, const std::array<Vec3d, 4>& tet, int entry_face) {
  std::array<int, 4> local{0, 1, 2, 3};
  if (orient3d(tet[0], tet[1], tet[2], tet[3]) < 0) std::swap(local[0], local[1]);
  std::array<Vec3d, 4> rel;
  for (int i = 0; i < 4; ++i) rel[i] = tet[local[i]] - ray.origin;
  // Side of edge (a, b) relative to the ray line.
  auto sctp = [&](int a, int b) { return dot(ray.direction, cross(rel[a], rel[b])); };

  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    if (local[i] == entry_face) continue;
    const auto& f = kOutwardFace[i];
    const double score = std::min({sctp(f[0], f[1]), sctp(f[1], f[2]), sctp(f[2], f[0])});
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return local[best];
}

}  // namespace tetrt
