#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tetrt/geometry.hpp"
#include "tetrt/scene.hpp"
#include "tetrt/tetmesh.hpp"

namespace tetrt {

// Rolling window of the walk. idx[0..2]/p[0..2] hold the face the ray leaves
// `current` through (counter-clockwise around the projected origin); idx[3]/p[3]
// the vertex most recently left behind.
template <class T>
struct TraversalStateT {
  std::array<std::uint32_t, 4> idx{};
  std::array<Vec2T<T>, 4> p{};
  std::uint32_t current = kNoTet;
  NeighborRef tet;       // link to follow next
  NeighborRef prev_tet;  // what `tet` stores for the shared face
  ScaledBasisT<T> basis;
};

using TraversalState = TraversalStateT<real>;

struct HitRecord {
  std::uint32_t constrained_face = 0;
  std::uint32_t triangle_id = 0;
  double t = 0.0;
  Vec3d hit_point;
  std::uint32_t tet_front = kNoTet;  // incident side
  std::uint32_t tet_back = kNoTet;   // across the face; kNoTet on the hull
  std::uint32_t visited_tets = 0;
};

struct CastResult {
  std::optional<HitRecord> hit;
  std::uint32_t visited_tets = 0;
};

// det(a, b) < 0 written as a product comparison: two multiplications, one compare.
template <class T>
constexpr bool det_negative(const Vec2T<T>& a, const Vec2T<T>& b) {
  return a.x * b.y < a.y * b.x;
}

// Which of p0..p2 the ray's exit face lies across, once p3 is known. (p0, p1, p2)
// must be counter-clockwise around the origin. At most four multiplications and
// two comparisons; ties resolve through the strict/non-strict comparisons below.
template <class T>
constexpr int get_exit_face(const Vec2T<T>& p0, const Vec2T<T>& p1, const Vec2T<T>& p2,
                            const Vec2T<T>& p3) {
  int exit_face = 0;
  if (det_negative(p3, p0)) {
    if (!det_negative(p3, p2)) exit_face = 1;
  } else if (det_negative(p3, p1)) {
    exit_face = 2;
  }
  return exit_face;
}

namespace walk {

enum class End { constrained, boundary, stopped };

struct MeshPoints {
  std::span<const Vec3> points;
  const Vec3& operator[](std::uint32_t i) const { return points[i]; }
};

// Default hooks: stop at the first constrained face, observe nothing.
struct StopAtSurface {
  bool enter(std::uint32_t /*tet*/) { return true; }
  template <class State>
  bool pass_constrained(std::uint32_t /*face*/, const State& /*s*/) {
    return false;
  }
  template <class State>
  bool after_step(const State& /*s*/, int /*exit_face*/) {
    return false;
  }
};

inline NeighborRef next_tet(const Tet32Record& rec, const std::array<std::uint32_t, 4>& idx,
                            std::uint32_t exit_vertex, std::uint32_t /*idx3*/,
                            NeighborRef /*prev*/) {
  NeighborRef next = rec.n[3];
  for (int i = 0; i < 3; ++i) {
    if (exit_vertex == rec.v[i]) next = rec.n[i];
  }
  (void)idx;
  return next;
}

inline NeighborRef next_tet(const Tet20Record& rec, const std::array<std::uint32_t, 4>& idx,
                            std::uint32_t exit_vertex, std::uint32_t idx3, NeighborRef /*prev*/) {
  const int order = sorted_order(exit_vertex, idx[0], idx[1], idx[2], idx3);
  return rec.n[order];
}

inline NeighborRef next_tet(const Tet16Record& rec, const std::array<std::uint32_t, 4>& idx,
                            std::uint32_t exit_vertex, std::uint32_t idx3, NeighborRef prev) {
  const int order_a = sorted_order(idx3, idx[0], idx[1], idx[2], idx3);
  const int order_b = sorted_order(exit_vertex, idx[0], idx[1], idx[2], idx3);
  return NeighborRef{next_tet_16(rec, prev.raw, order_a, order_b)};
}

// Walks from s.tet until a constrained face, the boundary, or a hook stops it.
// Reads exactly one point per entered tet.
template <class Record, class T, class Proj, class Points, class Hooks>
End run(const CompactMesh& mesh, std::span<const Record> records, Proj proj, const Points& points,
        TraversalStateT<T>& s, std::uint32_t& visited, Hooks& hooks) {
  const std::size_t limit = mesh.tet_count();
  for (;;) {
    if (s.tet.is_constrained()) {
      const std::uint32_t face = s.tet.payload();
      if (!hooks.pass_constrained(face, s)) return End::constrained;
      const std::uint32_t other = mesh.constrained_faces[face].other(s.current);
      if (other == kNoTet) return End::boundary;
      s.prev_tet = s.tet;
      s.tet = NeighborRef::tet(other);
    }
    if (!s.tet.is_tet()) return End::boundary;

    const std::uint32_t tet = s.tet.payload();
    if (!hooks.enter(tet)) return End::stopped;
    if (++visited > limit) {
      throw CorruptMeshError("traversal visited more tets than the mesh holds");
    }

    const Record& rec = records[tet];
    const std::uint32_t idx3 = s.idx[0] ^ s.idx[1] ^ s.idx[2] ^ rec.vx;
    const Vec2T<T> p3 = proj(s.basis, points[idx3]);
    const int f = get_exit_face(s.p[0], s.p[1], s.p[2], p3);
    const std::uint32_t exit_vertex = s.idx[f];
    const NeighborRef next = next_tet(rec, s.idx, exit_vertex, idx3, s.prev_tet);

    s.idx[3] = exit_vertex;
    s.p[3] = s.p[f];
    s.idx[f] = idx3;
    s.p[f] = p3;
    s.current = tet;
    s.prev_tet = NeighborRef::tet(tet);
    s.tet = next;
    if (hooks.after_step(s, f)) return End::stopped;
  }
}

// Dispatches on the mesh layout and the basis specialization.
template <class Hooks>
End dispatch(const CompactMesh& mesh, TraversalState& s, std::uint32_t& visited, Hooks& hooks) {
  const MeshPoints points{mesh.points};
  return visit_projector(s.basis, [&](auto proj) {
    switch (mesh.layout()) {
      case Layout::tet32:
        return run(mesh, mesh.get<Tet32Record>(), proj, points, s, visited, hooks);
      case Layout::tet20:
        return run(mesh, mesh.get<Tet20Record>(), proj, points, s, visited, hooks);
      case Layout::tet16:
        break;
    }
    return run(mesh, mesh.get<Tet16Record>(), proj, points, s, visited, hooks);
  });
}

}  // namespace walk

// Projects the four vertices of `start_tet` (from the side table) and picks the
// face the ray leaves through. Throws InvalidStartError unless the origin lies
// in the tet (within a small relative tolerance).
TraversalState init_traversal(const Ray& ray, std::uint32_t start_tet, const CompactMesh& mesh);

// State for a ray that enters `tet` through the face with vertices `face`
// (e.g. a surface hit, or a hull face); `entry_link` is what `tet` stores for it.
TraversalState enter_through_face(const Ray& ray, std::uint32_t tet,
                                  const std::array<std::uint32_t, 3>& face,
                                  NeighborRef entry_link, const CompactMesh& mesh);

// Walks from a prepared state to the first constrained face. `trace`, when
// given, receives every visited tet in order.
CastResult cast_from_state(const Ray& ray, TraversalState state, std::uint32_t visited_so_far,
                           const CompactMesh& mesh, const SceneTriangleSoup& scene,
                           std::vector<std::uint32_t>* trace = nullptr);

// First surface hit for a ray whose origin lies in `start_tet`.
CastResult cast_ray(const Ray& ray, std::uint32_t start_tet, const CompactMesh& mesh,
                    const SceneTriangleSoup& scene, std::vector<std::uint32_t>* trace = nullptr);

// Ray with arbitrary origin: located from `hint_tet`, or clipped to the hull
// when the origin lies outside it.
CastResult trace_ray(const Ray& ray, const CompactMesh& mesh, const SceneTriangleSoup& scene,
                     std::uint32_t hint_tet);

// Neighbor of `tet` across sorted slot `order_b`, given the neighbor across `order_a`.
std::uint32_t next_tet_16(std::uint32_t tet, std::uint32_t prev_tet_raw, int order_a, int order_b,
                          const CompactMesh& mesh);

// Tetrahedron containing q, walking from `hint_tet` along the segment from its
// centroid to q and crossing constrained faces. nullopt when q is outside the hull.
std::optional<std::uint32_t> locate_point(const Vec3& q, const CompactMesh& mesh,
                                          std::uint32_t hint_tet);

// Closed-tet containment test used by the walkers (relative tolerance `eps`).
bool tet_contains(const CompactMesh& mesh, std::uint32_t tet, const Vec3d& q, double eps = 0.0);

inline constexpr double kShadowEpsilon = 1e-4;

// True iff a constrained face is crossed at segment parameter t in
// (eps, 1 - eps) before the walk reaches `light_tet`.
bool cast_shadow_ray(const Vec3& from, std::uint32_t from_tet, const Vec3& light,
                     std::uint32_t light_tet, const CompactMesh& mesh,
                     const SceneTriangleSoup& scene, std::uint32_t* visited = nullptr);

enum class SecondaryKind { reflection, refraction };

struct SecondaryRay {
  Ray ray;
  std::uint32_t start_tet = kNoTet;
  std::uint32_t entry_face = 0;  // constrained face the ray starts on
};

// Reflection starts in the incident tet, refraction in the tet across the hit
// face; nullopt for refraction through a hull face. Total internal reflection
// turns a refraction into a reflection.
std::optional<SecondaryRay> spawn_secondary(const HitRecord& hit, const Ray& incident,
                                            SecondaryKind kind, const CompactMesh& mesh,
                                            const SceneTriangleSoup& scene, double ior = 1.5);

CastResult cast_secondary(const SecondaryRay& secondary, const CompactMesh& mesh,
                          const SceneTriangleSoup& scene,
                          std::vector<std::uint32_t>* trace = nullptr);

// Scalar-triple-product exit face (index of the opposite vertex in `tet`),
// skipping `entry_face` (-1 when the origin is inside). Baseline and oracle.
int sctp_exit_face(const Rayd& ray, const std::array<Vec3d, 4>& tet, int entry_face);

}  // namespace tetrt
