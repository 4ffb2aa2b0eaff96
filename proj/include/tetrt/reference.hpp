#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tetrt/geometry.hpp"
#include "tetrt/scene.hpp"

// Oracles and baselines. Nothing here calls into the traversal code; only the
// vector types are shared.
namespace tetrt::reference {

// Smallest t >= 0 at which the ray meets the triangle (edges inclusive).
std::optional<double> moller_trumbore(const Rayd& ray, const std::array<Vec3d, 3>& tri);

struct Hit {
  std::uint32_t triangle_id = 0;
  double t = 0.0;
};

inline constexpr std::uint32_t kNoTriangle = 0xffffffffu;

// Minimum t >= t_min over every triangle except `skip`; the lowest id wins exact ties.
std::optional<Hit> brute_force_cast(const Rayd& ray, const SceneTriangleSoup& scene,
                                    double t_min = 0.0, std::uint32_t skip = kNoTriangle);

// True iff some triangle is crossed at t in (t_min, t_max).
bool brute_force_occluded(const Rayd& ray, const SceneTriangleSoup& scene, double t_min,
                          double t_max);

// Distance from the ray's plane crossing to the nearest triangle edge,
// minimised over all triangles crossed at t > 0, divided by the ray length scale.
double edge_clearance(const Rayd& ray, const SceneTriangleSoup& scene);

// Edge-function test; points on the boundary are inside.
bool point_in_triangle_2d(const Vec2d& q, const Vec2d& a, const Vec2d& b, const Vec2d& c);

// All four sub-volumes share the tet's orientation sign, with slack eps*|volume|.
// Throws InvalidArgument for a degenerate tet.
bool barycentric_contains(const Vec3d& q, const std::array<Vec3d, 4>& tet, double eps = 1e-9);

// Median-split BVH over a triangle soup.
class Bvh {
 public:
  explicit Bvh(const SceneTriangleSoup& scene, std::size_t leaf_size = 4);

  std::optional<Hit> cast(const Rayd& ray, double t_min = 0.0,
                          std::uint32_t skip = kNoTriangle) const;
  bool occluded(const Rayd& ray, double t_min, double t_max) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t bytes() const noexcept;

 private:
  struct Node {
    Vec3d lo;
    Vec3d hi;
    std::uint32_t first = 0;  // right child (inner; left is the next node) or first triangle
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);

  std::vector<std::array<Vec3d, 3>> tris_;
  std::vector<std::uint32_t> ids_;
  std::vector<Node> nodes_;
};

}  // namespace tetrt::reference
