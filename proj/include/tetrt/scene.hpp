#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tetrt/geometry.hpp"

namespace tetrt {

// Scene surfaces: an indexed triangle list with one material id per triangle.
struct SceneTriangleSoup {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<std::uint32_t> material_ids;

  std::size_t size() const noexcept { return triangles.size(); }

  std::array<Vec3d, 3> corners(std::uint32_t tri) const {
    const auto& t = triangles[tri];
    return {vertices[t[0]].as<double>(), vertices[t[1]].as<double>(),
            vertices[t[2]].as<double>()};
  }

  // Unnormalized geometric normal following the winding.
  Vec3d normal(std::uint32_t tri) const {
    const auto c = corners(tri);
    return cross(c[1] - c[0], c[2] - c[0]);
  }

  std::uint32_t material(std::uint32_t tri) const {
    return tri < material_ids.size() ? material_ids[tri] : 0u;
  }
};

}  // namespace tetrt
