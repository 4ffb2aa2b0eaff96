#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "tetrt/scene.hpp"
#include "tetrt/tetmesh.hpp"

namespace tetrt {

// TetGen output files. `neigh` and `face` may be empty paths: adjacency is
// then rebuilt from the elements, and no face is constrained.
struct TetGenFileSet {
  std::filesystem::path node;
  std::filesystem::path ele;
  std::filesystem::path neigh;
  std::filesystem::path face;

  // stem.node, stem.ele, stem.neigh, stem.face; missing optional files are left empty.
  static TetGenFileSet from_stem(const std::filesystem::path& stem);
};

// Faces with a nonzero boundary marker become constrained, with triangle_id =
// marker - 1 (row index for negative markers). Tets with negative volume are
// reoriented. The result passes validate().
RawTetMesh parse_tetgen(const TetGenFileSet& files);

// Writes a 0-based fileset for `stem`: constrained faces with marker
// triangle_id + 1, remaining hull faces with marker 0.
void write_tetgen(const RawTetMesh& mesh, const std::filesystem::path& stem);

// v and f records; polygons are fan-triangulated. `usemtl` names are numbered
// in order of first use.
SceneTriangleSoup load_obj(const std::filesystem::path& path);

void write_obj(const SceneTriangleSoup& scene, const std::filesystem::path& path);

// Axis-aligned rectangle on the integer lattice: `axis` is the constant
// coordinate, lo/hi the corners (lo[axis] == hi[axis]).
struct Occluder {
  int axis = 0;
  std::array<int, 3> lo{};
  std::array<int, 3> hi{};
  int normal_sign = 1;  // scene triangles face +axis or -axis
};

struct BoxFixture {
  RawTetMesh mesh;
  SceneTriangleSoup scene;
};

// n×n×n unit cells over [0, n]^3, six Kuhn tetrahedra per cell. Walls carry
// materials 0..5 (-x, +x, -y, +y, -z, +z); occluder k carries material 6 + k.
BoxFixture build_box_fixture(int n, std::span<const Occluder> occluders = {});

// Box of cells[0] x cells[1] x cells[2] unit cells.
BoxFixture build_box_fixture(std::array<int, 3> cells, std::span<const Occluder> occluders = {});

// Replaces every constrained face's triangle_id with the scene triangle that is
// coplanar with it and contains it (within `tolerance`, relative to the scene
// extent). Throws AssociationError listing the face vertices when none does.
void associate_constrained_faces(RawTetMesh& mesh, const SceneTriangleSoup& scene,
                                 double tolerance = 1e-6);

// Constrained triples for every mesh face lying on some scene triangle, for
// meshes whose input faces carry no markers.
std::vector<std::array<std::uint32_t, 3>> faces_on_scene(const RawTetMesh& mesh,
                                                         const SceneTriangleSoup& scene,
                                                         double tolerance = 1e-6);

}  // namespace tetrt
