#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tetrt/geometry.hpp"

namespace tetrt {

inline constexpr std::uint32_t kNoTet = 0xffffffffu;

// 32-bit tagged link stored in each neighbor slot. The top bit marks a
// constrained face; the low 31 bits index either a tetrahedron or a
// constrained face. An all-ones payload with the bit clear is the mesh
// boundary.
struct NeighborRef {
  static constexpr std::uint32_t kConstrainedBit = 0x80000000u;
  static constexpr std::uint32_t kPayloadMask = 0x7fffffffu;
  static constexpr std::uint32_t kBoundary = 0x7fffffffu;

  std::uint32_t raw = kBoundary;

  static constexpr NeighborRef tet(std::uint32_t index) noexcept { return {index}; }
  static constexpr NeighborRef face(std::uint32_t index) noexcept {
    return {index | kConstrainedBit};
  }
  static constexpr NeighborRef boundary() noexcept { return {kBoundary}; }

  constexpr bool is_constrained() const noexcept { return (raw & kConstrainedBit) != 0; }
  constexpr bool is_boundary() const noexcept { return raw == kBoundary; }
  constexpr bool is_tet() const noexcept { return !is_constrained() && !is_boundary(); }
  constexpr std::uint32_t payload() const noexcept { return raw & kPayloadMask; }

  // Tetrahedron index, or -1 for constrained faces and the boundary.
  constexpr std::int32_t tet_index() const noexcept {
    return is_tet() ? static_cast<std::int32_t>(raw) : -1;
  }

  friend constexpr bool operator==(NeighborRef, NeighborRef) = default;
};

static_assert(sizeof(NeighborRef) == 4);

struct ConstrainedFace {
  std::uint32_t triangle_id = 0;
  std::uint32_t tet_front = kNoTet;
  std::uint32_t tet_back = kNoTet;  // kNoTet on the hull
  std::array<std::uint32_t, 3> vertex_ids{};

  // The tetrahedron on the other side of the face from `tet`, or kNoTet.
  std::uint32_t other(std::uint32_t tet) const noexcept {
    return tet == tet_front ? tet_back : tet_front;
  }

  friend bool operator==(const ConstrainedFace&, const ConstrainedFace&) = default;
};

using TetVertices = std::array<std::uint32_t, 4>;
using TetNeighbors = std::array<NeighborRef, 4>;

// Uncompressed mesh as produced by the loaders. Neighbor j of tet i lies
// across the face that omits vertex j.
struct RawTetMesh {
  std::vector<Vec3> points;
  std::vector<TetVertices> tets;
  std::vector<TetNeighbors> neighbors;
  std::vector<ConstrainedFace> constrained_faces;
  std::uint32_t source_tet = 0;
};

struct Tet32Record {
  std::array<std::uint32_t, 3> v{};
  std::uint32_t vx = 0;
  std::array<NeighborRef, 4> n{};
};

// Neighbors ordered by the ascending index of the vertex they lie across.
struct Tet20Record {
  std::uint32_t vx = 0;
  std::array<NeighborRef, 4> n{};
};

// nx[j] = n[j] ^ n[3] over the sorted neighbor order.
struct Tet16Record {
  std::uint32_t vx = 0;
  std::array<std::uint32_t, 3> nx{};
};

static_assert(sizeof(Tet32Record) == 32, "Tet32 must occupy 32 bytes");
static_assert(sizeof(Tet20Record) == 20, "Tet20 must occupy 20 bytes");
static_assert(sizeof(Tet16Record) == 16, "Tet16 must occupy 16 bytes");

enum class Layout { tet32, tet20, tet16 };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view name);
std::size_t record_bytes(Layout layout);

struct CompactMesh {
  std::vector<Vec3> points;
  std::variant<std::vector<Tet32Record>, std::vector<Tet20Record>, std::vector<Tet16Record>>
      records;
  std::vector<ConstrainedFace> constrained_faces;
  std::uint32_t source_tet = 0;

  // Cold side tables, read only when a walk starts at an arbitrary tet.
  // Vertices are sorted ascending; neighbor slot j lies across cold_vertices[j].
  std::vector<TetVertices> cold_vertices;
  std::vector<TetNeighbors> cold_neighbors;

  Layout layout() const noexcept { return static_cast<Layout>(records.index()); }
  std::size_t tet_count() const noexcept { return cold_vertices.size(); }

  // Bytes of the hot arrays: tet records plus the point array.
  std::size_t tet_bytes() const noexcept { return tet_count() * record_bytes(layout()); }
  std::size_t point_bytes() const noexcept { return points.size() * sizeof(Vec3); }
  std::size_t accelerator_bytes() const noexcept { return tet_bytes() + point_bytes(); }

  template <class Record>
  std::span<const Record> get() const {
    return std::get<std::vector<Record>>(records);
  }

  Vec3d vertex(std::uint32_t tet, int j) const { return points[cold_vertices[tet][j]].as<double>(); }
  Vec3d centroid(std::uint32_t tet) const;
};

constexpr std::uint32_t compute_xor_sum(std::uint32_t v0, std::uint32_t v1, std::uint32_t v2,
                                        std::uint32_t v3) noexcept {
  return v0 ^ v1 ^ v2 ^ v3;
}

constexpr std::uint32_t recover_fourth_vertex(std::uint32_t v0, std::uint32_t v1,
                                              std::uint32_t v2, std::uint32_t vx) noexcept {
  return v0 ^ v1 ^ v2 ^ vx;
}

// Rank of `value` among the four vertex indices (which are distinct).
constexpr int sorted_order(std::uint32_t value, std::uint32_t a, std::uint32_t b,
                           std::uint32_t c, std::uint32_t d) noexcept {
  return int(a < value) + int(b < value) + int(c < value) + int(d < value);
}

// Sorted vertex triple of the face of `tet` that omits vertex j.
std::array<std::uint32_t, 3> face_key(const TetVertices& tet, int j);

struct Violation {
  long tet = -1;
  long other = -1;  // partner tet, when the violation involves a pair
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string summary(std::size_t max_items = 10) const;
};

// Neighbor table from face matching. Faces whose sorted vertex triple appears
// in `constrained` become constrained links (pointing at that face's index);
// hull faces get the boundary sentinel. Throws ValidationError if a face is
// shared by more than two tetrahedra.
void build_adjacency(RawTetMesh& mesh,
                     std::span<const std::array<std::uint32_t, 3>> constrained,
                     std::span<const std::uint32_t> triangle_ids);

// Swaps vertices 0 and 1 (with their neighbor slots) of every tet with negative volume.
std::size_t orient_positive(RawTetMesh& mesh);

// Checks the RawTetMesh invariants: index ranges, positive volume, mutual
// adjacency, shared-face agreement, constrained-face bookkeeping.
ValidationReport validate(const RawTetMesh& mesh);

// Throws ValidationError naming the first offending tet pair if `raw` is invalid.
CompactMesh encode(const RawTetMesh& raw, Layout layout);

// Layout records, xor sums, sorted neighbor order, xor-walk closure from the
// source tet, and the Tet16 neighbor chains.
ValidationReport validate(const CompactMesh& mesh);

// Back to the uncompressed form (vertices in positive orientation).
RawTetMesh decode(const CompactMesh& mesh);

// Connected components over neighbor links that do not cross constrained faces.
// Labels are 0-based, assigned in order of the lowest tet index in each region.
std::vector<std::uint32_t> detect_regions(const RawTetMesh& mesh);

enum class ReorderScheme { none, hilbert, hilbert_regions, shuffle };

std::string_view to_string(ReorderScheme scheme);
ReorderScheme parse_reorder(std::string_view name);

inline constexpr unsigned kHilbertOrder = 10;

// Renumbers points and tets; all cross references follow. `shuffle` is a
// random permutation (seeded) used as a locality baseline.
CompactMesh reorder(const CompactMesh& mesh, ReorderScheme scheme, std::uint64_t seed = 1);

// Neighbor across sorted slot `order_b`, reconstructed from the neighbor
// across slot `order_a` (`prev_raw`) and the xor links.
constexpr std::uint32_t next_tet_16(const Tet16Record& rec, std::uint32_t prev_raw, int order_a,
                                    int order_b) noexcept {
  std::uint32_t next = prev_raw;
  if (order_a != 3) next = prev_raw ^ rec.nx[order_a];
  if (order_b != 3) next = next ^ rec.nx[order_b];
  return next;
}

}  // namespace tetrt
