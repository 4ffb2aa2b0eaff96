#include "tetrt/tetmesh.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "tetrt/hilbert.hpp"

namespace tetrt {

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::tet32: return "tet32";
    case Layout::tet20: return "tet20";
    case Layout::tet16: return "tet16";
  }
  return "?";
}

Layout parse_layout(std::string_view name) {
  if (name == "tet32") return Layout::tet32;
  if (name == "tet20") return Layout::tet20;
  if (name == "tet16") return Layout::tet16;
  throw InvalidArgument("unknown layout '" + std::string(name) + "'");
}

std::size_t record_bytes(Layout layout) {
  switch (layout) {
    case Layout::tet32: return sizeof(Tet32Record);
    case Layout::tet20: return sizeof(Tet20Record);
    case Layout::tet16: return sizeof(Tet16Record);
  }
  return 0;
}

std::string_view to_string(ReorderScheme scheme) {
  switch (scheme) {
    case ReorderScheme::none: return "none";
    case ReorderScheme::hilbert: return "hilbert";
    case ReorderScheme::hilbert_regions: return "hilbert_regions";
    case ReorderScheme::shuffle: return "shuffle";
  }
  return "?";
}

ReorderScheme parse_reorder(std::string_view name) {
  if (name == "none") return ReorderScheme::none;
  if (name == "hilbert") return ReorderScheme::hilbert;
  if (name == "hilbert_regions") return ReorderScheme::hilbert_regions;
  if (name == "shuffle") return ReorderScheme::shuffle;
  throw InvalidArgument("unknown reorder scheme '" + std::string(name) + "'");
}

Vec3d CompactMesh::centroid(std::uint32_t tet) const {
  Vec3d c{};
  for (int j = 0; j < 4; ++j) c = c + vertex(tet, j);
  return c * 0.25;
}

std::array<std::uint32_t, 3> face_key(const TetVertices& tet, int j) {
  std::array<std::uint32_t, 3> key{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    if (i != j) key[k++] = tet[i];
  }
  std::sort(key.begin(), key.end());
  return key;
}

std::string ValidationReport::summary(std::size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    os << "\n  ";
    if (violations[i].tet >= 0) os << "tet " << violations[i].tet << ": ";
    os << violations[i].message;
  }
  if (violations.size() > max_items) os << "\n  ...";
  return os.str();
}

namespace {

using FaceKey = std::array<std::uint32_t, 3>;

struct FaceSlot {
  FaceKey key;
  std::uint32_t tet;
  int slot;
};

double tet_volume(const std::vector<Vec3>& points, const TetVertices& t) {
  return orient3d(points[t[0]].as<double>(), points[t[1]].as<double>(),
                  points[t[2]].as<double>(), points[t[3]].as<double>());
}

std::string face_str(const FaceKey& k) {
  return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) +
         ")";
}

}  // namespace

void build_adjacency(RawTetMesh& mesh, std::span<const std::array<std::uint32_t, 3>> constrained,
                     std::span<const std::uint32_t> triangle_ids) {
  if (constrained.size() != triangle_ids.size()) {
    throw InvalidArgument("build_adjacency: one triangle id per constrained face required");
  }
  std::vector<FaceSlot> slots;
  slots.reserve(mesh.tets.size() * 4);
  for (std::uint32_t t = 0; t < mesh.tets.size(); ++t) {
    for (int j = 0; j < 4; ++j) slots.push_back({face_key(mesh.tets[t], j), t, j});
  }
  auto by_key = [](const FaceSlot& a, const FaceSlot& b) {
    return std::tie(a.key, a.tet, a.slot) < std::tie(b.key, b.tet, b.slot);
  };
  std::sort(slots.begin(), slots.end(), by_key);

  mesh.neighbors.assign(mesh.tets.size(), TetNeighbors{});
  for (std::size_t i = 0; i < slots.size();) {
    std::size_t j = i + 1;
    while (j < slots.size() && slots[j].key == slots[i].key) ++j;
    if (j - i > 2) {
      throw ValidationError("face " + face_str(slots[i].key) + " shared by more than two tets",
                            slots[i].tet, slots[i + 2].tet);
    }
    if (j - i == 2) {
      mesh.neighbors[slots[i].tet][slots[i].slot] = NeighborRef::tet(slots[i + 1].tet);
      mesh.neighbors[slots[i + 1].tet][slots[i + 1].slot] = NeighborRef::tet(slots[i].tet);
    }
    i = j;
  }

  mesh.constrained_faces.clear();
  mesh.constrained_faces.reserve(constrained.size());
  for (std::size_t c = 0; c < constrained.size(); ++c) {
    FaceKey key = constrained[c];
    std::sort(key.begin(), key.end());
    auto lo = std::lower_bound(slots.begin(), slots.end(), FaceSlot{key, 0, 0}, by_key);
    if (lo == slots.end() || lo->key != key) {
      throw ValidationError("constrained face " + face_str(key) + " is not a face of the mesh");
    }
    ConstrainedFace face;
    face.triangle_id = triangle_ids[c];
    face.vertex_ids = key;
    face.tet_front = lo->tet;
    mesh.neighbors[lo->tet][lo->slot] = NeighborRef::face(static_cast<std::uint32_t>(c));
    auto second = lo + 1;
    if (second != slots.end() && second->key == key) {
      face.tet_back = second->tet;
      mesh.neighbors[second->tet][second->slot] = NeighborRef::face(static_cast<std::uint32_t>(c));
    }
    mesh.constrained_faces.push_back(face);
  }
}

std::size_t orient_positive(RawTetMesh& mesh) {
  std::size_t flipped = 0;
  const bool has_neighbors = mesh.neighbors.size() == mesh.tets.size();
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    if (tet_volume(mesh.points, mesh.tets[t]) < 0.0) {
      std::swap(mesh.tets[t][0], mesh.tets[t][1]);
      if (has_neighbors) std::swap(mesh.neighbors[t][0], mesh.neighbors[t][1]);
      ++flipped;
    }
  }
  return flipped;
}

ValidationReport validate(const RawTetMesh& mesh) {
  ValidationReport report;
  auto fail = [&](long tet, std::string msg, long other = -1) {
    report.violations.push_back({tet, other, std::move(msg)});
  };

  const std::size_t n_points = mesh.points.size();
  const std::size_t n_tets = mesh.tets.size();
  const std::size_t n_faces = mesh.constrained_faces.size();

  for (std::size_t i = 0; i < n_points; ++i) {
    if (!is_finite(mesh.points[i])) fail(-1, "point " + std::to_string(i) + " is not finite");
  }
  if (mesh.neighbors.size() != n_tets) {
    fail(-1, "neighbor table has " + std::to_string(mesh.neighbors.size()) + " rows for " +
                 std::to_string(n_tets) + " tets");
    return report;
  }
  if (n_tets > 0 && mesh.source_tet >= n_tets) fail(-1, "source tet out of range");
  if (n_tets >= NeighborRef::kBoundary) fail(-1, "too many tets for 31-bit links");

  bool indices_ok = true;
  for (std::size_t t = 0; t < n_tets; ++t) {
    const auto& v = mesh.tets[t];
    for (int j = 0; j < 4; ++j) {
      if (v[j] >= n_points) {
        fail(long(t), "vertex index " + std::to_string(v[j]) + " out of range");
        indices_ok = false;
      }
      for (int k = 0; k < j; ++k) {
        if (v[j] == v[k]) {
          fail(long(t), "repeated vertex " + std::to_string(v[j]));
          indices_ok = false;
        }
      }
    }
  }
  if (!indices_ok) return report;

  for (std::size_t t = 0; t < n_tets; ++t) {
    if (!(tet_volume(mesh.points, mesh.tets[t]) > 0.0)) fail(long(t), "non-positive volume");
    for (int j = 0; j < 4; ++j) {
      const NeighborRef ref = mesh.neighbors[t][j];
      const FaceKey key = face_key(mesh.tets[t], j);
      if (ref.is_boundary()) continue;
      if (ref.is_constrained()) {
        const std::uint32_t c = ref.payload();
        if (c >= n_faces) {
          fail(long(t), "constrained face " + std::to_string(c) + " out of range");
          continue;
        }
        const ConstrainedFace& f = mesh.constrained_faces[c];
        if (f.tet_front != t && f.tet_back != t) {
          fail(long(t), "constrained face " + std::to_string(c) + " does not list this tet");
        }
        FaceKey fk = f.vertex_ids;
        std::sort(fk.begin(), fk.end());
        if (fk != key) {
          fail(long(t), "constrained face " + std::to_string(c) + " vertices " + face_str(fk) +
                            " differ from slot face " + face_str(key));
        }
        continue;
      }
      const std::uint32_t k = ref.payload();
      if (k >= n_tets || k == t) {
        fail(long(t), "slot " + std::to_string(j) + " links invalid tet " + std::to_string(k));
        continue;
      }
      int back = -1;
      for (int i = 0; i < 4; ++i) {
        if (mesh.neighbors[k][i] == NeighborRef::tet(std::uint32_t(t))) back = i;
      }
      if (back < 0) {
        fail(long(t), "adjacency not mutual: tet " + std::to_string(t) + " lists tet " +
                          std::to_string(k) + " but not vice versa", long(k));
      } else if (face_key(mesh.tets[k], back) != key) {
        fail(long(t), "tets " + std::to_string(t) + " and " + std::to_string(k) +
                          " do not share face " + face_str(key), long(k));
      }
    }
  }

  for (std::size_t c = 0; c < n_faces; ++c) {
    const ConstrainedFace& f = mesh.constrained_faces[c];
    const NeighborRef self = NeighborRef::face(std::uint32_t(c));
    auto count_refs = [&](std::uint32_t t) {
      int n = 0;
      for (const NeighborRef r : mesh.neighbors[t]) n += r == self;
      return n;
    };
    if (f.tet_front >= n_tets) {
      fail(-1, "constrained face " + std::to_string(c) + " has no front tet");
      continue;
    }
    if (count_refs(f.tet_front) != 1) {
      fail(long(f.tet_front), "does not reference constrained face " + std::to_string(c) +
                                  " exactly once");
    }
    if (f.tet_back != kNoTet) {
      if (f.tet_back >= n_tets || f.tet_back == f.tet_front) {
        fail(-1, "constrained face " + std::to_string(c) + " has invalid back tet");
      } else if (count_refs(f.tet_back) != 1) {
        fail(long(f.tet_back), "does not reference constrained face " + std::to_string(c) +
                                   " exactly once");
      }
    }
  }
  return report;
}

CompactMesh encode(const RawTetMesh& raw, Layout layout) {
  const ValidationReport report = validate(raw);
  if (!report.ok()) {
    const Violation& first = report.violations.front();
    throw ValidationError("encode: invalid mesh: " + report.summary(1), first.tet, first.other);
  }

  CompactMesh mesh;
  mesh.points = raw.points;
  mesh.constrained_faces = raw.constrained_faces;
  mesh.source_tet = raw.source_tet;
  const std::size_t n = raw.tets.size();
  mesh.cold_vertices.resize(n);
  mesh.cold_neighbors.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::array<int, 4> perm{0, 1, 2, 3};
    std::sort(perm.begin(), perm.end(),
              [&](int a, int b) { return raw.tets[t][a] < raw.tets[t][b]; });
    for (int j = 0; j < 4; ++j) {
      mesh.cold_vertices[t][j] = raw.tets[t][perm[j]];
      mesh.cold_neighbors[t][j] = raw.neighbors[t][perm[j]];
    }
  }

  auto vx_of = [&](std::size_t t) {
    const auto& v = mesh.cold_vertices[t];
    return compute_xor_sum(v[0], v[1], v[2], v[3]);
  };
  switch (layout) {
    case Layout::tet32: {
      std::vector<Tet32Record> recs(n);
      for (std::size_t t = 0; t < n; ++t) {
        const auto& v = mesh.cold_vertices[t];
        recs[t].v = {v[0], v[1], v[2]};
        recs[t].vx = vx_of(t);
        recs[t].n = mesh.cold_neighbors[t];
      }
      mesh.records = std::move(recs);
      break;
    }
    case Layout::tet20: {
      std::vector<Tet20Record> recs(n);
      for (std::size_t t = 0; t < n; ++t) {
        recs[t].vx = vx_of(t);
        recs[t].n = mesh.cold_neighbors[t];
      }
      mesh.records = std::move(recs);
      break;
    }
    case Layout::tet16: {
      std::vector<Tet16Record> recs(n);
      for (std::size_t t = 0; t < n; ++t) {
        const auto& nb = mesh.cold_neighbors[t];
        recs[t].vx = vx_of(t);
        for (int j = 0; j < 3; ++j) recs[t].nx[j] = nb[j].raw ^ nb[3].raw;
      }
      mesh.records = std::move(recs);
      break;
    }
  }
  return mesh;
}

RawTetMesh decode(const CompactMesh& mesh) {
  RawTetMesh raw;
  raw.points = mesh.points;
  raw.tets = mesh.cold_vertices;
  raw.neighbors = mesh.cold_neighbors;
  raw.constrained_faces = mesh.constrained_faces;
  raw.source_tet = mesh.source_tet;
  orient_positive(raw);
  return raw;
}

namespace {

// Neighbors of `tet` as stored in the hot record. For Tet16 the chain needs one
// known neighbor: `entry_slot` with raw value `entry_raw`.
TetNeighbors hot_neighbors(const CompactMesh& mesh, std::uint32_t tet, int entry_slot,
                           std::uint32_t entry_raw) {
  TetNeighbors out{};
  switch (mesh.layout()) {
    case Layout::tet32: return mesh.get<Tet32Record>()[tet].n;
    case Layout::tet20: return mesh.get<Tet20Record>()[tet].n;
    case Layout::tet16: {
      const Tet16Record& rec = mesh.get<Tet16Record>()[tet];
      for (int b = 0; b < 4; ++b) {
        out[b] = NeighborRef{b == entry_slot ? entry_raw : next_tet_16(rec, entry_raw, entry_slot, b)};
      }
      return out;
    }
  }
  return out;
}

std::uint32_t hot_vx(const CompactMesh& mesh, std::uint32_t tet) {
  switch (mesh.layout()) {
    case Layout::tet32: return mesh.get<Tet32Record>()[tet].vx;
    case Layout::tet20: return mesh.get<Tet20Record>()[tet].vx;
    case Layout::tet16: return mesh.get<Tet16Record>()[tet].vx;
  }
  return 0;
}

}  // namespace

ValidationReport validate(const CompactMesh& mesh) {
  ValidationReport report;
  auto fail = [&](long tet, std::string msg, long other = -1) {
    report.violations.push_back({tet, other, std::move(msg)});
  };

  const std::size_t n = mesh.tet_count();
  const std::size_t n_records = std::visit([](const auto& v) { return v.size(); }, mesh.records);
  if (n_records != n || mesh.cold_neighbors.size() != n) {
    fail(-1, "record array and side tables disagree on tet count");
    return report;
  }
  if (n == 0) return report;
  if (mesh.source_tet >= n) {
    fail(-1, "source tet out of range");
    return report;
  }

  for (std::size_t t = 0; t < n; ++t) {
    const auto& v = mesh.cold_vertices[t];
    if (!(v[0] < v[1] && v[1] < v[2] && v[2] < v[3]) || v[3] >= mesh.points.size()) {
      fail(long(t), "side-table vertices not strictly ascending and in range");
    }
  }
  if (!report.ok()) return report;

  // Structural invariants on the side tables (adjacency, orientation, faces).
  for (auto& v : validate(decode(mesh)).violations) report.violations.push_back(std::move(v));

  for (std::size_t t = 0; t < n; ++t) {
    const auto& v = mesh.cold_vertices[t];
    if (hot_vx(mesh, std::uint32_t(t)) != compute_xor_sum(v[0], v[1], v[2], v[3])) {
      fail(long(t), "xor-sum does not match the vertex quadruple");
    }
  }

  // Sorted neighbor order: slot j must lie across the j-th smallest vertex.
  auto check_slot = [&](std::size_t t, int j, NeighborRef ref) {
    const FaceKey key = face_key(mesh.cold_vertices[t], j);
    if (ref.is_tet()) {
      const std::uint32_t k = ref.payload();
      if (k >= n) {
        fail(long(t), "slot " + std::to_string(j) + " links tet out of range");
        return;
      }
      const auto& w = mesh.cold_vertices[k];
      for (std::uint32_t x : key) {
        if (std::find(w.begin(), w.end(), x) == w.end()) {
          fail(long(t), "sorted-order violation: slot " + std::to_string(j) + " links tet " +
                            std::to_string(k) + " which does not share face " + face_str(key));
          return;
        }
      }
    } else if (ref.is_constrained()) {
      const std::uint32_t c = ref.payload();
      if (c >= mesh.constrained_faces.size()) {
        fail(long(t), "slot " + std::to_string(j) + " links constrained face out of range");
        return;
      }
      FaceKey fk = mesh.constrained_faces[c].vertex_ids;
      std::sort(fk.begin(), fk.end());
      if (fk != key) {
        fail(long(t), "sorted-order violation: slot " + std::to_string(j) +
                          " links constrained face " + std::to_string(c) + " on another face");
      }
    }
  };

  switch (mesh.layout()) {
    case Layout::tet32: {
      const auto recs = mesh.get<Tet32Record>();
      for (std::size_t t = 0; t < n; ++t) {
        const auto& v = mesh.cold_vertices[t];
        if (recs[t].v[0] != v[0] || recs[t].v[1] != v[1] || recs[t].v[2] != v[2]) {
          fail(long(t), "Tet32 vertex fields differ from the side table");
        }
        for (int j = 0; j < 4; ++j) check_slot(t, j, recs[t].n[j]);
        if (recs[t].n != mesh.cold_neighbors[t]) fail(long(t), "Tet32 neighbors differ");
      }
      break;
    }
    case Layout::tet20: {
      const auto recs = mesh.get<Tet20Record>();
      for (std::size_t t = 0; t < n; ++t) {
        for (int j = 0; j < 4; ++j) check_slot(t, j, recs[t].n[j]);
        if (recs[t].n != mesh.cold_neighbors[t]) fail(long(t), "Tet20 neighbors differ");
      }
      break;
    }
    case Layout::tet16: {
      const auto recs = mesh.get<Tet16Record>();
      // Every (known neighbor, exit slot) pair must decode to the true neighbor.
      for (std::size_t t = 0; t < n; ++t) {
        const auto& truth = mesh.cold_neighbors[t];
        bool bad = false;
        for (int a = 0; a < 4 && !bad; ++a) {
          for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            if (next_tet_16(recs[t], truth[a].raw, a, b) != truth[b].raw) {
              fail(long(t), "Tet16 link chain from slot " + std::to_string(a) + " to slot " +
                                std::to_string(b) + " does not reproduce the neighbor");
              bad = true;
              break;
            }
          }
        }
      }
      break;
    }
  }

  // xor walk: reconstruct every quadruple from the source tet through neighbor
  // links (crossing constrained faces), decoding neighbors from the hot records.
  std::vector<char> seen(n, 0);
  std::vector<TetVertices> known(n);
  std::vector<std::pair<int, std::uint32_t>> entry(n, {-1, 0});
  std::deque<std::uint32_t> queue;
  seen[mesh.source_tet] = 1;
  known[mesh.source_tet] = mesh.cold_vertices[mesh.source_tet];
  queue.push_back(mesh.source_tet);
  std::size_t reached = 0;
  while (!queue.empty()) {
    const std::uint32_t t = queue.front();
    queue.pop_front();
    ++reached;
    TetNeighbors nb;
    if (mesh.layout() == Layout::tet16 && entry[t].first < 0) {
      nb = mesh.cold_neighbors[t];
    } else {
      nb = hot_neighbors(mesh, t, entry[t].first, entry[t].second);
    }
    if (nb != mesh.cold_neighbors[t]) {
      fail(long(t), "neighbors decoded during the xor walk differ from the side table");
      continue;
    }
    const TetVertices& q = known[t];
    for (int j = 0; j < 4; ++j) {
      std::uint32_t k = kNoTet;
      if (nb[j].is_tet()) {
        k = nb[j].payload();
      } else if (nb[j].is_constrained() && nb[j].payload() < mesh.constrained_faces.size()) {
        k = mesh.constrained_faces[nb[j].payload()].other(t);
      }
      if (k == kNoTet || k >= n) continue;
      std::uint32_t shared = 0;
      for (int i = 0; i < 4; ++i) {
        if (i != j) shared ^= q[i];
      }
      const std::uint32_t fourth = shared ^ hot_vx(mesh, k);
      TetVertices rebuilt{};
      int m = 0;
      for (int i = 0; i < 4; ++i) {
        if (i != j) rebuilt[m++] = q[i];
      }
      rebuilt[3] = fourth;
      std::sort(rebuilt.begin(), rebuilt.end());
      if (rebuilt != mesh.cold_vertices[k]) {
        fail(long(k), "xor walk from tet " + std::to_string(t) +
                          " reconstructs a different vertex quadruple");
        continue;
      }
      if (!seen[k]) {
        seen[k] = 1;
        known[k] = rebuilt;
        const int slot = sorted_order(fourth, rebuilt[0], rebuilt[1], rebuilt[2], rebuilt[3]);
        const std::uint32_t raw = nb[j].is_tet() ? t : nb[j].raw;
        entry[k] = {slot, raw};
        queue.push_back(k);
      }
    }
  }
  if (reached != n) {
    fail(-1, std::to_string(n - reached) + " tet(s) unreachable from the source tet");
  }
  return report;
}

std::vector<std::uint32_t> detect_regions(const RawTetMesh& mesh) {
  constexpr std::uint32_t kUnset = 0xffffffffu;
  std::vector<std::uint32_t> label(mesh.tets.size(), kUnset);
  std::uint32_t next_label = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t seed = 0; seed < mesh.tets.size(); ++seed) {
    if (label[seed] != kUnset) continue;
    label[seed] = next_label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::uint32_t t = stack.back();
      stack.pop_back();
      for (const NeighborRef r : mesh.neighbors[t]) {
        if (!r.is_tet()) continue;
        const std::uint32_t k = r.payload();
        if (label[k] == kUnset) {
          label[k] = next_label;
          stack.push_back(k);
        }
      }
    }
    ++next_label;
  }
  return label;
}

namespace {

struct Quantizer {
  Vec3d lo;
  double scale = 0.0;

  explicit Quantizer(const std::vector<Vec3>& points) {
    if (points.empty()) return;
    Vec3d hi = points[0].as<double>();
    lo = hi;
    for (const Vec3& p : points) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], double(p[a]));
        hi[a] = std::max(hi[a], double(p[a]));
      }
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    scale = extent > 0.0 ? double(1u << kHilbertOrder) / extent : 0.0;
  }

  std::uint64_t key(const Vec3d& p) const {
    const std::uint32_t top = (1u << kHilbertOrder) - 1;
    std::array<std::uint32_t, 3> cell{};
    for (int a = 0; a < 3; ++a) {
      const double c = std::floor((p[a] - lo[a]) * scale);
      cell[a] = c <= 0.0 ? 0u : std::min(top, static_cast<std::uint32_t>(c));
    }
    return hilbert_index(cell, kHilbertOrder);
  }
};

}  // namespace

CompactMesh reorder(const CompactMesh& mesh, ReorderScheme scheme, std::uint64_t seed) {
  if (scheme == ReorderScheme::none) return mesh;

  const RawTetMesh raw = decode(mesh);
  const std::size_t n_points = raw.points.size();
  const std::size_t n_tets = raw.tets.size();

  // order[new] = old
  std::vector<std::uint32_t> point_order(n_points);
  std::vector<std::uint32_t> tet_order(n_tets);
  std::iota(point_order.begin(), point_order.end(), 0u);
  std::iota(tet_order.begin(), tet_order.end(), 0u);

  if (scheme == ReorderScheme::shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(point_order.begin(), point_order.end(), rng);
    std::shuffle(tet_order.begin(), tet_order.end(), rng);
  } else {
    const Quantizer quant(raw.points);
    std::vector<std::uint64_t> pkey(n_points);
    for (std::size_t i = 0; i < n_points; ++i) pkey[i] = quant.key(raw.points[i].as<double>());
    std::stable_sort(point_order.begin(), point_order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return pkey[a] < pkey[b]; });

    std::vector<std::uint64_t> tkey(n_tets);
    for (std::size_t t = 0; t < n_tets; ++t) tkey[t] = quant.key(mesh.centroid(std::uint32_t(t)));
    std::vector<std::uint32_t> region(n_tets, 0);
    if (scheme == ReorderScheme::hilbert_regions) region = detect_regions(raw);
    std::stable_sort(tet_order.begin(), tet_order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return std::tie(region[a], tkey[a]) < std::tie(region[b], tkey[b]);
    });
  }

  std::vector<std::uint32_t> new_point(n_points);
  std::vector<std::uint32_t> new_tet(n_tets);
  for (std::uint32_t i = 0; i < n_points; ++i) new_point[point_order[i]] = i;
  for (std::uint32_t i = 0; i < n_tets; ++i) new_tet[tet_order[i]] = i;

  RawTetMesh out;
  out.points.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) out.points[i] = raw.points[point_order[i]];
  out.tets.resize(n_tets);
  out.neighbors.resize(n_tets);
  for (std::size_t i = 0; i < n_tets; ++i) {
    const std::uint32_t old = tet_order[i];
    for (int j = 0; j < 4; ++j) {
      out.tets[i][j] = new_point[raw.tets[old][j]];
      const NeighborRef r = raw.neighbors[old][j];
      out.neighbors[i][j] = r.is_tet() ? NeighborRef::tet(new_tet[r.payload()]) : r;
    }
  }
  out.constrained_faces = raw.constrained_faces;
  for (ConstrainedFace& f : out.constrained_faces) {
    f.tet_front = new_tet[f.tet_front];
    if (f.tet_back != kNoTet) f.tet_back = new_tet[f.tet_back];
    for (auto& v : f.vertex_ids) v = new_point[v];
    std::sort(f.vertex_ids.begin(), f.vertex_ids.end());
  }
  out.source_tet = n_tets ? new_tet[raw.source_tet] : 0;
  return encode(out, mesh.layout());
}

}  // namespace tetrt
