// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "tetrt/reference.hpp"
#include "tetrt/render.hpp"
#include "tetrt/traversal.hpp"

using namespace tetrt;
using testing::Counted;

namespace {

// Pinned tolerances.
constexpr int kRaysPerMesh = 10000;
constexpr double kRelativeT = 1e-5;
constexpr double kGrazing = 1e-9;
constexpr double kMaxExcluded = 0.001;
constexpr int kBasisTrials = 100000;
constexpr double kTie = 1e-9;
constexpr int kMaxMulAdd = 13;
constexpr int kMaxCmp = 2;
constexpr int kLocatePoints = 10000;
constexpr double kContainEps = 1e-9;
constexpr std::uint64_t kSeed = 20240601;

constexpr Layout kLayouts[] = {Layout::tet32, Layout::tet20, Layout::tet16};

struct Mesh {
  std::string name;
  RawTetMesh raw;
  SceneTriangleSoup scene;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// First comment line of the .node file names the mesher that wrote it.
std::string mesher_of(const std::filesystem::path& node) {
  std::ifstream in(node);
  std::string line;
  std::getline(in, line);
  return line.rfind("# ", 0) == 0 ? line.substr(2) : "unknown";
}

std::vector<Mesh> load_meshes(std::string& model_status, bool& from_tetgen) {
  std::vector<Mesh> out;
  for (auto& nf : testing::standard_fixtures()) {
    out.push_back({nf.name, std::move(nf.fixture.mesh), std::move(nf.fixture.scene)});
  }
  const std::filesystem::path stem = std::filesystem::path(TETRT_DATA_DIR) / "model" / "model";
  try {
    Mesh m{"model", parse_tetgen(TetGenFileSet::from_stem(stem)), load_obj(stem.string() + ".obj")};
    associate_constrained_faces(m.raw, m.scene);
    out.push_back(std::move(m));
    const std::string mesher = mesher_of(stem.string() + ".node");
    from_tetgen = mesher.rfind("TetGen", 0) == 0;
    model_status = "loaded, meshed by " + mesher;
  } catch (const Error& e) {
    model_status = std::string("missing: ") + e.what();
  }
  return out;
}

struct RaySample {
  Ray ray;
  std::uint32_t tet;
};

// Origins uniform in the mesh's bounding box (kept when inside the hull), isotropic directions.
std::vector<RaySample> sample_rays(const CompactMesh& mesh, int count, std::uint64_t seed) {
  Vec3d lo = mesh.points[0].as<double>(), hi = lo;
  for (const Vec3& p : mesh.points) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], double(p[k]));
      hi[k] = std::max(hi[k], double(p[k]));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RaySample> out;
  while (int(out.size()) < count) {
    const Vec3 o{real(lo.x + (hi.x - lo.x) * u(rng)), real(lo.y + (hi.y - lo.y) * u(rng)),
                 real(lo.z + (hi.z - lo.z) * u(rng))};
    const auto t = locate_point(o, mesh, mesh.source_tet);
    if (!t) continue;
    out.push_back({Ray{o, testing::random_direction(rng).as<real>()}, *t});
  }
  return out;
}

Rayd to_double(const Ray& r) { return {r.origin.as<double>(), r.direction.as<double>()}; }

Outcome criterion1(const std::vector<Mesh>& meshes) {
  bool ok = sizeof(Tet32Record) == 32 && sizeof(Tet20Record) == 20 && sizeof(Tet16Record) == 16;
  int checked = 0;
  for (const Mesh& m : meshes) {
    for (Layout l : kLayouts) {
      const CompactMesh c = encode(m.raw, l);
      const std::size_t array_bytes =
          std::visit([](const auto& v) { return v.size() * sizeof(v[0]); }, c.records);
      ok = ok && array_bytes == c.tet_count() * record_bytes(l) && c.tet_bytes() == array_bytes &&
           c.accelerator_bytes() == array_bytes + c.points.size() * sizeof(Vec3);
      ++checked;
    }
  }
  return {ok, fmt("records 32/20/16 bytes; array = tet_count x record bytes on %d mesh/layout pairs", checked)};
}

struct SampleSet {
  std::vector<RaySample> rays;
};

Outcome criterion2(const std::vector<Mesh>& meshes, const std::vector<SampleSet>& samples,
                   bool have_model) {
  bool ok = have_model;
  std::string detail;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const CompactMesh mesh = encode(meshes[i].raw, Layout::tet20);
    long excluded = 0, mismatched = 0;
    double worst = 0;
    for (const RaySample& rs : samples[i].rays) {
      const Rayd r = to_double(rs.ray);
      if (reference::edge_clearance(r, meshes[i].scene) < kGrazing) {
        ++excluded;
        continue;
      }
      const auto truth = reference::brute_force_cast(r, meshes[i].scene);
      const CastResult got = cast_ray(rs.ray, rs.tet, mesh, meshes[i].scene);
      if (!truth || !got.hit || got.hit->triangle_id != truth->triangle_id) {
        ++mismatched;
        continue;
      }
      const double rel = std::abs(got.hit->t - truth->t) / std::max(truth->t, 1e-300);
      worst = std::max(worst, rel);
      if (rel > kRelativeT) ++mismatched;
    }
    const double frac = double(excluded) / double(samples[i].rays.size());
    ok = ok && mismatched == 0 && frac < kMaxExcluded;
    detail += fmt("%s %zu rays, %ld mismatched, max |dt|/t %.1e, excluded %.3f%%; ", meshes[i].name.c_str(),
                  samples[i].rays.size(), mismatched, worst, 100 * frac);
  }
  if (!have_model) detail += "model mesh missing or not meshed by TetGen; ";
  return {ok, detail};
}

Outcome criterion3(const std::vector<Mesh>& meshes, const std::vector<SampleSet>& samples) {
  long differing = 0, total = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    std::vector<CompactMesh> ms;
    for (Layout l : kLayouts) ms.push_back(encode(meshes[i].raw, l));
    for (const RaySample& rs : samples[i].rays) {
      std::vector<std::uint32_t> tr[3];
      CastResult res[3];
      for (int k = 0; k < 3; ++k) res[k] = cast_ray(rs.ray, rs.tet, ms[k], meshes[i].scene, &tr[k]);
      ++total;
      bool same = tr[0] == tr[1] && tr[0] == tr[2];
      for (int k = 1; k < 3; ++k) {
        same = same && res[k].hit.has_value() == res[0].hit.has_value();
        if (same && res[0].hit) {
          same = res[k].hit->triangle_id == res[0].hit->triangle_id && res[k].hit->t == res[0].hit->t;
        }
      }
      differing += !same;
    }
  }
  return {differing == 0, fmt("%ld rays over %zu meshes, %ld differ across Tet32/Tet20/Tet16", total,
                              meshes.size(), differing)};
}

Outcome criterion4(const std::vector<Mesh>& meshes) {
  long checks = 0, bad = 0;
  for (const Mesh& m : meshes) {
    const CompactMesh m32 = encode(m.raw, Layout::tet32);
    const CompactMesh m20 = encode(m.raw, Layout::tet20);
    const CompactMesh m16 = encode(m.raw, Layout::tet16);
    const auto r32 = m32.get<Tet32Record>();
    const auto r20 = m20.get<Tet20Record>();
    const auto r16 = m16.get<Tet16Record>();
    for (std::uint32_t t = 0; t < m32.tet_count(); ++t) {
      const std::uint32_t fourth = r32[t].vx ^ r32[t].v[0] ^ r32[t].v[1] ^ r32[t].v[2];
      const std::array<std::uint32_t, 4> v{r32[t].v[0], r32[t].v[1], r32[t].v[2], fourth};
      std::array<std::uint32_t, 4> sorted = v;
      std::sort(sorted.begin(), sorted.end());
      std::array<NeighborRef, 4> explicit_sorted;
      for (int i = 0; i < 4; ++i) {
        explicit_sorted[sorted_order(v[i], v[0], v[1], v[2], v[3])] = r32[t].n[i];
      }
      for (int a = 0; a < 4; ++a) {
        // Entering through the face opposite sorted[a]: recover sorted[a] from the other three.
        std::uint32_t shared[3];
        int k = 0;
        for (int i = 0; i < 4; ++i) {
          if (i != a) shared[k++] = sorted[i];
        }
        for (const std::uint32_t vx : {r20[t].vx, r16[t].vx}) {
          ++checks;
          bad += recover_fourth_vertex(shared[0], shared[1], shared[2], vx) != sorted[a];
        }
        ++checks;
        bad += r20[t].n[a] != explicit_sorted[a];
        for (int b = 0; b < 4; ++b) {
          if (a == b) continue;
          ++checks;
          bad += next_tet_16(r16[t], explicit_sorted[a].raw, a, b) != explicit_sorted[b].raw;
        }
      }
    }
  }
  return {bad == 0, fmt("%ld slot checks against the Tet32 tables, %ld mismatches", checks, bad)};
}

// Exit vertex (local index) of a ray crossing `tet`, from projected vertices.
struct Decision {
  int exit_vertex = -1;
  bool tie = false;
};

const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

template <class Project>
Decision decide(const std::array<Vec3d, 4>& tet, int entry, Project project) {
  std::array<Vec2d, 4> q;
  for (int i = 0; i < 4; ++i) q[i] = project(tet[i]);
  Decision d;
  std::array<int, 3> f{kFace[entry][0], kFace[entry][1], kFace[entry][2]};
  // The entry face is seen from behind: clockwise in a right-handed frame.
  std::swap(f[1], f[2]);
  for (int k = 0; k < 3; ++k) {
    if (std::abs(det2(q[f[k]], q[f[(k + 1) % 3]])) < kTie) d.tie = true;
    if (std::abs(det2(q[entry], q[f[k]])) < kTie) d.tie = true;
  }
  const int e = get_exit_face(q[f[0]], q[f[1]], q[f[2]], q[entry]);
  d.exit_vertex = f[e];
  return d;
}

Outcome criterion5() {
  std::mt19937_64 rng(kSeed + 5);
  long compared = 0, ties = 0, mismatched = 0, skipped = 0;
  for (int trial = 0; trial < kBasisTrials; ++trial) {
    std::array<Vec3d, 4> tet;
    for (auto& p : tet) p = testing::random_point(rng, -1, 1);
    if (orient3d(tet[0], tet[1], tet[2], tet[3]) < 0) std::swap(tet[0], tet[1]);
    if (orient3d(tet[0], tet[1], tet[2], tet[3]) < 1e-3) {
      --trial;
      continue;
    }
    const Vec3d inside = testing::random_point_in_tet(rng, tet);
    const Vec3d dir = testing::random_direction(rng);
    const Rayd ray{inside - dir * 10.0, dir};
    // Entry face: the one the ray crosses first (scalar triple products in double).
    int entry = -1;
    double best_t = 1e300;
    for (int j = 0; j < 4; ++j) {
      const std::array<Vec3d, 3> tri{tet[kFace[j][0]], tet[kFace[j][1]], tet[kFace[j][2]]};
      const auto t = reference::moller_trumbore(ray, tri);
      if (t && *t < best_t) {
        best_t = *t;
        entry = j;
      }
    }
    if (entry < 0) {
      ++skipped;
      continue;
    }
    const ScaledBasisT<double> sb = build_scaled_basis(ray);
    const auto [ou, ov] = orthonormal_basis(dir);
    const Decision a = decide(tet, entry, [&](const Vec3d& p) { return project_point(sb, p); });
    const Decision b = decide(tet, entry, [&](const Vec3d& p) {
      const Vec3d r = p - ray.origin;
      return Vec2d{dot(ou, r), dot(ov, r)};
    });
    if (a.tie || b.tie) {
      ++ties;
      continue;
    }
    ++compared;
    mismatched += a.exit_vertex != b.exit_vertex;
  }
  return {mismatched == 0 && compared > kBasisTrials * 99 / 100,
          fmt("%ld decisions compared (double basis), %ld ties excluded, %ld mismatched", compared,
              ties + skipped, mismatched)};
}

struct CountingPoints {
  std::span<const Vec3> points;
  mutable long reads = 0;
  Vec3T<Counted> operator[](std::uint32_t i) const {
    ++reads;
    return {double(points[i].x), double(points[i].y), double(points[i].z)};
  }
};

struct ReadCounter {
  std::span<const Vec3> points;
  mutable long reads = 0;
  const Vec3& operator[](std::uint32_t i) const {
    ++reads;
    return points[i];
  }
};

struct OneStep : walk::StopAtSurface {
  template <class S>
  bool after_step(const S&, int) {
    return true;
  }
};

struct PerStep : walk::StopAtSurface {
  const ReadCounter* counter = nullptr;
  long last = 0;
  long steps = 0;
  long bad = 0;
  template <class S>
  bool after_step(const S&, int) {
    ++steps;
    bad += counter->reads - last != 1;
    last = counter->reads;
    return false;
  }
};

template <class T, class Points, class Hooks>
void run_any(const CompactMesh& mesh, TraversalStateT<T>& s, const Points& points, Hooks& hooks) {
  std::uint32_t visited = 0;
  visit_projector(s.basis, [&](auto proj) {
    switch (mesh.layout()) {
      case Layout::tet32: return walk::run(mesh, mesh.get<Tet32Record>(), proj, points, s, visited, hooks);
      case Layout::tet20: return walk::run(mesh, mesh.get<Tet20Record>(), proj, points, s, visited, hooks);
      case Layout::tet16: break;
    }
    return walk::run(mesh, mesh.get<Tet16Record>(), proj, points, s, visited, hooks);
  });
}

Outcome criterion6(const std::vector<Mesh>& meshes, const std::vector<SampleSet>& samples) {
  long steps = 0, max_mul = 0, max_add = 0, max_flops = 0, max_cmp = 0, other = 0;
  for (Layout l : kLayouts) {
    const CompactMesh mesh = encode(meshes[1].raw, l);
    for (std::size_t k = 0; k < 500; ++k) {
      TraversalState s = init_traversal(samples[1].rays[k].ray, samples[1].rays[k].tet, mesh);
      while (s.tet.is_tet()) {
        TraversalStateT<Counted> c;
        c.idx = s.idx;
        for (int i = 0; i < 4; ++i) c.p[i] = {double(s.p[i].x), double(s.p[i].y)};
        c.current = s.current;
        c.tet = s.tet;
        c.prev_tet = s.prev_tet;
        c.basis = testing::convert_basis<Counted>(s.basis);
        CountingPoints points{mesh.points};
        OneStep hooks;
        Counted::reset();
        run_any(mesh, c, points, hooks);
        ++steps;
        max_mul = std::max(max_mul, Counted::tally.mul);
        max_add = std::max(max_add, Counted::tally.add);
        max_flops = std::max(max_flops, Counted::tally.mul + Counted::tally.add);
        max_cmp = std::max(max_cmp, Counted::tally.cmp);
        other += Counted::tally.other;
        OneStep h;
        run_any(mesh, s, walk::MeshPoints{mesh.points}, h);
      }
    }
  }
  return {max_flops <= kMaxMulAdd && max_cmp <= kMaxCmp && other == 0 && steps > 0,
          fmt("%ld counted steps: at most %ld mul + %ld add = %ld mul/add, %ld comparisons", steps,
              max_mul, max_add, max_flops, max_cmp)};
}

Outcome criterion7(const std::vector<Mesh>& meshes, const std::vector<SampleSet>& samples) {
  long steps = 0, bad = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    for (Layout l : kLayouts) {
      const CompactMesh mesh = encode(meshes[i].raw, l);
      for (std::size_t k = 0; k < 1000 && k < samples[i].rays.size(); ++k) {
        TraversalState s = init_traversal(samples[i].rays[k].ray, samples[i].rays[k].tet, mesh);
        ReadCounter counter{mesh.points};
        PerStep hooks;
        hooks.counter = &counter;
        run_any(mesh, s, counter, hooks);
        steps += hooks.steps;
        bad += hooks.bad;
        // A walk that stops at a surface must not read past its last step.
        bad += counter.reads != hooks.last;
      }
    }
  }
  return {bad == 0 && steps > 0, fmt("%ld steps, %ld with a point-read count other than 1", steps, bad)};
}

RenderConfig fixture_config(const char* fixture, int w, int h) {
  RenderConfig c;
  c.fixture = fixture;
  c.fixture_size = 4;
  c.width = w;
  c.height = h;
  c.camera.position = {0.5f, 0.5f, 3.5f};
  c.camera.look_at = {2.5f, 2.5f, 0.5f};
  c.camera.up = {0, 0, 1};
  c.lights = {{Vec3{2.1f, 1.9f, 3.45f}, 8.0}};
  c.materials[4] = Material{Material::Kind::mirror, {0.9f, 0.9f, 0.9f}, 1.5};
  c.seed = kSeed;
  return c;
}

Outcome criterion8() {
  bool ok = true;
  std::string detail;
  for (const char* fixture : {"empty", "pane", "closed"}) {
    RenderConfig c = fixture_config(fixture, 160, 120);
    RenderStats s0;
    const Image base = render(c, s0);
    for (ReorderScheme s : {ReorderScheme::hilbert, ReorderScheme::hilbert_regions}) {
      c.reorder = s;
      RenderStats st;
      const Image img = render(c, st);
      ok = ok && img.rgb == base.rgb && img.primary_ids == base.primary_ids &&
           img.shadow_mask == base.shadow_mask && img.reflection_ids == base.reflection_ids;
    }
  }
  detail += "images identical under hilbert/hilbert_regions; ";
  RenderConfig c = fixture_config("pane", 160, 120);
  BenchOptions opt;
  opt.runs = 1;
  opt.layouts = {Layout::tet20};
  opt.accelerators = {Accelerator::tetmesh};
  const auto report = bench(c, opt);
  const auto& loc = report["locality_metric"];
  for (const char* s : {"none", "hilbert", "hilbert_regions", "shuffle"}) ok = ok && loc.contains(s);
  if (ok) {
    const double shuffle = loc["shuffle"], hilbert = loc["hilbert"], regions = loc["hilbert_regions"],
                 none = loc["none"];
    ok = hilbert <= shuffle && regions <= shuffle;
    detail += fmt("mean index step: none %.1f, hilbert %.1f, hilbert_regions %.1f, shuffle %.1f", none,
                  hilbert, regions, shuffle);
  } else {
    detail += "bench report lacks locality metrics or images differ";
  }
  return {ok, detail};
}

Outcome criterion9(const std::vector<Mesh>& meshes) {
  long located = 0, failed = 0;
  std::mt19937_64 rng(kSeed + 9);
  for (const Mesh& m : meshes) {
    const CompactMesh mesh = encode(m.raw, Layout::tet20);
    std::uniform_int_distribution<std::uint32_t> pick(0, std::uint32_t(mesh.tet_count() - 1));
    for (int i = 0; i < kLocatePoints; ++i) {
      const std::uint32_t t = pick(rng);
      const Vec3 q = testing::random_point_in_tet(rng, testing::tet_points(mesh, t)).as<real>();
      const auto found = locate_point(q, mesh, mesh.source_tet);
      ++located;
      if (!found || !reference::barycentric_contains(q.as<double>(), testing::tet_points(mesh, *found),
                                                     kContainEps)) {
        ++failed;
      }
    }
  }
  return {failed == 0, fmt("%ld interior points located from the source tet, %ld not contained", located,
                           failed)};
}

Outcome criterion10() {
  RenderConfig c = fixture_config("pane", 640, 480);
  c.accelerator = Accelerator::brute;
  RenderStats sb, st;
  const Image ref = render(c, sb);
  c.accelerator = Accelerator::tetmesh;
  const Image img = render(c, st);
  long shadow_diff = 0, refl_diff = 0, shadowed = 0, reflected = 0;
  for (std::size_t i = 0; i < ref.shadow_mask.size(); ++i) {
    shadow_diff += img.shadow_mask[i] != ref.shadow_mask[i];
    refl_diff += img.reflection_ids[i] != ref.reflection_ids[i];
    shadowed += ref.shadow_mask[i] != 0;
    reflected += ref.reflection_ids[i] >= 0;
  }
  return {shadow_diff == 0 && refl_diff == 0 && shadowed > 0 && reflected > 0,
          fmt("640x480: %ld shadowed, %ld reflected pixels; %ld shadow and %ld reflection pixels differ",
              shadowed, reflected, shadow_diff, refl_diff)};
}

}  // namespace

int main() {
  std::string model_status;
  bool from_tetgen = false;
  const std::vector<Mesh> meshes = load_meshes(model_status, from_tetgen);
  const bool have_model = meshes.size() == 4 && from_tetgen;
  std::vector<SampleSet> samples;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    samples.push_back({sample_rays(encode(meshes[i].raw, Layout::tet20), kRaysPerMesh, kSeed + i)});
  }
  std::printf("model mesh: %s\n", model_status.c_str());

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"layout byte sizes", [&] { return criterion1(meshes); }},
      {"oracle equivalence", [&] { return criterion2(meshes, samples, have_model); }},
      {"layout equivalence", [&] { return criterion3(meshes, samples); }},
      {"xor-structure integrity", [&] { return criterion4(meshes); }},
      {"scaled-basis fidelity", [&] { return criterion5(); }},
      {"arithmetic budget", [&] { return criterion6(meshes, samples); }},
      {"one point fetch per step", [&] { return criterion7(meshes, samples); }},
      {"reorder invariance and locality", [&] { return criterion8(); }},
      {"point location", [&] { return criterion9(meshes); }},
      {"shadow and reflection agreement", [&] { return criterion10(); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %s: %s (%.1fs) %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
