#include "tetrt/render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "tetrt/errors.hpp"
#include "tetrt/reference.hpp"
#include "tetrt/traversal.hpp"

namespace tetrt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Offset that keeps BVH and brute-force secondaries off their own surface.
constexpr double kSecondaryTMin = 1e-6;

struct Counters {
  std::uint64_t camera = 0;
  std::uint64_t shadow = 0;
  std::uint64_t reflection = 0;
  std::uint64_t refraction = 0;
  std::uint64_t walks = 0;
  std::uint64_t visited = 0;
  std::uint64_t visited_max = 0;
  std::uint64_t steps = 0;
  std::uint64_t step_distance = 0;

  void walk(std::uint64_t v) {
    ++walks;
    visited += v;
    visited_max = std::max(visited_max, v);
  }

  void merge(const Counters& o) {
    camera += o.camera;
    shadow += o.shadow;
    reflection += o.reflection;
    refraction += o.refraction;
    walks += o.walks;
    visited += o.visited;
    visited_max = std::max(visited_max, o.visited_max);
    steps += o.steps;
    step_distance += o.step_distance;
  }
};

struct Surface {
  std::uint32_t triangle = 0;
  double t = 0.0;
  Vec3d point;
  HitRecord record;  // tetmesh only
};

struct CameraFrame {
  Vec3d origin, forward, right, up;
  double tan_half = 1.0;
  double aspect = 1.0;

  CameraFrame(const Camera& c, int width, int height) {
    origin = c.position.as<double>();
    forward = c.look_at.as<double>() - origin;
    if (length(forward) == 0.0) throw ConfigError("camera position equals look_at");
    forward = normalize(forward);
    right = cross(forward, c.up.as<double>());
    if (length(right) == 0.0) throw ConfigError("camera up is parallel to the view direction");
    right = normalize(right);
    up = cross(right, forward);
    tan_half = std::tan(c.fov_deg * 0.5 * 3.14159265358979323846 / 180.0);
    aspect = double(width) / double(height);
  }

  Ray ray(int x, int y, int width, int height) const {
    const double sx = (2.0 * (x + 0.5) / width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * (y + 0.5) / height) * tan_half;
    const Vec3d d = normalize(forward + right * sx + up * sy);
    return Ray{origin.as<real>(), d.as<real>()};
  }
};

}  // namespace

struct Renderer::Impl {
  RenderConfig config;
  SceneTriangleSoup scene;
  CompactMesh mesh;
  std::optional<reference::Bvh> bvh;
  double build_seconds = 0.0;

  Impl(const RenderConfig& c, const SceneData& data) : config(c), scene(data.scene) {
    const auto start = Clock::now();
    switch (config.accelerator) {
      case Accelerator::tetmesh:
        mesh = encode(data.mesh, config.layout);
        if (config.reorder != ReorderScheme::none) mesh = reorder(mesh, config.reorder, config.seed);
        break;
      case Accelerator::bvh:
        bvh.emplace(scene);
        break;
      case Accelerator::brute:
        break;
    }
    build_seconds = seconds_since(start);
  }

  std::size_t bytes() const {
    switch (config.accelerator) {
      case Accelerator::tetmesh: return mesh.accelerator_bytes();
      case Accelerator::bvh: return bvh->bytes();
      case Accelerator::brute: break;
    }
    return scene.vertices.size() * sizeof(Vec3) +
           scene.triangles.size() * sizeof(std::array<std::uint32_t, 3>);
  }

  Vec3d facing_normal(std::uint32_t tri, const Vec3d& d) const {
    const Vec3d n = normalize(scene.normal(tri));
    return dot(n, d) < 0.0 ? n : -n;
  }

  std::optional<Surface> from_reference(const std::optional<reference::Hit>& h, const Ray& ray) const {
    if (!h) return std::nullopt;
    Surface s;
    s.triangle = h->triangle_id;
    s.t = h->t;
    s.point = ray.origin.as<double>() + ray.direction.as<double>() * h->t;
    return s;
  }

  std::optional<Surface> from_cast(const CastResult& r, Counters& counters) const {
    counters.walk(r.visited_tets);
    if (!r.hit) return std::nullopt;
    Surface s;
    s.triangle = r.hit->triangle_id;
    s.t = r.hit->t;
    s.point = r.hit->hit_point;
    s.record = *r.hit;
    return s;
  }

  std::optional<Surface> reference_cast(const Ray& ray, double t_min, std::uint32_t skip) const {
    const Rayd r{ray.origin.as<double>(), ray.direction.as<double>()};
    if (config.accelerator == Accelerator::bvh) return from_reference(bvh->cast(r, t_min, skip), ray);
    return from_reference(reference::brute_force_cast(r, scene, t_min, skip), ray);
  }

  std::optional<Surface> camera_cast(const Ray& ray, std::uint32_t camera_tet, Counters& counters,
                                     std::vector<std::uint32_t>& trace) const {
    ++counters.camera;
    if (config.accelerator != Accelerator::tetmesh) return reference_cast(ray, 0.0, reference::kNoTriangle);
    trace.clear();
    const CastResult r = cast_ray(ray, camera_tet, mesh, scene, &trace);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const std::int64_t step = std::int64_t(trace[i]) - std::int64_t(trace[i - 1]);
      counters.step_distance += std::uint64_t(step < 0 ? -step : step);
      ++counters.steps;
    }
    return from_cast(r, counters);
  }

  // Secondary ray leaving `from`; nullopt ray means no ray is spawned.
  std::optional<Surface> secondary_cast(const Surface& from, const Ray& incident, SecondaryKind kind,
                                        double ior, bool& spawned, Ray& used,
                                        Counters& counters) const {
    spawned = false;
    if (config.accelerator == Accelerator::tetmesh) {
      const auto sec = spawn_secondary(from.record, incident, kind, mesh, scene, ior);
      if (!sec) return std::nullopt;
      spawned = true;
      used = sec->ray;
      ++(kind == SecondaryKind::reflection ? counters.reflection : counters.refraction);
      return from_cast(cast_secondary(*sec, mesh, scene), counters);
    }
    const Vec3d d = normalize(incident.direction.as<double>());
    const Vec3d n = facing_normal(from.triangle, d);
    Vec3d dir = reflect(d, n);
    if (kind == SecondaryKind::refraction) {
      const bool front = dot(normalize(scene.normal(from.triangle)), d) < 0.0;
      Vec3d r;
      if (refract(d, n, front ? 1.0 / ior : ior, r)) dir = r;
    }
    spawned = true;
    used = Ray{from.point.as<real>(), dir.as<real>()};
    ++(kind == SecondaryKind::reflection ? counters.reflection : counters.refraction);
    return reference_cast(used, kSecondaryTMin, from.triangle);
  }

  bool occluded(const Surface& at, std::size_t light, std::uint32_t light_tet,
                Counters& counters) const {
    ++counters.shadow;
    const Vec3 from = at.point.as<real>();
    const Vec3 to = config.lights[light].position;
    if (config.accelerator == Accelerator::tetmesh) {
      std::uint32_t visited = 0;
      const bool hit = cast_shadow_ray(from, at.record.tet_front, to, light_tet, mesh, scene, &visited);
      counters.walk(visited);
      return hit;
    }
    const Rayd seg{from.as<double>(), (to - from).as<double>()};
    if (config.accelerator == Accelerator::bvh) {
      return bvh->occluded(seg, kShadowEpsilon, 1.0 - kShadowEpsilon);
    }
    return reference::brute_force_occluded(seg, scene, kShadowEpsilon, 1.0 - kShadowEpsilon);
  }

  // Direct light at a diffuse surface; sets bit l of `mask` when light l is occluded.
  std::array<float, 3> direct(const Surface& s, const Vec3d& d, const Material& m,
                              const std::vector<std::uint32_t>& light_tets, std::uint32_t& mask,
                              Counters& counters) const {
    const Vec3d n = facing_normal(s.triangle, d);
    double sum = config.ambient;
    for (std::size_t l = 0; l < config.lights.size(); ++l) {
      const Vec3d to = config.lights[l].position.as<double>() - s.point;
      const double dist2 = dot(to, to);
      const double cos_l = dot(n, to) / std::sqrt(dist2);
      if (!(cos_l > 0.0)) {
        mask |= 1u << (l & 31);
        continue;
      }
      if (occluded(s, l, light_tets[l], counters)) {
        mask |= 1u << (l & 31);
        continue;
      }
      sum += config.lights[l].intensity * cos_l / std::max(dist2, 1e-12);
    }
    return {float(m.albedo[0] * sum), float(m.albedo[1] * sum), float(m.albedo[2] * sum)};
  }

  std::array<float, 3> shade(const std::optional<Surface>& s, const Ray& ray, int depth,
                             const std::vector<std::uint32_t>& light_tets, std::uint32_t* mask_out,
                             std::int64_t* reflection_out, Counters& counters) const {
    if (!s) return {0.0f, 0.0f, 0.0f};
    const Material m = config.material(scene.material(s->triangle));
    const Vec3d d = normalize(ray.direction.as<double>());
    if (m.kind == Material::Kind::diffuse) {
      std::uint32_t mask = 0;
      const auto c = direct(*s, d, m, light_tets, mask, counters);
      if (mask_out) *mask_out = mask;
      return c;
    }
    if (depth >= config.max_depth) return {0.0f, 0.0f, 0.0f};
    const SecondaryKind kind =
        m.kind == Material::Kind::mirror ? SecondaryKind::reflection : SecondaryKind::refraction;
    bool spawned = false;
    Ray child;
    const auto next = secondary_cast(*s, ray, kind, m.ior, spawned, child, counters);
    if (!spawned) return {0.0f, 0.0f, 0.0f};
    if (reflection_out && kind == SecondaryKind::reflection) {
      *reflection_out = next ? std::int64_t(next->triangle) : -1;
    }
    const auto c = shade(next, child, depth + 1, light_tets, nullptr, nullptr, counters);
    return {m.albedo[0] * c[0], m.albedo[1] * c[1], m.albedo[2] * c[2]};
  }
};

Renderer::Renderer(const RenderConfig& config, const SceneData& data)
    : impl_((config.check(), std::make_unique<Impl>(config, data))) {}

Renderer::~Renderer() = default;

const CompactMesh& Renderer::mesh() const { return impl_->mesh; }
std::size_t Renderer::accelerator_bytes() const { return impl_->bytes(); }

Image Renderer::render(RenderStats& stats) const {
  const Impl& im = *impl_;
  const RenderConfig& cfg = im.config;
  stats.wall_time["build"] = im.build_seconds;
  stats.accelerator_bytes = im.bytes();

  auto start = Clock::now();
  std::uint32_t camera_tet = kNoTet;
  std::vector<std::uint32_t> light_tets(cfg.lights.size(), kNoTet);
  if (cfg.accelerator == Accelerator::tetmesh) {
    const auto cam = locate_point(cfg.camera.position, im.mesh, im.mesh.source_tet);
    if (!cam) throw ConfigError("camera lies outside the mesh");
    camera_tet = *cam;
    for (std::size_t l = 0; l < cfg.lights.size(); ++l) {
      const auto t = locate_point(cfg.lights[l].position, im.mesh, im.mesh.source_tet);
      if (!t) throw ConfigError("light " + std::to_string(l) + " lies outside the mesh");
      light_tets[l] = *t;
    }
  }
  stats.wall_time["locate"] = seconds_since(start);

  Image img;
  img.width = cfg.width;
  img.height = cfg.height;
  const std::size_t pixels = std::size_t(cfg.width) * std::size_t(cfg.height);
  img.rgb.assign(pixels * 3, 0.0f);
  img.primary_ids.assign(pixels, -1);
  img.shadow_mask.assign(pixels, 0);
  img.reflection_ids.assign(pixels, -2);

  const CameraFrame frame(cfg.camera, cfg.width, cfg.height);
  const int tiles_x = (cfg.width + cfg.tile - 1) / cfg.tile;
  const int tiles_y = (cfg.height + cfg.tile - 1) / cfg.tile;
  const int tiles = tiles_x * tiles_y;
  std::atomic<int> next_tile{0};
  std::mutex merge_mutex;
  Counters total;
  std::exception_ptr failure;

  auto worker = [&]() {
    Counters local;
    std::vector<std::uint32_t> trace;
    try {
      for (int tile = next_tile++; tile < tiles; tile = next_tile++) {
        const int x0 = (tile % tiles_x) * cfg.tile;
        const int y0 = (tile / tiles_x) * cfg.tile;
        for (int y = y0; y < std::min(y0 + cfg.tile, cfg.height); ++y) {
          for (int x = x0; x < std::min(x0 + cfg.tile, cfg.width); ++x) {
            const std::size_t p = std::size_t(y) * cfg.width + x;
            const Ray ray = frame.ray(x, y, cfg.width, cfg.height);
            const auto hit = im.camera_cast(ray, camera_tet, local, trace);
            img.primary_ids[p] = hit ? std::int64_t(hit->triangle) : -1;
            const auto c = im.shade(hit, ray, 0, light_tets, &img.shadow_mask[p],
                                    &img.reflection_ids[p], local);
            for (int k = 0; k < 3; ++k) img.rgb[3 * p + k] = c[k];
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      next_tile = tiles;
    }
    std::lock_guard lock(merge_mutex);
    total.merge(local);
  };

  start = Clock::now();
  const int nthreads = std::min(cfg.threads, std::max(1, tiles));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  stats.wall_time["render"] = seconds_since(start);

  stats.rays_traced["camera"] = total.camera;
  stats.rays_traced["shadow"] = total.shadow;
  stats.rays_traced["reflection"] = total.reflection;
  stats.rays_traced["refraction"] = total.refraction;
  stats.visited_tets_mean = total.walks ? double(total.visited) / double(total.walks) : 0.0;
  stats.visited_tets_max = total.visited_max;
  stats.locality_metric = total.steps ? double(total.step_distance) / double(total.steps) : 0.0;
  return img;
}

nlohmann::json RenderStats::to_json() const {
  nlohmann::json j;
  j["wall_time"] = wall_time;
  j["rays_traced"] = rays_traced;
  j["visited_tets"] = {{"mean", visited_tets_mean}, {"max", visited_tets_max}};
  j["accelerator_bytes"] = accelerator_bytes;
  j["locality_metric"] = locality_metric;
  return j;
}

Image render(const RenderConfig& config, RenderStats& stats) {
  config.check();
  const auto start = Clock::now();
  const SceneData data = load_scene_data(config);
  stats.wall_time["load"] = seconds_since(start);
  const Renderer renderer(config, data);
  return renderer.render(stats);
}

namespace {

std::uint8_t to_srgb8(float linear) {
  const double c = std::clamp(double(linear), 0.0, 1.0);
  const double s = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
  return static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_image(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<std::uint8_t> bytes(image.rgb.size());
  std::transform(image.rgb.begin(), image.rgb.end(), bytes.begin(), to_srgb8);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

double locality_metric(const CompactMesh& mesh, const SceneTriangleSoup& scene,
                       const RenderConfig& config) {
  const auto cam = locate_point(config.camera.position, mesh, mesh.source_tet);
  if (!cam) throw ConfigError("camera lies outside the mesh");
  const CameraFrame frame(config.camera, config.width, config.height);
  std::vector<std::uint32_t> trace;
  std::uint64_t steps = 0;
  std::uint64_t distance = 0;
  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) {
      trace.clear();
      cast_ray(frame.ray(x, y, config.width, config.height), *cam, mesh, scene, &trace);
      for (std::size_t i = 1; i < trace.size(); ++i) {
        const std::int64_t step = std::int64_t(trace[i]) - std::int64_t(trace[i - 1]);
        distance += std::uint64_t(step < 0 ? -step : step);
        ++steps;
      }
    }
  }
  return steps ? double(distance) / double(steps) : 0.0;
}

nlohmann::json bench(const RenderConfig& base, const BenchOptions& options) {
  base.check();
  if (options.runs < 1) throw ConfigError("bench needs at least one run");
  const SceneData data = load_scene_data(base);
  nlohmann::json report;
  report["runs"] = options.runs;
  report["width"] = base.width;
  report["height"] = base.height;
  report["tet_count"] = data.mesh.tets.size();
  report["point_count"] = data.mesh.points.size();
  report["triangle_count"] = data.scene.size();
  report["results"] = nlohmann::json::array();

  std::optional<std::vector<std::int64_t>> reference_ids;
  auto run = [&](const RenderConfig& cfg) {
    const auto build_start = Clock::now();
    const Renderer renderer(cfg, data);
    const double build = seconds_since(build_start);
    double best = std::numeric_limits<double>::infinity();
    RenderStats stats;
    Image img;
    for (int r = 0; r < options.runs; ++r) {
      RenderStats s;
      const auto start = Clock::now();
      img = renderer.render(s);
      best = std::min(best, seconds_since(start));
      stats = s;
    }
    if (!reference_ids) reference_ids = img.primary_ids;
    nlohmann::json row;
    row["accelerator"] = to_string(cfg.accelerator);
    if (cfg.accelerator == Accelerator::tetmesh) {
      row["layout"] = to_string(cfg.layout);
      row["reorder"] = to_string(cfg.reorder);
      row["tet_count"] = renderer.mesh().tet_count();
      row["tet_bytes"] = renderer.mesh().tet_bytes();
      row["point_bytes"] = renderer.mesh().point_bytes();
      row["record_bytes"] = record_bytes(cfg.layout);
      row["locality_metric"] = stats.locality_metric;
      row["visited_tets"] = {{"mean", stats.visited_tets_mean}, {"max", stats.visited_tets_max}};
    }
    row["build_seconds"] = build;
    row["best_seconds"] = best;
    row["accelerator_bytes"] = stats.accelerator_bytes;
    row["rays_traced"] = stats.rays_traced;
    row["hit_ids_match_first"] = img.primary_ids == *reference_ids;
    report["results"].push_back(row);
  };

  for (Accelerator a : options.accelerators) {
    RenderConfig cfg = base;
    cfg.accelerator = a;
    if (a != Accelerator::tetmesh) {
      run(cfg);
      continue;
    }
    for (ReorderScheme s : options.reorders) {
      for (Layout l : options.layouts) {
        cfg.reorder = s;
        cfg.layout = l;
        run(cfg);
      }
    }
  }

  nlohmann::json locality;
  const CompactMesh plain = encode(data.mesh, base.layout);
  for (ReorderScheme s : {ReorderScheme::none, ReorderScheme::hilbert, ReorderScheme::hilbert_regions,
                          ReorderScheme::shuffle}) {
    const CompactMesh m = s == ReorderScheme::none ? plain : reorder(plain, s, base.seed);
    locality[std::string(to_string(s))] = locality_metric(m, data.scene, base);
  }
  report["locality_metric"] = locality;
  return report;
}

}  // namespace tetrt
