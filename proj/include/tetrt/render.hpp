#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tetrt/geometry.hpp"
#include "tetrt/ingestion.hpp"
#include "tetrt/scene.hpp"
#include "tetrt/tetmesh.hpp"

namespace tetrt {

enum class Accelerator { tetmesh, bvh, brute };

std::string_view to_string(Accelerator a);
Accelerator parse_accelerator(std::string_view name);

struct Material {
  enum class Kind { diffuse, mirror, glass };
  Kind kind = Kind::diffuse;
  std::array<float, 3> albedo{0.8f, 0.8f, 0.8f};
  double ior = 1.5;
};

struct PointLight {
  Vec3 position;
  double intensity = 1.0;
};

struct Camera {
  Vec3 position{0, 0, 0};
  Vec3 look_at{0, 0, -1};
  Vec3 up{0, 0, 1};
  double fov_deg = 60.0;
};

struct RenderConfig {
  // Geometry: a TetGen stem plus an OBJ, or a built-in fixture
  // (empty | pane | closed) of `fixture_size` cells per axis.
  std::string mesh;
  std::string obj;
  std::string fixture;
  int fixture_size = 4;

  Layout layout = Layout::tet20;
  ReorderScheme reorder = ReorderScheme::none;
  Accelerator accelerator = Accelerator::tetmesh;
  std::uint64_t seed = 1;

  int width = 320;
  int height = 240;
  Camera camera;
  std::vector<PointLight> lights;
  double ambient = 0.05;
  int max_depth = 1;
  int tile = 16;
  int threads = 1;
  std::map<std::uint32_t, Material> materials;

  // Throws ConfigError unless width, height >= 1, 0 < fov < 180, depth >= 0,
  // tile >= 1 and threads >= 1.
  void check() const;
  Material material(std::uint32_t id) const;
};

// Applies `key = value`; relative paths resolve against `base_dir`.
// Throws ConfigError for unknown keys or malformed values.
void apply_setting(RenderConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

// Flat text: one `key = value` per line, '#' comments. `light` may repeat.
RenderConfig load_config(const std::filesystem::path& path);

struct SceneData {
  RawTetMesh mesh;
  SceneTriangleSoup scene;
};

// The three built-in fixtures: `empty` (no occluders), `pane` (a square pane
// in the plane z = n/2), `closed` (the boundary of the middle box [n/4, 3n/4]^3).
BoxFixture named_fixture(std::string_view name, int n);

SceneData load_scene_data(const RenderConfig& config);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;                    // linear, 3 per pixel
  std::vector<std::int64_t> primary_ids;     // triangle id, -1 for a miss
  std::vector<std::uint32_t> shadow_mask;    // bit l set: light l occluded at the primary hit
  std::vector<std::int64_t> reflection_ids;  // first-bounce mirror hit, -1 miss, -2 not spawned
};

struct RenderStats {
  std::map<std::string, double> wall_time;        // seconds per phase
  std::map<std::string, std::uint64_t> rays_traced;  // per ray type
  double visited_tets_mean = 0.0;
  std::uint64_t visited_tets_max = 0;
  std::uint64_t accelerator_bytes = 0;
  double locality_metric = 0.0;  // mean |index step| between consecutive tets

  nlohmann::json to_json() const;
};

// Loaded scene bound to one accelerator. Safe to render from several threads.
class Renderer {
 public:
  Renderer(const RenderConfig& config, const SceneData& data);
  ~Renderer();
  Renderer(const Renderer&) = delete;
  Renderer& operator=(const Renderer&) = delete;

  // Locates camera and lights, then shades every pixel tile by tile.
  Image render(RenderStats& stats) const;

  const CompactMesh& mesh() const;
  std::size_t accelerator_bytes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Image render(const RenderConfig& config, RenderStats& stats);

// Binary P6, 8-bit sRGB after clamping to [0, 1].
void write_image(const Image& image, const std::filesystem::path& path);

// Mean |a - b| over consecutive tet pairs of every camera-ray walk.
double locality_metric(const CompactMesh& mesh, const SceneTriangleSoup& scene,
                       const RenderConfig& config);

struct BenchOptions {
  int runs = 5;
  std::vector<Layout> layouts{Layout::tet32, Layout::tet20, Layout::tet16};
  std::vector<ReorderScheme> reorders{ReorderScheme::none, ReorderScheme::hilbert,
                                      ReorderScheme::hilbert_regions};
  std::vector<Accelerator> accelerators{Accelerator::tetmesh, Accelerator::bvh,
                                        Accelerator::brute};
};

// Best-of-R timings for every combination plus the locality metric for each
// reorder scheme and a shuffled baseline.
nlohmann::json bench(const RenderConfig& base, const BenchOptions& options);

}  // namespace tetrt
