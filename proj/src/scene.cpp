#include "tetrt/render.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tetrt/errors.hpp"

namespace tetrt {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<double> numbers(std::string_view key, std::string_view value, std::size_t min,
                            std::size_t max) {
  std::istringstream ss{std::string(value)};
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
      throw ConfigError(std::string(key) + ": not a number: '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.size() < min || out.size() > max) {
    throw ConfigError(std::string(key) + ": expected " + std::to_string(min) +
                      (min == max ? "" : "-" + std::to_string(max)) + " numbers");
  }
  return out;
}

long integer(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": not an integer: '" + v + "'");
  }
  return out;
}

Vec3 vec3(std::string_view key, std::string_view value) {
  const auto n = numbers(key, value, 3, 3);
  return {real(n[0]), real(n[1]), real(n[2])};
}

template <class F>
auto parse_enum(std::string_view key, std::string_view value, F parse) {
  try {
    return parse(trim(value));
  } catch (const Error& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

Material parse_material(std::string_view key, std::string_view value) {
  std::istringstream ss{std::string(value)};
  std::string kind;
  ss >> kind;
  std::string rest;
  std::getline(ss, rest);
  Material m;
  if (kind == "diffuse" || kind == "mirror") {
    m.kind = kind == "diffuse" ? Material::Kind::diffuse : Material::Kind::mirror;
    if (kind == "mirror") m.albedo = {0.9f, 0.9f, 0.9f};
    if (!trim(rest).empty()) {
      const auto c = numbers(key, rest, 3, 3);
      m.albedo = {float(c[0]), float(c[1]), float(c[2])};
    }
  } else if (kind == "glass") {
    m.kind = Material::Kind::glass;
    m.albedo = {1.0f, 1.0f, 1.0f};
    if (!trim(rest).empty()) m.ior = numbers(key, rest, 1, 1)[0];
    if (!(m.ior > 0)) throw ConfigError(std::string(key) + ": ior must be positive");
  } else {
    throw ConfigError(std::string(key) + ": unknown material kind '" + kind + "'");
  }
  return m;
}

}  // namespace

std::string_view to_string(Accelerator a) {
  switch (a) {
    case Accelerator::tetmesh: return "tetmesh";
    case Accelerator::bvh: return "bvh";
    case Accelerator::brute: return "brute";
  }
  return "?";
}

Accelerator parse_accelerator(std::string_view name) {
  if (name == "tetmesh") return Accelerator::tetmesh;
  if (name == "bvh") return Accelerator::bvh;
  if (name == "brute") return Accelerator::brute;
  throw InvalidArgument("unknown accelerator '" + std::string(name) + "'");
}

void RenderConfig::check() const {
  if (width < 1 || height < 1) throw ConfigError("width and height must be at least 1");
  if (!(camera.fov_deg > 0.0 && camera.fov_deg < 180.0)) throw ConfigError("fov must lie in (0, 180)");
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  if (tile < 1) throw ConfigError("tile must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (mesh.empty() == fixture.empty()) throw ConfigError("set exactly one of mesh and fixture");
  if (!mesh.empty() && obj.empty()) throw ConfigError("a TetGen mesh needs an obj scene");
}

Material RenderConfig::material(std::uint32_t id) const {
  if (auto it = materials.find(id); it != materials.end()) return it->second;
  Material m;
  switch (id) {
    case 0: m.albedo = {0.75f, 0.25f, 0.25f}; break;
    case 1: m.albedo = {0.25f, 0.75f, 0.25f}; break;
    case 4: m.albedo = {0.7f, 0.7f, 0.7f}; break;
    default:
      if (id >= 6) m.albedo = {0.3f, 0.45f, 0.8f};
  }
  return m;
}

void apply_setting(RenderConfig& c, std::string_view key_in, std::string_view value,
                   const std::filesystem::path& base_dir) {
  const std::string key = trim(key_in);
  auto path = [&]() {
    std::filesystem::path p = trim(value);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p.string();
  };
  if (key == "mesh") c.mesh = path();
  else if (key == "obj") c.obj = path();
  else if (key == "fixture") c.fixture = trim(value);
  else if (key == "fixture_size") c.fixture_size = int(integer(key, value));
  else if (key == "layout") c.layout = parse_enum(key, value, [](const std::string& v) { return parse_layout(v); });
  else if (key == "reorder") c.reorder = parse_enum(key, value, [](const std::string& v) { return parse_reorder(v); });
  else if (key == "accelerator") c.accelerator = parse_enum(key, value, [](const std::string& v) { return parse_accelerator(v); });
  else if (key == "seed") c.seed = std::uint64_t(integer(key, value));
  else if (key == "width") c.width = int(integer(key, value));
  else if (key == "height") c.height = int(integer(key, value));
  else if (key == "camera.position") c.camera.position = vec3(key, value);
  else if (key == "camera.look_at") c.camera.look_at = vec3(key, value);
  else if (key == "camera.up") c.camera.up = vec3(key, value);
  else if (key == "camera.fov") c.camera.fov_deg = numbers(key, value, 1, 1)[0];
  else if (key == "light") {
    const auto n = numbers(key, value, 3, 4);
    c.lights.push_back({Vec3{real(n[0]), real(n[1]), real(n[2])}, n.size() > 3 ? n[3] : 1.0});
  } else if (key == "ambient") c.ambient = numbers(key, value, 1, 1)[0];
  else if (key == "max_depth") c.max_depth = int(integer(key, value));
  else if (key == "tile") c.tile = int(integer(key, value));
  else if (key == "threads") c.threads = int(integer(key, value));
  else if (key.rfind("material.", 0) == 0) {
    const long id = integer(key, std::string_view(key).substr(9));
    if (id < 0) throw ConfigError(key + ": material id must be non-negative");
    c.materials[std::uint32_t(id)] = parse_material(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

RenderConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RenderConfig config;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, std::string_view(line).substr(0, eq),
                    std::string_view(line).substr(eq + 1), path.parent_path());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

BoxFixture named_fixture(std::string_view name, int n) {
  if (name == "empty") return build_box_fixture(n);
  const int lo = std::max(1, n / 4);
  const int hi = n - lo;
  if (name == "pane") {
    if (n < 2) throw ConfigError("the pane fixture needs at least 2 cells per axis");
    const int mid = n / 2;
    const std::array<Occluder, 1> pane{Occluder{2, {lo, lo, mid}, {hi, hi, mid}, 1}};
    return build_box_fixture(n, pane);
  }
  if (name == "closed") {
    if (hi <= lo) throw ConfigError("the closed fixture needs at least 3 cells per axis");
    std::vector<Occluder> walls;
    for (int w = 0; w < 3; ++w) {
      for (int level : {lo, hi}) {
        Occluder o;
        o.axis = w;
        o.lo = {lo, lo, lo};
        o.hi = {hi, hi, hi};
        o.lo[w] = level;
        o.hi[w] = level;
        o.normal_sign = level == lo ? -1 : 1;
        walls.push_back(o);
      }
    }
    return build_box_fixture(n, walls);
  }
  throw ConfigError("unknown fixture '" + std::string(name) + "'");
}

SceneData load_scene_data(const RenderConfig& config) {
  if (!config.fixture.empty()) {
    BoxFixture fx = named_fixture(config.fixture, config.fixture_size);
    return {std::move(fx.mesh), std::move(fx.scene)};
  }
  SceneData data;
  data.scene = load_obj(config.obj);
  data.mesh = parse_tetgen(TetGenFileSet::from_stem(config.mesh));
  associate_constrained_faces(data.mesh, data.scene);
  return data;
}

}  // namespace tetrt
