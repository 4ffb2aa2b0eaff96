#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tetrt/errors.hpp"
#include "tetrt/ingestion.hpp"
#include "tetrt/mesh_io.hpp"
#include "tetrt/render.hpp"
#include "tetrt/tetmesh.hpp"

namespace fs = std::filesystem;
using namespace tetrt;

namespace {

struct SceneArgs {
  std::string scene;
  std::string mesh;
  std::string obj;
  std::string fixture;
  int fixture_size = 0;
  std::string layout;
  std::string reorder;
  std::string accelerator;
  int width = 0;
  int height = 0;
  int threads = 0;
  int tile = 0;
  std::vector<std::string> settings;

  void add(CLI::App* app) {
    app->add_option("--scene", scene, "Config file (key = value), or an OBJ scene");
    app->add_option("--mesh", mesh, "TetGen mesh: stem or .node file");
    app->add_option("--obj", obj, "OBJ scene for a TetGen mesh");
    app->add_option("--fixture", fixture, "Built-in fixture: empty, pane or closed");
    app->add_option("--fixture-size", fixture_size, "Cells per axis for --fixture");
    app->add_option("--layout", layout, "tet32, tet20 or tet16");
    app->add_option("--reorder", reorder, "none, hilbert or hilbert_regions");
    app->add_option("--accelerator", accelerator, "tetmesh, bvh or brute");
    app->add_option("--width", width);
    app->add_option("--height", height);
    app->add_option("--threads", threads);
    app->add_option("--tile", tile);
    app->add_option("--set", settings, "Extra key=value config entries");
  }

  RenderConfig config() const {
    RenderConfig c;
    if (!scene.empty()) {
      if (fs::path(scene).extension() == ".obj") c.obj = scene;
      else c = load_config(scene);
    }
    auto set = [&](const char* key, const std::string& value) {
      if (!value.empty()) apply_setting(c, key, value);
    };
    if (!mesh.empty()) {
      fs::path m = mesh;
      if (m.extension() == ".node") m.replace_extension();
      c.mesh = m.string();
      c.fixture.clear();
    }
    set("obj", obj);
    if (!fixture.empty()) {
      c.fixture = fixture;
      c.mesh.clear();
    }
    if (fixture_size > 0) c.fixture_size = fixture_size;
    set("layout", layout);
    set("reorder", reorder);
    set("accelerator", accelerator);
    if (width > 0) c.width = width;
    if (height > 0) c.height = height;
    if (threads > 0) c.threads = threads;
    if (tile > 0) c.tile = tile;
    for (const std::string& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
  }
};

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

template <class T>
std::vector<T> parse_list(const std::vector<std::string>& names, T (*parse)(std::string_view),
                          std::vector<T> fallback) {
  if (names.empty()) return fallback;
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ray tracing with compact tetrahedral meshes"};
  app.require_subcommand(1);

  SceneArgs render_args;
  std::string render_out = "render.ppm";
  std::string render_stats;
  auto* render_cmd = app.add_subcommand("render", "Render an image");
  render_args.add(render_cmd);
  render_cmd->add_option("--out", render_out, "PPM output");
  render_cmd->add_option("--stats", render_stats, "JSON stats output ('-' for stdout)");

  SceneArgs bench_args;
  int runs = 5;
  std::string bench_out;
  std::vector<std::string> layouts, reorders, accelerators;
  auto* bench_cmd = app.add_subcommand("bench", "Time every accelerator/layout/reorder combination");
  bench_args.add(bench_cmd);
  bench_cmd->add_option("--runs", runs, "Renders per combination; the best is reported");
  bench_cmd->add_option("--layouts", layouts);
  bench_cmd->add_option("--reorders", reorders);
  bench_cmd->add_option("--accelerators", accelerators);
  bench_cmd->add_option("--out", bench_out, "JSON report (stdout when omitted)");

  SceneArgs convert_args;
  std::string convert_out;
  std::string tetgen_out;
  auto* convert_cmd = app.add_subcommand("convert", "TetGen (or fixture) to a compact binary mesh");
  convert_args.add(convert_cmd);
  convert_cmd->add_option("--out", convert_out, "Compact mesh output");
  convert_cmd->add_option("--tetgen-out", tetgen_out, "Also write the raw mesh as a TetGen fileset stem");

  SceneArgs validate_args;
  std::string compact_in;
  auto* validate_cmd = app.add_subcommand("validate", "Mesh integrity report");
  validate_args.add(validate_cmd);
  validate_cmd->add_option("--compact", compact_in, "Compact mesh written by convert");

  CLI11_PARSE(app, argc, argv);

  try {
    if (render_cmd->parsed()) {
      const RenderConfig cfg = render_args.config();
      RenderStats stats;
      const Image img = render(cfg, stats);
      write_image(img, render_out);
      if (!render_stats.empty()) write_json(stats.to_json(), render_stats);
      return 0;
    }
    if (bench_cmd->parsed()) {
      const RenderConfig cfg = bench_args.config();
      BenchOptions opts;
      opts.runs = runs;
      opts.layouts = parse_list<Layout>(layouts, parse_layout, opts.layouts);
      opts.reorders = parse_list<ReorderScheme>(reorders, parse_reorder, opts.reorders);
      opts.accelerators = parse_list<Accelerator>(accelerators, parse_accelerator, opts.accelerators);
      write_json(bench(cfg, opts), bench_out);
      return 0;
    }
    if (convert_cmd->parsed()) {
      RenderConfig cfg = convert_args.config();
      if (cfg.mesh.empty() == cfg.fixture.empty()) throw ConfigError("give exactly one of --mesh and --fixture");
      SceneData data;
      if (!cfg.fixture.empty()) {
        data = load_scene_data(cfg);
      } else {
        data.mesh = parse_tetgen(TetGenFileSet::from_stem(cfg.mesh));
        if (!cfg.obj.empty()) {
          data.scene = load_obj(cfg.obj);
          associate_constrained_faces(data.mesh, data.scene);
        }
      }
      if (!tetgen_out.empty()) write_tetgen(data.mesh, tetgen_out);
      if (!convert_out.empty()) {
        CompactMesh mesh = encode(data.mesh, cfg.layout);
        if (cfg.reorder != ReorderScheme::none) mesh = reorder(mesh, cfg.reorder, cfg.seed);
        save_compact(mesh, convert_out);
        std::cout << convert_out << ": " << mesh.tet_count() << " tets, " << to_string(mesh.layout())
                  << ", " << mesh.accelerator_bytes() << " accelerator bytes\n";
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      ValidationReport report;
      std::size_t tets = 0;
      if (!compact_in.empty()) {
        const CompactMesh mesh = load_compact(compact_in);
        tets = mesh.tet_count();
        report = validate(mesh);
      } else {
        RenderConfig cfg = validate_args.config();
        SceneData data;
        if (!cfg.fixture.empty()) {
          data = load_scene_data(cfg);
        } else {
          if (cfg.mesh.empty()) throw ConfigError("give --mesh, --fixture or --compact");
          data.mesh = parse_tetgen(TetGenFileSet::from_stem(cfg.mesh));
          if (!cfg.obj.empty()) {
            data.scene = load_obj(cfg.obj);
            associate_constrained_faces(data.mesh, data.scene);
          }
        }
        tets = data.mesh.tets.size();
        report = validate(data.mesh);
        if (report.ok()) report = validate(encode(data.mesh, cfg.layout));
      }
      std::cout << tets << " tets: " << report.summary() << '\n';
      return report.ok() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
