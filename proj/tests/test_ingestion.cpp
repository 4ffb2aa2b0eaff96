#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"
#include "tetrt/ingestion.hpp"

using namespace tetrt;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& f) const { return path_ / f; }

  fs::path write(const std::string& name, const std::string& body) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << body;
    return p;
  }

 private:
  fs::path path_;
};

// Two tets sharing face (1, 2, 3); the shared face carries marker 5.
void write_two_tets(const TempDir& dir, int base, bool with_neigh = true, bool with_face = true) {
  auto i = [&](int k) { return std::to_string(k + base); };
  dir.write("two.node", "# points\n5 3 0 0\n" + i(0) + " 0 0 0\n" + i(1) + " 1 0 0\n" + i(2) +
                            " 0 1 0\n" + i(3) + " 0 0 1\n" + i(4) + " 1 1 1\n");
  dir.write("two.ele", "2 4 0\n" + i(0) + " " + i(0) + " " + i(1) + " " + i(2) + " " + i(3) +
                           "\n" + i(1) + " " + i(1) + " " + i(2) + " " + i(3) + " " + i(4) + "\n");
  if (with_neigh) {
    dir.write("two.neigh", "2 4\n" + i(0) + " " + i(1) + " -1 -1 -1\n" + i(1) + " -1 -1 -1 " +
                               i(0) + "\n");
  }
  if (with_face) {
    dir.write("two.face", "2 1\n" + i(0) + " " + i(1) + " " + i(2) + " " + i(3) + " 5\n" + i(1) +
                              " " + i(0) + " " + i(1) + " " + i(2) + " 0\n");
  }
}

template <class F>
ParseError expect_parse_error(F f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError");
  return ParseError("", 0, "");
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("two-tet TetGen set") {
  TempDir dir("tetrt_two_tets");
  write_two_tets(dir, 0);
  const TetGenFileSet files = TetGenFileSet::from_stem(dir / "two");
  CHECK_FALSE(files.neigh.empty());
  CHECK_FALSE(files.face.empty());
  const RawTetMesh m = parse_tetgen(files);
  CHECK(m.points.size() == 5);
  REQUIRE(m.tets.size() == 2);
  REQUIRE(m.constrained_faces.size() == 1);
  const ConstrainedFace& f = m.constrained_faces[0];
  CHECK(f.triangle_id == 4);
  CHECK(std::set<std::uint32_t>{f.tet_front, f.tet_back} == std::set<std::uint32_t>{0, 1});
  int constrained = 0, boundary = 0;
  for (const auto& nb : m.neighbors) {
    for (const NeighborRef r : nb) {
      constrained += r.is_constrained();
      boundary += r.is_boundary();
    }
  }
  CHECK(constrained == 2);
  CHECK(boundary == 6);
  CHECK(validate(m).ok());
}

TEST_CASE("one-based indices and missing optional files") {
  TempDir dir("tetrt_two_tets_1");
  write_two_tets(dir, 1);
  const RawTetMesh one = parse_tetgen(TetGenFileSet::from_stem(dir / "two"));
  CHECK(one.tets.size() == 2);
  CHECK(one.constrained_faces.size() == 1);
  CHECK(one.points[0].x == 0.0f);
  CHECK(one.points[4].z == 1.0f);

  TempDir bare("tetrt_two_tets_bare");
  write_two_tets(bare, 0, false, false);
  const TetGenFileSet files = TetGenFileSet::from_stem(bare / "two");
  CHECK(files.neigh.empty());
  CHECK(files.face.empty());
  const RawTetMesh m = parse_tetgen(files);
  CHECK(m.constrained_faces.empty());
  int links = 0;
  for (const auto& nb : m.neighbors) {
    for (const NeighborRef r : nb) links += r.is_tet();
  }
  CHECK(links == 2);
}

TEST_CASE("negative markers use the row index") {
  TempDir dir("tetrt_two_tets_neg");
  write_two_tets(dir, 0);
  dir.write("two.face", "2 1\n0 0 1 2 0\n1 1 2 3 -1\n");
  const RawTetMesh m = parse_tetgen(TetGenFileSet::from_stem(dir / "two"));
  REQUIRE(m.constrained_faces.size() == 1);
  CHECK(m.constrained_faces[0].triangle_id == 1);
}

TEST_CASE("parse errors name file and line") {
  TempDir dir("tetrt_bad_sets");
  SUBCASE("too few tetrahedra") {
    write_two_tets(dir, 0);
    dir.write("two.ele", "3 4 0\n0 0 1 2 3\n1 1 2 3 4\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.ele").string());
    CHECK(e.line() == 3);
  }
  SUBCASE("vertex index out of range") {
    write_two_tets(dir, 0);
    dir.write("two.ele", "2 4 0\n0 0 1 2 3\n1 1 2 3 7\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.ele").string());
    CHECK(e.line() == 3);
  }
  SUBCASE("asymmetric neighbors") {
    write_two_tets(dir, 0);
    dir.write("two.neigh", "2 4\n0 1 -1 -1 -1\n1 -1 -1 -1 -1\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.neigh").string());
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("asymmetry") != std::string::npos);
  }
  SUBCASE("neighbor across the wrong face") {
    write_two_tets(dir, 0);
    dir.write("two.neigh", "2 4\n0 -1 1 -1 -1\n1 -1 0 -1 -1\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.neigh").string());
  }
  SUBCASE("constrained face not in the mesh") {
    write_two_tets(dir, 0);
    dir.write("two.face", "1 1\n0 0 1 4 3\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.face").string());
    CHECK(e.line() == 2);
  }
  SUBCASE("index base other than 0 or 1") {
    write_two_tets(dir, 2);
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.file() == (dir / "two.node").string());
  }
  SUBCASE("malformed number") {
    write_two_tets(dir, 0);
    dir.write("two.node", "5 3 0 0\n0 0 0 0\n1 1 0 x\n2 0 1 0\n3 0 0 1\n4 1 1 1\n");
    const ParseError e = expect_parse_error([&] { parse_tetgen(TetGenFileSet::from_stem(dir / "two")); });
    CHECK(e.line() == 3);
  }
  SUBCASE("missing node file") {
    CHECK_THROWS_AS(parse_tetgen(TetGenFileSet::from_stem(dir / "nothing")), ParseError);
  }
}

TEST_CASE("TetGen round trip through the writer") {
  TempDir dir("tetrt_roundtrip");
  for (const auto& nf : testing::standard_fixtures()) {
    write_tetgen(nf.fixture.mesh, dir / nf.name);
    RawTetMesh back = parse_tetgen(TetGenFileSet::from_stem(dir / nf.name));
    CAPTURE(nf.name);
    CHECK(validate(back).ok());
    CHECK(back.points.size() == nf.fixture.mesh.points.size());
    CHECK(back.tets == nf.fixture.mesh.tets);
    CHECK(back.neighbors == nf.fixture.mesh.neighbors);
    REQUIRE(back.constrained_faces.size() == nf.fixture.mesh.constrained_faces.size());
    for (std::size_t i = 0; i < back.constrained_faces.size(); ++i) {
      CHECK(back.constrained_faces[i].triangle_id == nf.fixture.mesh.constrained_faces[i].triangle_id);
    }
    associate_constrained_faces(back, nf.fixture.scene);
  }
}

TEST_CASE("OBJ loading") {
  TempDir dir("tetrt_obj");
  SUBCASE("quad fans into two triangles") {
    const auto s = load_obj(dir.write("quad.obj", "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"));
    CHECK(s.size() == 2);
    CHECK(s.triangles[0] == std::array<std::uint32_t, 3>{0, 1, 2});
    CHECK(s.triangles[1] == std::array<std::uint32_t, 3>{0, 2, 3});
  }
  SUBCASE("cube") {
    std::string body;
    for (int i = 0; i < 8; ++i) {
      body += "v " + std::to_string(i & 1) + " " + std::to_string((i >> 1) & 1) + " " +
              std::to_string((i >> 2) & 1) + "\n";
    }
    body += "vn 0 0 1\nvt 0 0\ng cube\ns off\n";
    body += "f 1/1/1 3/1/1 4/1/1 2/1/1\nf 5 6 8 7\nf 1 2 6 5\nf 3 7 8 4\nf 1 5 7 3\nf 2 4 8 6\n";
    const auto s = load_obj(dir.write("cube.obj", body));
    CHECK(s.size() == 12);
    CHECK(s.vertices.size() == 8);
  }
  SUBCASE("negative indices, comments and materials") {
    const auto s = load_obj(dir.write("m.obj",
                                      "mtllib x.mtl\nv 0 0 0 # origin\nv 1 0 0\nv 0 1 0\n"
                                      "usemtl red\nf -3 -2 -1\nusemtl blue\nf 1 3 2\nusemtl red\nf 2 3 1\n"));
    CHECK(s.size() == 3);
    CHECK(s.triangles[0] == std::array<std::uint32_t, 3>{0, 1, 2});
    CHECK(s.material_ids == std::vector<std::uint32_t>{0, 1, 0});
  }
  SUBCASE("errors") {
    const auto e1 = expect_parse_error([&] { load_obj(dir.write("a.obj", "v 0 0 0\nf 1 2 3\n")); });
    CHECK(e1.line() == 2);
    const auto e2 = expect_parse_error([&] { load_obj(dir.write("b.obj", "v 0 0 0\ncurv 1 2\n")); });
    CHECK(e2.line() == 2);
    const auto e3 = expect_parse_error(
        [&] { load_obj(dir.write("c.obj", "v 0 0 0\nv 1 1 1\nv 2 2 2\nf 1 2 3\n")); });
    CHECK(e3.line() == 4);
    CHECK_THROWS_AS(load_obj(dir / "missing.obj"), ParseError);
  }
  SUBCASE("writer round trip") {
    const auto fx = named_fixture("closed", 4);
    write_obj(fx.scene, dir / "closed.obj");
    const auto s = load_obj(dir / "closed.obj");
    CHECK(s.triangles == fx.scene.triangles);
    CHECK(s.vertices == fx.scene.vertices);
    CHECK(s.material_ids == fx.scene.material_ids);
  }
}

TEST_CASE("box fixtures") {
  const BoxFixture one = build_box_fixture(1);
  CHECK(one.mesh.tets.size() == 6);
  CHECK(one.mesh.points.size() == 8);
  CHECK(one.mesh.constrained_faces.size() == 12);
  CHECK(one.scene.size() == 12);
  CHECK(validate(one.mesh).ok());

  const BoxFixture two = build_box_fixture(2);
  CHECK(two.mesh.tets.size() == 48);
  CHECK(two.mesh.constrained_faces.size() == 6 * 4 * 2);
  CHECK(validate(two.mesh).ok());

  for (const auto& nf : testing::standard_fixtures()) {
    CHECK(nf.fixture.mesh.tets.size() == 384);
    for (const ConstrainedFace& f : nf.fixture.mesh.constrained_faces) {
      CHECK(f.tet_front != kNoTet);
    }
  }
}

TEST_CASE("wall normals face into the box") {
  const BoxFixture fx = build_box_fixture(3);
  for (std::uint32_t t = 0; t < fx.scene.size(); ++t) {
    const auto c = fx.scene.corners(t);
    const Vec3d centroid = (c[0] + c[1] + c[2]) / 3.0;
    const Vec3d to_center = Vec3d{1.5, 1.5, 1.5} - centroid;
    CHECK(dot(fx.scene.normal(t), to_center) > 0);
    CHECK(fx.scene.material(t) < 6);
  }
}

TEST_CASE("occluders") {
  const std::array<Occluder, 1> full{Occluder{2, {0, 0, 1}, {2, 2, 1}, 1}};
  const BoxFixture split = build_box_fixture(2, full);
  CHECK(validate(split.mesh).ok());
  const auto labels = detect_regions(split.mesh);
  CHECK(std::set<std::uint32_t>(labels.begin(), labels.end()).size() == 2);
  for (const ConstrainedFace& f : split.mesh.constrained_faces) {
    if (split.scene.material(f.triangle_id) == 6) CHECK(f.tet_back != kNoTet);
  }

  const std::array<Occluder, 1> boundary{Occluder{2, {0, 0, 0}, {2, 2, 0}, 1}};
  CHECK_THROWS_AS(build_box_fixture(2, boundary), InvalidArgument);
  const std::array<Occluder, 1> off{Occluder{0, {1, 0, 0}, {1, 3, 2}, 1}};
  CHECK_THROWS_AS(build_box_fixture(2, off), InvalidArgument);
  const std::array<Occluder, 1> tilted{Occluder{0, {1, 0, 0}, {2, 2, 2}, 1}};
  CHECK_THROWS_AS(build_box_fixture(2, tilted), InvalidArgument);
  const std::array<Occluder, 2> overlap{Occluder{2, {0, 0, 1}, {2, 2, 1}, 1},
                                        Occluder{2, {1, 1, 1}, {2, 2, 1}, -1}};
  CHECK_THROWS_AS(build_box_fixture(3, overlap), InvalidArgument);
  CHECK_THROWS_AS(build_box_fixture(0), InvalidArgument);
}

TEST_CASE("constrained faces associate with the containing scene triangle") {
  // One 2x2 pane becomes 2 scene triangles and 8 mesh faces.
  const std::array<Occluder, 1> pane{Occluder{2, {0, 0, 2}, {2, 2, 2}, 1}};
  BoxFixture fx = build_box_fixture(4, pane);
  std::map<std::uint32_t, int> per_triangle;
  for (const ConstrainedFace& f : fx.mesh.constrained_faces) {
    if (fx.scene.material(f.triangle_id) == 6) ++per_triangle[f.triangle_id];
  }
  CHECK(per_triangle.size() == 2);
  for (const auto& [tri, count] : per_triangle) CHECK(count == 4);

  // Scrambled ids are restored exactly at zero tolerance.
  const RawTetMesh before = fx.mesh;
  for (ConstrainedFace& f : fx.mesh.constrained_faces) f.triangle_id = 0;
  associate_constrained_faces(fx.mesh, fx.scene, 0.0);
  CHECK(fx.mesh.constrained_faces == before.constrained_faces);

  // A scene without the pane cannot host its faces.
  SceneTriangleSoup walls_only = fx.scene;
  std::vector<std::array<std::uint32_t, 3>> kept;
  std::vector<std::uint32_t> mats;
  for (std::uint32_t t = 0; t < walls_only.size(); ++t) {
    if (walls_only.material(t) < 6) {
      kept.push_back(walls_only.triangles[t]);
      mats.push_back(walls_only.material_ids[t]);
    }
  }
  walls_only.triangles = kept;
  walls_only.material_ids = mats;
  CHECK_THROWS_AS(associate_constrained_faces(fx.mesh, walls_only), AssociationError);
}

TEST_CASE("faces_on_scene recovers the constrained faces") {
  const BoxFixture fx = named_fixture("closed", 4);
  auto found = faces_on_scene(fx.mesh, fx.scene);
  std::vector<std::array<std::uint32_t, 3>> expected;
  for (const ConstrainedFace& f : fx.mesh.constrained_faces) {
    auto k = f.vertex_ids;
    std::sort(k.begin(), k.end());
    expected.push_back(k);
  }
  std::sort(expected.begin(), expected.end());
  CHECK(found == expected);
}

}  // TEST_SUITE
