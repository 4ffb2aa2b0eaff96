#include "tetrt/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "tetrt/errors.hpp"

namespace tetrt {

namespace fs = std::filesystem;

namespace {

// Whitespace-separated rows with '#' comments and blank lines dropped.
class RowReader {
 public:
  explicit RowReader(const fs::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw ParseError(path_, 0, "cannot open file");
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      tokens_.clear();
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens_.push_back(tok);
      if (!tokens_.empty()) return true;
    }
    return false;
  }

  std::size_t size() const { return tokens_.size(); }
  long line() const { return line_no_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, line_no_, what); }

  void need(std::size_t n) const {
    if (tokens_.size() < n) {
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(tokens_.size()));
    }
  }

  long integer(std::size_t i) const {
    const std::string& t = tokens_.at(i);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail("not an integer: '" + t + "'");
    return v;
  }

  double real_at(std::size_t i) const {
    const std::string& t = tokens_.at(i);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) fail("not a finite number: '" + t + "'");
    return v;
  }

 private:
  std::string path_;
  std::ifstream in_;
  long line_no_ = 0;
  std::vector<std::string> tokens_;
};

struct Header {
  long count = 0;
  long line = 0;
};

Header read_header(RowReader& r, std::size_t fields) {
  if (!r.next()) r.fail("missing header");
  r.need(fields);
  const long count = r.integer(0);
  if (count < 0) r.fail("negative count");
  return {count, r.line()};
}

std::uint32_t to_index(const RowReader& r, long value, long base, long count) {
  if (value < base || value - base >= count) {
    r.fail("index " + std::to_string(value) + " out of range");
  }
  return static_cast<std::uint32_t>(value - base);
}

}  // namespace

TetGenFileSet TetGenFileSet::from_stem(const fs::path& stem) {
  auto with = [&](const char* ext) {
    fs::path p = stem;
    p += ext;
    return p;
  };
  TetGenFileSet files{with(".node"), with(".ele"), with(".neigh"), with(".face")};
  if (!fs::exists(files.neigh)) files.neigh.clear();
  if (!fs::exists(files.face)) files.face.clear();
  return files;
}

RawTetMesh parse_tetgen(const TetGenFileSet& files) {
  RawTetMesh mesh;

  RowReader node(files.node);
  const Header nh = read_header(node, 2);
  if (node.integer(1) != 3) node.fail("only 3-D node files are supported");
  long base = -1;
  for (long i = 0; i < nh.count; ++i) {
    if (!node.next()) node.fail("expected " + std::to_string(nh.count) + " points");
    node.need(4);
    const long id = node.integer(0);
    if (base < 0) {
      if (id != 0 && id != 1) node.fail("first point index must be 0 or 1");
      base = id;
    }
    if (id != base + i) node.fail("point indices must be consecutive");
    mesh.points.push_back(Vec3{static_cast<real>(node.real_at(1)), static_cast<real>(node.real_at(2)),
                               static_cast<real>(node.real_at(3))});
  }
  if (node.next()) node.fail("more points than the header declares");
  if (base < 0) base = 0;
  const long npts = nh.count;

  RowReader ele(files.ele);
  const Header eh = read_header(ele, 2);
  if (ele.integer(1) != 4) ele.fail("only 4-node tetrahedra are supported");
  std::vector<long> ele_lines;
  for (long i = 0; i < eh.count; ++i) {
    if (!ele.next()) ele.fail("expected " + std::to_string(eh.count) + " tetrahedra");
    ele.need(5);
    if (ele.integer(0) != base + i) ele.fail("tetrahedron indices must be consecutive from the node base");
    TetVertices t;
    for (int k = 0; k < 4; ++k) t[k] = to_index(ele, ele.integer(1 + k), base, npts);
    mesh.tets.push_back(t);
    ele_lines.push_back(ele.line());
  }
  if (ele.next()) ele.fail("more tetrahedra than the header declares");
  const long ntets = eh.count;

  std::vector<std::array<std::uint32_t, 3>> constrained;
  std::vector<std::uint32_t> triangle_ids;
  if (!files.face.empty()) {
    std::vector<std::array<std::uint32_t, 3>> mesh_faces;
    for (const TetVertices& t : mesh.tets) {
      for (int j = 0; j < 4; ++j) mesh_faces.push_back(face_key(t, j));
    }
    std::sort(mesh_faces.begin(), mesh_faces.end());
    RowReader face(files.face);
    const Header fh = read_header(face, 1);
    for (long i = 0; i < fh.count; ++i) {
      if (!face.next()) face.fail("expected " + std::to_string(fh.count) + " faces");
      face.need(4);
      if (face.integer(0) != base + i) face.fail("face indices must be consecutive from the node base");
      std::array<std::uint32_t, 3> f;
      for (int k = 0; k < 3; ++k) f[k] = to_index(face, face.integer(1 + k), base, npts);
      const long marker = face.size() > 4 ? face.integer(4) : 0;
      if (marker == 0) continue;
      std::array<std::uint32_t, 3> key = f;
      std::sort(key.begin(), key.end());
      if (!std::binary_search(mesh_faces.begin(), mesh_faces.end(), key)) {
        face.fail("face is not a face of any tetrahedron");
      }
      constrained.push_back(f);
      triangle_ids.push_back(static_cast<std::uint32_t>(marker > 0 ? marker - 1 : i));
    }
    if (face.next()) face.fail("more faces than the header declares");
  }

  try {
    build_adjacency(mesh, constrained, triangle_ids);
  } catch (const ValidationError& e) {
    throw ParseError(files.ele.string(), e.tet_a() >= 0 ? ele_lines[e.tet_a()] : 0, e.what());
  }

  if (!files.neigh.empty()) {
    RowReader neigh(files.neigh);
    const Header gh = read_header(neigh, 1);
    if (gh.count != ntets) neigh.fail("tetrahedron count differs from the .ele file");
    std::vector<std::array<long, 4>> table(ntets);
    std::vector<long> lines(ntets);
    for (long i = 0; i < ntets; ++i) {
      if (!neigh.next()) neigh.fail("expected " + std::to_string(ntets) + " rows");
      neigh.need(5);
      if (neigh.integer(0) != base + i) neigh.fail("row indices must be consecutive from the node base");
      for (int k = 0; k < 4; ++k) {
        const long v = neigh.integer(1 + k);
        table[i][k] = v < 0 ? -1 : static_cast<long>(to_index(neigh, v, base, ntets));
      }
      lines[i] = neigh.line();
    }
    auto fail_at = [&](long tet, const std::string& what) {
      throw ParseError(files.neigh.string(), lines[tet], what);
    };
    for (long i = 0; i < ntets; ++i) {
      for (int k = 0; k < 4; ++k) {
        const long j = table[i][k];
        if (j >= 0 && std::find(table[j].begin(), table[j].end(), i) == table[j].end()) {
          fail_at(i, "adjacency asymmetry: " + std::to_string(j + base) + " does not list " +
                         std::to_string(i + base));
        }
        const NeighborRef built = mesh.neighbors[i][k];
        long expected = -1;
        if (built.is_tet()) {
          expected = built.payload();
        } else if (built.is_constrained()) {
          const std::uint32_t other = mesh.constrained_faces[built.payload()].other(i);
          expected = other == kNoTet ? -1 : static_cast<long>(other);
        }
        if (expected != j) fail_at(i, "neighbor " + std::to_string(k) + " does not share the opposite face");
      }
    }
  }

  orient_positive(mesh);
  const ValidationReport report = validate(mesh);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw ParseError(files.ele.string(), v.tet >= 0 && v.tet < ntets ? ele_lines[v.tet] : 0,
                     v.message);
  }
  return mesh;
}

void write_tetgen(const RawTetMesh& mesh, const fs::path& stem) {
  auto open = [&](const char* ext) {
    fs::path p = stem;
    p += ext;
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out.precision(9);
    return out;
  };
  {
    std::ofstream out = open(".node");
    out << mesh.points.size() << " 3 0 0\n";
    for (std::size_t i = 0; i < mesh.points.size(); ++i) {
      const Vec3& p = mesh.points[i];
      out << i << ' ' << p.x << ' ' << p.y << ' ' << p.z << '\n';
    }
  }
  {
    std::ofstream out = open(".ele");
    out << mesh.tets.size() << " 4 0\n";
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) {
      const auto& t = mesh.tets[i];
      out << i << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    }
  }
  struct Row {
    std::array<std::uint32_t, 3> v;
    long marker;
  };
  std::vector<Row> faces;
  {
    std::ofstream out = open(".neigh");
    out << mesh.tets.size() << " 4\n";
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) {
      out << i;
      for (int k = 0; k < 4; ++k) {
        const NeighborRef r = mesh.neighbors[i][k];
        long other = -1;
        if (r.is_tet()) {
          other = r.payload();
        } else if (r.is_constrained()) {
          const std::uint32_t o = mesh.constrained_faces[r.payload()].other(std::uint32_t(i));
          if (o != kNoTet) other = o;
        } else {
          faces.push_back({face_key(mesh.tets[i], k), 0});
        }
        out << ' ' << other;
      }
      out << '\n';
    }
  }
  for (const ConstrainedFace& c : mesh.constrained_faces) {
    faces.push_back({c.vertex_ids, static_cast<long>(c.triangle_id) + 1});
  }
  std::ofstream out = open(".face");
  out << faces.size() << " 1\n";
  for (std::size_t i = 0; i < faces.size(); ++i) {
    out << i << ' ' << faces[i].v[0] << ' ' << faces[i].v[1] << ' ' << faces[i].v[2] << ' '
        << faces[i].marker << '\n';
  }
}

SceneTriangleSoup load_obj(const fs::path& path) {
  std::ifstream in(path);
  const std::string name = path.string();
  if (!in) throw ParseError(name, 0, "cannot open file");
  SceneTriangleSoup scene;
  std::map<std::string, std::uint32_t> materials;
  std::uint32_t material = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    auto fail = [&](const std::string& what) { throw ParseError(name, line_no, what); };
    if (key == "v") {
      std::array<double, 3> c{};
      for (double& x : c) {
        if (!(ss >> x) || !std::isfinite(x)) fail("malformed vertex");
      }
      scene.vertices.push_back(Vec3{real(c[0]), real(c[1]), real(c[2])});
    } else if (key == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ss >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
          fail("malformed face index '" + tok + "'");
        }
        const long n = static_cast<long>(scene.vertices.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n) fail("face index " + std::to_string(idx) + " out of range");
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (poly.size() < 3) fail("face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const std::array<std::uint32_t, 3> tri{poly[0], poly[k], poly[k + 1]};
        scene.triangles.push_back(tri);
        scene.material_ids.push_back(material);
        if (length(scene.normal(std::uint32_t(scene.triangles.size() - 1))) == 0.0) {
          fail("degenerate triangle");
        }
      }
    } else if (key == "usemtl") {
      std::string mtl;
      if (!(ss >> mtl)) fail("usemtl without a name");
      material = materials.emplace(mtl, std::uint32_t(materials.size())).first->second;
    } else if (key == "vn" || key == "vt" || key == "vp" || key == "o" || key == "g" ||
               key == "s" || key == "mtllib" || key == "l") {
      continue;
    } else {
      fail("unsupported record '" + key + "'");
    }
  }
  return scene;
}

void write_obj(const SceneTriangleSoup& scene, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(9);
  for (const Vec3& v : scene.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  long current = -1;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const long m = scene.material(std::uint32_t(i));
    if (m != current) {
      out << "usemtl m" << m << '\n';
      current = m;
    }
    const auto& t = scene.triangles[i];
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

namespace {

struct Lattice {
  std::array<int, 3> n;
  std::uint32_t id(int x, int y, int z) const {
    return static_cast<std::uint32_t>(x + (n[0] + 1) * (y + (n[1] + 1) * z));
  }
  std::uint32_t id(const std::array<int, 3>& c) const { return id(c[0], c[1], c[2]); }
};

// Both Kuhn triangles of the unit square at `corner` spanning axes u and v.
void square_faces(const Lattice& g, std::array<int, 3> corner, int u, int v,
                  std::vector<std::array<std::uint32_t, 3>>& out) {
  auto at = [&](int du, int dv) {
    std::array<int, 3> c = corner;
    c[u] += du;
    c[v] += dv;
    return g.id(c);
  };
  out.push_back({at(0, 0), at(1, 0), at(1, 1)});
  out.push_back({at(0, 0), at(0, 1), at(1, 1)});
}

// Square [lo, lo + size] in the (u, v) plane at `corner`, as two scene triangles
// split along the lo-hi diagonal, wound so the normal points along `normal_sign`
// on axis w.
void add_square(SceneTriangleSoup& scene, std::array<int, 3> corner, int u, int v, int size,
                int w, int normal_sign, std::uint32_t material) {
  auto vertex = [&](int du, int dv) {
    std::array<int, 3> c = corner;
    c[u] += du;
    c[v] += dv;
    scene.vertices.push_back(Vec3{real(c[0]), real(c[1]), real(c[2])});
    return std::uint32_t(scene.vertices.size() - 1);
  };
  const std::uint32_t a = vertex(0, 0);
  const std::uint32_t b = vertex(size, 0);
  const std::uint32_t c = vertex(size, size);
  const std::uint32_t d = vertex(0, size);
  std::array<std::uint32_t, 3> t0{a, b, c};
  std::array<std::uint32_t, 3> t1{a, c, d};
  scene.triangles.push_back(t0);
  scene.triangles.push_back(t1);
  for (auto* t : {&scene.triangles[scene.size() - 2], &scene.triangles[scene.size() - 1]}) {
    const std::uint32_t tri = std::uint32_t(t - scene.triangles.data());
    if ((scene.normal(tri)[w] > 0) != (normal_sign > 0)) std::swap((*t)[1], (*t)[2]);
  }
  scene.material_ids.push_back(material);
  scene.material_ids.push_back(material);
}

}  // namespace

BoxFixture build_box_fixture(int n, std::span<const Occluder> occluders) {
  return build_box_fixture(std::array<int, 3>{n, n, n}, occluders);
}

BoxFixture build_box_fixture(std::array<int, 3> cells, std::span<const Occluder> occluders) {
  for (int c : cells) {
    if (c < 1) throw InvalidArgument("box fixture needs at least one cell per axis");
  }
  const Lattice g{cells};
  BoxFixture fx;
  RawTetMesh& mesh = fx.mesh;
  for (int z = 0; z <= cells[2]; ++z) {
    for (int y = 0; y <= cells[1]; ++y) {
      for (int x = 0; x <= cells[0]; ++x) mesh.points.push_back(Vec3{real(x), real(y), real(z)});
    }
  }

  static constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int z = 0; z < cells[2]; ++z) {
    for (int y = 0; y < cells[1]; ++y) {
      for (int x = 0; x < cells[0]; ++x) {
        for (const auto& perm : kPerms) {
          std::array<int, 3> c{x, y, z};
          TetVertices t;
          t[0] = g.id(c);
          for (int k = 0; k < 3; ++k) {
            ++c[perm[k]];
            t[k + 1] = g.id(c);
          }
          mesh.tets.push_back(t);
        }
      }
    }
  }

  std::vector<std::array<std::uint32_t, 3>> constrained;
  std::vector<std::uint32_t> triangle_ids;
  // Rectangle [lo, hi] in the plane axis w = level: gcd-sized scene squares,
  // and both Kuhn triangles of every unit cell face as constrained faces.
  auto add_rectangle = [&](int w, int level, std::array<int, 3> lo, std::array<int, 3> hi,
                           int normal_sign, std::uint32_t material) {
    const int u = std::min((w + 1) % 3, (w + 2) % 3);
    const int v = std::max((w + 1) % 3, (w + 2) % 3);
    const int step = std::gcd(hi[u] - lo[u], hi[v] - lo[v]);
    for (int i = lo[u]; i < hi[u]; i += step) {
      for (int j = lo[v]; j < hi[v]; j += step) {
        std::array<int, 3> corner{};
        corner[w] = level;
        corner[u] = i;
        corner[v] = j;
        add_square(fx.scene, corner, u, v, step, w, normal_sign, material);
      }
    }
    for (int i = lo[u]; i < hi[u]; ++i) {
      for (int j = lo[v]; j < hi[v]; ++j) {
        std::array<int, 3> c{};
        c[w] = level;
        c[u] = i;
        c[v] = j;
        square_faces(g, c, u, v, constrained);
      }
    }
    triangle_ids.resize(constrained.size(), 0);
  };

  // Walls face into the box.
  for (int w = 0; w < 3; ++w) {
    for (int side = 0; side < 2; ++side) {
      add_rectangle(w, side * cells[w], {0, 0, 0}, cells, side == 0 ? 1 : -1,
                    std::uint32_t(2 * w + side));
    }
  }

  for (std::size_t k = 0; k < occluders.size(); ++k) {
    const Occluder& o = occluders[k];
    if (o.axis < 0 || o.axis > 2) throw InvalidArgument("occluder axis must be 0, 1 or 2");
    const int w = o.axis;
    const int level = o.lo[w];
    if (o.hi[w] != level || level <= 0 || level >= cells[w]) {
      throw InvalidArgument("occluder " + std::to_string(k) + " is not on an interior lattice plane");
    }
    for (int a : {(w + 1) % 3, (w + 2) % 3}) {
      if (o.lo[a] < 0 || o.hi[a] > cells[a] || o.lo[a] >= o.hi[a]) {
        throw InvalidArgument("occluder " + std::to_string(k) + " is off the lattice");
      }
    }
    add_rectangle(w, level, o.lo, o.hi, o.normal_sign, std::uint32_t(6 + k));
  }

  // Overlapping occluders would list a face twice.
  {
    std::vector<std::array<std::uint32_t, 3>> keys = constrained;
    for (auto& key : keys) std::sort(key.begin(), key.end());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
      throw InvalidArgument("occluders overlap");
    }
  }

  build_adjacency(mesh, constrained, triangle_ids);
  orient_positive(mesh);
  associate_constrained_faces(mesh, fx.scene, 0.0);
  return fx;
}

namespace {

struct TriangleTest {
  std::array<Vec3d, 3> c;
  Vec3d normal;  // unit
  int drop = 0;  // dominant normal axis
  Vec3d lo, hi;
};

TriangleTest prepare(const SceneTriangleSoup& scene, std::uint32_t tri) {
  TriangleTest t;
  t.c = scene.corners(tri);
  t.normal = normalize(scene.normal(tri));
  const Vec3d a{std::abs(t.normal.x), std::abs(t.normal.y), std::abs(t.normal.z)};
  t.drop = a.x >= a.y && a.x >= a.z ? 0 : (a.y >= a.z ? 1 : 2);
  for (int k = 0; k < 3; ++k) {
    t.lo[k] = std::min({t.c[0][k], t.c[1][k], t.c[2][k]});
    t.hi[k] = std::max({t.c[0][k], t.c[1][k], t.c[2][k]});
  }
  return t;
}

bool contains_point(const TriangleTest& t, const Vec3d& p, double tol) {
  for (int k = 0; k < 3; ++k) {
    if (p[k] < t.lo[k] - tol || p[k] > t.hi[k] + tol) return false;
  }
  if (std::abs(dot(t.normal, p - t.c[0])) > tol) return false;
  const int i = (t.drop + 1) % 3;
  const int j = (t.drop + 2) % 3;
  auto edge = [&](const Vec3d& a, const Vec3d& b) {
    const double ex = b[i] - a[i];
    const double ey = b[j] - a[j];
    const double len = std::hypot(ex, ey);
    return (ex * (p[j] - a[j]) - ey * (p[i] - a[i])) / (len > 0 ? len : 1.0);
  };
  const double e0 = edge(t.c[0], t.c[1]);
  const double e1 = edge(t.c[1], t.c[2]);
  const double e2 = edge(t.c[2], t.c[0]);
  return (e0 >= -tol && e1 >= -tol && e2 >= -tol) || (e0 <= tol && e1 <= tol && e2 <= tol);
}

double scene_extent(const SceneTriangleSoup& scene) {
  if (scene.vertices.empty()) return 1.0;
  Vec3d lo = scene.vertices[0].as<double>();
  Vec3d hi = lo;
  for (const Vec3& v : scene.vertices) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], double(v[k]));
      hi[k] = std::max(hi[k], double(v[k]));
    }
  }
  return std::max(length(hi - lo), 1e-30);
}

std::optional<std::uint32_t> owning_triangle(const std::vector<TriangleTest>& tris,
                                             const std::array<Vec3d, 3>& face, double tol) {
  for (std::uint32_t t = 0; t < tris.size(); ++t) {
    if (contains_point(tris[t], face[0], tol) && contains_point(tris[t], face[1], tol) &&
        contains_point(tris[t], face[2], tol)) {
      return t;
    }
  }
  return std::nullopt;
}

}  // namespace

void associate_constrained_faces(RawTetMesh& mesh, const SceneTriangleSoup& scene,
                                 double tolerance) {
  const double tol = tolerance * scene_extent(scene);
  std::vector<TriangleTest> tris;
  tris.reserve(scene.size());
  for (std::uint32_t t = 0; t < scene.size(); ++t) tris.push_back(prepare(scene, t));
  for (ConstrainedFace& face : mesh.constrained_faces) {
    std::array<Vec3d, 3> p;
    for (int k = 0; k < 3; ++k) p[k] = mesh.points.at(face.vertex_ids[k]).as<double>();
    const auto owner = owning_triangle(tris, p, tol);
    if (!owner) {
      throw AssociationError("constrained face (" + std::to_string(face.vertex_ids[0]) + ", " +
                             std::to_string(face.vertex_ids[1]) + ", " +
                             std::to_string(face.vertex_ids[2]) + ") lies on no scene triangle");
    }
    face.triangle_id = *owner;
  }
}

std::vector<std::array<std::uint32_t, 3>> faces_on_scene(const RawTetMesh& mesh,
                                                         const SceneTriangleSoup& scene,
                                                         double tolerance) {
  const double tol = tolerance * scene_extent(scene);
  std::vector<TriangleTest> tris;
  for (std::uint32_t t = 0; t < scene.size(); ++t) tris.push_back(prepare(scene, t));
  std::vector<std::array<std::uint32_t, 3>> keys;
  for (const TetVertices& t : mesh.tets) {
    for (int j = 0; j < 4; ++j) keys.push_back(face_key(t, j));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<std::array<std::uint32_t, 3>> out;
  for (const auto& key : keys) {
    std::array<Vec3d, 3> p;
    for (int k = 0; k < 3; ++k) p[k] = mesh.points.at(key[k]).as<double>();
    if (owning_triangle(tris, p, tol)) out.push_back(key);
  }
  return out;
}

}  // namespace tetrt
