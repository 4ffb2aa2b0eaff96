#include "tetrt/mesh_io.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include "tetrt/errors.hpp"

namespace tetrt {

namespace {

constexpr char kMagic[8] = {'T', 'E', 'T', 'R', 'T', 'M', '0', '1'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write " + path.string());
  }
  template <class T>
  void pod(const T& value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  template <class T>
  void vec(const std::vector<T>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(T)));
  }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw Error("write failed for " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : name_(path.string()), in_(path, std::ios::binary) {
    if (!in_) throw ParseError(name_, 0, "cannot open file");
  }
  template <class T>
  T pod() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw ParseError(name_, 0, "truncated file");
    return value;
  }
  template <class T>
  std::vector<T> vec() {
    const auto n = pod<std::uint64_t>();
    if (n > (std::uint64_t(1) << 34) / sizeof(T)) throw ParseError(name_, 0, "implausible array size");
    std::vector<T> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
    if (!in_) throw ParseError(name_, 0, "truncated file");
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name_, 0, what); }

 private:
  std::string name_;
  std::ifstream in_;
};

}  // namespace

void save_compact(const CompactMesh& mesh, const std::filesystem::path& path) {
  Writer w(path);
  w.pod(kMagic);
  w.pod(static_cast<std::uint32_t>(mesh.layout()));
  w.pod(static_cast<std::uint32_t>(sizeof(real)));
  w.pod(mesh.source_tet);
  w.vec(mesh.points);
  std::visit([&](const auto& records) { w.vec(records); }, mesh.records);
  w.vec(mesh.constrained_faces);
  w.vec(mesh.cold_vertices);
  w.vec(mesh.cold_neighbors);
  w.finish(path);
}

CompactMesh load_compact(const std::filesystem::path& path) {
  Reader r(path);
  const auto magic = r.pod<std::array<char, 8>>();
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) r.fail("not a compact mesh file");
  const auto layout = r.pod<std::uint32_t>();
  if (r.pod<std::uint32_t>() != sizeof(real)) r.fail("floating-point width differs from this build");
  CompactMesh mesh;
  mesh.source_tet = r.pod<std::uint32_t>();
  mesh.points = r.vec<Vec3>();
  switch (layout) {
    case 0: mesh.records = r.vec<Tet32Record>(); break;
    case 1: mesh.records = r.vec<Tet20Record>(); break;
    case 2: mesh.records = r.vec<Tet16Record>(); break;
    default: r.fail("unknown layout " + std::to_string(layout));
  }
  mesh.constrained_faces = r.vec<ConstrainedFace>();
  mesh.cold_vertices = r.vec<TetVertices>();
  mesh.cold_neighbors = r.vec<TetNeighbors>();
  const std::size_t records = std::visit([](const auto& v) { return v.size(); }, mesh.records);
  if (records != mesh.cold_vertices.size() || records != mesh.cold_neighbors.size()) {
    r.fail("record and side-table counts differ");
  }
  return mesh;
}

}  // namespace tetrt
