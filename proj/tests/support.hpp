#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tetrt/geometry.hpp"
#include "tetrt/ingestion.hpp"
#include "tetrt/render.hpp"
#include "tetrt/tetmesh.hpp"

namespace testing {

using namespace tetrt;

struct OpTally {
  long mul = 0;
  long add = 0;
  long cmp = 0;
  long other = 0;
};

// Scalar that tallies the arithmetic done on it.
struct Counted {
  double v = 0.0;

  static inline OpTally tally;
  static void reset() { tally = {}; }

  Counted() = default;
  constexpr Counted(double x) : v(x) {}

  friend Counted operator*(Counted a, Counted b) {
    ++tally.mul;
    return a.v * b.v;
  }
  friend Counted operator/(Counted a, Counted b) {
    ++tally.other;
    return a.v / b.v;
  }
  friend Counted operator+(Counted a, Counted b) {
    ++tally.add;
    return a.v + b.v;
  }
  friend Counted operator-(Counted a, Counted b) {
    ++tally.add;
    return a.v - b.v;
  }
  friend Counted operator-(Counted a) { return -a.v; }
  friend bool operator<(Counted a, Counted b) {
    ++tally.cmp;
    return a.v < b.v;
  }
  friend bool operator>(Counted a, Counted b) {
    ++tally.cmp;
    return a.v > b.v;
  }
  friend bool operator<=(Counted a, Counted b) {
    ++tally.cmp;
    return a.v <= b.v;
  }
  friend bool operator>=(Counted a, Counted b) {
    ++tally.cmp;
    return a.v >= b.v;
  }
  friend bool operator==(Counted a, Counted b) {
    ++tally.cmp;
    return a.v == b.v;
  }
};

template <class To, class From>
ScaledBasisT<To> convert_basis(const ScaledBasisT<From>& b) {
  ScaledBasisT<To> out;
  out.min_axis = b.min_axis;
  out.max_axis = b.max_axis;
  out.other_axis = b.other_axis;
  out.sign_v_min = b.sign_v_min;
  out.u = {To(double(b.u.x)), To(double(b.u.y)), To(double(b.u.z))};
  out.v = {To(double(b.v.x)), To(double(b.v.y)), To(double(b.v.z))};
  out.projected_origin = {To(double(b.projected_origin.x)), To(double(b.projected_origin.y))};
  return out;
}

inline Vec3d random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    const Vec3d d{g(rng), g(rng), g(rng)};
    const double len = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (len > 1e-6) return {d.x / len, d.y / len, d.z / len};
  }
}

inline Vec3d random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// Fixtures used across suites: name plus the raw mesh and scene.
struct NamedFixture {
  const char* name;
  BoxFixture fixture;
};

inline std::vector<NamedFixture> standard_fixtures() {
  return {{"empty", named_fixture("empty", 4)},
          {"pane", named_fixture("pane", 4)},
          {"closed", named_fixture("closed", 4)}};
}

inline std::array<Vec3d, 4> tet_points(const CompactMesh& mesh, std::uint32_t t) {
  return {mesh.vertex(t, 0), mesh.vertex(t, 1), mesh.vertex(t, 2), mesh.vertex(t, 3)};
}

// Uniform point inside tet t (barycentric from sorted uniforms).
inline Vec3d random_point_in_tet(std::mt19937_64& rng, const std::array<Vec3d, 4>& p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 5> s{0.0, u(rng), u(rng), u(rng), 1.0};
  std::sort(s.begin() + 1, s.end() - 1);
  Vec3d q{0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    const double w = s[i + 1] - s[i];
    q = q + p[i] * w;
  }
  return q;
}

}  // namespace testing
