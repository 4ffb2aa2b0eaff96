#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <utility>

#include "tetrt/errors.hpp"

namespace tetrt {

#ifdef TETRT_DOUBLE_PRECISION
using real = double;
#else
using real = float;
#endif

template <class T>
struct Vec2T {
  T x{};
  T y{};
};

template <class T>
struct Vec3T {
  T x{};
  T y{};
  T z{};

  constexpr T& operator[](int axis) noexcept { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr const T& operator[](int axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }

  template <class U>
  constexpr Vec3T<U> as() const {
    return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
  }
};

template <int Axis, class T>
constexpr T& axis(Vec3T<T>& v) noexcept {
  static_assert(Axis >= 0 && Axis < 3);
  if constexpr (Axis == 0) return v.x;
  else if constexpr (Axis == 1) return v.y;
  else return v.z;
}

template <int Axis, class T>
constexpr const T& axis(const Vec3T<T>& v) noexcept {
  static_assert(Axis >= 0 && Axis < 3);
  if constexpr (Axis == 0) return v.x;
  else if constexpr (Axis == 1) return v.y;
  else return v.z;
}

using Vec2 = Vec2T<real>;
using Vec3 = Vec3T<real>;
using Vec2d = Vec2T<double>;
using Vec3d = Vec3T<double>;

template <class T>
constexpr bool operator==(const Vec2T<T>& a, const Vec2T<T>& b) {
  return a.x == b.x && a.y == b.y;
}
template <class T>
constexpr bool operator==(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

template <class T>
constexpr Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
constexpr Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T>
constexpr Vec3T<T> operator-(const Vec3T<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T>
constexpr Vec3T<T> operator*(const Vec3T<T>& a, T s) {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T>
constexpr Vec3T<T> operator*(T s, const Vec3T<T>& a) {
  return a * s;
}
template <class T>
constexpr Vec3T<T> operator/(const Vec3T<T>& a, T s) {
  return {a.x / s, a.y / s, a.z / s};
}
template <class T>
constexpr Vec2T<T> operator-(const Vec2T<T>& a, const Vec2T<T>& b) {
  return {a.x - b.x, a.y - b.y};
}

template <class T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
constexpr Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T length(const Vec3T<T>& a) {
  return std::sqrt(dot(a, a));
}

template <class T>
Vec3T<T> normalize(const Vec3T<T>& a) {
  return a / length(a);
}

template <class T>
bool is_finite(const Vec3T<T>& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// a.x * b.y - a.y * b.x
template <class T>
constexpr T det2(const Vec2T<T>& a, const Vec2T<T>& b) {
  return a.x * b.y - a.y * b.x;
}

// Mirror direction of d about the plane with unit normal n.
inline Vec3T<double> reflect(const Vec3T<double>& d, const Vec3T<double>& n) {
  return d - n * (2.0 * dot(d, n));
}

// Refracted unit direction for unit d entering the side n points away from,
// with eta = n_incident / n_transmitted. False on total internal reflection.
inline bool refract(const Vec3T<double>& d, const Vec3T<double>& n, double eta,
                    Vec3T<double>& out) {
  const double cos_i = -dot(d, n);
  const double k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
  if (k < 0.0) return false;
  out = d * eta + n * (eta * cos_i - std::sqrt(k));
  return true;
}

template <class T>
struct RayT {
  Vec3T<T> origin;
  Vec3T<T> direction;
};

using Ray = RayT<real>;
using Rayd = RayT<double>;

// Signed volume (times 6) of (a, b, c, d); positive when d lies on the side of
// abc that (b - a) x (c - a) points to.
inline double orient3d(const Vec3d& a, const Vec3d& b, const Vec3d& c, const Vec3d& d) {
  return dot(cross(b - a, c - a), d - a);
}

// Right-handed orthonormal frame (u, v) around `direction` with u x v along it.
// Branchless construction of Duff et al.; the direction does not need unit length.
template <class T>
std::pair<Vec3T<T>, Vec3T<T>> orthonormal_basis(const Vec3T<T>& direction) {
  if (!(direction.x != T(0) || direction.y != T(0) || direction.z != T(0))) {
    throw InvalidArgument("orthonormal_basis: zero direction");
  }
  const Vec3T<T> n = normalize(direction);
  const T sign = std::copysign(T(1), n.z);
  const T a = T(-1) / (sign + n.z);
  const T b = n.x * n.y * a;
  Vec3T<T> u{T(1) + sign * n.x * n.x * a, sign * b, -sign * n.x};
  Vec3T<T> v{b, sign + n.y * n.y * a, -n.y};
  return {u, v};
}

// Ray-derived projection frame whose vectors are scaled so that the projection
// of a point needs three multiplications and three additions:
//   u[min_axis] == 0, u[other_axis] == 1, v[min_axis] == sign_v_min.
// The frame is right-handed about the ray direction: det2 of two projected
// vectors has the sign of (a x b) . direction.
// Projected origin type: one step wider than T.
template <class T>
using OriginT = std::conditional_t<std::is_same_v<T, float>, double,
                                   std::conditional_t<std::is_same_v<T, double>, long double, T>>;

template <class T>
struct ScaledBasisT {
  int min_axis = 0;
  int max_axis = 2;
  int other_axis = 1;
  Vec3T<T> u;
  Vec3T<T> v;
  int sign_v_min = 1;
  // Basis applied to the ray origin; subtracted after projecting a point.
  Vec2T<OriginT<T>> projected_origin;
};

using ScaledBasis = ScaledBasisT<real>;

// Indices of the absolutely largest and smallest components. Ties go to the
// lowest axis index; the largest is picked first so the two never coincide.
template <class T>
std::pair<int, int> dominant_axes(const Vec3T<T>& n) {
  const T a[3] = {std::abs(n.x), std::abs(n.y), std::abs(n.z)};
  int max_axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (a[i] > a[max_axis]) max_axis = i;
  }
  int min_axis = max_axis == 0 ? 1 : 0;
  for (int i = 0; i < 3; ++i) {
    if (i != max_axis && a[i] < a[min_axis]) min_axis = i;
  }
  return {min_axis, max_axis};
}

// Projection with the basis layout fixed at compile time. `Sign` is the sign of
// v[Min]. Costs 3 multiplications, 3 additions and the 2 origin subtractions.
template <int Min, int Max, int Sign>
struct FixedProjector {
  static constexpr int kOther = 3 - Min - Max;
  static_assert(Min != Max && Min >= 0 && Max >= 0 && Min < 3 && Max < 3);
  static_assert(Sign == 1 || Sign == -1);

  template <class T>
  static Vec2T<T> raw(const ScaledBasisT<T>& b, const Vec3T<T>& q) {
    const T& q_max = axis<Max>(q);
    const T& q_other = axis<kOther>(q);
    const T& q_min = axis<Min>(q);
    const T px = axis<Max>(b.u) * q_max + q_other;
    const T py0 = axis<Max>(b.v) * q_max + axis<kOther>(b.v) * q_other;
    if constexpr (Sign > 0) {
      return {px, py0 + q_min};
    } else {
      return {px, py0 - q_min};
    }
  }

  template <class T>
  Vec2T<T> operator()(const ScaledBasisT<T>& b, const Vec3T<T>& q) const {
    const Vec2T<T> r = raw(b, q);
    using O = OriginT<T>;
    return {T(O(r.x) - b.projected_origin.x), T(O(r.y) - b.projected_origin.y)};
  }
};

// Calls f(FixedProjector<min, max, sign>{}) for the layout of `b`; one of the
// twelve specializations.
template <class T, class F>
decltype(auto) visit_projector(const ScaledBasisT<T>& b, F&& f) {
  const int key = b.min_axis * 6 + b.max_axis * 2 + (b.sign_v_min > 0 ? 1 : 0);
  switch (key) {
    case 0 * 6 + 1 * 2 + 0: return f(FixedProjector<0, 1, -1>{});
    case 0 * 6 + 1 * 2 + 1: return f(FixedProjector<0, 1, 1>{});
    case 0 * 6 + 2 * 2 + 0: return f(FixedProjector<0, 2, -1>{});
    case 0 * 6 + 2 * 2 + 1: return f(FixedProjector<0, 2, 1>{});
    case 1 * 6 + 0 * 2 + 0: return f(FixedProjector<1, 0, -1>{});
    case 1 * 6 + 0 * 2 + 1: return f(FixedProjector<1, 0, 1>{});
    case 1 * 6 + 2 * 2 + 0: return f(FixedProjector<1, 2, -1>{});
    case 1 * 6 + 2 * 2 + 1: return f(FixedProjector<1, 2, 1>{});
    case 2 * 6 + 0 * 2 + 0: return f(FixedProjector<2, 0, -1>{});
    case 2 * 6 + 0 * 2 + 1: return f(FixedProjector<2, 0, 1>{});
    case 2 * 6 + 1 * 2 + 0: return f(FixedProjector<2, 1, -1>{});
    default: return f(FixedProjector<2, 1, 1>{});
  }
}

template <class T>
ScaledBasisT<T> build_scaled_basis(const RayT<T>& ray) {
  const Vec3T<T>& n = ray.direction;
  if (!(n.x != T(0) || n.y != T(0) || n.z != T(0))) {
    throw InvalidArgument("build_scaled_basis: zero direction");
  }
  ScaledBasisT<T> b;
  const auto [min_axis, max_axis] = dominant_axes(n);
  b.min_axis = min_axis;
  b.max_axis = max_axis;
  b.other_axis = 3 - min_axis - max_axis;

  const int next = (min_axis + 1) % 3;
  const int prev = (min_axis + 2) % 3;
  b.u[min_axis] = T(0);
  b.u[next] = n[prev] / n[max_axis];
  b.u[prev] = -n[next] / n[max_axis];
  // The component at `other` is n[max] / n[max] up to sign; flip so it is +1.
  if (b.u[b.other_axis] < T(0)) b.u = -b.u;
  b.u[b.other_axis] = T(1);
  b.u[min_axis] = T(0);

  const Vec3T<T> t = cross(n, b.u);
  const T t_min = t[min_axis];
  b.sign_v_min = t_min < T(0) ? -1 : 1;
  b.v = t / std::abs(t_min);
  b.v[min_axis] = T(b.sign_v_min);

  const Vec2T<T> o = visit_projector(b, [&](auto proj) { return decltype(proj)::raw(b, ray.origin); });
  b.projected_origin = {OriginT<T>(o.x), OriginT<T>(o.y)};
  return b;
}

// Point in the ray's 2-D frame, relative to the projected origin.
template <class T>
Vec2T<T> project_point(const ScaledBasisT<T>& b, const Vec3T<T>& q) {
  return visit_projector(b, [&](auto proj) { return proj(b, q); });
}

}  // namespace tetrt
