// Copyright 2026 The octbsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// Integer planes, homogeneous intersection points and the exact predicates
/// over them.
///
/// A plane (a, b, c, d) describes a x + b y + c z + d = 0; its positive side is
/// where the expression is positive. A point x = (x1, x2, x3, x4) stands for
/// (x1, x2, x3) / x4 with x4 != 0. Every predicate is exact as long as the
/// inputs respect the PrecisionBudget of the chosen bit width.

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "octbsp/wideint.hpp"

namespace octbsp {

/// Raised for collinear points or three planes without a unique intersection.
struct DegenerateError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Counters for the elementary predicates. Thread-local, so independent
/// threads never contend.
struct PredicateCounters {
  std::uint64_t classify = 0;
  std::uint64_t intersect = 0;
  std::uint64_t compare = 0;
};

inline PredicateCounters& predicate_counters() noexcept {
  thread_local PredicateCounters c;
  return c;
}

struct Vec3 {
  std::int64_t x = 0, y = 0, z = 0;

  constexpr std::int64_t operator[](int i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr std::int64_t& operator[](int i) noexcept { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
};

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

/// Storage type of the plane offset. At 256 bits d⁺ exceeds 64 bits.
template <int B>
using offset_t = std::conditional_t<(B > 192), int128_t, std::int64_t>;

namespace detail {

inline uint128_t uabs128(int128_t v) noexcept {
  return v < 0 ? uint128_t{0} - static_cast<uint128_t>(v) : static_cast<uint128_t>(v);
}

inline uint128_t gcd_u128(uint128_t a, uint128_t b) noexcept {
  if (a == 0) return b;
  if (b == 0) return a;
  const auto ctz = [](uint128_t v) {
    const auto lo = static_cast<std::uint64_t>(v);
    return lo ? std::countr_zero(lo) : 64 + std::countr_zero(static_cast<std::uint64_t>(v >> 64));
  };
  const int shift = std::min(ctz(a), ctz(b));
  a >>= ctz(a);
  do {
    b >>= ctz(b);
    if (a > b) std::swap(a, b);
    b -= a;
  } while (b != 0);
  return a << shift;
}

/// Wrapping or overflow-checked arithmetic at width B.
template <int B, bool Checked>
struct Ops {
  using W = WideInt<B>;
  static W add(const W& a, const W& b) {
    if constexpr (Checked) return W::checked_add(a, b);
    else return a + b;
  }
  static W sub(const W& a, const W& b) {
    if constexpr (Checked) return W::checked_sub(a, b);
    else return a - b;
  }
  static W mul(const W& a, std::int64_t s) {
    if constexpr (Checked) return W::checked_mul(a, s);
    else return a * s;
  }
  static W mul(const W& a, int128_t s) {
    if constexpr (Checked) return W::checked_mul(a, W(s));
    else return a * W(s);
  }
  static W neg(const W& a) {
    if constexpr (Checked) {
      if (a == W::min()) throw OverflowError("WideInt negate overflow");
    }
    return -a;
  }
};

/// n_q x n_r style 2x2 minor u1 v2 - u2 v1 of 64-bit entries.
inline int128_t minor64(std::int64_t u1, std::int64_t v1, std::int64_t u2, std::int64_t v2) noexcept {
  return static_cast<int128_t>(u1) * v2 - static_cast<int128_t>(u2) * v1;
}

}  // namespace detail

/// Oriented integer plane at bit budget B. Canonical: gcd(a, b, c, d) = 1
/// and the orientation given at construction is kept.
template <int B>
struct Plane {
  using Offset = offset_t<B>;
  std::int64_t a = 0, b = 0, c = 0;
  Offset d = 0;

  constexpr std::int64_t n(int i) const noexcept { return i == 0 ? a : (i == 1 ? b : c); }

  constexpr Plane operator-() const noexcept { return Plane{-a, -b, -c, static_cast<Offset>(-d)}; }
  friend constexpr bool operator==(const Plane&, const Plane&) = default;

  /// Builds a canonical plane from arbitrary-width coefficients.
  /// Throws DegenerateError for a zero normal and OverflowError if the
  /// reduced coefficients do not fit the storage types.
  static Plane make(int128_t a, int128_t b, int128_t c, int128_t d) {
    if (a == 0 && b == 0 && c == 0) throw DegenerateError("plane normal is zero");
    uint128_t g = detail::gcd_u128(detail::uabs128(a), detail::uabs128(b));
    g = detail::gcd_u128(g, detail::uabs128(c));
    g = detail::gcd_u128(g, detail::uabs128(d));
    const auto gi = static_cast<int128_t>(g);
    a /= gi, b /= gi, c /= gi, d /= gi;
    constexpr int128_t kMax64 = std::numeric_limits<std::int64_t>::max();
    if (a > kMax64 || a < -kMax64 || b > kMax64 || b < -kMax64 || c > kMax64 || c < -kMax64)
      throw OverflowError("plane normal exceeds 64 bits");
    if constexpr (std::is_same_v<Offset, std::int64_t>) {
      if (d > kMax64 || d < -kMax64) throw OverflowError("plane offset exceeds 64 bits");
    }
    return Plane{static_cast<std::int64_t>(a), static_cast<std::int64_t>(b),
                 static_cast<std::int64_t>(c), static_cast<Offset>(d)};
  }

  /// Axis-aligned plane sign * (x_axis - at) = 0.
  static Plane axis(int ax, int sign, std::int64_t at) {
    int128_t n[3] = {0, 0, 0};
    n[ax] = sign;
    return make(n[0], n[1], n[2], -static_cast<int128_t>(sign) * at);
  }

  /// Value of the plane equation at an integer point (exact in 256 bits).
  WideInt<256> eval(const Vec3& v) const noexcept {
    using W = WideInt<256>;
    return W(v.x) * a + W(v.y) * b + W(v.z) * c + W(static_cast<int128_t>(d));
  }
};

template <int B>
std::ostream& operator<<(std::ostream& os, const Plane<B>& p) {
  return os << '(' << p.a << ", " << p.b << ", " << p.c << ", "
            << WideInt<128>(static_cast<int128_t>(p.d)).to_string() << ')';
}

/// Canonical plane through three integer points; the normal is
/// (v2 - v1) x (v3 - v1), so the orientation follows the winding.
template <int B>
Plane<B> plane_from_points(const Vec3& v1, const Vec3& v2, const Vec3& v3) {
  const int128_t e1[3] = {static_cast<int128_t>(v2.x) - v1.x, static_cast<int128_t>(v2.y) - v1.y,
                          static_cast<int128_t>(v2.z) - v1.z};
  const int128_t e2[3] = {static_cast<int128_t>(v3.x) - v1.x, static_cast<int128_t>(v3.y) - v1.y,
                          static_cast<int128_t>(v3.z) - v1.z};
  constexpr int128_t kLim = int128_t{1} << 62;
  for (int i = 0; i < 3; ++i)
    if (e1[i] >= kLim || e1[i] <= -kLim || e2[i] >= kLim || e2[i] <= -kLim)
      throw OverflowError("point coordinates too large for plane construction");
  const int128_t n0 = e1[1] * e2[2] - e1[2] * e2[1];
  const int128_t n1 = e1[2] * e2[0] - e1[0] * e2[2];
  const int128_t n2 = e1[0] * e2[1] - e1[1] * e2[0];
  if (n0 == 0 && n1 == 0 && n2 == 0) throw DegenerateError("collinear points");
  // d = -n . v1 is evaluated wide and reduced by the normal content first.
  uint128_t g = detail::gcd_u128(detail::uabs128(n0), detail::uabs128(n1));
  g = detail::gcd_u128(g, detail::uabs128(n2));
  const auto gi = static_cast<int128_t>(g);
  const int128_t r0 = n0 / gi, r1 = n1 / gi, r2 = n2 / gi;
  constexpr int128_t kMax64 = std::numeric_limits<std::int64_t>::max();
  if (r0 > kMax64 || r0 < -kMax64 || r1 > kMax64 || r1 < -kMax64 || r2 > kMax64 || r2 < -kMax64)
    throw OverflowError("plane normal exceeds 64 bits");
  using W = WideInt<256>;
  const W d = -(W(v1.x) * static_cast<std::int64_t>(r0) + W(v1.y) * static_cast<std::int64_t>(r1) +
                W(v1.z) * static_cast<std::int64_t>(r2));
  const W lim = W(int128_t{1} << 126) * std::int64_t{2};
  if (d >= lim || d <= -lim) throw OverflowError("plane offset exceeds 128 bits");
  // gcd(r0, r1, r2) = 1 already, so the result is canonical.
  return Plane<B>::make(r0, r1, r2, d.to_int128());
}

/// True iff the normals are parallel or anti-parallel.
template <int B>
bool are_planes_parallel(const Plane<B>& p, const Plane<B>& q) noexcept {
  return detail::minor64(p.b, p.c, q.b, q.c) == 0 && detail::minor64(p.c, p.a, q.c, q.a) == 0 &&
         detail::minor64(p.a, p.b, q.a, q.b) == 0;
}

/// Homogeneous point with the palette ids of its defining planes (-1 if none).
template <int B>
struct HomoPoint {
  using W = WideInt<B>;
  std::array<W, 4> x{};
  std::array<std::int32_t, 3> planes{-1, -1, -1};

  static HomoPoint from_int(const Vec3& v) {
    HomoPoint p;
    p.x = {W(v.x), W(v.y), W(v.z), W(1)};
    return p;
  }

  /// Nearest binary64 to x_i / x4, ties to even.
  double coord(int i) const { return rational_to_double(x[i], x[3]); }
  std::array<double, 3> to_double() const { return {coord(0), coord(1), coord(2)}; }
};

/// Projective equality: x_i y4 = y_i x4 for all i.
template <int B>
bool same_point(const HomoPoint<B>& p, const HomoPoint<B>& q) noexcept {
  for (int i = 0; i < 3; ++i)
    if (mul_wide(p.x[i], q.x[3]) != mul_wide(q.x[i], p.x[3])) return false;
  return true;
}

/// Intersection of three planes by cofactor expansion along the (e1..e4) row.
/// Returns nullopt when the normals are linearly dependent.
template <int B, bool Checked = kCheckedArithmetic>
std::optional<HomoPoint<B>> try_intersect(const Plane<B>& p, const Plane<B>& q, const Plane<B>& r) {
  using W = WideInt<B>;
  using O = detail::Ops<B, Checked>;
  ++predicate_counters().intersect;
  // Normal-normal minors of rows q, r fit in 128 bits.
  const int128_t m_ab = detail::minor64(q.a, q.b, r.a, r.b);
  const int128_t m_ac = detail::minor64(q.a, q.c, r.a, r.c);
  const int128_t m_bc = detail::minor64(q.b, q.c, r.b, r.c);
  const W wab(m_ab), wac(m_ac), wbc(m_bc);
  const W x4 = O::neg(O::add(O::sub(O::mul(wbc, p.a), O::mul(wac, p.b)), O::mul(wab, p.c)));
  if (x4.is_zero()) return std::nullopt;
  // Normal-offset minors.
  const W dq = W(q.d), dr = W(r.d);
  const W m_ad = O::sub(O::mul(dr, q.a), O::mul(dq, r.a));
  const W m_bd = O::sub(O::mul(dr, q.b), O::mul(dq, r.b));
  const W m_cd = O::sub(O::mul(dr, q.c), O::mul(dq, r.c));
  HomoPoint<B> out;
  out.x[0] = O::add(O::sub(O::mul(m_cd, p.b), O::mul(m_bd, p.c)), O::mul(wbc, p.d));
  out.x[1] = O::neg(O::add(O::sub(O::mul(m_cd, p.a), O::mul(m_ad, p.c)), O::mul(wac, p.d)));
  out.x[2] = O::add(O::sub(O::mul(m_bd, p.a), O::mul(m_ad, p.b)), O::mul(wab, p.d));
  out.x[3] = x4;
  return out;
}

/// As try_intersect, but throws DegenerateError for a singular triple.
template <int B, bool Checked = kCheckedArithmetic>
HomoPoint<B> intersect(const Plane<B>& p, const Plane<B>& q, const Plane<B>& r) {
  auto res = try_intersect<B, Checked>(p, q, r);
  if (!res) throw DegenerateError("planes do not meet in a unique point");
  return *res;
}

/// x^T s at width B.
template <int B, bool Checked = kCheckedArithmetic>
WideInt<B> dot(const HomoPoint<B>& x, const Plane<B>& s) {
  using O = detail::Ops<B, Checked>;
  return O::add(O::add(O::add(O::mul(x.x[0], s.a), O::mul(x.x[1], s.b)), O::mul(x.x[2], s.c)),
                O::mul(x.x[3], s.d));
}

/// Side of s on which x lies: -1, 0 or +1.
template <int B, bool Checked = kCheckedArithmetic>
int classify(const HomoPoint<B>& x, const Plane<B>& s) {
  ++predicate_counters().classify;
  return dot<B, Checked>(x, s).sign() * x.x[3].sign();
}

/// Sign of |dist(x, s)| - |dist(y, s)|, compared at width 2B.
template <int B, bool Checked = kCheckedArithmetic>
int compare_abs_distance(const HomoPoint<B>& x, const HomoPoint<B>& y, const Plane<B>& s) {
  ++predicate_counters().compare;
  const auto lhs = mul_wide(dot<B, Checked>(x, s).abs_wrapped(), y.x[3].abs_wrapped());
  const auto rhs = mul_wide(dot<B, Checked>(y, s).abs_wrapped(), x.x[3].abs_wrapped());
  // Both operands are non-negative magnitudes below 2^(2B-2).
  const auto c = lhs <=> rhs;
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

/// Input coordinate bounds under which every predicate at b bits is exact.
struct PrecisionBudget {
  int bits = 256;
  int128_t v_plus = 0;
  int128_t n_plus = 0;

  int128_t d_plus() const noexcept { return 3 * v_plus * n_plus; }

  /// (n⁺)^4 v⁺ <= 2^(b-1) / 48.
  bool satisfied() const noexcept {
    using W = WideInt<640>;
    const W n = W(n_plus);
    const W lhs = n * n * n * n * W(v_plus) * std::int64_t{48};
    return lhs <= W::pow2(bits - 1);
  }

  /// Budget with normals computed from vertex cross products, n⁺ = 8 (v⁺)^2.
  static PrecisionBudget from_vertices(int bits, int128_t v_plus) noexcept {
    return PrecisionBudget{bits, v_plus, 8 * v_plus * v_plus};
  }
};

/// Largest v⁺ keeping the budget satisfied at b bits. With cross-product
/// normals n⁺ = 8 (v⁺)^2, otherwise n⁺ = 1.
inline int128_t max_vertex_bound(int bits, bool normals_from_cross_products) {
  if (bits != 128 && bits != 192 && bits != 256) throw std::invalid_argument("bits must be 128, 192 or 256");
  if (!normals_from_cross_products) {
    const WideInt<256> q = WideInt<256>::pow2(bits - 1);
    WideInt<256> out;
    const auto rem = q.udivmod_small(48, out);
    (void)rem;
    return out.to_int128();
  }
  int128_t lo = 1, hi = int128_t{1} << 40;
  while (lo < hi) {
    const int128_t mid = lo + (hi - lo + 1) / 2;
    if (PrecisionBudget::from_vertices(bits, mid).satisfied()) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

/// Little-endian plane record: budget 128 stores i32 x3 + i64, budget 192
/// i64 x4, budget 256 i64 x3 + i128.
template <int B>
constexpr std::size_t plane_record_size() noexcept {
  return B == 128 ? 20 : (B == 192 ? 32 : 40);
}

namespace detail {
template <typename T>
void put_le(std::string& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xff));
    u >>= 8;
  }
}
template <typename T>
T get_le(const unsigned char* p) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = (u << 8) | p[i];
  return static_cast<T>(u);
}
}  // namespace detail

/// Appends the plane record. Throws OverflowError if a coefficient does not
/// fit the fixed layout.
template <int B>
void write_plane(std::string& out, const Plane<B>& p) {
  if constexpr (B == 128) {
    for (std::int64_t v : {p.a, p.b, p.c}) {
      if (v > INT32_MAX || v < INT32_MIN) throw OverflowError("normal exceeds 32-bit record");
      detail::put_le<std::int32_t>(out, static_cast<std::int32_t>(v));
    }
    detail::put_le<std::int64_t>(out, p.d);
  } else if constexpr (B == 192) {
    for (std::int64_t v : {p.a, p.b, p.c, static_cast<std::int64_t>(p.d)}) detail::put_le<std::int64_t>(out, v);
  } else {
    for (std::int64_t v : {p.a, p.b, p.c}) detail::put_le<std::int64_t>(out, v);
    detail::put_le<int128_t>(out, p.d);
  }
}

/// Reads one record of plane_record_size<B>() bytes; validates canonical form.
template <int B>
Plane<B> read_plane(const unsigned char* p) {
  Plane<B> pl;
  if constexpr (B == 128) {
    pl.a = detail::get_le<std::int32_t>(p);
    pl.b = detail::get_le<std::int32_t>(p + 4);
    pl.c = detail::get_le<std::int32_t>(p + 8);
    pl.d = detail::get_le<std::int64_t>(p + 12);
  } else if constexpr (B == 192) {
    pl.a = detail::get_le<std::int64_t>(p);
    pl.b = detail::get_le<std::int64_t>(p + 8);
    pl.c = detail::get_le<std::int64_t>(p + 16);
    pl.d = detail::get_le<std::int64_t>(p + 24);
  } else {
    pl.a = detail::get_le<std::int64_t>(p);
    pl.b = detail::get_le<std::int64_t>(p + 8);
    pl.c = detail::get_le<std::int64_t>(p + 16);
    pl.d = detail::get_le<int128_t>(p + 24);
  }
  if (Plane<B>::make(pl.a, pl.b, pl.c, pl.d) != pl) throw std::runtime_error("plane record not canonical");
  return pl;
}

template <int B>
struct PlaneHash {
  std::size_t operator()(const Plane<B>& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    const auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(p.a));
    mix(static_cast<std::uint64_t>(p.b));
    mix(static_cast<std::uint64_t>(p.c));
    mix(static_cast<std::uint64_t>(static_cast<uint128_t>(p.d)));
    mix(static_cast<std::uint64_t>(static_cast<uint128_t>(p.d) >> 64));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace octbsp
