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

// Generators and exact reference checks shared by the unit and acceptance
// tests.

#include <cmath>
#include <random>
#include <vector>

#include "octbsp/octree.hpp"
#include "oracle.hpp"

namespace support {

using namespace octbsp;

inline std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline Vec3 random_normal(std::mt19937_64& rng, std::int64_t m) {
  for (;;) {
    Vec3 n{uniform(rng, -m, m), uniform(rng, -m, m), uniform(rng, -m, m)};
    if (n.x || n.y || n.z) return n;
  }
}

/// Plane with normal n at distance about r from the origin, origin inside.
template <int B>
Plane<B> tangent_plane(std::mt19937_64& rng, double r, std::int64_t m) {
  const Vec3 n = random_normal(rng, m);
  const double len = std::sqrt(static_cast<double>(n.x) * n.x + static_cast<double>(n.y) * n.y +
                               static_cast<double>(n.z) * n.z);
  return Plane<B>::make(n.x, n.y, n.z, -static_cast<int128_t>(std::llround(r * len)));
}

/// Plane through p with a random normal.
template <int B>
Plane<B> plane_through(std::mt19937_64& rng, const Vec3& p, std::int64_t m) {
  const Vec3 n = random_normal(rng, m);
  const int128_t d = -(static_cast<int128_t>(n.x) * p.x + static_cast<int128_t>(n.y) * p.y +
                       static_cast<int128_t>(n.z) * p.z);
  return Plane<B>::make(n.x, n.y, n.z, d);
}

/// Convex cell approximating a ball: the box [-1100, 1100]^3 clipped by
/// tangent planes of radius 1000 until it has `faces` faces.
template <int B>
ConvexCell<B> random_cell(std::mt19937_64& rng, std::size_t faces, std::int64_t m = 1000000) {
  auto c = ConvexCell<B>::make_box({-1100, -1100, -1100}, {1100, 1100, 1100});
  for (int tries = 0; c.num_faces() < faces && tries < 100 * static_cast<int>(faces); ++tries)
    c.clip(tangent_plane<B>(rng, 1000.0, m), -1, -1);
  return c;
}

template <int B>
std::vector<std::vector<oracle::RVec>> cell_faces(const ConvexCell<B>& c) {
  std::vector<std::vector<oracle::RVec>> out;
  c.for_each_face([&](std::int32_t f) {
    std::vector<oracle::RVec> loop;
    for (auto v : c.face_loop(f)) loop.push_back(oracle::to_rational(c.vertices()[v].pos));
    out.push_back(std::move(loop));
  });
  return out;
}

template <int B>
mpq_class cell_volume(const ConvexCell<B>& c) {
  return oracle::mesh_volume(cell_faces(c));
}

/// Every live vertex of c classifies to `side` or 0 against s.
template <int B>
bool on_side(const ConvexCell<B>& c, const Plane<B>& s, int side) {
  for (const auto& v : c.vertices()) {
    if (v.out < 0) continue;
    if (classify(v.pos, s) * side < 0) return false;
  }
  return true;
}

/// Cap face vertices all lie on s.
template <int B>
bool cap_on_plane(const ConvexCell<B>& c, std::int32_t cap, const Plane<B>& s) {
  for (auto v : c.face_loop(cap))
    if (classify(c.vertices()[v].pos, s) != 0) return false;
  return true;
}

/// Random integer point in the box.
inline Vec3 random_point(std::mt19937_64& rng, const Box& b) {
  return {uniform(rng, b.lo.x, b.hi.x), uniform(rng, b.lo.y, b.hi.y), uniform(rng, b.lo.z, b.hi.z)};
}

/// Random tree with `n` nodes, planes through random points of the box.
template <int B>
BspTree<B> random_bsp(std::mt19937_64& rng, int n, const Box& b, std::int64_t m) {
  TreeBuilder<B> tb;
  const auto rec = [&](auto&& self, int count) -> std::int32_t {
    if (count == 0) return uniform(rng, 0, 1) ? kIn : kOut;
    const std::int32_t k = tb.reserve(tb.plane_id(plane_through<B>(rng, random_point(rng, b), m)));
    const int left = static_cast<int>(uniform(rng, 0, count - 1));
    const std::int32_t neg = self(self, left);
    const std::int32_t pos = self(self, count - 1 - left);
    tb.node(k).neg = neg;
    tb.node(k).pos = pos;
    return k;
  };
  return tb.finish(rec(rec, n));
}

/// Total volume of a set of cells.
template <int B>
mpq_class cells_volume(const std::vector<ConvexCell<B>>& cells) {
  mpq_class v = 0;
  for (const auto& c : cells) v += cell_volume(c);
  return v;
}

template <int B>
std::vector<std::vector<oracle::RVec>> mesh_faces(const BoundaryMesh<B>& m) {
  std::vector<std::vector<oracle::RVec>> out;
  for (const auto& f : m.faces) {
    std::vector<oracle::RVec> loop;
    for (auto v : f.loop) loop.push_back(oracle::to_rational(m.vertices[v]));
    out.push_back(std::move(loop));
  }
  return out;
}

/// Fraction of `samples` random points of b, off every plane, on which
/// `got` and `want` agree; points on a plane are redrawn.
template <typename Got, typename Want>
double agreement(std::mt19937_64& rng, const Box& b, int samples, Got&& got, Want&& want) {
  int agree = 0, drawn = 0;
  for (int tries = 0; drawn < samples && tries < 20 * samples; ++tries) {
    const Vec3 p = random_point(rng, b);
    const PointClass g = got(p);
    const PointClass w = want(p);
    if (g == PointClass::On || w == PointClass::On) continue;
    ++drawn;
    agree += g == w;
  }
  return drawn ? static_cast<double>(agree) / drawn : 0.0;
}

/// Outward-oriented triangulation of the box surface, each face split into
/// a k-by-k grid (requires k to divide every edge length).
inline std::vector<std::array<Vec3, 3>> box_mesh(const Vec3& lo, const Vec3& hi, int k = 1) {
  std::vector<std::array<Vec3, 3>> tris;
  for (int ax = 0; ax < 3; ++ax)
    for (int dir : {-1, 1}) {
      const int u = (ax + 1) % 3, v = (ax + 2) % 3;
      const std::int64_t du = (hi[u] - lo[u]) / k, dv = (hi[v] - lo[v]) / k;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          Vec3 q[4];
          for (int c = 0; c < 4; ++c) {
            q[c][ax] = dir > 0 ? hi[ax] : lo[ax];
            q[c][u] = lo[u] + du * (i + ((c == 1 || c == 2) ? 1 : 0));
            q[c][v] = lo[v] + dv * (j + ((c >= 2) ? 1 : 0));
          }
          // (u, v, ax) is right-handed, so q0 q1 q2 winds around +ax.
          if (dir > 0) {
            tris.push_back({q[0], q[1], q[2]});
            tris.push_back({q[0], q[2], q[3]});
          } else {
            tris.push_back({q[0], q[2], q[1]});
            tris.push_back({q[0], q[3], q[2]});
          }
        }
    }
  return tris;
}

inline bool in_box(const Vec3& p, const Box& b) {
  return b.lo.x < p.x && p.x < b.hi.x && b.lo.y < p.y && p.y < b.hi.y && b.lo.z < p.z && p.z < b.hi.z;
}

}  // namespace support
