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

/// Generated geometry for benchmarks, fuzzing and carving jobs. Every
/// generator is a pure function of its std::mt19937_64 state.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "octbsp/bsp.hpp"
#include "octbsp/octree.hpp"

namespace octbsp {

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline Vec3 uniform_point(std::mt19937_64& rng, const Box& b) {
  return {uniform_int(rng, b.lo.x, b.hi.x), uniform_int(rng, b.lo.y, b.hi.y), uniform_int(rng, b.lo.z, b.hi.z)};
}

/// Integer vector of length about m in a uniformly random direction; never zero.
inline Vec3 random_direction(std::mt19937_64& rng, std::int64_t m) {
  std::normal_distribution<double> g;
  for (;;) {
    const double x = g(rng), y = g(rng), z = g(rng);
    const double len = std::sqrt(x * x + y * y + z * z);
    if (len < 1e-9) continue;
    const double s = static_cast<double>(m) / len;
    const Vec3 v{std::llround(x * s), std::llround(y * s), std::llround(z * s)};
    if (v.x || v.y || v.z) return v;
  }
}

template <int B>
Plane<B> plane_with_normal_through(const Vec3& n, const Vec3& p) {
  const int128_t d = -(static_cast<int128_t>(n.x) * p.x + static_cast<int128_t>(n.y) * p.y +
                       static_cast<int128_t>(n.z) * p.z);
  return Plane<B>::make(n.x, n.y, n.z, d);
}

/// Random BSP with `n` inner nodes: sample a point of the box, find its
/// leaf and split that leaf by a plane through the point with a random
/// normal of length about m. Leaf labels are random. Points on an
/// existing plane are redrawn, so every split is proper.
template <int B>
BspTree<B> random_split_bsp(std::mt19937_64& rng, int n, const Box& box, std::int64_t m) {
  std::vector<Plane<B>> palette;
  std::vector<typename BspTree<B>::Node> nodes;
  const auto label = [&] { return uniform_int(rng, 0, 1) ? kIn : kOut; };
  std::int32_t root = label();
  while (static_cast<int>(nodes.size()) < n) {
    const Vec3 p = uniform_point(rng, box);
    const HomoPoint<B> x = HomoPoint<B>::from_int(p);
    // The leaf is child `side` of `parent`, or the root when parent < 0.
    std::int32_t parent = -1, cur = root;
    int side = 0;
    while (!is_leaf(cur)) {
      side = classify(x, palette[nodes[cur].plane]);
      if (side == 0) break;
      parent = cur;
      cur = side < 0 ? nodes[cur].neg : nodes[cur].pos;
    }
    if (!is_leaf(cur)) continue;
    palette.push_back(plane_with_normal_through<B>(random_direction(rng, m), p));
    const std::int32_t neg = label(), pos = label();
    const auto k = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({static_cast<std::int32_t>(palette.size() - 1), neg, pos});
    if (parent < 0) root = k;
    else (side < 0 ? nodes[parent].neg : nodes[parent].pos) = k;
  }
  return relayout<B>(palette, nodes, root);
}

/// n planes tangent to the sphere of radius r about c, normals of length
/// about m, origin side negative.
template <int B>
std::vector<Plane<B>> tangent_planes(std::mt19937_64& rng, int n, double r, std::int64_t m, const Vec3& c = {}) {
  std::vector<Plane<B>> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    const Vec3 nv = random_direction(rng, m);
    const double len = std::sqrt(static_cast<double>(nv.x) * nv.x + static_cast<double>(nv.y) * nv.y +
                                 static_cast<double>(nv.z) * nv.z);
    const int128_t nc = static_cast<int128_t>(nv.x) * c.x + static_cast<int128_t>(nv.y) * c.y +
                        static_cast<int128_t>(nv.z) * c.z;
    out.push_back(Plane<B>::make(nv.x, nv.y, nv.z, -nc - static_cast<int128_t>(std::llround(r * len))));
  }
  return out;
}

/// Linear intersection BSP: node i has OUT on its positive side and node
/// i+1 (or IN) on its negative side.
template <int B>
BspTree<B> linear_convex_bsp(const std::vector<Plane<B>>& planes) {
  TreeBuilder<B> tb;
  if (planes.empty()) return tb.finish(kIn);
  std::vector<std::int32_t> ids;
  for (const auto& p : planes) ids.push_back(tb.reserve(tb.plane_id(p)));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    tb.node(ids[i]).pos = kOut;
    tb.node(ids[i]).neg = i + 1 < ids.size() ? ids[i + 1] : kIn;
  }
  return tb.finish(ids[0]);
}

/// k points scattered in the cube of half-width r about c.
inline std::vector<Vec3> random_hull_points(std::mt19937_64& rng, const Vec3& c, std::int64_t r, int k = 8) {
  std::vector<Vec3> pts;
  pts.reserve(k);
  for (int i = 0; i < k; ++i)
    pts.push_back(c + Vec3{uniform_int(rng, -r, r), uniform_int(rng, -r, r), uniform_int(rng, -r, r)});
  return pts;
}

/// Corners of a triangle at two consecutive positions.
inline std::vector<Vec3> prism_points(const std::array<Vec3, 3>& t, const Vec3& from, const Vec3& to) {
  return {t[0] + from, t[1] + from, t[2] + from, t[0] + to, t[1] + to, t[2] + to};
}

/// Rotating flat blade moved along a skewed axis. A stand-in for a pictured
/// drill bit, not a replica: each step is the hull of the blade at two
/// consecutive angles, rounded to the integer grid once.
struct DrillParams {
  std::int64_t radius = 60;
  std::int64_t length = 240;
  std::int64_t thickness = 12;
  int steps_per_rev = 90;
  int revolutions = 3;
  std::int64_t feed_per_rev = 30;
  double skew_deg = 30.0;
  Vec3 start{};
};

/// Hull point sets of every step, in order.
inline std::vector<std::vector<Vec3>> drill_sweeps(const DrillParams& p) {
  const double skew = p.skew_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(skew), sn = std::sin(skew);
  // Tool axis is z tilted about x; the tip is at the local origin.
  const auto place = [&](double x, double y, double z, double feed) {
    const double zz = z - feed;
    const double wy = y * cs - zz * sn, wz = y * sn + zz * cs;
    return p.start + Vec3{std::llround(x), std::llround(wy), std::llround(wz)};
  };
  std::vector<std::vector<Vec3>> out;
  const double half_t = static_cast<double>(p.thickness) / 2;
  for (int rev = 0; rev < p.revolutions; ++rev) {
    const double feed = static_cast<double>(p.feed_per_rev) * rev;
    for (int k = 0; k < p.steps_per_rev; ++k) {
      std::vector<Vec3> pts;
      for (int j = 0; j < 2; ++j) {
        const double a = 2 * std::numbers::pi * (k + j) / p.steps_per_rev;
        const double ca = std::cos(a), sa = std::sin(a);
        for (double u : {-static_cast<double>(p.radius), static_cast<double>(p.radius)})
          for (double v : {-half_t, half_t})
            for (double z : {0.0, static_cast<double>(p.length)}) pts.push_back(place(u * ca - v * sa, u * sa + v * ca, z, feed));
      }
      out.push_back(std::move(pts));
    }
  }
  return out;
}

}  // namespace octbsp
