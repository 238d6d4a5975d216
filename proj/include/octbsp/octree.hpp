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

/// Octree whose leaves hold BSPs over their cubes, mesh import into it, and
/// local application of tool BSPs.

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <optional>
#include <unordered_map>
#include <vector>

#include "octbsp/bsp.hpp"

namespace octbsp {

/// The input does not bound a solid: flood fill found conflicting labels.
struct NonWatertightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis-aligned cube with integer corner and power-of-two edge.
struct Cube {
  Vec3 lo;
  std::int64_t size = 1;

  friend bool operator==(const Cube&, const Cube&) = default;
  Vec3 hi() const noexcept { return lo + Vec3{size, size, size}; }
  Box box() const noexcept { return {lo, hi()}; }
  /// Child i has bit 0, 1, 2 set for the upper half in x, y, z.
  Cube child(int i) const noexcept {
    const std::int64_t h = size / 2;
    return {{lo.x + ((i & 1) ? h : 0), lo.y + ((i & 2) ? h : 0), lo.z + ((i & 4) ? h : 0)}, h};
  }
  Vec3 mid() const noexcept {
    const std::int64_t h = size / 2;
    return lo + Vec3{h, h, h};
  }
};

/// Smallest power-of-two cube containing [lo - 1, hi + 1].
inline Cube covering_cube(const Vec3& lo, const Vec3& hi) {
  const Vec3 l = lo - Vec3{1, 1, 1};
  std::int64_t ext = 2;
  for (int i = 0; i < 3; ++i) ext = std::max(ext, hi[i] + 1 - l[i]);
  std::int64_t s = 1;
  while (s < ext) s *= 2;
  return {l, s};
}

struct OctreeParams {
  std::size_t max_bsp_size = 150;
  std::size_t tri_threshold = 32;
  std::uint64_t seed = 1;
};

struct OctreeStats {
  std::size_t leaves = 0, internal = 0, bsp_nodes = 0, max_leaf_bsp = 0, pathological = 0, depth = 0;
  std::size_t palette_planes = 0;
};

template <int B>
class OctreeBsp {
 public:
  struct Node {
    std::int32_t first_child = -1;  // eight consecutive nodes, or -1 for a leaf
    bool pathological = false;
    BspTree<B> bsp;
  };

  OctreeBsp() = default;
  OctreeBsp(const Cube& root, OctreeParams params, bool in = false) : root_(root), params_(params) {
    if (root.size < 1 || (root.size & (root.size - 1)) != 0) throw std::invalid_argument("root edge must be a power of two");
    nodes_.push_back(Node{});
    nodes_[0].bsp = BspTree<B>::leaf(in);
  }

  const Cube& root_cube() const noexcept { return root_; }
  const OctreeParams& params() const noexcept { return params_; }
  OctreeParams& params() noexcept { return params_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::vector<Node>& nodes() noexcept { return nodes_; }
  std::vector<std::int32_t>& free_blocks() noexcept { return free_; }

  /// Leaves visited by apply_tool since construction.
  std::uint64_t visits() const noexcept { return visits_; }

  // --- queries ---------------------------------------------------------------

  /// Calls fn(node, cube) for every leaf in preorder.
  template <typename Fn>
  void for_each_leaf(Fn&& fn) const {
    const auto rec = [&](auto&& self, std::int32_t n, const Cube& c) -> void {
      if (nodes_[n].first_child < 0) {
        fn(n, c);
        return;
      }
      for (int i = 0; i < 8; ++i) self(self, nodes_[n].first_child + i, c.child(i));
    };
    rec(rec, 0, root_);
  }

  /// Leaf containing x (ties go to the upper child) and its cube.
  std::pair<std::int32_t, Cube> locate(const HomoPoint<B>& x) const {
    std::int32_t n = 0;
    Cube c = root_;
    while (nodes_[n].first_child >= 0) {
      const Vec3 m = c.mid();
      int i = 0;
      for (int ax = 0; ax < 3; ++ax) {
        const WideInt<B> diff = x.x[ax] - x.x[3] * m[ax];
        if (diff.sign() * x.x[3].sign() >= 0) i |= 1 << ax;
      }
      n = nodes_[n].first_child + i;
      c = c.child(i);
    }
    return {n, c};
  }

  PointClass classify_point(const HomoPoint<B>& x) const { return nodes_[locate(x).first].bsp.classify_point(x); }
  PointClass classify_point(const Vec3& v) const { return classify_point(HomoPoint<B>::from_int(v)); }

  OctreeStats stats() const {
    OctreeStats s;
    std::unordered_map<Plane<B>, int, PlaneHash<B>> planes;
    const auto rec = [&](auto&& self, std::int32_t n, std::size_t depth) -> void {
      s.depth = std::max(s.depth, depth);
      const Node& nd = nodes_[n];
      if (nd.first_child >= 0) {
        ++s.internal;
        for (int i = 0; i < 8; ++i) self(self, nd.first_child + i, depth + 1);
        return;
      }
      ++s.leaves;
      s.bsp_nodes += nd.bsp.size();
      s.max_leaf_bsp = std::max(s.max_leaf_bsp, nd.bsp.size());
      s.pathological += nd.pathological;
      for (const auto& p : nd.bsp.palette) planes.emplace(p, 0);
    };
    rec(rec, 0, 0);
    s.palette_planes = planes.size();
    return s;
  }

  /// Bytes held by the structure, counting vector capacities.
  std::size_t memory_bytes() const {
    std::size_t b = sizeof(*this) + nodes_.capacity() * sizeof(Node) + free_.capacity() * sizeof(std::int32_t);
    for (const auto& n : nodes_)
      b += n.bsp.nodes.capacity() * sizeof(typename BspTree<B>::Node) + n.bsp.palette.capacity() * sizeof(Plane<B>);
    return b;
  }

  /// Checks topology, leaf trees and the size threshold.
  bool validate(std::string* why = nullptr) const {
    const auto fail = [why](const std::string& m) {
      if (why) *why = m;
      return false;
    };
    if (nodes_.empty()) return fail("no root");
    if (root_.size < 1 || (root_.size & (root_.size - 1)) != 0) return fail("root edge not a power of two");
    std::vector<char> seen(nodes_.size(), 0);
    std::string msg;
    bool ok = true;
    const auto rec = [&](auto&& self, std::int32_t n, const Cube& c) -> void {
      if (!ok) return;
      if (seen[n]) {
        ok = fail("node reached twice");
        return;
      }
      seen[n] = 1;
      const Node& nd = nodes_[n];
      if (nd.first_child >= 0) {
        if (c.size < 2) {
          ok = fail("subdivided unit cube");
          return;
        }
        if (nd.first_child + 8 > static_cast<std::int32_t>(nodes_.size())) {
          ok = fail("child block out of range");
          return;
        }
        if (!nd.bsp.is_leaf_tree()) {
          ok = fail("internal octree node holds a tree");
          return;
        }
        for (int i = 0; i < 8; ++i) self(self, nd.first_child + i, c.child(i));
        return;
      }
      if (!nd.bsp.validate(&msg)) {
        ok = fail("leaf tree: " + msg);
        return;
      }
      if (!nd.pathological && nd.bsp.size() > params_.max_bsp_size) ok = fail("leaf exceeds max_bsp_size");
    };
    rec(rec, 0, root_);
    return ok;
  }

  // --- structural operations --------------------------------------------------

  /// Splits leaf n into eight children holding its tree restricted to each
  /// child cube, recursing while a child exceeds the threshold. A unit cube
  /// cannot be split and is flagged pathological instead.
  void subdivide(std::int32_t n, const Cube& c) {
    if (c.size < 2) {
      nodes_[n].pathological = true;
      return;
    }
    const BspTree<B> parent = std::move(nodes_[n].bsp);
    nodes_[n].bsp = BspTree<B>::leaf(false);
    nodes_[n].pathological = false;
    const std::int32_t first = alloc_block();
    nodes_[n].first_child = first;
    for (int i = 0; i < 8; ++i)
      nodes_[first + i].bsp = remove_redundancy(parent, c.child(i).box(), next_seed());
    for (int i = 0; i < 8; ++i)
      if (nodes_[first + i].bsp.size() > params_.max_bsp_size) subdivide(first + i, c.child(i));
  }

  /// Replaces an internal node whose children are all leaves by one leaf.
  /// Returns false (and changes nothing) if the children's sizes sum above
  /// the threshold or the rebuilt tree exceeds it.
  bool combine(std::int32_t n, const Cube& c) {
    const std::int32_t first = nodes_[n].first_child;
    if (first < 0) return false;
    std::size_t total = 0;
    for (int i = 0; i < 8; ++i) {
      if (nodes_[first + i].first_child >= 0) return false;
      total += nodes_[first + i].bsp.size();
    }
    if (total > params_.max_bsp_size) return false;
    BspTree<B> merged = remove_redundancy(graft_children(n, c), c.box(), next_seed());
    if (merged.size() > params_.max_bsp_size) return false;
    free_block(first);
    nodes_[n].first_child = -1;
    nodes_[n].bsp = std::move(merged);
    return true;
  }

  /// The 3-level axis tree of c's midplanes with the children of n grafted
  /// at its leaves.
  BspTree<B> graft_children(std::int32_t n, const Cube& c) const {
    TreeBuilder<B> tb;
    const Vec3 m = c.mid();
    const std::int32_t first = nodes_[n].first_child;
    const auto copy = [&](auto&& self, const BspTree<B>& t, std::int32_t r) -> std::int32_t {
      if (is_leaf(r)) return r;
      const std::int32_t k = tb.reserve(tb.plane_id(t.palette[t.nodes[r].plane]));
      const std::int32_t neg = self(self, t, t.nodes[r].neg);
      const std::int32_t pos = self(self, t, t.nodes[r].pos);
      tb.node(k).neg = neg;
      tb.node(k).pos = pos;
      return k;
    };
    const auto level = [&](auto&& self, int ax, int idx) -> std::int32_t {
      if (ax == 3) {
        const BspTree<B>& t = nodes_[first + idx].bsp;
        return copy(copy, t, t.root());
      }
      const std::int32_t k = tb.reserve(tb.plane_id(Plane<B>::axis(ax, 1, m[ax])));
      const std::int32_t neg = self(self, ax + 1, idx);
      const std::int32_t pos = self(self, ax + 1, idx | (1 << ax));
      tb.node(k).neg = neg;
      tb.node(k).pos = pos;
      return k;
    };
    return tb.finish(level(level, 0, 0));
  }

  // --- iterated CSG -------------------------------------------------------------

  struct ApplyStats {
    std::size_t visited = 0, changed = 0, subdivided = 0, combined = 0;
  };

  /// Applies f(workpiece, tool) where the tool is IN only inside
  /// tool_bounds. Leaves not overlapping tool_bounds are visited only if
  /// f changes labels against OUT.
  ApplyStats apply_tool(const BspTree<B>& tool, const Box& tool_bounds, MergeFunction f) {
    if (!root_.box().contains(tool_bounds)) throw std::invalid_argument("tool bounds outside the root cube");
    ApplyStats st;
    const bool outside_matters = f(false, false) || !f(true, false);
    const BspTree<B> out_tool = BspTree<B>::leaf(false);
    const auto rec = [&](auto&& self, std::int32_t n, const Cube& c) -> bool {
      const bool overlap = c.box().overlaps(tool_bounds);
      if (!overlap && !outside_matters) return false;
      if (nodes_[n].first_child >= 0) {
        bool all = true;
        for (int i = 0; i < 8; ++i) all &= self(self, nodes_[n].first_child + i, c.child(i));
        if (all && combine(n, c)) ++st.combined;
        return all;
      }
      apply_leaf(n, c, overlap ? tool : out_tool, f, st);
      return true;
    };
    rec(rec, 0, root_);
    if (free_.size() * 16 > nodes_.size()) compact();
    return st;
  }

  /// Rewrites the node array breadth-first without free blocks, so memory
  /// follows the live structure after large collapses.
  void compact() {
    std::vector<Node> out;
    out.reserve(nodes_.size() - 8 * free_.size());
    out.push_back(std::move(nodes_[0]));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::int32_t first = out[i].first_child;
      if (first < 0) continue;
      out[i].first_child = static_cast<std::int32_t>(out.size());
      for (int k = 0; k < 8; ++k) out.push_back(std::move(nodes_[first + k]));
    }
    nodes_ = std::move(out);
    free_.clear();
    free_.shrink_to_fit();
  }

  // --- mesh import ----------------------------------------------------------------

  /// Octree of the solid bounded by a watertight, outward-oriented triangle
  /// soup. Throws NonWatertightError when labels of geometry-free cells
  /// conflict. A given root must contain the soup strictly inside.
  static OctreeBsp import_mesh(const std::vector<std::array<Vec3, 3>>& tris, OctreeParams params,
                               std::optional<Cube> root = std::nullopt) {
    if (tris.empty()) return OctreeBsp(root.value_or(Cube{{-1, -1, -1}, 2}), params, false);
    Vec3 lo = tris[0][0], hi = tris[0][0];
    for (const auto& t : tris)
      for (const auto& v : t)
        for (int i = 0; i < 3; ++i) {
          lo[i] = std::min(lo[i], v[i]);
          hi[i] = std::max(hi[i], v[i]);
        }
    if (root && !support_strictly_inside(*root, lo, hi)) throw std::invalid_argument("mesh not strictly inside the root cube");
    OctreeBsp o(root.value_or(covering_cube(lo, hi)), params, false);
    std::vector<Polygon<B>> polys;
    polys.reserve(tris.size());
    for (const auto& t : tris) polys.push_back(make_triangle_polygon<B>(t[0], t[1], t[2]));
    std::vector<char> empty(1, 0);
    o.build(0, o.root_, std::move(polys), empty);
    o.flood_fill(empty);
    return o;
  }

  // --- extraction -----------------------------------------------------------------

  /// Boundary of the whole solid. Faces on cube walls are emitted by the IN
  /// side only, clipped against the neighbouring leaves.
  BoundaryMesh<B> extract_all() const {
    std::vector<Polygon<B>> faces;
    for_each_leaf([&](std::int32_t n, const Cube& c) {
      const BspTree<B>& t = nodes_[n].bsp;
      const auto cells = collect_in_cells(t, c.box());
      auto inner = boundary_faces(t, cells, false);
      for (auto& p : inner) faces.push_back(std::move(p));
      for (const auto& cell : cells)
        cell.for_each_face([&](std::int32_t f) {
          if (cell.face(f).annotation != kBoundsFace) return;
          clip_wall_face(n, c, cell.face_polygon(f), faces);
        });
    });
    return resolve_tjunctions(faces);
  }

  /// Leaves other than `self` whose cubes share a positive-area part of the
  /// wall of cube c on axis ax, side dir (+1 upper wall).
  std::vector<std::pair<std::int32_t, Cube>> wall_neighbours(const Cube& c, int ax, int dir) const {
    std::vector<std::pair<std::int32_t, Cube>> out;
    const std::int64_t at = dir > 0 ? c.hi()[ax] : c.lo[ax];
    const int u = (ax + 1) % 3, v = (ax + 2) % 3;
    const auto rec = [&](auto&& self, std::int32_t n, const Cube& k) -> void {
      const Vec3 khi = k.hi();
      if (k.lo[ax] > at || khi[ax] < at) return;
      if (!(k.lo[u] < c.hi()[u] && c.lo[u] < khi[u] && k.lo[v] < c.hi()[v] && c.lo[v] < khi[v])) return;
      if (nodes_[n].first_child >= 0) {
        for (int i = 0; i < 8; ++i) self(self, nodes_[n].first_child + i, k.child(i));
        return;
      }
      if ((dir > 0 && k.lo[ax] == at) || (dir < 0 && khi[ax] == at)) out.emplace_back(n, k);
    };
    rec(rec, 0, root_);
    return out;
  }

 private:
  static bool support_strictly_inside(const Cube& c, const Vec3& lo, const Vec3& hi) noexcept {
    for (int i = 0; i < 3; ++i)
      if (!(c.lo[i] < lo[i] && hi[i] < c.hi()[i])) return false;
    return true;
  }

  std::uint64_t next_seed() noexcept {
    // splitmix64 over a counter keeps the sequence reproducible.
    std::uint64_t z = params_.seed + 0x9e3779b97f4a7c15ULL * ++seed_counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::int32_t alloc_block() {
    if (!free_.empty()) {
      const std::int32_t b = free_.back();
      free_.pop_back();
      for (int i = 0; i < 8; ++i) nodes_[b + i] = Node{};
      return b;
    }
    const auto b = static_cast<std::int32_t>(nodes_.size());
    nodes_.resize(nodes_.size() + 8);
    return b;
  }

  void free_block(std::int32_t first) {
    for (int i = 0; i < 8; ++i) {
      if (nodes_[first + i].first_child >= 0) free_block(nodes_[first + i].first_child);
      nodes_[first + i] = Node{};
    }
    free_.push_back(first);
  }

  void apply_leaf(std::int32_t n, const Cube& c, const BspTree<B>& tool, MergeFunction f, ApplyStats& st) {
    ++visits_;
    ++st.visited;
    const BspTree<B>& cur = nodes_[n].bsp;
    if (cur.is_leaf_tree() && f.absorbing(cur.root() == kIn)) return;
    auto m = merge(cur, tool, f, c.box(), true);
    if (!m.changed) return;
    ++st.changed;
    nodes_[n].bsp = remove_redundancy(m.tree, c.box(), next_seed(), &m.cells);
    nodes_[n].pathological = false;
    if (nodes_[n].bsp.size() > params_.max_bsp_size) {
      ++st.subdivided;
      subdivide(n, c);
    }
  }

  /// Pieces of poly inside cube c; pieces in a wall plane are kept.
  static void clip_to_cube(const std::vector<Polygon<B>>& polys, const Cube& c, std::vector<Polygon<B>>& out) {
    const Vec3 hi = c.hi();
    for (Polygon<B> p : polys) {
      bool alive = true;
      for (int f = 0; f < 6 && alive; ++f) {
        const int ax = f / 2;
        const Plane<B> s = (f & 1) ? Plane<B>::axis(ax, 1, hi[ax]) : Plane<B>::axis(ax, -1, c.lo[ax]);
        Polygon<B> neg;
        switch (split_polygon<B>(p, s, &neg, nullptr)) {
          case PolySide::Negative:
          case PolySide::OnPlane:
            break;
          case PolySide::Positive:
            alive = false;
            break;
          case PolySide::Split:
            p = std::move(neg);
            break;
        }
      }
      if (alive) out.push_back(std::move(p));
    }
  }

  /// Triangle-octree construction: split while more than tri_threshold
  /// pieces remain, then import each leaf's pieces.
  void build(std::int32_t n, const Cube& c, std::vector<Polygon<B>> polys, std::vector<char>& empty) {
    if (polys.size() > params_.tri_threshold && c.size >= 2) {
      const std::int32_t first = alloc_block();
      nodes_[n].first_child = first;
      empty.resize(nodes_.size(), 0);
      for (int i = 0; i < 8; ++i) {
        std::vector<Polygon<B>> sub;
        const Cube cc = c.child(i);
        clip_to_cube(polys, cc, sub);
        build(first + i, cc, std::move(sub), empty);
      }
      return;
    }
    empty.resize(nodes_.size(), 0);
    if (polys.empty()) {
      empty[n] = 1;
      return;
    }
    nodes_[n].bsp = import_polygons(std::move(polys), next_seed());
    if (nodes_[n].bsp.size() > params_.max_bsp_size) subdivide(n, c);
    empty.resize(nodes_.size(), 0);
  }

  /// Label of the region of leaf g next to the shared part of a wall, or
  /// -1 if every candidate point lies on a plane of g's tree.
  static int label_across(const BspTree<B>& g, const Cube& gc, const Cube& e, int ax, int dir) {
    // Shared rectangle of the two walls; candidates follow a parabola in
    // it and sit 2^-20 inside g.
    const int u = (ax + 1) % 3, v = (ax + 2) % 3;
    const Vec3 ghi = gc.hi(), ehi = e.hi();
    const std::int64_t ulo = std::max(gc.lo[u], e.lo[u]), uhi = std::min(ghi[u], ehi[u]);
    const std::int64_t vlo = std::max(gc.lo[v], e.lo[v]), vhi = std::min(ghi[v], ehi[v]);
    const std::int64_t at = dir > 0 ? ehi[ax] : e.lo[ax];
    constexpr std::int64_t kW = std::int64_t{1} << 20;
    constexpr int kCandidates = 31;
    for (int k = 1; k <= kCandidates; ++k) {
      const std::int64_t t = (k * kW) / (kCandidates + 1);
      const std::int64_t s = (static_cast<std::int64_t>(k) * k * kW) / ((kCandidates + 1) * (kCandidates + 1)) + kW / 97;
      HomoPoint<B> x;
      x.x[3] = WideInt<B>(kW);
      x.x[ax] = WideInt<B>(at) * kW + WideInt<B>(dir);
      x.x[u] = WideInt<B>(ulo) * kW + WideInt<B>(uhi - ulo) * t;
      x.x[v] = WideInt<B>(vlo) * kW + WideInt<B>(vhi - vlo) * s;
      const PointClass pc = g.classify_point(x);
      if (pc != PointClass::On) return pc == PointClass::In ? 1 : 0;
    }
    return -1;
  }

  /// Labels geometry-free leaves from their geometry neighbours and
  /// propagates through geometry-free adjacency.
  void flood_fill(const std::vector<char>& empty) {
    std::vector<std::pair<std::int32_t, Cube>> leaves;
    for_each_leaf([&](std::int32_t n, const Cube& c) {
      if (n < static_cast<std::int32_t>(empty.size()) && empty[n]) leaves.emplace_back(n, c);
    });
    if (leaves.empty()) return;
    std::unordered_map<std::int32_t, std::size_t> index;
    for (std::size_t i = 0; i < leaves.size(); ++i) index[leaves[i].first] = i;
    std::vector<int> label(leaves.size(), -1);
    std::vector<std::vector<std::size_t>> adj(leaves.size());
    const auto assign = [&](std::size_t i, int l) {
      if (label[i] >= 0 && label[i] != l) throw NonWatertightError("conflicting inside/outside labels; mesh is not closed");
      label[i] = l;
    };
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const Cube& e = leaves[i].second;
      for (int ax = 0; ax < 3; ++ax)
        for (int dir : {-1, 1})
          for (const auto& [m, mc] : wall_neighbours(e, ax, dir)) {
            const auto it = index.find(m);
            if (it != index.end()) {
              adj[i].push_back(it->second);
              continue;
            }
            const int l = label_across(nodes_[m].bsp, mc, e, ax, dir);
            if (l >= 0) assign(i, l);
          }
    }
    // Seed: the empty leaf on the root boundary reaching furthest towards
    // +x+y+z is outside, and so is the root's upper corner.
    const Vec3 rhi = root_.hi();
    std::size_t seed = leaves.size();
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const Cube& c = leaves[i].second;
      const Vec3 h = c.hi();
      const bool on_root = c.lo.x == root_.lo.x || c.lo.y == root_.lo.y || c.lo.z == root_.lo.z || h.x == rhi.x ||
                           h.y == rhi.y || h.z == rhi.z;
      if (on_root && h.x + h.y + h.z > best) {
        best = h.x + h.y + h.z;
        seed = i;
      }
    }
    HomoPoint<B> corner;
    corner.x[3] = WideInt<B>(2);
    for (int i = 0; i < 3; ++i) corner.x[i] = WideInt<B>(2 * rhi[i] - 1);
    if (nodes_[locate(corner).first].bsp.classify_point(corner) == PointClass::In)
      throw NonWatertightError("root corner classifies inside; mesh is not closed or inverted");
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < leaves.size(); ++i)
      if (label[i] >= 0) queue.push_back(i);
    if (seed < leaves.size()) {
      assign(seed, 0);
      queue.push_back(seed);
    }
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t i = queue[q];
      for (std::size_t j : adj[i]) {
        if (label[j] < 0) {
          label[j] = label[i];
          queue.push_back(j);
        } else if (label[j] != label[i]) {
          throw NonWatertightError("conflicting inside/outside labels; mesh is not closed");
        }
      }
    }
    for (std::size_t i = 0; i < leaves.size(); ++i) nodes_[leaves[i].first].bsp = BspTree<B>::leaf(label[i] == 1);
  }

  /// Clips a wall face of leaf n against the leaves across the wall; with
  /// no leaf across (root boundary) the face is kept whole.
  void clip_wall_face(std::int32_t n, const Cube& c, Polygon<B> poly, std::vector<Polygon<B>>& out) const {
    int ax = 0;
    while (poly.support.n(ax) == 0) ++ax;
    const int dir = poly.support.n(ax) > 0 ? 1 : -1;
    const auto nbrs = wall_neighbours(c, ax, dir);
    if (nbrs.empty()) {
      poly.tag = -1;
      out.push_back(std::move(poly));
      return;
    }
    for (const auto& [m, mc] : nbrs) {
      if (m == n) continue;
      std::vector<Polygon<B>> one{poly}, piece;
      clip_to_cube(one, mc, piece);
      for (auto& p : piece) {
        p.tag = -1;
        clip_to_out(nodes_[m].bsp, nodes_[m].bsp.root(), std::move(p), out);
      }
    }
  }

  Cube root_{{-1, -1, -1}, 2};
  OctreeParams params_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> free_;
  std::uint64_t visits_ = 0;
  std::uint64_t seed_counter_ = 0;
};

/// Intersection BSP of the convex hull of at most 16 integer points.
/// Throws DegenerateError if the points do not span 3D.
template <int B>
BspTree<B> build_hull_bsp(const std::vector<Vec3>& pts) {
  if (pts.size() < 4) throw DegenerateError("hull needs at least 4 points");
  if (pts.size() > 16) throw std::invalid_argument("hull supports at most 16 points");
  std::vector<Plane<B>> planes;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Plane<B> p;
        try {
          p = plane_from_points<B>(pts[i], pts[j], pts[k]);
        } catch (const DegenerateError&) {
          continue;
        }
        bool any_pos = false, any_neg = false;
        for (const auto& q : pts) {
          const int s = p.eval(q).sign();
          any_pos |= s > 0;
          any_neg |= s < 0;
        }
        if (any_pos && any_neg) continue;
        if (!any_pos && !any_neg) throw DegenerateError("hull points are coplanar");
        if (any_pos) p = -p;
        if (std::find(planes.begin(), planes.end(), p) == planes.end()) planes.push_back(p);
      }
  if (planes.size() < 4) throw DegenerateError("hull points do not span 3D");
  TreeBuilder<B> tb;
  std::int32_t prev = -1;
  for (const auto& p : planes) {
    const std::int32_t k = tb.reserve(tb.plane_id(p));
    tb.node(k).neg = kIn;
    tb.node(k).pos = kOut;
    if (prev >= 0) tb.node(prev).neg = k;
    prev = k;
  }
  return tb.finish(0);
}

/// Bounding box of integer points.
inline Box bounding_box(const std::vector<Vec3>& pts) {
  Box b{pts.at(0), pts.at(0)};
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i) {
      b.lo[i] = std::min(b.lo[i], p[i]);
      b.hi[i] = std::max(b.hi[i], p[i]);
    }
  return b;
}

}  // namespace octbsp
