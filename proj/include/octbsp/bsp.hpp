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

/// BSP trees with IN/OUT leaves over a shared plane palette: point
/// classification, boolean merge, boundary extraction, import from convex
/// polygons and redundancy removal by extract-and-rebuild.
///
/// A node's negative child covers the open negative half-space of its plane
/// and the positive child the positive one. Leaves are not stored; a child
/// reference below zero is a leaf label.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "octbsp/cell.hpp"

namespace octbsp {

inline constexpr std::int32_t kIn = -1;
inline constexpr std::int32_t kOut = -2;

inline constexpr bool is_leaf(std::int32_t ref) noexcept { return ref < 0; }
inline constexpr std::int32_t leaf_of(bool in) noexcept { return in ? kIn : kOut; }

/// Face annotation for a face on the bounding box.
inline constexpr std::int32_t kBoundsFace = -1;
/// Face annotation for a face between two IN regions; never emitted.
inline constexpr std::int32_t kInternalFace = -2;

/// Region label of a point relative to a tree.
enum class PointClass : std::uint8_t { In, Out, On };

/// Axis-aligned integer box.
struct Box {
  Vec3 lo, hi;

  friend bool operator==(const Box&, const Box&) = default;
  bool contains(const Box& o) const noexcept {
    return lo.x <= o.lo.x && lo.y <= o.lo.y && lo.z <= o.lo.z && o.hi.x <= hi.x && o.hi.y <= hi.y && o.hi.z <= hi.z;
  }
  /// Overlap with positive volume.
  bool overlaps(const Box& o) const noexcept {
    return lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y && o.lo.y < hi.y && lo.z < o.hi.z && o.lo.z < hi.z;
  }
};

/// 2x2 truth table over {IN, OUT}^2.
struct MergeFunction {
  bool in[2][2] = {{false, false}, {false, false}};  // in[a is IN][b is IN]

  enum class Row : std::uint8_t { ConstIn, ConstOut, Same, Inverse };

  bool operator()(bool a, bool b) const noexcept { return in[a][b]; }

  /// Result as a function of b for a fixed a.
  Row row(bool a) const noexcept {
    const bool r0 = in[a][0], r1 = in[a][1];
    if (r0 == r1) return r0 ? Row::ConstIn : Row::ConstOut;
    return r1 ? Row::Same : Row::Inverse;
  }
  /// A leaf labelled a is unaffected by any b.
  bool absorbing(bool a) const noexcept {
    const Row r = row(a);
    return (r == Row::ConstIn && a) || (r == Row::ConstOut && !a);
  }

  static MergeFunction make_union() { return MergeFunction{{{false, true}, {true, true}}}; }
  static MergeFunction make_intersection() { return MergeFunction{{{false, false}, {false, true}}}; }
  static MergeFunction make_difference() { return MergeFunction{{{false, false}, {true, false}}}; }
};

template <int B>
class BspTree {
 public:
  using PlaneT = Plane<B>;

  struct Node {
    std::int32_t plane;  // palette index
    std::int32_t neg;    // node index or leaf label
    std::int32_t pos;
  };

  std::vector<PlaneT> palette;
  std::vector<Node> nodes;  // preorder; nodes[0] is the root when present
  std::int32_t root_leaf = kOut;

  static BspTree leaf(bool in) {
    BspTree t;
    t.root_leaf = leaf_of(in);
    return t;
  }

  std::int32_t root() const noexcept { return nodes.empty() ? root_leaf : 0; }
  std::size_t size() const noexcept { return nodes.size(); }
  bool is_leaf_tree() const noexcept { return nodes.empty(); }

  const PlaneT& plane(std::int32_t node) const noexcept { return palette[nodes[node].plane]; }

  /// Leaf label reached by sign descent; On if x lies on a plane on the way.
  PointClass classify_point(const HomoPoint<B>& x) const {
    std::int32_t r = root();
    while (!is_leaf(r)) {
      const int c = classify(x, plane(r));
      if (c == 0) return PointClass::On;
      r = c < 0 ? nodes[r].neg : nodes[r].pos;
    }
    return r == kIn ? PointClass::In : PointClass::Out;
  }
  PointClass classify_point(const Vec3& v) const { return classify_point(HomoPoint<B>::from_int(v)); }

  /// Checks index ranges, preorder layout, reachability and canonical
  /// palette planes.
  bool validate(std::string* why = nullptr) const {
    const auto fail = [why](const std::string& m) {
      if (why) *why = m;
      return false;
    };
    if (nodes.empty() && root_leaf != kIn && root_leaf != kOut) return fail("bad root label");
    for (const auto& p : palette) {
      if (p.a == 0 && p.b == 0 && p.c == 0) return fail("zero normal in palette");
      try {
        if (PlaneT::make(p.a, p.b, p.c, p.d) != p) return fail("palette plane not canonical");
      } catch (const std::exception&) {
        return fail("palette plane not representable");
      }
    }
    // Preorder: walking the tree depth-first negative-first visits 0, 1, ...
    std::int32_t expect = 0;
    std::vector<std::int32_t> stack;
    if (!nodes.empty()) stack.push_back(0);
    while (!stack.empty()) {
      const std::int32_t n = stack.back();
      stack.pop_back();
      if (n != expect++) return fail("nodes not in preorder");
      const Node& nd = nodes[n];
      if (nd.plane < 0 || nd.plane >= static_cast<std::int32_t>(palette.size())) return fail("palette index out of range");
      for (std::int32_t c : {nd.neg, nd.pos}) {
        if (is_leaf(c)) {
          if (c != kIn && c != kOut) return fail("bad leaf label");
        } else if (c <= n || c >= static_cast<std::int32_t>(nodes.size())) {
          return fail("child index out of range");
        }
      }
      if (!is_leaf(nd.pos)) stack.push_back(nd.pos);
      if (!is_leaf(nd.neg)) stack.push_back(nd.neg);
    }
    if (expect != static_cast<std::int32_t>(nodes.size())) return fail("unreachable nodes");
    return true;
  }

  /// Indented text dump.
  void dump(std::ostream& os) const {
    const auto rec = [&](auto&& self, std::int32_t r, int depth) -> void {
      os << std::string(2 * depth, ' ');
      if (is_leaf(r)) {
        os << (r == kIn ? "IN" : "OUT") << '\n';
        return;
      }
      os << '#' << r << ' ' << plane(r) << '\n';
      self(self, nodes[r].neg, depth + 1);
      self(self, nodes[r].pos, depth + 1);
    };
    rec(rec, root(), 0);
  }
};

/// Incremental construction with orientation-sensitive palette dedup.
template <int B>
class TreeBuilder {
 public:
  using Node = typename BspTree<B>::Node;

  std::int32_t plane_id(const Plane<B>& p) {
    const auto [it, fresh] = index_.try_emplace(p, static_cast<std::int32_t>(tree_.palette.size()));
    if (fresh) tree_.palette.push_back(p);
    return it->second;
  }
  std::int32_t reserve(std::int32_t plane) {
    tree_.nodes.push_back(Node{plane, kOut, kOut});
    return static_cast<std::int32_t>(tree_.nodes.size()) - 1;
  }
  Node& node(std::int32_t n) { return tree_.nodes[n]; }
  std::vector<Node>& nodes() { return tree_.nodes; }
  void drop_last() { tree_.nodes.pop_back(); }

  /// Finishes with `root` as the root reference (0 or a leaf label).
  BspTree<B> finish(std::int32_t root) {
    if (is_leaf(root)) {
      tree_.nodes.clear();
      tree_.root_leaf = root;
    }
    prune_palette();
    // Finished trees are immutable; drop the growth slack.
    tree_.nodes.shrink_to_fit();
    tree_.palette.shrink_to_fit();
    return std::move(tree_);
  }

 private:
  void prune_palette() {
    std::vector<std::int32_t> remap(tree_.palette.size(), -1);
    std::vector<Plane<B>> pal;
    for (auto& n : tree_.nodes) {
      if (remap[n.plane] < 0) {
        remap[n.plane] = static_cast<std::int32_t>(pal.size());
        pal.push_back(tree_.palette[n.plane]);
      }
      n.plane = remap[n.plane];
    }
    tree_.palette = std::move(pal);
  }

  BspTree<B> tree_;
  std::unordered_map<Plane<B>, std::int32_t, PlaneHash<B>> index_;
};

/// Rewrites a node graph rooted at `root` into preorder, dropping
/// unreachable nodes and unused palette entries.
template <int B>
BspTree<B> relayout(const std::vector<Plane<B>>& palette, const std::vector<typename BspTree<B>::Node>& nodes,
                    std::int32_t root) {
  TreeBuilder<B> tb;
  if (is_leaf(root)) return tb.finish(root);
  std::int32_t out_root = -1;
  // Iterative preorder copy: reserve on entry, patch the parent link.
  std::vector<std::tuple<std::int32_t, std::int32_t, int>> work{{root, -1, 0}};
  while (!work.empty()) {
    const auto [src, par, side] = work.back();
    work.pop_back();
    std::int32_t ref = src;
    if (!is_leaf(src)) {
      ref = tb.reserve(tb.plane_id(palette[nodes[src].plane]));
      work.emplace_back(nodes[src].pos, ref, 1);
      work.emplace_back(nodes[src].neg, ref, 0);
    }
    if (par < 0) out_root = ref;
    else if (side == 0) tb.node(par).neg = ref;
    else tb.node(par).pos = ref;
  }
  return tb.finish(out_root);
}

/// Linear BSP of an axis-aligned box: IN inside, OUT elsewhere.
template <int B>
BspTree<B> make_box_bsp(const Box& b) {
  TreeBuilder<B> tb;
  std::int32_t prev = -1;
  for (int f = 0; f < 6; ++f) {
    const int ax = f / 2;
    const int sign = (f & 1) ? 1 : -1;
    const std::int32_t n = tb.reserve(tb.plane_id(Plane<B>::axis(ax, sign, (f & 1) ? b.hi[ax] : b.lo[ax])));
    tb.node(n).pos = kOut;
    tb.node(n).neg = kIn;
    if (prev >= 0) tb.node(prev).neg = n;
    prev = n;
  }
  return tb.finish(0);
}

namespace detail {

template <int B>
ConvexCell<B> bounds_cell(const Box& b) {
  return ConvexCell<B>::make_box(b.lo, b.hi, {-1, -1, -1, -1, -1, -1},
                                 {kBoundsFace, kBoundsFace, kBoundsFace, kBoundsFace, kBoundsFace, kBoundsFace});
}

/// Annotation of the cap of a cell on `side` of node n: the region across
/// the cap is the other child.
inline std::int32_t cap_annotation(std::int32_t n, int side) noexcept { return 2 * n + (side < 0 ? 1 : 0); }

/// Retags faces of cells[from..] that reference node n as internal.
template <int B>
void retag_internal(std::vector<ConvexCell<B>>& cells, std::size_t from, std::int32_t n) {
  for (std::size_t i = from; i < cells.size(); ++i) {
    auto& c = cells[i];
    for (std::int32_t f = 0; f < static_cast<std::int32_t>(c.faces().size()); ++f)
      if (c.face_alive(f) && c.face(f).annotation >= 0 && c.face(f).annotation / 2 == n)
        c.face(f).annotation = kInternalFace;
  }
}

}  // namespace detail

/// Output of merge: the combined tree, optionally the IN leaf cells
/// (annotated for boundary extraction against `tree`), and whether the
/// result differs from the first operand anywhere inside the bounds.
template <int B>
struct MergeResult {
  BspTree<B> tree;
  std::vector<ConvexCell<B>> cells;
  bool changed = false;
};

template <int B>
class Merger {
 public:
  Merger(const BspTree<B>& a, const BspTree<B>& b, MergeFunction f, bool keep_cells)
      : a_(a), b_(b), f_(f), keep_(keep_cells) {}

  MergeResult<B> run(const Box& bounds) {
    ConvexCell<B> cell = detail::bounds_cell<B>(bounds);
    const std::int32_t root = merge_a(a_.root(), cell);
    MergeResult<B> r;
    r.changed = changed_;
    r.cells = std::move(cells_);
    r.tree = tb_.finish(root);
    return r;
  }

 private:
  std::int32_t emit_leaf(bool in, bool la, ConvexCell<B>& cell) {
    changed_ |= in != la;
    if (in && keep_) cells_.push_back(std::move(cell));
    return leaf_of(in);
  }

  /// Cuts the cell by s. A proper cut reserves a node and recurses into
  /// both children; otherwise only the child holding the cell is visited.
  template <typename Rec>
  std::int32_t branch(const Plane<B>& s, std::int32_t neg_child, std::int32_t pos_child, ConvexCell<B>& cell,
                      Rec&& rec) {
    const std::int32_t pid = tb_.plane_id(s);
    ConvexCell<B> other;
    const CutInfo info = cell.split(s, pid, other);
    if (info.outcome == CutOutcome::NotProper) return rec(info.side < 0 ? neg_child : pos_child, cell);
    const std::int32_t k = tb_.reserve(pid);
    const std::size_t mark = cells_.size();
    cell.face(info.cap).annotation = detail::cap_annotation(k, info.side);
    other.face(info.other_cap).annotation = detail::cap_annotation(k, -info.side);
    ConvexCell<B>& negc = info.side < 0 ? cell : other;
    ConvexCell<B>& posc = info.side < 0 ? other : cell;
    const std::int32_t n = rec(neg_child, negc);
    const std::int32_t p = rec(pos_child, posc);
    if (is_leaf(n) && n == p) {
      tb_.drop_last();
      if (keep_) detail::retag_internal(cells_, mark, k);
      return n;
    }
    tb_.node(k).neg = n;
    tb_.node(k).pos = p;
    return k;
  }

  std::int32_t merge_a(std::int32_t ra, ConvexCell<B>& cell) {
    if (is_leaf(ra)) {
      const bool la = ra == kIn;
      switch (f_.row(la)) {
        case MergeFunction::Row::ConstIn:
          return emit_leaf(true, la, cell);
        case MergeFunction::Row::ConstOut:
          return emit_leaf(false, la, cell);
        case MergeFunction::Row::Same:
          return copy_b(b_.root(), cell, false, la);
        case MergeFunction::Row::Inverse:
          return copy_b(b_.root(), cell, true, la);
      }
    }
    const auto& nd = a_.nodes[ra];
    return branch(a_.palette[nd.plane], nd.neg, nd.pos, cell,
                  [this](std::int32_t child, ConvexCell<B>& c) { return merge_a(child, c); });
  }

  std::int32_t copy_b(std::int32_t rb, ConvexCell<B>& cell, bool invert, bool la) {
    if (is_leaf(rb)) return emit_leaf((rb == kIn) != invert, la, cell);
    const auto& nd = b_.nodes[rb];
    return branch(b_.palette[nd.plane], nd.neg, nd.pos, cell,
                  [this, invert, la](std::int32_t child, ConvexCell<B>& c) { return copy_b(child, c, invert, la); });
  }

  const BspTree<B>& a_;
  const BspTree<B>& b_;
  MergeFunction f_;
  bool keep_;
  bool changed_ = false;
  TreeBuilder<B> tb_;
  std::vector<ConvexCell<B>> cells_;
};

/// f applied pointwise to a and b inside bounds.
template <int B>
MergeResult<B> merge(const BspTree<B>& a, const BspTree<B>& b, MergeFunction f, const Box& bounds,
                     bool keep_cells = false) {
  return Merger<B>(a, b, f, keep_cells).run(bounds);
}

// --- boundary extraction -----------------------------------------------------

/// Phase 1: IN leaf cells of `tree` inside bounds. Cap faces are annotated
/// with the region across them (see cap annotation), box faces with
/// kBoundsFace.
template <int B>
std::vector<ConvexCell<B>> collect_in_cells(const BspTree<B>& tree, const Box& bounds) {
  std::vector<ConvexCell<B>> out;
  const auto rec = [&](auto&& self, std::int32_t r, ConvexCell<B>& cell) -> void {
    if (is_leaf(r)) {
      if (r == kIn) out.push_back(std::move(cell));
      return;
    }
    const auto& nd = tree.nodes[r];
    const Plane<B>& s = tree.palette[nd.plane];
    if (nd.neg == kOut && nd.pos == kOut) return;
    if (nd.neg == kOut || nd.pos == kOut) {
      // Only one side matters; discard the other in place.
      const int keep = nd.neg == kOut ? 1 : -1;
      const CutInfo info = cell.clip(s, nd.plane, keep);
      if (info.outcome == CutOutcome::NotProper) {
        if (info.side == keep) self(self, keep < 0 ? nd.neg : nd.pos, cell);
        return;
      }
      cell.face(info.cap).annotation = detail::cap_annotation(r, keep);
      self(self, keep < 0 ? nd.neg : nd.pos, cell);
      return;
    }
    ConvexCell<B> other;
    const CutInfo info = cell.split(s, nd.plane, other);
    if (info.outcome == CutOutcome::NotProper) {
      self(self, info.side < 0 ? nd.neg : nd.pos, cell);
      return;
    }
    cell.face(info.cap).annotation = detail::cap_annotation(r, info.side);
    other.face(info.other_cap).annotation = detail::cap_annotation(r, -info.side);
    self(self, info.side < 0 ? nd.neg : nd.pos, cell);
    self(self, info.side < 0 ? nd.pos : nd.neg, other);
  };
  ConvexCell<B> cell = detail::bounds_cell<B>(bounds);
  rec(rec, tree.root(), cell);
  return out;
}

/// Pieces of poly lying in OUT leaves of the subtree at r. A piece lying
/// in a node plane continues on the side its outward normal points to.
template <int B>
void clip_to_out(const BspTree<B>& tree, std::int32_t r, Polygon<B> poly, std::vector<Polygon<B>>& out) {
  while (!is_leaf(r)) {
    const auto& nd = tree.nodes[r];
    const Plane<B>& s = tree.palette[nd.plane];
    Polygon<B> neg, pos;
    switch (split_polygon(poly, s, &neg, &pos)) {
      case PolySide::Negative:
        r = nd.neg;
        break;
      case PolySide::Positive:
        r = nd.pos;
        break;
      case PolySide::OnPlane: {
        const int128_t d = static_cast<int128_t>(poly.support.a) * s.a + static_cast<int128_t>(poly.support.b) * s.b +
                           static_cast<int128_t>(poly.support.c) * s.c;
        r = d > 0 ? nd.pos : nd.neg;
        break;
      }
      case PolySide::Split:
        clip_to_out(tree, nd.neg, std::move(neg), out);
        poly = std::move(pos);
        r = nd.pos;
        break;
    }
  }
  if (r == kOut) out.push_back(std::move(poly));
}

/// Phase 2: the IN-OUT boundary pieces of the cells' faces. Box faces are
/// kept only if keep_bounds. Each polygon's tag is the source node.
template <int B>
std::vector<Polygon<B>> boundary_faces(const BspTree<B>& tree, const std::vector<ConvexCell<B>>& cells,
                                       bool keep_bounds) {
  std::vector<Polygon<B>> out;
  for (const auto& c : cells) {
    c.for_each_face([&](std::int32_t f) {
      const std::int32_t ann = c.face(f).annotation;
      if (ann == kInternalFace) return;
      if (ann == kBoundsFace) {
        if (keep_bounds) {
          auto p = c.face_polygon(f);
          p.tag = -1;
          out.push_back(std::move(p));
        }
        return;
      }
      const std::int32_t node = ann / 2;
      const std::int32_t child = (ann & 1) ? tree.nodes[node].pos : tree.nodes[node].neg;
      auto p = c.face_polygon(f);
      p.tag = node;
      clip_to_out(tree, child, std::move(p), out);
    });
  }
  return out;
}

/// Closed polygon mesh with exact vertices.
template <int B>
struct BoundaryMesh {
  struct Face {
    Plane<B> support;
    std::vector<std::int32_t> loop;
    std::int32_t source = -1;
  };
  std::vector<HomoPoint<B>> vertices;
  std::vector<Face> faces;

  /// Boundary of a solid: every directed edge is matched by as many uses
  /// of its reverse. Weaker than closed_manifold; it admits edges where the
  /// solid touches itself, as a leaf's part of a global boundary can.
  bool closed(std::string* why = nullptr) const {
    std::map<std::pair<std::int32_t, std::int32_t>, int> count;
    for (const auto& f : faces)
      for (std::size_t i = 0; i < f.loop.size(); ++i) {
        const auto a = f.loop[i], b = f.loop[(i + 1) % f.loop.size()];
        count[{std::min(a, b), std::max(a, b)}] += a < b ? 1 : -1;
      }
    for (const auto& [e, n] : count)
      if (n != 0) {
        if (why) *why = "unbalanced edge";
        return false;
      }
    return true;
  }

  /// Every directed edge appears once and its reverse once.
  bool closed_manifold(std::string* why = nullptr) const {
    std::map<std::pair<std::int32_t, std::int32_t>, int> count;
    for (const auto& f : faces) {
      if (f.loop.size() < 3) {
        if (why) *why = "face with fewer than 3 vertices";
        return false;
      }
      for (std::size_t i = 0; i < f.loop.size(); ++i) {
        const auto a = f.loop[i], b = f.loop[(i + 1) % f.loop.size()];
        if (a == b) {
          if (why) *why = "degenerate edge";
          return false;
        }
        if (++count[{a, b}] > 1) {
          if (why) *why = "directed edge used twice";
          return false;
        }
      }
    }
    for (const auto& [e, n] : count)
      if (!count.count({e.second, e.first})) {
        if (why) *why = "boundary edge without opposite";
        return false;
      }
    return true;
  }
};

namespace detail {

/// Canonical key of the line support ∩ edge: reduced direction with a
/// positive first nonzero component, and its point on the axis plane
/// x_k = 0 with k that component, reduced with x4 > 0.
template <int B>
struct LineKey {
  std::array<int128_t, 3> dir;
  std::array<WideInt<B>, 4> at;
  int axis;

  friend bool operator<(const LineKey& l, const LineKey& r) {
    if (l.dir != r.dir) return l.dir < r.dir;
    for (int i = 0; i < 4; ++i) {
      const auto c = l.at[i] <=> r.at[i];
      if (c != 0) return c < 0;
    }
    return false;
  }
};

template <int B>
LineKey<B> line_key(const Plane<B>& s, const Plane<B>& e) {
  LineKey<B> k;
  k.dir = {minor64(s.b, s.c, e.b, e.c), minor64(s.c, s.a, e.c, e.a), minor64(s.a, s.b, e.a, e.b)};
  uint128_t g = 0;
  for (auto v : k.dir) g = gcd_u128(g, uabs128(v));
  k.axis = k.dir[0] != 0 ? 0 : (k.dir[1] != 0 ? 1 : 2);
  const int sg = k.dir[k.axis] < 0 ? -1 : 1;
  for (auto& v : k.dir) v = v / static_cast<int128_t>(g) * sg;
  const auto x = intersect<B>(s, e, Plane<B>::axis(k.axis, 1, 0));
  WideInt<B> h = x.x[3].abs_wrapped();
  for (int i = 0; i < 3; ++i)
    if (!x.x[i].is_zero()) h = gcd(h, x.x[i].abs_wrapped());
  const bool flip = x.x[3].is_negative();
  for (int i = 0; i < 4; ++i) {
    WideInt<B> q;
    udivmod(x.x[i].abs_wrapped(), h, q);
    k.at[i] = (x.x[i].is_negative() != flip) ? -q : q;
  }
  return k;
}

/// Sign of x_k / x4 - y_k / y4.
template <int B>
int compare_coord(const HomoPoint<B>& x, const HomoPoint<B>& y, int k) {
  const auto l = mul_wide(x.x[k], y.x[3]);
  const auto r = mul_wide(y.x[k], x.x[3]);
  const int c = l < r ? -1 : (l > r ? 1 : 0);
  return c * x.x[3].sign() * y.x[3].sign();
}

}  // namespace detail

/// Phase 3: merges equal vertices and inserts every vertex lying strictly
/// inside an edge into that edge, so the result has no T-junctions.
template <int B>
BoundaryMesh<B> resolve_tjunctions(const std::vector<Polygon<B>>& polys) {
  BoundaryMesh<B> mesh;
  // Exact vertex dedup keyed by the correctly rounded position.
  std::map<std::array<double, 3>, std::vector<std::int32_t>> by_pos;
  const auto vertex_id = [&](const HomoPoint<B>& p) {
    auto& bucket = by_pos[p.to_double()];
    for (auto id : bucket)
      if (same_point(mesh.vertices[id], p)) return id;
    const auto id = static_cast<std::int32_t>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    bucket.push_back(id);
    return id;
  };
  std::vector<std::vector<std::int32_t>> loops;
  for (const auto& poly : polys) {
    std::vector<std::int32_t> loop;
    for (const auto& v : poly.verts) loop.push_back(vertex_id(v));
    loops.push_back(std::move(loop));
  }
  // Group edges by supporting line.
  struct LineGroup {
    std::vector<std::int32_t> verts;
  };
  std::map<detail::LineKey<B>, LineGroup> lines;
  std::vector<std::vector<std::pair<LineGroup*, int>>> edge_line(polys.size());
  for (std::size_t f = 0; f < polys.size(); ++f) {
    const std::size_t n = polys[f].size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto key = detail::line_key(polys[f].support, polys[f].edges[i]);
      auto& g = lines[key];
      g.verts.push_back(loops[f][i]);
      g.verts.push_back(loops[f][(i + 1) % n]);
      edge_line[f].emplace_back(&g, key.axis);
    }
  }
  std::map<LineGroup*, int> axis_of;
  for (std::size_t f = 0; f < polys.size(); ++f)
    for (const auto& [g, ax] : edge_line[f]) axis_of[g] = ax;
  for (auto& [g, ax] : axis_of) {
    auto& vs = g->verts;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    const int k = ax;
    std::sort(vs.begin(), vs.end(), [&](std::int32_t a, std::int32_t b) {
      return detail::compare_coord(mesh.vertices[a], mesh.vertices[b], k) < 0;
    });
  }
  for (std::size_t f = 0; f < polys.size(); ++f) {
    typename BoundaryMesh<B>::Face face;
    face.support = polys[f].support;
    face.source = polys[f].tag;
    const std::size_t n = loops[f].size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::int32_t a = loops[f][i], b = loops[f][(i + 1) % n];
      face.loop.push_back(a);
      const auto& vs = edge_line[f][i].first->verts;
      const auto ia = std::find(vs.begin(), vs.end(), a) - vs.begin();
      const auto ib = std::find(vs.begin(), vs.end(), b) - vs.begin();
      if (ia < ib)
        for (auto j = ia + 1; j < ib; ++j) face.loop.push_back(vs[j]);
      else
        for (auto j = ia - 1; j > ib; --j) face.loop.push_back(vs[j]);
    }
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

/// Closed boundary of the IN region of tree inside bounds.
template <int B>
BoundaryMesh<B> extract_boundary(const BspTree<B>& tree, const Box& bounds) {
  const auto cells = collect_in_cells(tree, bounds);
  return resolve_tjunctions(boundary_faces(tree, cells, true));
}

// --- import and redundancy removal ---------------------------------------------

/// BSP whose IN region is bounded by the given outward faces. Faces are
/// inserted in a seeded random order; a face coplanar with a node plane on
/// its path is discarded.
template <int B>
BspTree<B> import_polygons(std::vector<Polygon<B>> faces, std::uint64_t seed) {
  if (faces.empty()) return BspTree<B>::leaf(false);
  // Fisher-Yates with a fixed generator, identical on every platform.
  std::mt19937_64 rng(seed);
  for (std::size_t i = faces.size(); i > 1; --i) std::swap(faces[i - 1], faces[rng() % i]);

  std::vector<Plane<B>> palette;
  std::unordered_map<Plane<B>, std::int32_t, PlaneHash<B>> index;
  std::vector<typename BspTree<B>::Node> nodes;
  const auto pid = [&](const Plane<B>& p) {
    const auto [it, fresh] = index.try_emplace(p, static_cast<std::int32_t>(palette.size()));
    if (fresh) palette.push_back(p);
    return it->second;
  };
  std::int32_t root = kOut;
  bool root_set = false;
  struct Item {
    Polygon<B> poly;
    std::int32_t parent;  // -1 for the root slot
    int side;
  };
  std::vector<Item> stack;
  for (auto& face : faces) {
    stack.push_back(Item{std::move(face), -1, 0});
    while (!stack.empty()) {
      Item it = std::move(stack.back());
      stack.pop_back();
      std::int32_t r = it.parent < 0 ? (root_set ? root : kOut) : (it.side < 0 ? nodes[it.parent].neg : nodes[it.parent].pos);
      std::int32_t parent = it.parent;
      int side = it.side;
      Polygon<B> poly = std::move(it.poly);
      bool placed = false;
      while (!is_leaf(r)) {
        const Plane<B>& s = palette[nodes[r].plane];
        Polygon<B> neg, pos;
        const PolySide ps = split_polygon(poly, s, &neg, &pos);
        if (ps == PolySide::OnPlane) {
          placed = true;
          break;
        }
        if (ps == PolySide::Split) {
          stack.push_back(Item{std::move(pos), r, 1});
          poly = std::move(neg);
          parent = r;
          side = -1;
          r = nodes[r].neg;
          continue;
        }
        parent = r;
        side = ps == PolySide::Negative ? -1 : 1;
        r = side < 0 ? nodes[r].neg : nodes[r].pos;
      }
      if (placed) continue;
      const auto n = static_cast<std::int32_t>(nodes.size());
      nodes.push_back({pid(poly.support), kIn, kOut});
      if (parent < 0) {
        root = n;
        root_set = true;
      } else if (side < 0) {
        nodes[parent].neg = n;
      } else {
        nodes[parent].pos = n;
      }
    }
  }
  return relayout<B>(palette, nodes, root);
}

/// Rebuilds tree from its boundary inside bounds. `cells`, if given, are
/// the annotated IN cells of tree (as returned by merge); otherwise they
/// are recomputed.
template <int B>
BspTree<B> remove_redundancy(const BspTree<B>& tree, const Box& bounds, std::uint64_t seed,
                             const std::vector<ConvexCell<B>>* cells = nullptr) {
  if (tree.is_leaf_tree()) return tree;
  std::vector<ConvexCell<B>> own;
  if (!cells) {
    own = collect_in_cells(tree, bounds);
    cells = &own;
  }
  auto faces = boundary_faces(tree, *cells, false);
  if (faces.empty()) return BspTree<B>::leaf(!cells->empty());
  return import_polygons(std::move(faces), seed);
}

}  // namespace octbsp
