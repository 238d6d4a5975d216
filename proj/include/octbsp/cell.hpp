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

/// Strictly convex polyhedra as half-edge meshes with plane-based vertices,
/// cut in place by a single plane.
///
/// Face planes point outward: every vertex is on the non-positive side of
/// every face plane and on the plane of exactly its incident faces. Face
/// loops run counter-clockwise seen from outside.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "octbsp/planes.hpp"

namespace octbsp {

enum class CutOutcome : std::uint8_t { Split, NotProper };

/// Result of an in-place cut.
/// Split: `side` is the half-space (-1 or +1) now held by the cut cell and
/// `cap` its new face on the cut plane; `other_cap` is the cap of the part
/// moved out, if any. NotProper: `side` is the half-space holding the cell.
struct CutInfo {
  CutOutcome outcome = CutOutcome::NotProper;
  int side = 0;
  std::int32_t cap = -1;
  std::int32_t other_cap = -1;
};

/// Convex polygon given by its supporting plane and its boundary planes.
/// verts[i] is the intersection of support, edges[i-1] and edges[i]; the
/// polygon lies on the non-positive side of every edge plane.
template <int B>
struct Polygon {
  Plane<B> support;
  std::vector<Plane<B>> edges;
  std::vector<HomoPoint<B>> verts;
  std::int32_t tag = -1;

  std::size_t size() const noexcept { return edges.size(); }
};

enum class PolySide : std::uint8_t { Negative, Positive, Split, OnPlane };

/// Clips a polygon against s. For Split both parts are written; they keep
/// the supporting plane and gain s (negative part) or -s (positive part) as
/// a boundary plane. No other planes are created. Otherwise the outputs are
/// left untouched and the polygon lies wholly on the reported side.
template <int B>
PolySide split_polygon(const Polygon<B>& poly, const Plane<B>& s, Polygon<B>* neg, Polygon<B>* pos) {
  const std::size_t n = poly.size();
  std::array<int, 16> small_cls;
  std::vector<int> big_cls;
  int* c = small_cls.data();
  if (n > small_cls.size()) {
    big_cls.resize(n);
    c = big_cls.data();
  }
  bool any_neg = false, any_pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = classify(poly.verts[i], s);
    any_neg |= c[i] < 0;
    any_pos |= c[i] > 0;
  }
  if (!any_neg && !any_pos) return PolySide::OnPlane;
  if (!any_pos) return PolySide::Negative;
  if (!any_neg) return PolySide::Positive;

  // Edge i joins verts[i] and verts[i + 1]. The vertices strictly inside
  // each open half-space form one cyclic run; `first` is the edge entering it.
  const auto build = [&](int sign, const Plane<B>& cap, Polygon<B>& out) {
    std::size_t first = 0;
    while (!(c[first] * sign >= 0 && c[(first + 1) % n] * sign < 0)) ++first;
    out.support = poly.support;
    out.tag = poly.tag;
    out.edges.clear();
    out.verts.clear();
    out.verts.push_back(intersect<B>(poly.support, cap, poly.edges[first]));
    out.edges.push_back(poly.edges[first]);
    std::size_t i = (first + 1) % n;
    while (c[i] * sign < 0) {
      out.verts.push_back(poly.verts[i]);
      out.edges.push_back(poly.edges[i]);
      i = (i + 1) % n;
    }
    const std::size_t last = (i + n - 1) % n;
    out.verts.push_back(intersect<B>(poly.support, poly.edges[last], cap));
    out.edges.push_back(cap);
  };
  if (neg) build(1, s, *neg);
  if (pos) build(-1, -s, *pos);
  return PolySide::Split;
}

/// Triangle as a plane-based polygon. Edge planes contain the edge and the
/// dominant axis of the triangle normal, so their coefficients stay within
/// the budget of the vertex coordinates.
template <int B>
Polygon<B> make_triangle_polygon(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  Polygon<B> p;
  p.support = plane_from_points<B>(v0, v1, v2);
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(p.support.n(i)) > std::abs(p.support.n(k))) k = i;
  const Vec3 v[3] = {v0, v1, v2};
  for (int i = 0; i < 3; ++i) {
    const Vec3 d = v[(i + 1) % 3] - v[i];
    int128_t m[3] = {0, 0, 0};
    // d x e_k
    m[(k + 1) % 3] = d[(k + 2) % 3];
    m[(k + 2) % 3] = -static_cast<int128_t>(d[(k + 1) % 3]);
    const int128_t off = -(m[0] * v[i].x + m[1] * v[i].y + m[2] * v[i].z);
    Plane<B> e = Plane<B>::make(m[0], m[1], m[2], off);
    if (e.eval(v[(i + 2) % 3]).sign() > 0) e = -e;
    p.edges.push_back(e);
  }
  for (int i = 0; i < 3; ++i) {
    auto hp = HomoPoint<B>::from_int(v[i]);
    p.verts.push_back(hp);
  }
  return p;
}

template <int B>
class ConvexCell {
 public:
  using PlaneT = Plane<B>;
  using Point = HomoPoint<B>;
  using W = WideInt<B>;

  struct Vertex {
    Point pos;
    std::int32_t out = -1;  // one outgoing half-edge; -1 marks a free slot
  };
  struct HalfEdge {
    std::int32_t origin = -1, twin = -1, next = -1, prev = -1;
    std::int32_t face = -1;  // -1 marks a free slot
  };
  struct Face {
    PlaneT plane;
    std::int32_t half = -1;  // -1 marks a free slot
    std::int32_t plane_id = -1;
    std::int32_t annotation = -1;
  };

  ConvexCell() = default;

  /// Axis-aligned box with outward face planes in the order
  /// -x, +x, -y, +y, -z, +z.
  static ConvexCell make_box(const Vec3& lo, const Vec3& hi, std::array<std::int32_t, 6> plane_ids = {-1, -1, -1, -1, -1, -1},
                             std::array<std::int32_t, 6> annotations = {-1, -1, -1, -1, -1, -1}) {
    if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z)) throw DegenerateError("box must have positive extent");
    std::vector<Point> pts;
    for (int i = 0; i < 8; ++i) {
      const Vec3 v{(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
      pts.push_back(Point::from_int(v));
    }
    static constexpr int kLoops[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                         {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    std::vector<std::vector<int>> loops;
    std::vector<PlaneT> planes;
    for (int f = 0; f < 6; ++f) {
      loops.emplace_back(kLoops[f], kLoops[f] + 4);
      const int ax = f / 2;
      const int sign = (f & 1) ? 1 : -1;
      planes.push_back(PlaneT::axis(ax, sign, (f & 1) ? hi[ax] : lo[ax]));
    }
    ConvexCell c = from_faces(pts, loops, planes);
    for (int f = 0; f < 6; ++f) {
      c.faces_[f].plane_id = plane_ids[f];
      c.faces_[f].annotation = annotations[f];
    }
    return c;
  }

  /// Builds a cell from explicit face loops (counter-clockwise from outside).
  static ConvexCell from_faces(const std::vector<Point>& pts, const std::vector<std::vector<int>>& loops,
                               const std::vector<PlaneT>& planes) {
    ConvexCell c;
    for (const auto& p : pts) c.new_vertex(p);
    std::map<std::pair<int, int>, std::int32_t> by_ends;
    for (std::size_t f = 0; f < loops.size(); ++f) {
      const std::int32_t fid = c.new_face(planes[f], -1, -1);
      const auto& loop = loops[f];
      const std::size_t k = loop.size();
      std::vector<std::int32_t> hs;
      for (std::size_t i = 0; i < k; ++i) hs.push_back(c.new_half(loop[i], fid));
      for (std::size_t i = 0; i < k; ++i) {
        c.he_[hs[i]].next = hs[(i + 1) % k];
        c.he_[hs[i]].prev = hs[(i + k - 1) % k];
        c.verts_[loop[i]].out = hs[i];
        by_ends[{loop[i], loop[(i + 1) % k]}] = hs[i];
      }
      c.faces_[fid].half = hs[0];
    }
    for (const auto& [ends, h] : by_ends) {
      const auto it = by_ends.find({ends.second, ends.first});
      if (it == by_ends.end()) throw std::invalid_argument("face loops do not close into a manifold");
      c.he_[h].twin = it->second;
    }
    return c;
  }

  // --- inspection ------------------------------------------------------------

  std::size_t num_vertices() const noexcept { return verts_.size() - free_v_.size(); }
  std::size_t num_halfedges() const noexcept { return he_.size() - free_h_.size(); }
  std::size_t num_edges() const noexcept { return num_halfedges() / 2; }
  std::size_t num_faces() const noexcept { return faces_.size() - free_f_.size(); }
  bool empty() const noexcept { return num_faces() == 0; }

  const std::vector<Vertex>& vertices() const noexcept { return verts_; }
  const std::vector<HalfEdge>& halfedges() const noexcept { return he_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  Face& face(std::int32_t f) noexcept { return faces_[f]; }
  const Face& face(std::int32_t f) const noexcept { return faces_[f]; }

  bool vertex_alive(std::int32_t v) const noexcept { return verts_[v].out >= 0; }
  bool face_alive(std::int32_t f) const noexcept { return faces_[f].half >= 0; }

  template <typename Fn>
  void for_each_face(Fn&& fn) const {
    for (std::int32_t f = 0; f < static_cast<std::int32_t>(faces_.size()); ++f)
      if (faces_[f].half >= 0) fn(f);
  }

  /// Vertex ids of a face loop.
  std::vector<std::int32_t> face_loop(std::int32_t f) const {
    std::vector<std::int32_t> out;
    std::int32_t h = faces_[f].half;
    do {
      out.push_back(he_[h].origin);
      h = he_[h].next;
    } while (h != faces_[f].half);
    return out;
  }

  /// Face as a plane-based polygon; edge planes are the neighbouring faces.
  Polygon<B> face_polygon(std::int32_t f) const {
    Polygon<B> p;
    p.support = faces_[f].plane;
    p.tag = faces_[f].annotation;
    std::int32_t h = faces_[f].half;
    do {
      p.verts.push_back(verts_[he_[h].origin].pos);
      p.edges.push_back(faces_[he_[he_[h].twin].face].plane);
      h = he_[h].next;
    } while (h != faces_[f].half);
    // verts[i] lies between edges[i-1] and edges[i], matching the loop.
    return p;
  }

  /// Vertices classified during the last cut.
  std::uint64_t last_classified() const noexcept { return last_classified_; }

  /// Classify every vertex before cutting (baseline for comparisons).
  void set_naive(bool on) noexcept { naive_ = on; }

  // --- cutting ---------------------------------------------------------------

  /// Splits the cell by s. On Split, this cell keeps one part and `other`
  /// receives the smaller one (in faces). Caps carry s in the negative part
  /// and -s in the positive part.
  CutInfo split(const PlaneT& s, std::int32_t plane_id, ConvexCell& other) {
    CutInfo info;
    if (!cut_in_place(s, plane_id, info)) return info;
    Component& small = separate();
    const bool small_is_neg = &small == &comp_[0];
    other = ConvexCell();
    move_component(small, other);
    info.side = small_is_neg ? 1 : -1;
    info.cap = small_is_neg ? cap_pos_ : cap_neg_;
    info.other_cap = fmap_[small_is_neg ? cap_neg_ : cap_pos_];
    hint_ = faces_[info.cap].half;
    return info;
  }

  /// Keeps only the part on `keep_side` (-1 or +1) of s. A NotProper result
  /// with side != keep_side means the kept part is empty; the cell is then
  /// left unchanged.
  CutInfo clip(const PlaneT& s, std::int32_t plane_id, int keep_side) {
    CutInfo info;
    if (!cut_in_place(s, plane_id, info)) return info;
    Component& small = separate();
    const bool small_is_neg = &small == &comp_[0];
    const bool small_is_kept = small_is_neg == (keep_side < 0);
    const std::int32_t kept_cap = keep_side < 0 ? cap_neg_ : cap_pos_;
    if (small_is_kept) {
      ConvexCell fresh;
      move_component(small, fresh);
      const std::int32_t cap = fmap_[kept_cap];
      *this = std::move(fresh);
      info.cap = cap;
    } else {
      free_component(small);
      info.cap = kept_cap;
    }
    info.side = keep_side;
    hint_ = faces_[info.cap].half;
    return info;
  }

  /// Side of s holding the whole cell, or 0 if s cuts it properly. Does not
  /// modify the mesh.
  int side_of(const PlaneT& s) {
    begin_cut(s);
    const Descent d = descend();
    last_classified_ = classified_;
    return d.kind == Descent::kNotProper ? d.side : 0;
  }

  // --- validation ------------------------------------------------------------

  /// Checks manifoldness, Euler characteristic, face planarity and strict
  /// convexity. Cost O(V F); meant for tests and fuzzing.
  bool validate(std::string* why = nullptr) const {
    const auto fail = [why](const std::string& m) {
      if (why) *why = m;
      return false;
    };
    std::size_t nv = 0, nh = 0, nf = 0;
    for (std::size_t h = 0; h < he_.size(); ++h) {
      const HalfEdge& e = he_[h];
      if (e.face < 0) continue;
      ++nh;
      if (e.twin < 0 || he_[e.twin].twin != static_cast<std::int32_t>(h)) return fail("twin mismatch");
      if (he_[e.twin].face < 0 || he_[e.next].face < 0 || he_[e.prev].face < 0) return fail("link to free half-edge");
      if (he_[e.next].prev != static_cast<std::int32_t>(h)) return fail("next/prev mismatch");
      if (he_[e.next].face != e.face) return fail("loop leaves face");
      if (he_[e.twin].origin != he_[e.next].origin) return fail("twin endpoints mismatch");
      if (e.origin < 0 || verts_[e.origin].out < 0) return fail("origin is free");
      if (he_[e.twin].face == e.face) return fail("edge with the same face on both sides");
    }
    for (std::size_t v = 0; v < verts_.size(); ++v) {
      if (verts_[v].out < 0) continue;
      ++nv;
      if (he_[verts_[v].out].origin != static_cast<std::int32_t>(v)) return fail("vertex out edge does not start at it");
      if (verts_[v].pos.x[3].is_zero()) return fail("vertex at infinity");
    }
    std::vector<std::int32_t> mark(he_.size(), 0);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (faces_[f].half < 0) continue;
      ++nf;
      std::int32_t h = faces_[f].half;
      int k = 0;
      do {
        if (he_[h].face != static_cast<std::int32_t>(f)) return fail("face loop crosses faces");
        mark[h] = 1;
        h = he_[h].next;
        if (++k > static_cast<int>(he_.size())) return fail("face loop does not close");
      } while (h != faces_[f].half);
      if (k < 3) return fail("face with fewer than 3 edges");
    }
    for (std::size_t h = 0; h < he_.size(); ++h)
      if (he_[h].face >= 0 && !mark[h]) return fail("half-edge not on its face loop");
    if (static_cast<long>(nv) - static_cast<long>(nh / 2) + static_cast<long>(nf) != 2) return fail("Euler characteristic is not 2");
    if (nv != num_vertices() || nh != num_halfedges() || nf != num_faces()) return fail("free-list bookkeeping");
    // Planarity and strict convexity.
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (faces_[f].half < 0) continue;
      std::vector<char> incident(verts_.size(), 0);
      std::int32_t h = faces_[f].half;
      do {
        incident[he_[h].origin] = 1;
        h = he_[h].next;
      } while (h != faces_[f].half);
      for (std::size_t v = 0; v < verts_.size(); ++v) {
        if (verts_[v].out < 0) continue;
        const int c = classify(verts_[v].pos, faces_[f].plane);
        if (incident[v] && c != 0) return fail("face vertex off its plane");
        if (!incident[v] && c >= 0) return fail("not strictly convex");
      }
    }
    return true;
  }

  /// ASCII polygon soup with rounded positions, for diagnostics.
  void dump(std::ostream& os) const {
    std::vector<std::int32_t> idx(verts_.size(), -1);
    std::int32_t n = 0;
    for (std::size_t v = 0; v < verts_.size(); ++v) {
      if (verts_[v].out < 0) continue;
      const auto p = verts_[v].pos.to_double();
      os << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
      idx[v] = ++n;
    }
    for_each_face([&](std::int32_t f) {
      os << 'f';
      for (auto v : face_loop(f)) os << ' ' << idx[v];
      os << '\n';
    });
  }

 private:
  struct Descent {
    enum Kind { kCrossing, kOnPlane, kNotProper } kind;
    std::int32_t he = -1;      // crossing: positive origin, negative destination
    std::int32_t vertex = -1;  // on-plane start vertex
    int side = 0;              // not proper: side holding the cell
  };
  struct Record {
    std::int32_t z, bpos, bneg;
  };
  struct Component {
    std::vector<std::int32_t> faces;
    std::size_t head = 0;
  };

  std::int32_t dest(std::int32_t h) const noexcept { return he_[he_[h].next].origin; }
  std::int32_t rot(std::int32_t h) const noexcept { return he_[he_[h].twin].next; }

  std::int32_t new_vertex(Point p) {  // by value: callers pass elements of verts_
    std::int32_t v;
    if (!free_v_.empty()) {
      v = free_v_.back();
      free_v_.pop_back();
      verts_[v].pos = p;
    } else {
      v = static_cast<std::int32_t>(verts_.size());
      verts_.push_back(Vertex{p, -1});
      stamp_.push_back(0);
      sign_.push_back(0);
      dot_.emplace_back();
      dist_.push_back(0);
      inv_w_.push_back(0);
      vmark_.push_back(0);
    }
    inv_w_[v] = 1.0 / p.x[3].approx_abs();
    verts_[v].out = -2;  // reserved until an edge is attached
    return v;
  }
  std::int32_t new_half(std::int32_t origin, std::int32_t face) {
    std::int32_t h;
    if (!free_h_.empty()) {
      h = free_h_.back();
      free_h_.pop_back();
    } else {
      h = static_cast<std::int32_t>(he_.size());
      he_.emplace_back();
    }
    he_[h] = HalfEdge{origin, -1, -1, -1, face};
    return h;
  }
  std::int32_t new_face(PlaneT p, std::int32_t plane_id, std::int32_t annotation) {  // by value: callers pass elements of faces_
    std::int32_t f;
    if (!free_f_.empty()) {
      f = free_f_.back();
      free_f_.pop_back();
    } else {
      f = static_cast<std::int32_t>(faces_.size());
      faces_.emplace_back();
      fstamp_.push_back(0);
    }
    faces_[f] = Face{p, -2, plane_id, annotation};
    return f;
  }

  void begin_cut(const PlaneT& s) {
    s_ = s;
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0u);
      epoch_ = 1;
    }
    classified_ = 0;
    if (naive_)
      for (std::size_t v = 0; v < verts_.size(); ++v)
        if (verts_[v].out >= 0) cls(static_cast<std::int32_t>(v));
  }

  int cls(std::int32_t v) {
    if (stamp_[v] == epoch_) return sign_[v];
    dot_[v] = dot(verts_[v].pos, s_);
    dist_[v] = dot_[v].approx_abs() * inv_w_[v];
    const int sg = dot_[v].sign() * verts_[v].pos.x[3].sign();
    ++predicate_counters().classify;
    ++classified_;
    stamp_[v] = epoch_;
    sign_[v] = static_cast<std::int8_t>(sg);
    return sg;
  }

  /// Sign of |dist(a)| - |dist(b)| from cached dot products.
  int cmp_dist(std::int32_t a, std::int32_t b) const {
    ++predicate_counters().compare;
    // Each cached ratio is within 2^-50 relative of the exact one, so a
    // wider gap decides the sign; closer pairs take the exact products.
    constexpr double kGap = 1.0 - 0x1p-40;
    if (dist_[a] < dist_[b] * kGap) return -1;
    if (dist_[b] < dist_[a] * kGap) return 1;
    const auto lhs = mul_wide(dot_[a].abs_wrapped(), verts_[b].pos.x[3].abs_wrapped());
    const auto rhs = mul_wide(dot_[b].abs_wrapped(), verts_[a].pos.x[3].abs_wrapped());
    const auto c = lhs <=> rhs;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }

  std::int32_t start_halfedge() {
    if (hint_ >= 0 && hint_ < static_cast<std::int32_t>(he_.size()) && he_[hint_].face >= 0) return hint_;
    for (std::int32_t h = 0; h < static_cast<std::int32_t>(he_.size()); ++h)
      if (he_[h].face >= 0) return hint_ = h;
    return -1;
  }

  /// Greedy walk towards s; a local minimum of |dist| on one side is global.
  Descent descend() {
    const std::int32_t h0 = start_halfedge();
    std::int32_t v = he_[h0].origin;
    int sv = cls(v);
    if (sv == 0) return on_plane_start(v);
    for (;;) {
      std::int32_t zero = -1, o = verts_[v].out;
      const std::int32_t first = o;
      do {
        const std::int32_t n = dest(o);
        const int c = cls(n);
        if (c == -sv) return Descent{Descent::kCrossing, sv > 0 ? o : he_[o].twin, -1, 0};
        if (c == 0 && (zero < 0 || n < zero)) zero = n;
        o = rot(o);
      } while (o != first);
      if (zero >= 0) {
        // The cell is on the closed sv side unless the zero vertex also
        // touches the other side.
        std::int32_t p = verts_[zero].out;
        const std::int32_t pf = p;
        do {
          if (cls(dest(p)) == -sv) return Descent{Descent::kOnPlane, -1, zero, 0};
          p = rot(p);
        } while (p != pf);
        return Descent{Descent::kNotProper, -1, -1, sv};
      }
      std::int32_t best = -1;
      do {
        const std::int32_t n = dest(o);
        const int c = best < 0 ? cmp_dist(n, v) : cmp_dist(n, best);
        if (c < 0 || (c == 0 && best >= 0 && n < best)) best = n;
        o = rot(o);
      } while (o != first);
      if (best < 0) return Descent{Descent::kNotProper, -1, -1, sv};
      v = best;
    }
  }

  Descent on_plane_start(std::int32_t v) {
    bool has_pos = false, has_neg = false;
    std::int32_t o = verts_[v].out;
    const std::int32_t first = o;
    do {
      const int c = cls(dest(o));
      has_pos |= c > 0;
      has_neg |= c < 0;
      o = rot(o);
    } while (o != first);
    if (has_pos && has_neg) return Descent{Descent::kOnPlane, -1, v, 0};
    return Descent{Descent::kNotProper, -1, -1, has_pos ? 1 : -1};
  }

  /// Splits edge g (u -> v) at its crossing with s; g becomes u -> z.
  std::int32_t split_edge(std::int32_t g, std::int32_t plane_id) {
    const std::int32_t t = he_[g].twin;
    const std::int32_t u = he_[g].origin, v = he_[t].origin;
    (void)u;
    Point p = intersect<B>(faces_[he_[g].face].plane, faces_[he_[t].face].plane, s_);
    p.planes = {faces_[he_[g].face].plane_id, faces_[he_[t].face].plane_id, plane_id};
    const std::int32_t z = new_vertex(p);
    stamp_[z] = epoch_;
    sign_[z] = 0;
    dot_[z] = W(0);
    dist_[z] = 0;
    const std::int32_t g2 = new_half(z, he_[g].face);
    const std::int32_t t2 = new_half(z, he_[t].face);
    he_[g2].next = he_[g].next;
    he_[he_[g].next].prev = g2;
    he_[g].next = g2;
    he_[g2].prev = g;
    he_[t2].next = he_[t].next;
    he_[he_[t].next].prev = t2;
    he_[t].next = t2;
    he_[t2].prev = t;
    he_[g].twin = t2;
    he_[t2].twin = g;
    he_[g2].twin = t;
    he_[t].twin = g2;
    verts_[z].out = g2;
    (void)v;
    return z;
  }

  /// Runs descent, marching and cap insertion. Returns false (with info
  /// filled) when the cut is not proper.
  bool cut_in_place(const PlaneT& s, std::int32_t plane_id, CutInfo& info) {
    begin_cut(s);
    const Descent d = descend();
    if (d.kind == Descent::kNotProper) {
      last_classified_ = classified_;
      info.outcome = CutOutcome::NotProper;
      info.side = d.side;
      return false;
    }
    std::int32_t start, cur_in;
    if (d.kind == Descent::kCrossing) {
      start = split_edge(d.he, plane_id);
      cur_in = d.he;
    } else {
      start = d.vertex;
      std::int32_t o = verts_[start].out;
      while (cls(dest(o)) <= 0) o = rot(o);
      cur_in = he_[o].twin;
    }
    records_.clear();
    std::int32_t cur = start;
    do {
      std::int32_t h = he_[cur_in].twin;
      while (cls(he_[he_[h].prev].origin) > 0) h = he_[he_[h].prev].twin;
      std::int32_t g = h;
      while (cls(dest(g)) > 0) g = he_[g].next;
      if (cls(dest(g)) < 0) split_edge(g, plane_id);
      const std::int32_t exit = dest(g);
      const std::int32_t wprev = he_[h].prev;
      Record r{cur, -1, -1};
      if (exit == he_[wprev].origin) {
        r.bpos = wprev;
        r.bneg = he_[wprev].twin;
      } else {
        const std::int32_t F = he_[h].face;
        const std::int32_t gn = he_[g].next;
        const std::int32_t Gn = new_face(faces_[F].plane, faces_[F].plane_id, faces_[F].annotation);
        const std::int32_t cpos = new_half(exit, F);
        const std::int32_t cneg = new_half(cur, Gn);
        he_[g].next = cpos;
        he_[cpos].prev = g;
        he_[cpos].next = h;
        he_[h].prev = cpos;
        he_[wprev].next = cneg;
        he_[cneg].prev = wprev;
        he_[cneg].next = gn;
        he_[gn].prev = cneg;
        he_[cpos].twin = cneg;
        he_[cneg].twin = cpos;
        faces_[Gn].half = cneg;
        faces_[F].half = h;
        for (std::int32_t e = gn; e != cneg; e = he_[e].next) he_[e].face = Gn;
        r.bpos = cpos;
        r.bneg = cneg;
      }
      records_.push_back(r);
      cur_in = g;
      cur = exit;
    } while (cur != start);

    // Caps: -s closes the positive part, s the negative part.
    const std::size_t k = records_.size();
    cap_pos_ = new_face(-s, plane_id, -1);
    cap_neg_ = new_face(s, plane_id, -1);
    cp_.resize(k);
    cn_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      cp_[i] = new_half(records_[i].z, cap_pos_);
      cn_[i] = new_half(records_[(i + 1) % k].z, cap_neg_);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t nx = (i + 1) % k, pv = (i + k - 1) % k;
      he_[cp_[i]].next = cp_[nx];
      he_[cp_[i]].prev = cp_[pv];
      he_[cn_[i]].next = cn_[pv];
      he_[cn_[i]].prev = cn_[nx];
      he_[cp_[i]].twin = records_[i].bpos;
      he_[records_[i].bpos].twin = cp_[i];
      he_[cn_[i]].twin = records_[i].bneg;
      he_[records_[i].bneg].twin = cn_[i];
    }
    faces_[cap_pos_].half = cp_[0];
    faces_[cap_neg_].half = cn_[0];
    // Duplicate every cap vertex; the copy takes the negative fan.
    for (std::size_t i = 0; i < k; ++i) {
      const std::int32_t z = records_[i].z;
      const std::int32_t zn = new_vertex(verts_[z].pos);
      std::int32_t o = records_[i].bneg;
      do {
        he_[o].origin = zn;
        o = rot(o);
      } while (o != records_[i].bneg);
      verts_[z].out = cp_[i];
      verts_[zn].out = records_[i].bneg;
    }
    last_classified_ = classified_;
    info.outcome = CutOutcome::Split;
    return true;
  }

  /// Interleaved flood over both parts; returns the one finishing first.
  Component& separate() {
    if (++fepoch_ == 0) {
      std::fill(fstamp_.begin(), fstamp_.end(), 0u);
      fepoch_ = 1;
    }
    comp_[0].faces.assign(1, cap_neg_);
    comp_[1].faces.assign(1, cap_pos_);
    comp_[0].head = comp_[1].head = 0;
    fstamp_[cap_neg_] = fstamp_[cap_pos_] = fepoch_;
    for (;;) {
      for (Component& c : comp_) {
        if (c.head == c.faces.size()) return c;
        const std::int32_t f = c.faces[c.head++];
        std::int32_t h = faces_[f].half;
        do {
          const std::int32_t nf = he_[he_[h].twin].face;
          if (fstamp_[nf] != fepoch_) {
            fstamp_[nf] = fepoch_;
            c.faces.push_back(nf);
          }
          h = he_[h].next;
        } while (h != faces_[f].half);
      }
    }
  }

  /// Copies a component into dst (fresh) and frees it here. fmap_ maps its
  /// old face ids to the new ones.
  void move_component(const Component& comp, ConvexCell& dst) {
    if (++vepoch_ == 0) {
      std::fill(vmark_.begin(), vmark_.end(), 0u);
      vepoch_ = 1;
    }
    if (fmap_.size() < faces_.size()) fmap_.resize(faces_.size());
    if (hmap_.size() < he_.size()) hmap_.resize(he_.size());
    if (vmap_.size() < verts_.size()) vmap_.resize(verts_.size());
    for (const std::int32_t f : comp.faces) {
      fmap_[f] = static_cast<std::int32_t>(dst.faces_.size());
      dst.faces_.push_back(faces_[f]);
      dst.fstamp_.push_back(0);
      std::int32_t h = faces_[f].half;
      do {
        hmap_[h] = static_cast<std::int32_t>(dst.he_.size());
        dst.he_.push_back(he_[h]);
        const std::int32_t v = he_[h].origin;
        if (vmark_[v] != vepoch_) {
          vmark_[v] = vepoch_;
          vmap_[v] = static_cast<std::int32_t>(dst.verts_.size());
          dst.verts_.push_back(verts_[v]);
          dst.stamp_.push_back(0);
          dst.sign_.push_back(0);
          dst.dot_.emplace_back();
          dst.dist_.push_back(0);
          dst.inv_w_.push_back(inv_w_[v]);
          dst.vmark_.push_back(0);
        }
        h = he_[h].next;
      } while (h != faces_[f].half);
    }
    for (auto& e : dst.he_) {
      e.origin = vmap_[e.origin];
      e.twin = hmap_[e.twin];
      e.next = hmap_[e.next];
      e.prev = hmap_[e.prev];
      e.face = fmap_[e.face];
    }
    for (auto& v : dst.verts_) v.out = hmap_[v.out];
    for (auto& f : dst.faces_) f.half = hmap_[f.half];
    dst.hint_ = -1;
    free_component(comp);
  }

  void free_component(const Component& comp) {
    if (++vepoch_ == 0) {
      std::fill(vmark_.begin(), vmark_.end(), 0u);
      vepoch_ = 1;
    }
    for (const std::int32_t f : comp.faces) {
      std::int32_t h = faces_[f].half;
      do {
        const std::int32_t nx = he_[h].next;
        const std::int32_t v = he_[h].origin;
        if (vmark_[v] != vepoch_) {
          vmark_[v] = vepoch_;
          verts_[v].out = -1;
          free_v_.push_back(v);
        }
        he_[h].face = -1;
        free_h_.push_back(h);
        h = nx;
      } while (h != faces_[f].half);
      faces_[f].half = -1;
      free_f_.push_back(f);
    }
  }

  std::vector<Vertex> verts_;
  std::vector<HalfEdge> he_;
  std::vector<Face> faces_;
  std::vector<std::int32_t> free_v_, free_h_, free_f_;
  std::int32_t hint_ = -1;

  // Per-cut scratch, indexed by vertex or face id.
  PlaneT s_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int8_t> sign_;
  std::vector<W> dot_;
  std::vector<double> dist_;  // |dot| / |x4| approximations for cmp_dist
  std::vector<double> inv_w_;  // 1 / |x4|, fixed per vertex
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> fstamp_;
  std::uint32_t fepoch_ = 0;
  std::vector<std::uint32_t> vmark_;
  std::uint32_t vepoch_ = 0;
  std::vector<std::int32_t> fmap_, hmap_, vmap_;
  std::vector<Record> records_;
  std::vector<std::int32_t> cp_, cn_;
  std::array<Component, 2> comp_;
  std::int32_t cap_pos_ = -1, cap_neg_ = -1;
  std::uint64_t classified_ = 0, last_classified_ = 0;
  bool naive_ = false;
};

/// Copying cut: both parts as new cells, the input untouched.
template <int B>
struct CutResult {
  CutOutcome outcome = CutOutcome::NotProper;
  int side = 0;  // NotProper: side of s holding the cell
  ConvexCell<B> negative, positive;
};

template <int B>
CutResult<B> cut(const ConvexCell<B>& cell, const Plane<B>& s, std::int32_t plane_id = -1) {
  CutResult<B> r;
  ConvexCell<B> work = cell;
  ConvexCell<B> other;
  const CutInfo info = work.split(s, plane_id, other);
  r.outcome = info.outcome;
  r.side = info.side;
  if (info.outcome == CutOutcome::Split) {
    if (info.side < 0) {
      r.negative = std::move(work);
      r.positive = std::move(other);
    } else {
      r.positive = std::move(work);
      r.negative = std::move(other);
    }
  }
  return r;
}

}  // namespace octbsp
