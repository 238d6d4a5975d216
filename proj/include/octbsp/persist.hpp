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

/// Binary container "OEB1" for an octree of BSPs. Little-endian layout:
///
///   magic "OEB1" | u32 version | u32 bits | u32 max_bsp_size |
///   u32 tri_threshold | u64 seed | i64 root lo x, y, z | i64 root size |
///   u32 palette count | plane records |
///   u32 octree node count | preorder bitmap (1 = internal, LSB first) |
///   per leaf in preorder: u8 flags (bit 0 pathological) | i32 root label |
///                         u32 node count | (i32 plane, i32 neg, i32 pos)*
///
/// Node plane indices refer to the shared palette. Loading rejects any
/// input that violates a structural invariant.

#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "octbsp/octree.hpp"

namespace octbsp {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kContainerVersion = 1;

/// Size of the flat layout the structure needs at minimum: a 16-byte
/// header per octree node (child index, flags, root label, node count),
/// 12 bytes per BSP node and one plane record per leaf palette entry.
template <int B>
std::size_t layout_estimate_bytes(const OctreeBsp<B>& o) {
  const auto st = o.stats();
  std::size_t planes = 0;
  o.for_each_leaf([&](std::int32_t n, const Cube&) { planes += o.nodes()[n].bsp.palette.size(); });
  return 16 * (st.leaves + st.internal) + 12 * st.bsp_nodes + plane_record_size<B>() * planes;
}

template <int B>
std::string save_container(const OctreeBsp<B>& o) {
  std::string out = "OEB1";
  const auto& prm = o.params();
  detail::put_le<std::uint32_t>(out, kContainerVersion);
  detail::put_le<std::uint32_t>(out, B);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(prm.max_bsp_size));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(prm.tri_threshold));
  detail::put_le<std::uint64_t>(out, prm.seed);
  const Cube& r = o.root_cube();
  for (int i = 0; i < 3; ++i) detail::put_le<std::int64_t>(out, r.lo[i]);
  detail::put_le<std::int64_t>(out, r.size);

  // Shared palette in order of first use, and the preorder node list.
  std::vector<Plane<B>> palette;
  std::unordered_map<Plane<B>, std::int32_t, PlaneHash<B>> index;
  std::vector<std::int32_t> order;
  const auto& nodes = o.nodes();
  const auto walk = [&](auto&& self, std::int32_t n) -> void {
    order.push_back(n);
    if (nodes[n].first_child >= 0) {
      for (int i = 0; i < 8; ++i) self(self, nodes[n].first_child + i);
      return;
    }
    for (const auto& nd : nodes[n].bsp.nodes) {
      const Plane<B>& p = nodes[n].bsp.palette[nd.plane];
      if (index.try_emplace(p, static_cast<std::int32_t>(palette.size())).second) palette.push_back(p);
    }
  };
  walk(walk, 0);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(palette.size()));
  for (const auto& p : palette) write_plane(out, p);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(order.size()));
  std::string bits((order.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < order.size(); ++i)
    if (nodes[order[i]].first_child >= 0) bits[i / 8] = static_cast<char>(bits[i / 8] | (1 << (i % 8)));
  out += bits;
  for (auto n : order) {
    if (nodes[n].first_child >= 0) continue;
    const auto& t = nodes[n].bsp;
    out.push_back(static_cast<char>(nodes[n].pathological ? 1 : 0));
    detail::put_le<std::int32_t>(out, t.root_leaf);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& nd : t.nodes) {
      detail::put_le<std::int32_t>(out, index.at(t.palette[nd.plane]));
      detail::put_le<std::int32_t>(out, nd.neg);
      detail::put_le<std::int32_t>(out, nd.pos);
    }
  }
  return out;
}

namespace detail {

class Reader {
 public:
  explicit Reader(const std::string& s) : p_(reinterpret_cast<const unsigned char*>(s.data())), n_(s.size()) {}
  const unsigned char* take(std::size_t k) {
    if (k > n_ - pos_) throw FormatError("container truncated");
    const unsigned char* r = p_ + pos_;
    pos_ += k;
    return r;
  }
  template <typename T>
  T get() {
    return get_le<T>(take(sizeof(T)));
  }
  std::size_t remaining() const noexcept { return n_ - pos_; }

 private:
  const unsigned char* p_;
  std::size_t n_, pos_ = 0;
};

}  // namespace detail

/// Parses and validates a container written with the same bit width.
template <int B>
OctreeBsp<B> load_container(const std::string& data) {
  detail::Reader rd(data);
  if (std::string(reinterpret_cast<const char*>(rd.take(4)), 4) != "OEB1") throw FormatError("bad magic");
  if (rd.get<std::uint32_t>() != kContainerVersion) throw FormatError("unsupported container version");
  if (rd.get<std::uint32_t>() != static_cast<std::uint32_t>(B))
    throw FormatError("container bit width differs from " + std::to_string(B));
  OctreeParams prm;
  prm.max_bsp_size = rd.get<std::uint32_t>();
  prm.tri_threshold = rd.get<std::uint32_t>();
  prm.seed = rd.get<std::uint64_t>();
  Cube root;
  for (int i = 0; i < 3; ++i) root.lo[i] = rd.get<std::int64_t>();
  root.size = rd.get<std::int64_t>();
  if (root.size < 1 || (root.size & (root.size - 1)) != 0) throw FormatError("root edge not a power of two");

  const std::uint32_t np = rd.get<std::uint32_t>();
  if (static_cast<std::uint64_t>(np) * plane_record_size<B>() > rd.remaining()) throw FormatError("palette truncated");
  std::vector<Plane<B>> palette;
  palette.reserve(np);
  for (std::uint32_t i = 0; i < np; ++i) {
    try {
      palette.push_back(read_plane<B>(rd.take(plane_record_size<B>())));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(std::string("palette plane ") + std::to_string(i) + ": " + e.what());
    }
  }

  const std::uint32_t count = rd.get<std::uint32_t>();
  if (count == 0 || (count - 1) % 8 != 0) throw FormatError("octree node count is not 1 + 8k");
  const unsigned char* bits = rd.take((static_cast<std::size_t>(count) + 7) / 8);
  std::vector<char> used(palette.size(), 0);

  OctreeBsp<B> o(root, prm);
  auto& nodes = o.nodes();
  nodes.clear();
  nodes.emplace_back();
  std::uint32_t next = 0;
  const auto parse = [&](auto&& self, std::int32_t slot, const Cube& c, int depth) -> void {
    if (next >= count) throw FormatError("topology bitmap shorter than the tree");
    const bool internal = (bits[next / 8] >> (next % 8)) & 1;
    ++next;
    if (internal) {
      if (c.size < 2 || depth > 62) throw FormatError("unit cube marked internal");
      const auto first = static_cast<std::int32_t>(nodes.size());
      nodes.resize(nodes.size() + 8);
      nodes[slot].first_child = first;
      for (int i = 0; i < 8; ++i) self(self, first + i, c.child(i), depth + 1);
      return;
    }
    const std::uint8_t flags = *rd.take(1);
    if (flags > 1) throw FormatError("unknown leaf flags");
    BspTree<B> t;
    t.root_leaf = rd.get<std::int32_t>();
    const std::uint32_t nn = rd.get<std::uint32_t>();
    if (static_cast<std::uint64_t>(nn) * 12 > rd.remaining()) throw FormatError("leaf tree truncated");
    std::vector<std::int32_t> local(palette.size(), -1);
    t.nodes.reserve(nn);
    for (std::uint32_t i = 0; i < nn; ++i) {
      typename BspTree<B>::Node nd;
      const auto g = rd.get<std::int32_t>();
      nd.neg = rd.get<std::int32_t>();
      nd.pos = rd.get<std::int32_t>();
      if (g < 0 || g >= static_cast<std::int32_t>(palette.size())) throw FormatError("plane index out of range");
      used[g] = 1;
      if (local[g] < 0) {
        local[g] = static_cast<std::int32_t>(t.palette.size());
        t.palette.push_back(palette[g]);
      }
      nd.plane = local[g];
      t.nodes.push_back(nd);
    }
    std::string why;
    if (!t.validate(&why)) throw FormatError("leaf tree invalid: " + why);
    nodes[slot].pathological = flags & 1;
    nodes[slot].bsp = std::move(t);
  };
  parse(parse, 0, root, 0);
  if (next != count) throw FormatError("topology bitmap longer than the tree");
  for (std::uint32_t i = count; i < ((count + 7) / 8) * 8; ++i)
    if ((bits[i / 8] >> (i % 8)) & 1) throw FormatError("nonzero bitmap padding");
  if (rd.remaining() != 0) throw FormatError("trailing bytes after the last leaf");
  for (char u : used)
    if (!u) throw FormatError("unused palette plane");
  std::string why;
  if (!o.validate(&why)) throw FormatError("octree invalid: " + why);
  return o;
}

template <int B>
void write_container_file(const OctreeBsp<B>& o, const std::string& path) {
  const std::string data = save_container(o);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path + " for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

/// Bit width stored in a container, without parsing the rest.
inline int container_bits(const std::string& data) {
  detail::Reader rd(data);
  if (std::string(reinterpret_cast<const char*>(rd.take(4)), 4) != "OEB1") throw FormatError("bad magic");
  rd.get<std::uint32_t>();
  return static_cast<int>(rd.get<std::uint32_t>());
}

}  // namespace octbsp
