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

#include <gtest/gtest.h>

#include "octbsp/persist.hpp"
#include "octbsp/workloads.hpp"
#include "support.hpp"

namespace {

using namespace octbsp;

template <int B>
OctreeBsp<B> carved(std::uint64_t seed, int steps, std::size_t max_bsp = 40) {
  std::mt19937_64 rng(seed);
  OctreeParams p;
  p.max_bsp_size = max_bsp;
  p.seed = seed;
  const Cube root{{-512, -512, -512}, 1024};
  OctreeBsp<B> o(root, p);
  const Box work{{-300, -300, -300}, {300, 300, 300}};
  o.apply_tool(make_box_bsp<B>(work), work, MergeFunction::make_union());
  for (int i = 0; i < steps; ++i) {
    const auto pts = random_hull_points(rng, uniform_point(rng, work), 120);
    try {
      o.apply_tool(build_hull_bsp<B>(pts), bounding_box(pts), MergeFunction::make_difference());
    } catch (const DegenerateError&) {
    }
  }
  return o;
}

template <int B>
void expect_round_trip(const OctreeBsp<B>& o) {
  const std::string bytes = save_container(o);
  const auto back = load_container<B>(bytes);
  EXPECT_EQ(save_container(back), bytes);
  std::mt19937_64 rng(5);
  const double agree = support::agreement(
      rng, o.root_cube().box(), 2000, [&](const Vec3& p) { return o.classify_point(p); },
      [&](const Vec3& p) { return back.classify_point(p); });
  EXPECT_EQ(agree, 1.0);
}

TEST(Container, RoundTripsCarvedOctree) {
  const auto o = carved<128>(1, 20);
  ASSERT_GT(o.stats().leaves, 1u);
  expect_round_trip(o);
}

TEST(Container, RoundTripsEveryWidth) {
  expect_round_trip(carved<192>(2, 6));
  expect_round_trip(carved<256>(3, 6));
}

TEST(Container, AllOutAndAllIn) {
  expect_round_trip(OctreeBsp<128>(Cube{{-1, -1, -1}, 2}, OctreeParams{}, false));
  expect_round_trip(OctreeBsp<128>(Cube{{0, 0, 0}, 4}, OctreeParams{}, true));
}

TEST(Container, HeaderLayout) {
  const auto o = carved<128>(4, 3);
  const std::string b = save_container(o);
  EXPECT_EQ(b.substr(0, 4), "OEB1");
  const auto* p = reinterpret_cast<const unsigned char*>(b.data());
  EXPECT_EQ(detail::get_le<std::uint32_t>(p + 4), kContainerVersion);
  EXPECT_EQ(detail::get_le<std::uint32_t>(p + 8), 128u);
  EXPECT_EQ(detail::get_le<std::uint32_t>(p + 12), 40u);
  EXPECT_EQ(detail::get_le<std::int64_t>(p + 28), -512);
  EXPECT_EQ(detail::get_le<std::int64_t>(p + 52), 1024);
  EXPECT_EQ(container_bits(b), 128);
}

TEST(Container, SharedPaletteIsDeduplicated) {
  const auto o = carved<128>(6, 12, 20);
  const std::string b = save_container(o);
  const auto np = detail::get_le<std::uint32_t>(reinterpret_cast<const unsigned char*>(b.data()) + 60);
  std::size_t leaf_planes = 0;
  o.for_each_leaf([&](std::int32_t n, const Cube&) { leaf_planes += o.nodes()[n].bsp.palette.size(); });
  EXPECT_LT(np, leaf_planes);
}

TEST(Container, RejectsWrongWidth) {
  const std::string b = save_container(carved<128>(7, 2));
  EXPECT_THROW(load_container<256>(b), FormatError);
}

TEST(Container, RejectsEveryTruncation) {
  const std::string b = save_container(carved<128>(8, 4));
  for (std::size_t n = 0; n < b.size(); ++n) EXPECT_THROW(load_container<128>(b.substr(0, n)), FormatError) << n;
}

TEST(Container, RejectsTrailingBytes) {
  const std::string b = save_container(carved<128>(9, 2));
  EXPECT_THROW(load_container<128>(b + '\0'), FormatError);
}

TEST(Container, RejectsBadMagicAndVersion) {
  std::string b = save_container(carved<128>(10, 1));
  std::string m = b;
  m[0] = 'X';
  EXPECT_THROW(load_container<128>(m), FormatError);
  m = b;
  m[4] = 9;
  EXPECT_THROW(load_container<128>(m), FormatError);
}

TEST(Container, RejectsNonCanonicalPlane) {
  const auto o = OctreeBsp<128>(Cube{{0, 0, 0}, 8}, OctreeParams{}, false);
  std::string b = save_container(o);
  // Hand-built leaf with one node over the plane 2x - 4 = 0 (content 2).
  std::string c = b.substr(0, 60);
  detail::put_le<std::uint32_t>(c, 1);
  write_plane(c, Plane<128>{2, 0, 0, -4});
  detail::put_le<std::uint32_t>(c, 1);
  c.push_back('\0');
  c.push_back('\0');
  detail::put_le<std::int32_t>(c, 0);
  detail::put_le<std::uint32_t>(c, 1);
  detail::put_le<std::int32_t>(c, 0);
  detail::put_le<std::int32_t>(c, kIn);
  detail::put_le<std::int32_t>(c, kOut);
  EXPECT_THROW(load_container<128>(c), FormatError);
  // The same record with the canonical plane loads.
  std::string ok = b.substr(0, 60);
  detail::put_le<std::uint32_t>(ok, 1);
  write_plane(ok, Plane<128>::make(2, 0, 0, -4));
  ok += c.substr(60 + 4 + plane_record_size<128>());
  EXPECT_NO_THROW(load_container<128>(ok));
}

TEST(Container, RejectsBitmapInconsistencies) {
  const auto o = OctreeBsp<128>(Cube{{0, 0, 0}, 8}, OctreeParams{}, false);
  std::string b = save_container(o);
  // Node count 1; flipping the root to internal leaves the tree short.
  std::string m = b;
  m[64 + 4] = 1;
  EXPECT_THROW(load_container<128>(m), FormatError);
  m = b;
  m[64 + 4] = 2;
  EXPECT_THROW(load_container<128>(m), FormatError);
}

TEST(Container, ByteFlipsNeverCrash) {
  const std::string b = save_container(carved<128>(11, 6));
  std::mt19937_64 rng(12);
  int rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string m = b;
    const auto at = static_cast<std::size_t>(support::uniform(rng, 0, static_cast<std::int64_t>(b.size()) - 1));
    m[at] = static_cast<char>(m[at] ^ (1 << support::uniform(rng, 0, 7)));
    try {
      const auto o = load_container<128>(m);
      std::string why;
      EXPECT_TRUE(o.validate(&why)) << why;
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Container, FileRoundTrip) {
  const auto o = carved<128>(13, 3);
  const std::string path = ::testing::TempDir() + "octbsp_persist.oeb";
  write_container_file(o, path);
  EXPECT_EQ(read_file_bytes(path), save_container(o));
  EXPECT_THROW(read_file_bytes(path + ".missing"), std::ios_base::failure);
}

}  // namespace
