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

#include <cmath>
#include <random>

#include "octbsp/planes.hpp"
#include "oracle.hpp"

using namespace octbsp;

namespace {

using P128 = Plane<128>;
using P256 = Plane<256>;

template <int B>
HomoPoint<B> hp(std::int64_t x1, std::int64_t x2, std::int64_t x3, std::int64_t x4) {
  HomoPoint<B> p;
  p.x = {WideInt<B>(x1), WideInt<B>(x2), WideInt<B>(x3), WideInt<B>(x4)};
  return p;
}

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

Vec3 random_point(std::mt19937_64& rng, std::int64_t v) {
  return {uniform(rng, -v, v), uniform(rng, -v, v), uniform(rng, -v, v)};
}

// Plane through three random points within v, as produced by mesh import.
template <int B>
Plane<B> random_plane(std::mt19937_64& rng, std::int64_t v) {
  for (;;) {
    try {
      return plane_from_points<B>(random_point(rng, v), random_point(rng, v), random_point(rng, v));
    } catch (const DegenerateError&) {
    }
  }
}

}  // namespace

TEST(PlaneFromPoints, UnitTriangle) {
  EXPECT_EQ(plane_from_points<128>({0, 0, 0}, {1, 0, 0}, {0, 1, 0}), (P128{0, 0, 1, 0}));
}

TEST(PlaneFromPoints, ContentDivision) {
  EXPECT_EQ(plane_from_points<128>({0, 0, 2}, {4, 0, 2}, {0, 4, 2}), (P128{0, 0, 1, -2}));
  EXPECT_EQ(plane_from_points<256>({0, 0, 2}, {0, 4, 2}, {4, 0, 2}), (P256{0, 0, -1, 2}));
}

TEST(PlaneFromPoints, CollinearThrows) {
  EXPECT_THROW(plane_from_points<128>({0, 0, 0}, {1, 1, 1}, {2, 2, 2}), DegenerateError);
}

TEST(Plane, MakeKeepsOrientation) {
  EXPECT_EQ(P128::make(2, 4, 6, -8), (P128{1, 2, 3, -4}));
  EXPECT_EQ(P128::make(-2, -4, -6, 8), (P128{-1, -2, -3, 4}));
  EXPECT_NE(P128::make(1, 0, 0, 0), P128::make(-1, 0, 0, 0));
  EXPECT_THROW(P128::make(0, 0, 0, 5), DegenerateError);
}

TEST(Plane, Parallel) {
  EXPECT_TRUE(are_planes_parallel(P128{1, 0, 0, -1}, P128{1, 0, 0, 5}));
  EXPECT_FALSE(are_planes_parallel(P128{1, 0, 0, 0}, P128{0, 1, 0, 0}));
  const P128 p{3, -2, 7, 11};
  EXPECT_TRUE(are_planes_parallel(p, -p));
}

TEST(Intersect, Origin) {
  const auto x = intersect<128>(P128{1, 0, 0, 0}, P128{0, 1, 0, 0}, P128{0, 0, 1, 0});
  EXPECT_TRUE(same_point(x, hp<128>(0, 0, 0, 1)));
}

TEST(Intersect, CofactorRepresentative) {
  const auto x = intersect<128>(P128{1, 0, 0, -1}, P128{0, 1, 0, -2}, P128{0, 0, 1, -3});
  EXPECT_EQ(x.x[0], WideInt<128>(-1));
  EXPECT_EQ(x.x[1], WideInt<128>(-2));
  EXPECT_EQ(x.x[2], WideInt<128>(-3));
  EXPECT_EQ(x.x[3], WideInt<128>(-1));
  EXPECT_EQ(x.to_double(), (std::array<double, 3>{1.0, 2.0, 3.0}));
}

TEST(Intersect, ParallelPairThrows) {
  EXPECT_THROW(intersect<128>(P128{1, 0, 0, -1}, P128{1, 0, 0, 4}, P128{0, 0, 1, -3}), DegenerateError);
  EXPECT_FALSE(try_intersect<128>(P128{1, 0, 0, 0}, P128{0, 1, 0, 0}, P128{1, 1, 0, 3}).has_value());
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(hp<128>(0, 0, 0, 1), P128{1, 0, 0, -1}), -1);
  EXPECT_EQ(classify(hp<128>(-1, -2, -3, -1), P128{1, 1, 1, -6}), 0);
  EXPECT_EQ(classify(hp<128>(2, 0, 0, 2), P128{1, 0, 0, 0}), 1);
  EXPECT_EQ(classify(hp<128>(-2, 0, 0, -2), P128{1, 0, 0, 0}), 1);
}

TEST(CompareAbsDistance, Examples) {
  const P128 s{1, 0, 0, -1};
  const auto on = hp<128>(3, 5, 7, 3);   // (1, 5/3, 7/3)
  const auto off = hp<128>(0, 0, 0, 1);  // distance 1
  EXPECT_EQ(compare_abs_distance(off, off, s), 0);
  EXPECT_EQ(compare_abs_distance(on, off, s), -1);
  EXPECT_EQ(compare_abs_distance(off, on, s), 1);
  // (4, 0, 0) at distance 3 versus (-1/2, 0, 0) at distance 3/2.
  EXPECT_EQ(compare_abs_distance(hp<128>(-8, 0, 0, -2), hp<128>(1, 0, 0, -2), s), 1);
}

TEST(Budget, MaxVertexBound) {
  // Positions smaller than 8.73e7 at 256 bits with cross-product normals.
  const auto v256 = max_vertex_bound(256, true);
  EXPECT_GT(v256, 87250000);
  EXPECT_LT(v256, 87300000);
  // Frozen from an independent evaluation of 3 v^9 <= 2^(b - 17).
  EXPECT_EQ(static_cast<std::int64_t>(max_vertex_bound(128, true)), 4567);
  EXPECT_EQ(static_cast<std::int64_t>(max_vertex_bound(192, true)), 631462);
  EXPECT_EQ(max_vertex_bound(128, false), static_cast<int128_t>((uint128_t{1} << 127) / 48));
  EXPECT_THROW(max_vertex_bound(100, true), std::invalid_argument);
}

TEST(BudgetOracle, MaxVertexBoundMatchesClosedForm) {
  for (int b : {128, 192, 256}) {
    const auto v = max_vertex_bound(b, true);
    const mpz_class lim = mpz_class(1) << (b - 1);
    const auto lhs = [](const mpz_class& x) -> mpz_class {
      const mpz_class n = 8 * x * x;
      return n * n * n * n * x * 48;
    };
    const mpz_class V = oracle::to_mpz(v);
    EXPECT_LE(lhs(V), lim) << b;
    EXPECT_GT(lhs(V + 1), lim) << b;
    // Approximation 0.239 * 2^(b/9).
    EXPECT_NEAR(static_cast<double>(v) / (0.239 * std::pow(2.0, b / 9.0)), 1.0, 0.01) << b;
  }
}

TEST(Serialization, RecordRoundTrip) {
  std::mt19937_64 rng(11);
  std::string buf;
  std::vector<P256> planes;
  for (int i = 0; i < 100; ++i) planes.push_back(random_plane<256>(rng, 80000000));
  for (const auto& p : planes) write_plane(buf, p);
  ASSERT_EQ(buf.size(), planes.size() * plane_record_size<256>());
  for (std::size_t i = 0; i < planes.size(); ++i)
    EXPECT_EQ(read_plane<256>(reinterpret_cast<const unsigned char*>(buf.data()) + 40 * i), planes[i]);

  std::string b128;
  const P128 p{-3, 5, 7, -123456789012LL};
  write_plane(b128, p);
  ASSERT_EQ(b128.size(), 20u);
  EXPECT_EQ(read_plane<128>(reinterpret_cast<const unsigned char*>(b128.data())), p);
  std::string bad;
  EXPECT_THROW(write_plane(bad, P128{1LL << 40, 1, 0, 0}), OverflowError);
}

// Differential checks against rational Cramer solutions.
TEST(PlanesOracle, IntersectAndClassify) {
  std::mt19937_64 rng(12);
  const std::int64_t v = 4000;
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto p = random_plane<128>(rng, v), q = random_plane<128>(rng, v), r = random_plane<128>(rng, v);
    const auto s = random_plane<128>(rng, v);
    std::array<mpq_class, 3> sol;
    const bool ok = oracle::solve3(oracle::to_r(p), oracle::to_r(q), oracle::to_r(r), sol);
    const auto x = try_intersect<128>(p, q, r);
    ASSERT_EQ(ok, x.has_value());
    if (!ok) continue;
    ++checked;
    ASSERT_EQ(oracle::to_rational(*x), sol);
    ASSERT_EQ(classify(*x, s), oracle::classify(sol, oracle::to_r(s)));
    ASSERT_EQ(classify(*x, p), 0);
    ASSERT_EQ(classify(*x, q), 0);
    ASSERT_EQ(classify(*x, r), 0);
    ASSERT_EQ(classify(*x, -s), -classify(*x, s));
  }
  EXPECT_GT(checked, 99000);
}

TEST(PlanesOracle, CompareAbsDistance) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20000; ++i) {
    const auto s = random_plane<256>(rng, 80000000);
    HomoPoint<256> pts[2];
    for (auto& pt : pts) pt = intersect<256>(random_plane<256>(rng, 80000000), random_plane<256>(rng, 80000000),
                                             random_plane<256>(rng, 80000000));
    const auto rs = oracle::to_r(s);
    mpq_class dist[2];
    for (int k = 0; k < 2; ++k) {
      const auto x = oracle::to_rational(pts[k]);
      dist[k] = abs(x[0] * rs.a + x[1] * rs.b + x[2] * rs.c + rs.d);
    }
    const int expect = dist[0] < dist[1] ? -1 : (dist[0] > dist[1] ? 1 : 0);
    ASSERT_EQ(compare_abs_distance(pts[0], pts[1], s), expect);
  }
}

TEST(PlanesProperty, PermutationAndScaling) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20000; ++i) {
    const P128 pl[3] = {random_plane<128>(rng, 4000), random_plane<128>(rng, 4000), random_plane<128>(rng, 4000)};
    const auto x = try_intersect<128>(pl[0], pl[1], pl[2]);
    if (!x) continue;
    const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& pm : perm) {
      const auto y = intersect<128>(pl[pm[0]], pl[pm[1]], pl[pm[2]]);
      ASSERT_TRUE(same_point(*x, y));
    }
    const auto s = random_plane<128>(rng, 4000);
    HomoPoint<128> scaled = *x;
    for (auto& c : scaled.x) c = c * std::int64_t{-3};
    ASSERT_EQ(classify(scaled, s), classify(*x, s));
  }
}

TEST(PlanesProperty, ClassifyMatchesDeterminantProduct) {
  // sign(x^T s) sign(x4) equals sign(|p q r s|) sign(|n_p n_q n_r|); the
  // cofactor signs of both factors cancel.
  std::mt19937_64 rng(15);
  for (int i = 0; i < 20000; ++i) {
    const auto p = random_plane<128>(rng, 4000), q = random_plane<128>(rng, 4000), r = random_plane<128>(rng, 4000);
    const auto s = random_plane<128>(rng, 4000);
    const auto x = try_intersect<128>(p, q, r);
    if (!x) continue;
    const oracle::RPlane rows[4] = {oracle::to_r(p), oracle::to_r(q), oracle::to_r(r), oracle::to_r(s)};
    mpz_class m4[4][4];
    for (int k = 0; k < 4; ++k) {
      m4[k][0] = rows[k].a;
      m4[k][1] = rows[k].b;
      m4[k][2] = rows[k].c;
      m4[k][3] = rows[k].d;
    }
    mpz_class det4 = 0;
    for (int col = 0; col < 4; ++col) {
      mpz_class minor[3][3];
      for (int rr = 0; rr < 3; ++rr)
        for (int cc = 0, mc = 0; cc < 4; ++cc)
          if (cc != col) minor[rr][mc++] = m4[rr][cc];
      const mpz_class term = m4[3][col] * oracle::det3(minor);
      det4 += ((3 + col) % 2 == 0) ? term : mpz_class(-term);
    }
    mpz_class n3[3][3];
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 3; ++c) n3[k][c] = m4[k][c];
    const int expect = oracle::sgn(det4) * oracle::sgn(oracle::det3(n3));
    ASSERT_EQ(classify(*x, s), expect);
  }
}
