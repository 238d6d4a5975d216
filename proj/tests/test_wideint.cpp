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

#include "octbsp/wideint.hpp"
#include "oracle.hpp"

using namespace octbsp;
using oracle::from_mpz;
using oracle::to_mpz;

namespace {

// Random value with a random bit length, so small, large and boundary
// magnitudes are all frequent.
template <int N>
WideInt<N> random_wide(std::mt19937_64& rng, int max_bits = N) {
  std::array<std::uint64_t, N / 64> l{};
  for (auto& x : l) x = rng();
  auto v = WideInt<N>::from_limbs(l);
  const int keep = static_cast<int>(rng() % static_cast<std::uint64_t>(max_bits)) + 1;
  if (keep < N) {
    v = v.shl(N - keep).lshr(N - keep);
    if (rng() & 1) v = -v;
  }
  return v;
}

template <int N>
void differential_add_sub_mul(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    const auto a = random_wide<N>(rng), b = random_wide<N>(rng);
    const mpz_class A = to_mpz(a), B = to_mpz(b);
    ASSERT_EQ(a + b, from_mpz<N>(A + B));
    ASSERT_EQ(a - b, from_mpz<N>(A - B));
    ASSERT_EQ(a * b, from_mpz<N>(A * B));
    WideInt<N> r;
    ASSERT_EQ(WideInt<N>::add_overflow(a, b, r), !oracle::fits<N>(A + B));
    ASSERT_EQ(WideInt<N>::sub_overflow(a, b, r), !oracle::fits<N>(A - B));
    ASSERT_EQ(WideInt<N>::mul_overflow(a, b, r), !oracle::fits<N>(A * B));
    const auto s = static_cast<std::int64_t>(rng());
    ASSERT_EQ(a * s, from_mpz<N>(A * oracle::to_mpz(s)));
    ASSERT_EQ(WideInt<N>::mul_overflow(a, s, r), !oracle::fits<N>(A * oracle::to_mpz(s)));
    ASSERT_EQ((a <=> b) < 0, A < B);
    ASSERT_EQ(a.sign(), oracle::sgn(A));
  }
}

}  // namespace

TEST(WideInt, AddIdentityAndCarry) {
  const auto x = WideInt<128>::from_string("123456789012345678901234567890");
  EXPECT_EQ(WideInt<128>(0) + x, x);
  EXPECT_EQ(WideInt<128>::pow2(100) + WideInt<128>::pow2(100), WideInt<128>::pow2(101));
}

TEST(WideInt, CheckedAddOverflowAtBoundary) {
  EXPECT_THROW(WideInt<128>::checked_add(WideInt<128>::max(), WideInt<128>(1)), OverflowError);
  EXPECT_NO_THROW(WideInt<128>::checked_add(WideInt<128>::max(), WideInt<128>(0)));
  EXPECT_THROW(WideInt<256>::checked_sub(WideInt<256>::min(), WideInt<256>(1)), OverflowError);
}

TEST(WideInt, MulWideSchoolbook) {
  const auto a = WideInt<128>::pow2(64) + WideInt<128>(3);
  const auto b = WideInt<128>::pow2(64) + WideInt<128>(5);
  const auto expect = WideInt<256>::pow2(128) + WideInt<256>::pow2(64) * std::int64_t{8} + WideInt<256>(15);
  EXPECT_EQ(mul_wide(a, b), expect);
  EXPECT_EQ(mul_wide(a, WideInt<128>(1)), WideInt<256>::from(a));
}

TEST(WideInt, Sign) {
  EXPECT_EQ(WideInt<128>(0).sign(), 0);
  EXPECT_EQ(WideInt<128>(-5).sign(), -1);
  EXPECT_EQ(WideInt<256>::pow2(200).sign(), 1);
  EXPECT_EQ(WideInt<192>::min().sign(), -1);
}

TEST(WideInt, Gcd) {
  EXPECT_EQ(gcd(WideInt<128>(12), WideInt<128>(18)), WideInt<128>(6));
  EXPECT_EQ(gcd(WideInt<128>(-42), WideInt<128>(0)), WideInt<128>(42));
  EXPECT_EQ(gcd(WideInt<128>(0), WideInt<128>(-7)), WideInt<128>(7));
  EXPECT_EQ(gcd(WideInt<128>(-12), WideInt<128>(-18)), WideInt<128>(6));
  EXPECT_THROW(gcd(WideInt<128>(0), WideInt<128>(0)), std::domain_error);
  EXPECT_THROW(gcd(WideInt<128>::min(), WideInt<128>(0)), OverflowError);
}

TEST(WideInt, ToDouble) {
  EXPECT_EQ(WideInt<128>(0).to_double(), 0.0);
  EXPECT_EQ(WideInt<128>::pow2(60).to_double(), std::ldexp(1.0, 60));
  EXPECT_EQ((WideInt<128>::pow2(64) + WideInt<128>(1)).to_double(), std::ldexp(1.0, 64));
  // Exact tie 2^53 + 1 rounds to even, 2^53 + 3 rounds up.
  EXPECT_EQ((WideInt<128>::pow2(53) + WideInt<128>(1)).to_double(), std::ldexp(1.0, 53));
  EXPECT_EQ((WideInt<128>::pow2(53) + WideInt<128>(3)).to_double(), std::ldexp(1.0, 53) + 4.0);
  EXPECT_EQ(WideInt<256>::min().to_double(), -std::ldexp(1.0, 255));
}

TEST(WideInt, StringRoundTrip) {
  const char* lits[] = {"0", "-1", "170141183460469231731687303715884105727",
                        "-170141183460469231731687303715884105728", "0x1f", "-0xdeadbeef"};
  for (const char* s : lits) {
    const auto v = WideInt<128>::from_string(s);
    EXPECT_EQ(WideInt<128>::from_string(v.to_string()), v) << s;
    EXPECT_EQ(WideInt<128>::from_string(v.to_string(16)), v) << s;
  }
  EXPECT_EQ(WideInt<128>::from_string("-0xdeadbeef").to_string(16), "-0xdeadbeef");
  EXPECT_THROW(WideInt<128>::from_string("170141183460469231731687303715884105728"), OverflowError);
  EXPECT_THROW(WideInt<128>::from_string("12a"), std::invalid_argument);
}

TEST(WideInt, NarrowDetectsLoss) {
  EXPECT_EQ(WideInt<128>::narrow(WideInt<256>(-77)), WideInt<128>(-77));
  EXPECT_THROW(WideInt<128>::narrow(WideInt<256>::pow2(130)), OverflowError);
}

TEST(WideIntOracle, Differential128) { differential_add_sub_mul<128>(1000000, 1); }
TEST(WideIntOracle, Differential192) { differential_add_sub_mul<192>(200000, 2); }
TEST(WideIntOracle, Differential256) { differential_add_sub_mul<256>(200000, 3); }

TEST(WideIntOracle, MulWideMillion) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000000; ++i) {
    const auto a = random_wide<128>(rng), b = random_wide<128>(rng);
    ASSERT_EQ(mul_wide(a, b), from_mpz<256>(to_mpz(a) * to_mpz(b)));
  }
  for (int i = 0; i < 100000; ++i) {
    const auto a = random_wide<256>(rng), b = random_wide<256>(rng);
    ASSERT_EQ(mul_wide(a, b), from_mpz<512>(to_mpz(a) * to_mpz(b)));
  }
}

TEST(WideIntOracle, GcdRandomPairs) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    auto a = random_wide<256>(rng, 255), b = random_wide<256>(rng, 255);
    if (a.is_zero() && b.is_zero()) continue;
    // Plant a common factor so the result is usually nontrivial.
    const auto f = random_wide<256>(rng, 40).abs_wrapped();
    if (!f.is_zero() && (i & 1)) {
      a = random_wide<256>(rng, 200) * f;
      b = random_wide<256>(rng, 200) * f;
      if (a.is_zero() && b.is_zero()) continue;
    }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), to_mpz(a).get_mpz_t(), to_mpz(b).get_mpz_t());
    ASSERT_EQ(gcd(a, b), from_mpz<256>(g));
  }
}

TEST(WideIntOracle, ToDoubleNearestEven) {
  // Reference: the exact value is no farther from the result than from
  // either neighbouring double.
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20000; ++i) {
    const auto a = random_wide<256>(rng);
    const double d = a.to_double();
    const mpz_class A = to_mpz(a);
    const mpq_class exact(A);
    const mpq_class got(d);
    const mpq_class up(std::nextafter(d, INFINITY)), dn(std::nextafter(d, -INFINITY));
    const mpq_class e0 = abs(exact - got), e1 = abs(exact - up), e2 = abs(exact - dn);
    ASSERT_LE(e0, e1);
    ASSERT_LE(e0, e2);
    if (e0 == e1 || e0 == e2) {
      int exp;
      const double m = std::frexp(d, &exp);
      ASSERT_EQ(static_cast<std::int64_t>(std::ldexp(m, 53)) % 2, 0) << "tie must round to even";
    }
  }
}

TEST(WideIntOracle, ApproxAbsWithinRelativeBound) {
  // The filter in cell distance comparisons relies on |approx - exact| <
  // 2^-52 |exact|.
  std::mt19937_64 rng(8);
  const mpq_class eps(mpz_class(1), mpz_class(1) << 52);
  EXPECT_EQ(WideInt<128>(0).approx_abs(), 0.0);
  EXPECT_EQ(WideInt<256>::min().approx_abs(), std::ldexp(1.0, 255));
  for (int i = 0; i < 20000; ++i) {
    const auto a = random_wide<256>(rng);
    const mpq_class exact(abs(to_mpz(a)));
    const mpq_class got(a.approx_abs());
    ASSERT_LE(abs(exact - got), eps * exact);
  }
}

TEST(WideIntOracle, RationalToDoubleNearest) {
  std::mt19937_64 rng(7);
  EXPECT_EQ(rational_to_double(WideInt<128>(1), WideInt<128>(3)), 1.0 / 3.0);
  EXPECT_EQ(rational_to_double(WideInt<128>(-7), WideInt<128>(2)), -3.5);
  for (int i = 0; i < 20000; ++i) {
    const auto n = random_wide<256>(rng);
    auto d = random_wide<256>(rng);
    if (d.is_zero()) d = WideInt<256>(1);
    const double r = rational_to_double(n, d);
    mpq_class exact(to_mpz(n), to_mpz(d));
    exact.canonicalize();
    const mpq_class got(r);
    const mpq_class up(std::nextafter(r, INFINITY)), dn(std::nextafter(r, -INFINITY));
    ASSERT_LE(abs(exact - got), abs(exact - up));
    ASSERT_LE(abs(exact - got), abs(exact - dn));
  }
}

TEST(WideIntProperty, CommutativeAssociative) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100000; ++i) {
    const auto a = random_wide<192>(rng, 60), b = random_wide<192>(rng, 60), c = random_wide<192>(rng, 60);
    ASSERT_EQ(a + b, b + a);
    ASSERT_EQ((a + b) + c, a + (b + c));
    ASSERT_EQ(a * b, b * a);
    ASSERT_EQ((a * b) * c, a * (b * c));
  }
}
