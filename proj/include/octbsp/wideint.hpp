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

/// Fixed-width two's-complement integers built from 64-bit limbs.
///
/// Widths are fixed at compile time. Plain operators wrap modulo 2^Bits;
/// the *_overflow / checked_* family reports results that do not fit.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace octbsp {

__extension__ using int128_t = __int128;
__extension__ using uint128_t = unsigned __int128;

#ifdef OCTBSP_CHECKED
inline constexpr bool kCheckedArithmetic = true;
#else
inline constexpr bool kCheckedArithmetic = false;
#endif

/// Thrown by checked arithmetic when a result leaves the representable range.
struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

template <int Bits>
class WideInt {
  static_assert(Bits % 64 == 0 && Bits >= 64 && Bits <= 1024);

 public:
  static constexpr int kBits = Bits;
  static constexpr int kLimbs = Bits / 64;
  using Limbs = std::array<std::uint64_t, kLimbs>;

  constexpr WideInt() noexcept : w_{} {}

  constexpr WideInt(std::int64_t v) noexcept : w_{} {  // NOLINT(implicit)
    w_[0] = static_cast<std::uint64_t>(v);
    const std::uint64_t ext = v < 0 ? ~std::uint64_t{0} : 0;
    for (int i = 1; i < kLimbs; ++i) w_[i] = ext;
  }

  constexpr WideInt(int v) noexcept : WideInt(static_cast<std::int64_t>(v)) {}  // NOLINT(implicit)

  constexpr explicit WideInt(int128_t v) noexcept : w_{} {
    const auto u = static_cast<uint128_t>(v);
    w_[0] = static_cast<std::uint64_t>(u);
    const std::uint64_t ext = v < 0 ? ~std::uint64_t{0} : 0;
    if constexpr (kLimbs > 1) {
      w_[1] = static_cast<std::uint64_t>(u >> 64);
      for (int i = 2; i < kLimbs; ++i) w_[i] = ext;
    }
  }

  static constexpr WideInt from_limbs(const Limbs& l) noexcept {
    WideInt r;
    r.w_ = l;
    return r;
  }

  /// Sign-extends or truncates a value of another width.
  template <int M>
  static constexpr WideInt from(const WideInt<M>& o) noexcept {
    WideInt r;
    const std::uint64_t ext = o.is_negative() ? ~std::uint64_t{0} : 0;
    for (int i = 0; i < kLimbs; ++i) r.w_[i] = i < WideInt<M>::kLimbs ? o.limb(i) : ext;
    return r;
  }

  /// Like from(), but throws OverflowError if the value does not fit.
  template <int M>
  static WideInt narrow(const WideInt<M>& o) {
    WideInt r = from(o);
    if (WideInt<M>::from(r) != o) throw OverflowError("WideInt narrowing overflow");
    return r;
  }

  static constexpr WideInt max() noexcept {
    WideInt r;
    for (auto& l : r.w_) l = ~std::uint64_t{0};
    r.w_[kLimbs - 1] >>= 1;
    return r;
  }
  static constexpr WideInt min() noexcept {
    WideInt r;
    r.w_[kLimbs - 1] = std::uint64_t{1} << 63;
    return r;
  }
  /// 2^k for 0 <= k < Bits - 1.
  static constexpr WideInt pow2(int k) noexcept {
    WideInt r;
    r.w_[k / 64] = std::uint64_t{1} << (k % 64);
    return r;
  }

  constexpr std::uint64_t limb(int i) const noexcept { return w_[i]; }
  constexpr const Limbs& limbs() const noexcept { return w_; }

  constexpr bool is_negative() const noexcept { return (w_[kLimbs - 1] >> 63) != 0; }
  constexpr bool is_zero() const noexcept {
    std::uint64_t acc = 0;
    for (auto l : w_) acc |= l;
    return acc == 0;
  }
  constexpr int sign() const noexcept { return is_negative() ? -1 : (is_zero() ? 0 : 1); }

  /// Low 64 bits reinterpreted as signed; exact when fits_int64().
  constexpr std::int64_t to_int64() const noexcept { return static_cast<std::int64_t>(w_[0]); }
  constexpr bool fits_int64() const noexcept {
    const std::uint64_t ext = (w_[0] >> 63) ? ~std::uint64_t{0} : 0;
    for (int i = 1; i < kLimbs; ++i)
      if (w_[i] != ext) return false;
    return true;
  }
  constexpr int128_t to_int128() const noexcept {
    uint128_t u = w_[0];
    if constexpr (kLimbs > 1) u |= static_cast<uint128_t>(w_[1]) << 64;
    else if (is_negative()) u |= ~uint128_t{0} << 64;
    return static_cast<int128_t>(u);
  }

  // --- wrapping arithmetic -------------------------------------------------

  constexpr WideInt operator-() const noexcept {
    WideInt r;
    std::uint64_t carry = 1;
    for (int i = 0; i < kLimbs; ++i) {
      const std::uint64_t v = ~w_[i] + carry;
      carry = (carry && v == 0) ? 1 : 0;
      r.w_[i] = v;
    }
    return r;
  }

  friend constexpr WideInt operator+(const WideInt& a, const WideInt& b) noexcept {
    WideInt r;
    if constexpr (kLimbs == 2) {
      const uint128_t s = a.u128() + b.u128();
      r.set_u128(s);
    } else {
      unsigned char c = 0;
      for (int i = 0; i < kLimbs; ++i) {
        const uint128_t t = static_cast<uint128_t>(a.w_[i]) + b.w_[i] + c;
        r.w_[i] = static_cast<std::uint64_t>(t);
        c = static_cast<unsigned char>(t >> 64);
      }
    }
    return r;
  }

  friend constexpr WideInt operator-(const WideInt& a, const WideInt& b) noexcept {
    WideInt r;
    if constexpr (kLimbs == 2) {
      r.set_u128(a.u128() - b.u128());
    } else {
      unsigned char borrow = 0;
      for (int i = 0; i < kLimbs; ++i) {
        const std::uint64_t x = a.w_[i], y = b.w_[i];
        const std::uint64_t d = x - y - borrow;
        borrow = (x < y || (x == y && borrow)) ? 1 : 0;
        r.w_[i] = d;
      }
    }
    return r;
  }

  /// Product modulo 2^Bits.
  friend constexpr WideInt operator*(const WideInt& a, const WideInt& b) noexcept {
    WideInt r;
    if constexpr (kLimbs == 2) {
      r.set_u128(a.u128() * b.u128());
    } else {
      for (int i = 0; i < kLimbs; ++i) {
        std::uint64_t carry = 0;
        if (a.w_[i] == 0) continue;
        for (int j = 0; i + j < kLimbs; ++j) {
          const uint128_t t =
              static_cast<uint128_t>(a.w_[i]) * b.w_[j] + r.w_[i + j] + carry;
          r.w_[i + j] = static_cast<std::uint64_t>(t);
          carry = static_cast<std::uint64_t>(t >> 64);
        }
      }
    }
    return r;
  }

  /// Product with a signed 64-bit scalar, modulo 2^Bits.
  friend constexpr WideInt operator*(const WideInt& a, std::int64_t s) noexcept {
    if constexpr (kLimbs == 2) {
      WideInt r;
      r.set_u128(a.u128() * static_cast<uint128_t>(static_cast<int128_t>(s)));
      return r;
    } else {
      const bool neg = s < 0;
      const std::uint64_t m = neg ? 0 - static_cast<std::uint64_t>(s) : static_cast<std::uint64_t>(s);
      WideInt r;
      std::uint64_t carry = 0;
      for (int i = 0; i < kLimbs; ++i) {
        const uint128_t t = static_cast<uint128_t>(a.w_[i]) * m + carry;
        r.w_[i] = static_cast<std::uint64_t>(t);
        carry = static_cast<std::uint64_t>(t >> 64);
      }
      return neg ? -r : r;
    }
  }

  constexpr WideInt& operator+=(const WideInt& o) noexcept { return *this = *this + o; }
  constexpr WideInt& operator-=(const WideInt& o) noexcept { return *this = *this - o; }
  constexpr WideInt& operator*=(const WideInt& o) noexcept { return *this = *this * o; }

  // --- overflow-reporting arithmetic ---------------------------------------

  /// out = a + b; returns true if the exact sum is not representable.
  static constexpr bool add_overflow(const WideInt& a, const WideInt& b, WideInt& out) noexcept {
    out = a + b;
    return a.is_negative() == b.is_negative() && out.is_negative() != a.is_negative();
  }
  static constexpr bool sub_overflow(const WideInt& a, const WideInt& b, WideInt& out) noexcept {
    out = a - b;
    return a.is_negative() != b.is_negative() && out.is_negative() != a.is_negative();
  }
  static constexpr bool mul_overflow(const WideInt& a, std::int64_t s, WideInt& out) noexcept {
    const bool neg = a.is_negative() != (s < 0) && s != 0 && !a.is_zero();
    const std::uint64_t m = s < 0 ? 0 - static_cast<std::uint64_t>(s) : static_cast<std::uint64_t>(s);
    const WideInt mag = a.abs_wrapped();
    WideInt r;
    std::uint64_t carry = 0;
    for (int i = 0; i < kLimbs; ++i) {
      const uint128_t t = static_cast<uint128_t>(mag.w_[i]) * m + carry;
      r.w_[i] = static_cast<std::uint64_t>(t);
      carry = static_cast<std::uint64_t>(t >> 64);
    }
    out = neg ? -r : r;
    return carry != 0 || !fits_magnitude(r, neg);
  }
  static constexpr bool mul_overflow(const WideInt& a, const WideInt& b, WideInt& out) noexcept {
    const bool neg = a.is_negative() != b.is_negative() && !a.is_zero() && !b.is_zero();
    const auto full = umul_wide(a.abs_wrapped(), b.abs_wrapped());
    WideInt r;
    bool high = false;
    for (int i = 0; i < 2 * kLimbs; ++i) {
      if (i < kLimbs) r.w_[i] = full[i];
      else high |= full[i] != 0;
    }
    out = neg ? -r : r;
    return high || !fits_magnitude(r, neg);
  }

  static WideInt checked_add(const WideInt& a, const WideInt& b) {
    WideInt r;
    if (add_overflow(a, b, r)) throw OverflowError("WideInt add overflow");
    return r;
  }
  static WideInt checked_sub(const WideInt& a, const WideInt& b) {
    WideInt r;
    if (sub_overflow(a, b, r)) throw OverflowError("WideInt sub overflow");
    return r;
  }
  static WideInt checked_mul(const WideInt& a, std::int64_t s) {
    WideInt r;
    if (mul_overflow(a, s, r)) throw OverflowError("WideInt mul overflow");
    return r;
  }
  static WideInt checked_mul(const WideInt& a, const WideInt& b) {
    WideInt r;
    if (mul_overflow(a, b, r)) throw OverflowError("WideInt mul overflow");
    return r;
  }

  // --- comparisons ---------------------------------------------------------

  friend constexpr bool operator==(const WideInt& a, const WideInt& b) noexcept { return a.w_ == b.w_; }
  friend constexpr std::strong_ordering operator<=>(const WideInt& a, const WideInt& b) noexcept {
    const bool na = a.is_negative(), nb = b.is_negative();
    if (na != nb) return na ? std::strong_ordering::less : std::strong_ordering::greater;
    return ucmp(a, b);
  }
  /// Compare as unsigned magnitudes of the raw bit patterns.
  static constexpr std::strong_ordering ucmp(const WideInt& a, const WideInt& b) noexcept {
    for (int i = kLimbs - 1; i >= 0; --i)
      if (a.w_[i] != b.w_[i]) return a.w_[i] < b.w_[i] ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  // --- bit operations ------------------------------------------------------

  /// |x|; wraps for min().
  constexpr WideInt abs_wrapped() const noexcept { return is_negative() ? -*this : *this; }

  constexpr WideInt shl(int k) const noexcept {
    WideInt r;
    const int ls = k / 64, bs = k % 64;
    for (int i = kLimbs - 1; i >= ls; --i) {
      std::uint64_t v = w_[i - ls] << bs;
      if (bs && i - ls - 1 >= 0) v |= w_[i - ls - 1] >> (64 - bs);
      r.w_[i] = v;
    }
    return r;
  }
  /// Logical right shift of the raw bits.
  constexpr WideInt lshr(int k) const noexcept {
    WideInt r;
    const int ls = k / 64, bs = k % 64;
    for (int i = 0; i + ls < kLimbs; ++i) {
      std::uint64_t v = w_[i + ls] >> bs;
      if (bs && i + ls + 1 < kLimbs) v |= w_[i + ls + 1] << (64 - bs);
      r.w_[i] = v;
    }
    return r;
  }
  constexpr int countr_zero() const noexcept {
    for (int i = 0; i < kLimbs; ++i)
      if (w_[i]) return i * 64 + std::countr_zero(w_[i]);
    return Bits;
  }
  /// Index of the highest set bit of the raw pattern, -1 for zero.
  constexpr int bit_width_minus_one() const noexcept {
    for (int i = kLimbs - 1; i >= 0; --i)
      if (w_[i]) return i * 64 + 63 - std::countl_zero(w_[i]);
    return -1;
  }
  constexpr bool bit(int k) const noexcept { return (w_[k / 64] >> (k % 64)) & 1u; }

  /// |value| as a double from its top 64 bits: relative error below
  /// 2^-52. A cheap filter input, not a correctly rounded conversion.
  double approx_abs() const noexcept {
    const WideInt m = abs_wrapped();
    for (int i = kLimbs - 1; i > 0; --i) {
      if (!m.w_[i]) continue;
      const int lz = std::countl_zero(m.w_[i]);
      const std::uint64_t top = lz ? (m.w_[i] << lz) | (m.w_[i - 1] >> (64 - lz)) : m.w_[i];
      return std::ldexp(static_cast<double>(top), 64 * i - lz);
    }
    return static_cast<double>(m.w_[0]);
  }

  /// Nearest binary64, ties to even.
  double to_double() const noexcept {
    const bool neg = is_negative();
    const WideInt m = abs_wrapped();  // min() reads correctly as unsigned
    const int top = m.bit_width_minus_one();
    if (top < 0) return 0.0;
    double r;
    if (top < 53) {
      r = static_cast<double>(m.w_[0]);
    } else {
      const int shift = top - 52;  // keep 53 bits
      const WideInt q = m.lshr(shift);
      std::uint64_t mant = q.w_[0];
      const bool round_bit = m.bit(shift - 1);
      bool sticky = false;
      for (int i = 0; i < shift - 1 && !sticky; ++i) sticky = m.bit(i);
      if (round_bit && (sticky || (mant & 1u))) ++mant;
      r = std::ldexp(static_cast<double>(mant), shift);
    }
    return neg ? -r : r;
  }

  /// Divides the magnitude by a small divisor; returns the remainder.
  constexpr std::uint64_t udivmod_small(std::uint64_t d, WideInt& q) const noexcept {
    uint128_t rem = 0;
    for (int i = kLimbs - 1; i >= 0; --i) {
      const uint128_t cur = (rem << 64) | w_[i];
      q.w_[i] = static_cast<std::uint64_t>(cur / d);
      rem = cur % d;
    }
    return static_cast<std::uint64_t>(rem);
  }

  std::string to_string(int base = 10) const {
    if (base != 10 && base != 16) throw std::invalid_argument("base must be 10 or 16");
    if (is_zero()) return base == 16 ? "0x0" : "0";
    WideInt m = abs_wrapped();
    std::string digits;
    while (!m.is_zero()) {
      WideInt q;
      const auto r = m.udivmod_small(static_cast<std::uint64_t>(base), q);
      digits.push_back("0123456789abcdef"[r]);
      m = q;
    }
    if (base == 16) digits += "x0";
    if (is_negative()) digits.push_back('-');
    return {digits.rbegin(), digits.rend()};
  }

  /// Parses [-]decimal or [-]0x-hex. Throws std::invalid_argument / OverflowError.
  static WideInt from_string(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    // Accumulate one bit wider so that min() parses.
    WideInt<Bits + 64> acc;
    for (char c : s) {
      int v;
      if (c >= '0' && c <= '9') v = c - '0';
      else if (base == 16 && c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (base == 16 && c >= 'A' && c <= 'F') v = c - 'A' + 10;
      else throw std::invalid_argument("bad digit in integer literal");
      if (v >= base) throw std::invalid_argument("bad digit in integer literal");
      WideInt<Bits + 64> next;
      if (WideInt<Bits + 64>::mul_overflow(acc, base, next) ||
          WideInt<Bits + 64>::add_overflow(next, WideInt<Bits + 64>(v), next))
        throw OverflowError("integer literal out of range");
      acc = next;
    }
    if (neg) acc = -acc;
    return narrow(acc);
  }

 private:
  template <int>
  friend class WideInt;

  constexpr uint128_t u128() const noexcept {
    return static_cast<uint128_t>(w_[1]) << 64 | w_[0];
  }
  constexpr void set_u128(uint128_t v) noexcept {
    w_[0] = static_cast<std::uint64_t>(v);
    w_[1] = static_cast<std::uint64_t>(v >> 64);
  }

  /// Whether an unsigned magnitude fits once the sign is applied.
  static constexpr bool fits_magnitude(const WideInt& mag, bool neg) noexcept {
    if (!mag.is_negative()) return true;
    return neg && mag == min();
  }

  static constexpr std::array<std::uint64_t, 2 * kLimbs> umul_wide(const WideInt& a, const WideInt& b) noexcept {
    std::array<std::uint64_t, 2 * kLimbs> r{};
    for (int i = 0; i < kLimbs; ++i) {
      std::uint64_t carry = 0;
      for (int j = 0; j < kLimbs; ++j) {
        const uint128_t t = static_cast<uint128_t>(a.w_[i]) * b.w_[j] + r[i + j] + carry;
        r[i + j] = static_cast<std::uint64_t>(t);
        carry = static_cast<std::uint64_t>(t >> 64);
      }
      r[i + kLimbs] = carry;
    }
    return r;
  }

  Limbs w_;
};

/// Exact signed product at the summed width.
template <int N, int M>
constexpr WideInt<N + M> mul_wide(const WideInt<N>& a, const WideInt<M>& b) noexcept {
  constexpr int LA = N / 64, LB = M / 64;
  const bool neg = a.is_negative() != b.is_negative();
  const WideInt<N> ma = a.abs_wrapped();
  const WideInt<M> mb = b.abs_wrapped();
  std::array<std::uint64_t, LA + LB> r{};
  for (int i = 0; i < LA; ++i) {
    if (ma.limb(i) == 0) continue;
    std::uint64_t carry = 0;
    for (int j = 0; j < LB; ++j) {
      const uint128_t t = static_cast<uint128_t>(ma.limb(i)) * mb.limb(j) + r[i + j] + carry;
      r[i + j] = static_cast<std::uint64_t>(t);
      carry = static_cast<std::uint64_t>(t >> 64);
    }
    r[i + LB] = carry;
  }
  const auto out = WideInt<N + M>::from_limbs(r);
  return neg ? -out : out;
}

/// Positive greatest common divisor (binary, shift/subtract).
/// Throws std::domain_error when both inputs are zero and OverflowError when
/// the result is 2^(Bits-1).
template <int N>
WideInt<N> gcd(const WideInt<N>& a, const WideInt<N>& b) {
  if (a.is_zero() && b.is_zero()) throw std::domain_error("gcd(0, 0) is undefined");
  // Magnitudes are treated as unsigned bit patterns throughout.
  WideInt<N> u = a.abs_wrapped(), v = b.abs_wrapped();
  if (u.is_zero() || v.is_zero()) {
    WideInt<N> r = u.is_zero() ? v : u;
    if (r.is_negative()) throw OverflowError("gcd result not representable");
    return r;
  }
  const int shift = std::min(u.countr_zero(), v.countr_zero());
  u = u.lshr(u.countr_zero());
  do {
    v = v.lshr(v.countr_zero());
    if (WideInt<N>::ucmp(u, v) == std::strong_ordering::greater) std::swap(u, v);
    v = v - u;
  } while (!v.is_zero());
  WideInt<N> r = u.shl(shift);
  if (r.is_negative()) throw OverflowError("gcd result not representable");
  return r;
}

/// Unsigned long division of raw bit patterns: q = n / d, returns n % d.
template <int N>
WideInt<N> udivmod(const WideInt<N>& n, const WideInt<N>& d, WideInt<N>& q) {
  if (d.is_zero()) throw std::domain_error("division by zero");
  q = WideInt<N>();
  WideInt<N> rem;
  for (int i = n.bit_width_minus_one(); i >= 0; --i) {
    const bool carry_out = rem.bit(N - 1);
    rem = rem.shl(1);
    if (n.bit(i)) rem = rem + WideInt<N>(1);
    if (carry_out || WideInt<N>::ucmp(rem, d) != std::strong_ordering::less) {
      rem = rem - d;
      q = q + WideInt<N>::pow2(i);
    }
  }
  return rem;
}

/// Correctly rounded (ties to even) binary64 value of num / den, den != 0.
template <int N>
double rational_to_double(const WideInt<N>& num, const WideInt<N>& den) {
  if (den.is_zero()) throw std::domain_error("zero denominator");
  if (num.is_zero()) return 0.0;
  const bool neg = num.is_negative() != den.is_negative();
  // Work at N + 128 bits so the scaled numerator never overflows.
  using W = WideInt<N + 128>;
  const W a = W::from(num).abs_wrapped();
  const W b = W::from(den).abs_wrapped();
  // Scale so the quotient carries at least 55 significant bits.
  const int shift = b.bit_width_minus_one() - a.bit_width_minus_one() + 55;
  W sa = a, sb = b;
  if (shift > 0) sa = a.shl(shift);
  else if (shift < 0) sb = b.shl(-shift);
  W q;
  const W rem = udivmod(sa, sb, q);
  // q has 55 or 56 significant bits; fold the tail into a 53-bit mantissa.
  const int qbits = q.bit_width_minus_one() + 1;
  const int drop = qbits - 53;
  std::uint64_t mant = q.lshr(drop).limb(0);
  const bool round_bit = q.bit(drop - 1);
  bool sticky = !rem.is_zero();
  for (int i = 0; i < drop - 1 && !sticky; ++i) sticky = q.bit(i);
  if (round_bit && (sticky || (mant & 1u))) ++mant;
  const double r = std::ldexp(static_cast<double>(mant), drop - shift);
  return neg ? -r : r;
}

using Int128 = WideInt<128>;
using Int192 = WideInt<192>;
using Int256 = WideInt<256>;
using Int512 = WideInt<512>;

}  // namespace octbsp
