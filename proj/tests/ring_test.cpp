// Copyright 2026 The mpcfs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <random>

#include "mpcfs/ring.hpp"

namespace mpcfs {
namespace {

using boost::multiprecision::cpp_int;

// Reference encoding with unbounded integers: round half away from zero,
// then reduce into [0, 2^64).
RingElement reference_encode(double x, unsigned f) {
  const cpp_int modulus = cpp_int(1) << 64;
  const long double scaled = std::ldexp(static_cast<long double>(x), static_cast<int>(f));
  const long double mag = std::floor(std::fabs(scaled) + 0.5L);
  cpp_int v(static_cast<unsigned long long>(mag));
  if (scaled < 0) v = -v;
  v %= modulus;
  if (v < 0) v += modulus;
  return static_cast<RingElement>(v);
}

TEST(Ring, WrapsModulo) {
  EXPECT_EQ(ring_add(~RingElement{0}, 1), 0u);
  EXPECT_EQ(ring_mul(3, 5), 15u);
  EXPECT_EQ(ring_mul(pow2(63), 2), 0u);
  EXPECT_EQ(ring_sub(0, 1), ~RingElement{0});
  EXPECT_EQ(ring_neg(5), ~RingElement{0} - 4);
}

TEST(Ring, AlgebraicLawsOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const RingElement a = rng(), b = rng(), c = rng();
    EXPECT_EQ(ring_add(ring_add(a, b), c), ring_add(a, ring_add(b, c)));
    EXPECT_EQ(ring_mul(ring_mul(a, b), c), ring_mul(a, ring_mul(b, c)));
    EXPECT_EQ(ring_add(a, b), ring_add(b, a));
    EXPECT_EQ(ring_mul(a, b), ring_mul(b, a));
    EXPECT_EQ(ring_mul(a, ring_add(b, c)), ring_add(ring_mul(a, b), ring_mul(a, c)));
  }
}

TEST(Ring, SignedView) {
  EXPECT_EQ(to_signed(~RingElement{0}), -1);
  EXPECT_EQ(from_signed(-2), ~RingElement{0} - 1);
  EXPECT_EQ(to_signed(pow2(63)), std::numeric_limits<std::int64_t>::min());
}

TEST(Ring, BitHelpers) {
  EXPECT_EQ(bit_width_for(0), 0u);
  EXPECT_EQ(bit_width_for(1), 1u);
  EXPECT_EQ(bit_width_for(4), 3u);
  EXPECT_EQ(ceil_log2(1), 0u);
  EXPECT_EQ(ceil_log2(4), 2u);
  EXPECT_EQ(ceil_log2(5), 3u);
  EXPECT_EQ(pow2(64), 0u);
}

TEST(FixedPoint, EncodeExamples) {
  const FixedPointParams p;
  EXPECT_EQ(encode(0.0, p), 0u);
  EXPECT_EQ(encode(1.0, p), 65536u);
  EXPECT_EQ(encode(-0.5, p), reference_encode(-0.5, 16));
  EXPECT_EQ(encode(-0.5, p), ~RingElement{0} - 32767);
}

TEST(FixedPoint, DecodeExamples) {
  const FixedPointParams p;
  EXPECT_EQ(decode(65536, p), 1.0);
  EXPECT_EQ(decode(~RingElement{0} - 32767, p), -0.5);
  EXPECT_EQ(decode(1, p), std::ldexp(1.0, -16));
}

TEST(FixedPoint, RoundsHalfAwayFromZero) {
  const FixedPointParams p;
  const double half_ulp = std::ldexp(1.0, -17);
  EXPECT_EQ(encode(half_ulp, p), 1u);
  EXPECT_EQ(encode(-half_ulp, p), ~RingElement{0});
  EXPECT_EQ(encode(3 * half_ulp, p), 2u);
  EXPECT_EQ(encode(-3 * half_ulp, p), ~RingElement{0} - 1);
}

TEST(FixedPoint, EncodeMatchesReference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1048576.0, 1048576.0);
  const FixedPointParams p;
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(rng);
    EXPECT_EQ(encode(x, p), reference_encode(x, 16)) << x;
  }
}

TEST(FixedPoint, RoundTripWithinHalfUlp) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1048576.0, 1048576.0);
  const FixedPointParams p;
  const double tol = std::ldexp(1.0, -17);
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(rng);
    EXPECT_LE(std::fabs(decode(encode(x, p), p) - x), tol) << x;
  }
}

TEST(FixedPoint, AdditiveWithinOneUlp) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-500000.0, 500000.0);
  const FixedPointParams p;
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(rng), y = dist(rng);
    const auto diff = to_signed(encode(x, p) + encode(y, p) - encode(x + y, p));
    EXPECT_LE(std::llabs(diff), 1) << x << " + " << y;
  }
}

TEST(FixedPoint, RejectsOutOfRange) {
  const FixedPointParams p;
  EXPECT_NO_THROW(encode(1048576.0, p));
  EXPECT_THROW(encode(1048576.5, p), EncodingError);
  EXPECT_THROW(encode(-2e6, p), EncodingError);
  EXPECT_THROW(encode(std::nan(""), p), EncodingError);
  try {
    encode(5e6, p);
  } catch (const EncodingError& e) {
    EXPECT_NE(std::string(e.what()).find("1.04858e+06"), std::string::npos) << e.what();
  }
}

TEST(FixedPoint, ValidatesParameters) {
  EXPECT_THROW(FixedPointParams(0, 10.0), UsageError);
  EXPECT_THROW(FixedPointParams(32, 10.0), UsageError);
  EXPECT_THROW(FixedPointParams(16, std::ldexp(1.0, 47)), UsageError);
  EXPECT_NO_THROW(FixedPointParams(16, std::ldexp(1.0, 46)));
  EXPECT_EQ(FixedPointParams().encoded_bits(), 36u);
}

TEST(Serialization, LittleEndian) {
  std::vector<std::byte> buf;
  put_le(buf, 0x0102030405060708ULL);
  ASSERT_EQ(buf.size(), 8u);
  EXPECT_EQ(std::to_integer<int>(buf[0]), 8);
  EXPECT_EQ(std::to_integer<int>(buf[7]), 1);
  EXPECT_EQ(get_le(buf, 0), 0x0102030405060708ULL);
  put_le(buf, 0xabcd, 2);
  EXPECT_EQ(get_le(buf, 8, 2), 0xabcdu);
}

}  // namespace
}  // namespace mpcfs
