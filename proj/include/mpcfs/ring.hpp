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

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <sstream>
#include <vector>

#include "mpcfs/errors.hpp"

namespace mpcfs {

// Residue modulo 2^64. Unsigned overflow is the ring reduction, so plain
// uint64_t arithmetic is exact ring arithmetic.
using RingElement = std::uint64_t;

inline constexpr RingElement ring_add(RingElement a, RingElement b) noexcept { return a + b; }
inline constexpr RingElement ring_sub(RingElement a, RingElement b) noexcept { return a - b; }
inline constexpr RingElement ring_mul(RingElement a, RingElement b) noexcept { return a * b; }
inline constexpr RingElement ring_neg(RingElement a) noexcept { return RingElement{0} - a; }

// Two's complement view: residues in [2^63, 2^64) are negative.
inline constexpr std::int64_t to_signed(RingElement a) noexcept { return static_cast<std::int64_t>(a); }
inline constexpr RingElement from_signed(std::int64_t v) noexcept { return static_cast<RingElement>(v); }

inline constexpr RingElement pow2(unsigned bits) noexcept {
  return bits >= 64 ? RingElement{0} : RingElement{1} << bits;
}

inline constexpr unsigned bit_width_for(std::uint64_t v) noexcept {
  unsigned w = 0;
  while (w < 64 && (std::uint64_t{1} << w) <= v) ++w;
  return w;
}

// Smallest w with v <= 2^w.
inline constexpr unsigned ceil_log2(std::uint64_t v) noexcept {
  unsigned w = 0;
  while (w < 64 && (std::uint64_t{1} << w) < v) ++w;
  return w;
}

struct FixedPointParams {
  unsigned frac_bits = 16;
  double magnitude_bound = 1048576.0;  // 2^20

  FixedPointParams() = default;
  FixedPointParams(unsigned f, double bound) : frac_bits(f), magnitude_bound(bound) { validate(); }

  void validate() const {
    if (frac_bits == 0 || frac_bits >= 32) {
      throw UsageError("frac_bits must lie in (0, 32), got " + std::to_string(frac_bits));
    }
    if (!(magnitude_bound > 0.0) || magnitude_bound > std::ldexp(1.0, 62 - static_cast<int>(frac_bits))) {
      std::ostringstream os;
      os << "magnitude_bound " << magnitude_bound << " exceeds 2^(62-" << frac_bits << ")";
      throw UsageError(os.str());
    }
  }

  // Bits needed for |encode(x)| over admitted inputs.
  unsigned encoded_bits() const { return frac_bits + ceil_log2(static_cast<std::uint64_t>(std::ceil(magnitude_bound))); }

  RingElement one() const { return pow2(frac_bits); }
};

// round(x * 2^f), half away from zero, reduced mod 2^64.
inline RingElement encode(double x, const FixedPointParams& p) {
  if (!std::isfinite(x) || std::fabs(x) > p.magnitude_bound) {
    std::ostringstream os;
    os << "value " << x << " outside magnitude bound " << p.magnitude_bound;
    throw EncodingError(os.str());
  }
  const double scaled = std::round(std::ldexp(x, static_cast<int>(p.frac_bits)));
  return from_signed(static_cast<std::int64_t>(scaled));
}

inline double decode(RingElement e, unsigned frac_bits) {
  return std::ldexp(static_cast<double>(to_signed(e)), -static_cast<int>(frac_bits));
}

inline double decode(RingElement e, const FixedPointParams& p) { return decode(e, p.frac_bits); }

// Little-endian u64 serialization, used on the wire and in share files.
inline void put_le(std::vector<std::byte>& out, std::uint64_t v, unsigned bytes = 8) {
  for (unsigned i = 0; i < bytes; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::span<const std::byte> in, std::size_t offset, unsigned bytes = 8) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(in[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace mpcfs
