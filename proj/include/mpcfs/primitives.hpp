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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/multiply.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/session.hpp"
#include "mpcfs/tensor.hpp"

namespace mpcfs {

namespace detail {

// 1 - b for a shared bit given as raw components.
inline void one_minus(PartyId p, RingElement& first, RingElement& second) {
  first = ring_neg(first);
  second = ring_neg(second);
  if (p.value() == 1) first += 1;
  if (p.value() == 3) second += 1;
}

}  // namespace detail

// ---- shared random bits ---------------------------------------------------

// n uniformly random shared bits. Each pairwise seed yields a bit known
// to two parties; b = b_1 ^ b_2 ^ b_3 is unknown to any single party.
// Two multiplications per bit, two rounds per batch.
inline SharedVector random_bits(Session& s, std::size_t n) {
  const PartyId me = s.party();
  const std::size_t words = (n + 63) / 64;
  std::vector<RingElement> own(words), nxt(words);
  s.keys().random_shares(own, nxt);

  std::array<SharedVector, 3> b{SharedVector(me, kInteger, n), SharedVector(me, kInteger, n),
                                SharedVector(me, kInteger, n)};
  for (std::size_t t = 0; t < n; ++t) {
    b[me.index()].first[t] = (own[t / 64] >> (t % 64)) & 1;
    b[me.next().index()].second[t] = (nxt[t / 64] >> (t % 64)) & 1;
  }
  const auto p12 = mul(s, b[0], b[1]);
  const auto u = sub(add(b[0], b[1]), mul_const(p12, 2));
  const auto pu3 = mul(s, u, b[2]);
  s.count_op("random_bit", n);
  return sub(add(u, b[2]), mul_const(pu3, 2));
}

// Random masks r = sum_t 2^t bit_t + 2^nbits * high, with the low nbits
// bits individually shared.
struct MaskBatch {
  unsigned nbits = 0;
  std::size_t count = 0;
  SharedVector bits;  // count * nbits, LSB first per mask
  SharedVector high;  // count; unused when nbits == 64

  ReplicatedShare bit(std::size_t mask, unsigned t) const { return bits.at(mask * nbits + t); }

  SharedVector values() const {
    SharedVector r(bits.owner, kInteger, count);
    for (std::size_t n = 0; n < count; ++n) {
      RingElement f = 0, g = 0;
      for (unsigned t = 0; t < nbits; ++t) {
        f += bits.first[n * nbits + t] << t;
        g += bits.second[n * nbits + t] << t;
      }
      if (nbits < 64) {
        f += high.first[n] << nbits;
        g += high.second[n] << nbits;
      }
      r.first[n] = f;
      r.second[n] = g;
    }
    return r;
  }

  MaskBatch take(std::size_t begin, std::size_t n) const {
    MaskBatch m;
    m.nbits = nbits;
    m.count = n;
    m.bits = slice(bits, begin * nbits, n * nbits);
    m.high = slice(high, begin, n);
    return m;
  }
};

inline MaskBatch make_masks(Session& s, std::size_t count, unsigned nbits) {
  if (nbits == 0 || nbits > 64) throw UsageError("mask width must lie in [1, 64]");
  MaskBatch m;
  m.nbits = nbits;
  m.count = count;
  m.bits = random_bits(s, count * nbits);
  m.high = SharedVector(s.party(), kInteger, count);
  s.keys().random_shares(m.high.first, m.high.second);
  return m;
}

// ---- public value vs shared bits ------------------------------------------

struct BitCompareProblem {
  RingElement c = 0;       // public value
  std::size_t offset = 0;  // first bit (LSB) in the shared bit vector
  unsigned width = 0;
};

// Shares of [c mod 2^w < r mod 2^w] for each problem, where r's bits are
// shared. Segments (G, P) = ([r_seg > c_seg], [r_seg == c_seg]) are
// merged pairwise, high over low: G = G_hi + P_hi*G_lo, P = P_hi*P_lo.
// ceil(log2 w) rounds for the widest problem.
inline SharedVector public_less_than_bits(Session& s, const SharedVector& bits, std::span<const BitCompareProblem> problems) {
  const PartyId me = s.party();
  const std::size_t q_count = problems.size();
  std::vector<std::vector<RingElement>> g1(q_count), g2(q_count), p1(q_count), p2(q_count);
  for (std::size_t q = 0; q < q_count; ++q) {
    const auto& pr = problems[q];
    for (unsigned t = 0; t < pr.width; ++t) {
      const RingElement b1 = bits.first[pr.offset + t];
      const RingElement b2 = bits.second[pr.offset + t];
      if ((pr.c >> t) & 1) {
        g1[q].push_back(0);
        g2[q].push_back(0);
        p1[q].push_back(b1);
        p2[q].push_back(b2);
      } else {
        g1[q].push_back(b1);
        g2[q].push_back(b2);
        RingElement e1 = b1, e2 = b2;
        detail::one_minus(me, e1, e2);
        p1[q].push_back(e1);
        p2[q].push_back(e2);
      }
    }
  }

  for (;;) {
    SharedVector x(me, kInteger), y(me, kInteger);
    bool any = false;
    for (std::size_t q = 0; q < q_count; ++q) {
      const std::size_t n = g1[q].size();
      if (n < 2) continue;
      any = true;
      const bool keep_p = n > 2;
      for (std::size_t u = 0; u + 1 < n; u += 2) {
        x.push_back({p1[q][u + 1], p2[q][u + 1], me});
        y.push_back({g1[q][u], g2[q][u], me});
        if (keep_p) {
          x.push_back({p1[q][u + 1], p2[q][u + 1], me});
          y.push_back({p1[q][u], p2[q][u], me});
        }
      }
    }
    if (!any) break;
    const auto prod = mul(s, x, y);
    std::size_t k = 0;
    for (std::size_t q = 0; q < q_count; ++q) {
      const std::size_t n = g1[q].size();
      if (n < 2) continue;
      const bool keep_p = n > 2;
      std::vector<RingElement> ng1, ng2, np1, np2;
      for (std::size_t u = 0; u + 1 < n; u += 2) {
        ng1.push_back(g1[q][u + 1] + prod.first[k]);
        ng2.push_back(g2[q][u + 1] + prod.second[k]);
        ++k;
        if (keep_p) {
          np1.push_back(prod.first[k]);
          np2.push_back(prod.second[k]);
          ++k;
        } else {
          np1.push_back(0);
          np2.push_back(0);
        }
      }
      if (n % 2 == 1) {
        ng1.push_back(g1[q][n - 1]);
        ng2.push_back(g2[q][n - 1]);
        np1.push_back(p1[q][n - 1]);
        np2.push_back(p2[q][n - 1]);
      }
      g1[q] = std::move(ng1);
      g2[q] = std::move(ng2);
      p1[q] = std::move(np1);
      p2[q] = std::move(np2);
    }
  }

  SharedVector out(me, kInteger, q_count);
  for (std::size_t q = 0; q < q_count; ++q) {
    if (!g1[q].empty()) {
      out.first[q] = g1[q][0];
      out.second[q] = g2[q][0];
    }
  }
  return out;
}

// ---- comparison -----------------------------------------------------------

// Shares of [d < 0] for |d| < 2^width. With x = d + 2^width in
// [0, 2^(width+1)), the sign is bit `width` of x, recovered from the
// opened c = x + r as c_w ^ r_w ^ [c mod 2^w < r mod 2^w].
inline SharedVector less_than_zero(Session& s, const SharedVector& d, unsigned width, const MaskBatch& masks) {
  if (width == 0 || width > 63) throw UsageError("comparison width must lie in [1, 63]");
  if (masks.count != d.size() || masks.nbits != width + 1) throw UsageError("mask batch does not fit comparison");
  const PartyId me = s.party();
  const std::size_t n = d.size();
  const unsigned nb = width + 1;

  const auto masked = add(add_const(d, pow2(width)), masks.values());
  const auto c = open_unchecked(s, masked);

  std::vector<BitCompareProblem> problems(n);
  for (std::size_t i = 0; i < n; ++i) problems[i] = {c[i], i * nb, width};
  const auto borrow = public_less_than_bits(s, masks.bits, problems);

  SharedVector top(me, kInteger, n);
  for (std::size_t i = 0; i < n; ++i) top.set(i, masks.bit(i, width));
  const auto t = sub(add(top, borrow), mul_const(mul(s, top, borrow), 2));

  // [d < 0] = 1 - bit_w(x) = 1 - (c_w ^ t)
  SharedVector out(me, kInteger, n);
  for (std::size_t i = 0; i < n; ++i) {
    RingElement f = t.first[i], g = t.second[i];
    if (((c[i] >> width) & 1) == 0) detail::one_minus(me, f, g);
    out.first[i] = f;
    out.second[i] = g;
  }
  s.count_op("ltz", n);
  return out;
}

inline SharedVector less_than_zero(Session& s, const SharedVector& d, unsigned width) {
  const auto masks = make_masks(s, d.size(), width + 1);
  return less_than_zero(s, d, width, masks);
}

// [x < y] elementwise, signed, for |x - y| < 2^width.
inline SharedVector pi_lt(Session& s, const SharedVector& x, const SharedVector& y, unsigned width) {
  return less_than_zero(s, sub(x, y), width);
}

// Default width for values admitted by the fixed-point parameters.
inline unsigned comparison_width(const FixedPointParams& p) { return p.encoded_bits() + 2; }

// [d == 0] for |d| < 2^width: d mod 2^(width+1) vanishes iff every bit of
// the opened c = d + r agrees with r.
inline SharedVector equals_zero(Session& s, const SharedVector& d, unsigned width) {
  if (width == 0 || width > 63) throw UsageError("equality width must lie in [1, 63]");
  const PartyId me = s.party();
  const std::size_t n = d.size();
  const unsigned nb = width + 1;
  const auto masks = make_masks(s, n, nb);
  const auto c = open_unchecked(s, add(d, masks.values()));

  std::vector<std::vector<RingElement>> e1(n), e2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (unsigned t = 0; t < nb; ++t) {
      RingElement f = masks.bits.first[i * nb + t], g = masks.bits.second[i * nb + t];
      if (((c[i] >> t) & 1) == 0) detail::one_minus(me, f, g);
      e1[i].push_back(f);
      e2[i].push_back(g);
    }
  }
  while (e1.empty() ? false : e1[0].size() > 1) {
    SharedVector x(me, kInteger), y(me, kInteger);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t u = 0; u + 1 < e1[i].size(); u += 2) {
        x.push_back({e1[i][u], e2[i][u], me});
        y.push_back({e1[i][u + 1], e2[i][u + 1], me});
      }
    }
    const auto prod = mul(s, x, y);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = e1[i].size();
      std::vector<RingElement> n1, n2;
      for (std::size_t u = 0; u + 1 < len; u += 2, ++k) {
        n1.push_back(prod.first[k]);
        n2.push_back(prod.second[k]);
      }
      if (len % 2 == 1) {
        n1.push_back(e1[i][len - 1]);
        n2.push_back(e2[i][len - 1]);
      }
      e1[i] = std::move(n1);
      e2[i] = std::move(n2);
    }
  }
  SharedVector out(me, kInteger, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.first[i] = e1[i][0];
    out.second[i] = e2[i][0];
  }
  s.count_op("eqz", n);
  return out;
}

inline SharedVector pi_eq(Session& s, const SharedVector& x, const SharedVector& y, unsigned width) {
  return equals_zero(s, sub(x, y), width);
}

inline SharedVector pi_eq(Session& s, const SharedVector& x, std::span<const RingElement> y, unsigned width) {
  std::vector<RingElement> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), ring_neg);
  return equals_zero(s, add_public(x, neg), width);
}

// ---- truncation -----------------------------------------------------------

// floor(x / 2^bits) for |x| < 2^62, exact. With x' = x + 2^62 and the
// opened c = x' + r (r uniform, bitwise shared):
//   floor(x'/2^b) = (c >> b) - (r >> b) - [c mod 2^b < r mod 2^b] + 2^(64-b) [c < r].
inline SharedVector trunc(Session& s, const SharedVector& x, unsigned bits) {
  if (bits == 0) return x;
  if (bits > 62) throw UsageError("truncation by more than 62 bits");
  const PartyId me = s.party();
  const std::size_t n = x.size();
  const auto masks = make_masks(s, n, 64);
  const auto r = masks.values();
  const auto c = open_unchecked(s, add(add_const(x, pow2(62)), r));

  std::vector<BitCompareProblem> problems;
  problems.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    problems.push_back({c[i], i * 64, 64});
    problems.push_back({c[i], i * 64, bits});
  }
  const auto cmp = public_less_than_bits(s, masks.bits, problems);

  SharedVector out(me, x.scale >= bits ? x.scale - bits : kInteger, n);
  for (std::size_t i = 0; i < n; ++i) {
    RingElement hi1 = 0, hi2 = 0;
    for (unsigned t = bits; t < 64; ++t) {
      hi1 += masks.bits.first[i * 64 + t] << (t - bits);
      hi2 += masks.bits.second[i * 64 + t] << (t - bits);
    }
    const RingElement wrap_coef = pow2(64 - bits);
    out.first[i] = ring_neg(hi1) - cmp.first[2 * i + 1] + cmp.first[2 * i] * wrap_coef;
    out.second[i] = ring_neg(hi2) - cmp.second[2 * i + 1] + cmp.second[2 * i] * wrap_coef;
  }
  std::vector<RingElement> pub(n);
  for (std::size_t i = 0; i < n; ++i) pub[i] = (c[i] >> bits) - pow2(62 - bits);
  s.count_op("trunc", n);
  return add_public(out, pub);
}

// Fixed-point product: multiply, then drop b's fractional bits.
inline SharedVector mul_fixed(Session& s, const SharedVector& a, const SharedVector& b) {
  auto prod = mul(s, a, b);
  return trunc(s, prod, b.scale);
}

// ---- dot products and matrix products -------------------------------------

// Row-wise inner products of two equally shaped matrices; all cross terms
// of a row are summed locally before a single reshare.
inline SharedVector row_dots(Session& s, const SharedMatrix& x, const SharedMatrix& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw UsageError("row_dots shape mismatch");
  if (x.owner != s.party() || y.owner != s.party()) throw UsageError("shares belong to another party");
  std::vector<RingElement> z(x.rows, 0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      const std::size_t i = x.index(r, c);
      z[r] += cross_term(x.first[i], x.second[i], y.first[i], y.second[i]);
    }
  }
  s.count_op("dot", x.rows);
  return reshare(s, std::move(z), x.scale + y.scale);
}

// Secure dot product; fixed x fixed truncates once at the end.
inline ReplicatedShare pi_dp(Session& s, const SharedVector& a, const SharedVector& b) {
  if (a.size() != b.size()) {
    throw UsageError("dot product length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  SharedMatrix x(a.owner, a.scale, 1, a.size()), y(b.owner, b.scale, 1, b.size());
  x.first = a.first;
  x.second = a.second;
  y.first = b.first;
  y.second = b.second;
  auto d = row_dots(s, x, y);
  if (a.scale > 0 && b.scale > 0) d = trunc(s, d, b.scale);
  return d.at(0);
}

// C = A x B; entry (i, j) is one dot product. Integer x fixed products
// need no truncation.
inline SharedMatrix pi_dmm(Session& s, const SharedMatrix& a, const SharedMatrix& b) {
  if (a.cols != b.rows) {
    throw UsageError("matrix product dims " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                     std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  if (a.owner != s.party() || b.owner != s.party()) throw UsageError("shares belong to another party");
  std::vector<RingElement> z(a.rows * b.cols, 0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t l = 0; l < a.cols; ++l) {
      const RingElement a1 = a.first[a.index(i, l)], a2 = a.second[a.index(i, l)];
      for (std::size_t j = 0; j < b.cols; ++j) {
        z[i * b.cols + j] += cross_term(a1, a2, b.first[b.index(l, j)], b.second[b.index(l, j)]);
      }
    }
  }
  s.count_op("dot", a.rows * b.cols);
  auto v = reshare(s, std::move(z), a.scale + b.scale);
  if (a.scale > 0 && b.scale > 0) v = trunc(s, v, b.scale);
  SharedMatrix out(s.party(), v.scale, a.rows, b.cols);
  out.first = std::move(v.first);
  out.second = std::move(v.second);
  return out;
}

// ---- argmin ---------------------------------------------------------------

// 1-based index of the first minimum of every row, by a linear
// oblivious scan over the columns:
// c = [v_j < min]; min += c (v_j - min); idx += c (j - idx).
inline SharedVector pi_argmin_rows(Session& s, const SharedMatrix& v, unsigned width) {
  if (v.cols == 0) throw UsageError("argmin of an empty vector");
  const PartyId me = s.party();
  const std::size_t rows = v.rows;
  SharedVector best = v.column(0);
  SharedVector idx = add_const(SharedVector(me, kInteger, rows), 1);
  if (v.cols > 1) {
    const auto masks = make_masks(s, rows * (v.cols - 1), width + 1);
    for (std::size_t j = 1; j < v.cols; ++j) {
      const auto cur = v.column(j);
      const auto diff = sub(cur, best);
      const auto c = less_than_zero(s, diff, width, masks.take((j - 1) * rows, rows));
      const auto step = mul(s, concat(c, c), concat(diff, const_minus(j + 1, idx)));
      best = add(best, slice(step, 0, rows));
      best.scale = v.scale;
      idx = add(idx, slice(step, rows, rows));
    }
  }
  s.count_op("argmin", rows);
  return idx;
}

inline ReplicatedShare pi_argmin(Session& s, const SharedVector& v, unsigned width) {
  SharedMatrix row(v.owner, v.scale, 1, v.size());
  row.first = v.first;
  row.second = v.second;
  return pi_argmin_rows(s, row, width).at(0);
}

// ---- division -------------------------------------------------------------

inline constexpr unsigned kDivisorBits = 21;    // denominators in [1, 2^20]
inline constexpr unsigned kReciprocalWork = 28; // Newton-Raphson working precision

// Fractional bits carried by pi_reciprocal's output.
inline Scale reciprocal_scale(const FixedPointParams& p) { return p.frac_bits + kDivisorBits - 1; }

inline unsigned newton_iterations(const FixedPointParams& p) {
  const double extra = std::ceil(std::log2(static_cast<double>(p.frac_bits) / 3.5));
  return 2 + static_cast<unsigned>(std::max(0.0, extra));
}

// 1/y for integer y in [1, 2^20]. y is normalized to v = y * 2^(B-1-e)
// in [2^(B-1), 2^B) using e = #{j : y >= 2^j}, then refined by
// Newton-Raphson from the linear guess 2.9142 - 2v. y = 0 yields a finite
// but meaningless value.
inline SharedVector pi_reciprocal(Session& s, const SharedVector& y) {
  if (y.scale != kInteger) throw UsageError("reciprocal expects an integer-scaled divisor");
  const PartyId me = s.party();
  const std::size_t n = y.size();
  constexpr unsigned B = kDivisorBits;
  constexpr unsigned W = kReciprocalWork;

  SharedVector diffs(me, kInteger);
  for (std::size_t i = 0; i < n; ++i) {
    for (unsigned j = 1; j < B; ++j) diffs.push_back(add_const(SharedVector::single(y.at(i), kInteger), ring_neg(pow2(j))).at(0));
  }
  const auto below = less_than_zero(s, diffs, B);

  // u = 2^(B-1) - sum_j [y >= 2^j] 2^(B-1-j) = 1 + sum_j [y < 2^j] 2^(B-1-j)
  SharedVector u(me, kInteger, n);
  for (std::size_t i = 0; i < n; ++i) {
    RingElement f = 0, g = 0;
    for (unsigned j = 1; j < B; ++j) {
      f += below.first[i * (B - 1) + j - 1] << (B - 1 - j);
      g += below.second[i * (B - 1) + j - 1] << (B - 1 - j);
    }
    u.first[i] = f;
    u.second[i] = g;
  }
  u = add_const(u, 1);

  auto v = mul(s, y, u);
  v = mul_const(v, pow2(W - B));
  v.scale = W;

  const RingElement guess = static_cast<RingElement>(std::llround(std::ldexp(2.9142, W)));
  auto w = add_const(mul_const(v, ring_neg(2)), guess);
  w.scale = W;
  for (unsigned it = 0; it < newton_iterations(s.params()); ++it) {
    auto t = trunc(s, mul(s, v, w), W);
    auto e = const_minus(pow2(W + 1), t);
    e.scale = W;
    w = trunc(s, mul(s, w, e), W);
  }

  auto r = mul(s, w, u);  // 1/y at scale W + B
  r.scale = W + B;
  const Scale target = reciprocal_scale(s.params());
  if (target < W + B) {
    r = trunc(s, r, W + B - target);
  } else {
    r = mul_const(r, pow2(target - W - B));
  }
  r.scale = target;
  s.count_op("div", n);
  return r;
}

// x / y for fixed-point x and integer y, at the reciprocal's scale.
// Needs |x| * 2^(x.scale + reciprocal_scale) / y < 2^62.
inline SharedVector pi_div(Session& s, const SharedVector& x, const SharedVector& y) {
  const auto r = pi_reciprocal(s, y);
  auto q = trunc(s, mul(s, x, r), x.scale);
  q.scale = r.scale;
  return q;
}

}  // namespace mpcfs
