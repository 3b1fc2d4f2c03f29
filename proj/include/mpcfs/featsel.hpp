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
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/multiply.hpp"
#include "mpcfs/primitives.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/session.hpp"
#include "mpcfs/tensor.hpp"

namespace mpcfs {

struct SelectionResult {
  SharedVector indices;    // k 1-based feature indices, selection order
  SharedMatrix selector;   // p x k one-hot columns
  SharedMatrix reduced;    // m x k
  SharedVector remaining;  // scores after the selected ones were overwritten
  RingElement bound = 0;   // public t in score scale
};

// Oblivious top-k (lowest score) column selection. Each round takes the
// argmin of the scores, one-hot encodes it into a column of the
// selector, and overwrites the selected score with the bound t.
inline SelectionResult pi_filter_fs(Session& s, const SharedMatrix& data, const SharedVector& scores, std::size_t k,
                                    RingElement bound) {
  const std::size_t p = data.cols;
  if (scores.size() != p) throw UsageError("score vector length differs from feature count");
  if (k < 1 || k > p) {
    throw UsageError("k must lie in [1, " + std::to_string(p) + "], got " + std::to_string(k));
  }
  const PartyId me = s.party();
  const unsigned score_width = bit_width_for(bound) + 1;
  const unsigned index_width = std::max(1u, bit_width_for(p));

  std::vector<RingElement> positions(p);
  std::iota(positions.begin(), positions.end(), RingElement{1});

  SelectionResult out;
  out.bound = bound;
  out.indices = SharedVector(me, kInteger, k);
  out.selector = SharedMatrix(me, kInteger, p, k);
  SharedVector g = scores;

  for (std::size_t i = 0; i < k; ++i) {
    const auto idx = pi_argmin(s, g, score_width);
    out.indices.set(i, idx);
    SharedVector spread(me, kInteger);
    for (std::size_t j = 0; j < p; ++j) spread.push_back(idx);
    const auto flags = pi_eq(s, spread, positions, index_width);
    out.selector.set_column(i, flags);
    auto overwrite = mul(s, flags, const_minus(bound, g));
    g = add(g, overwrite);
    g.scale = scores.scale;
  }
  out.remaining = std::move(g);
  out.reduced = pi_dmm(s, data, out.selector);
  s.count_op("filter_fs");
  return out;
}

struct GiniCounters {
  SharedVector a;  // |S_<=theta| per feature
  SharedVector b;  // |S_>theta| per feature
  SharedMatrix A;  // p x n class counts in S_<=theta
  SharedMatrix B;  // p x n class counts in S_>theta
};

struct MsGiniResult {
  SharedVector scores;  // unnormalized, in [0, m], fixed-point
  GiniCounters counters;
};

// Comparison width for the mean split of an m-row column.
inline unsigned mean_split_width(const FixedPointParams& p, std::size_t m) {
  return p.encoded_bits() + bit_width_for(m) + 1;
}

// Mean-split Gini score of every column of `data`, all features batched
// into shared rounds. labels is the m x (n-1) one-hot class matrix with
// the last class implicit.
//
// f_i > theta is evaluated as m*f_i > sum(f), which is the same predicate
// without rounding the mean. The score of a feature is
//   (a - A.A / a) + (b - B.B / b)
// which is m times the normalized Gini of the split.
inline MsGiniResult pi_ms_gini_all(Session& s, const SharedMatrix& data, const SharedMatrix& labels) {
  const std::size_t m = data.rows, p = data.cols, nc = labels.cols, n = nc + 1;
  if (m < 2) throw UsageError("mean-split Gini needs at least two instances");
  if (labels.rows != m) throw UsageError("label matrix rows differ from data rows");
  if (labels.scale != kInteger) throw UsageError("label matrix must be integer-scaled");
  const PartyId me = s.party();
  const Scale f = s.params().frac_bits;
  const unsigned width = mean_split_width(s.params(), m);
  if (width > 63) throw UsageError("too many rows for the configured magnitude bound");

  // [sum_j < m * f_ij] for all rows and features.
  SharedVector diff(me, kInteger, m * p);
  for (std::size_t j = 0; j < p; ++j) {
    RingElement s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      s1 += data.first[data.index(i, j)];
      s2 += data.second[data.index(i, j)];
    }
    for (std::size_t i = 0; i < m; ++i) {
      diff.first[i * p + j] = s1 - data.first[data.index(i, j)] * m;
      diff.second[i * p + j] = s2 - data.second[data.index(i, j)] * m;
    }
  }
  const auto above = less_than_zero(s, diff, width);

  GiniCounters k;
  k.a = SharedVector(me, kInteger, p);
  k.b = SharedVector(me, kInteger, p);
  k.A = SharedMatrix(me, kInteger, p, n);
  k.B = SharedMatrix(me, kInteger, p, n);

  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      k.b.first[j] += above.first[i * p + j];
      k.b.second[j] += above.second[i * p + j];
    }
  }

  // flag_m = flag_s * L[i][c], one batch for every (i, j, c).
  if (nc > 0) {
    SharedVector x(me, kInteger, m * p * nc), y(me, kInteger, m * p * nc);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t c = 0; c < nc; ++c) {
          const std::size_t t = (i * p + j) * nc + c;
          x.first[t] = above.first[i * p + j];
          x.second[t] = above.second[i * p + j];
          y.first[t] = labels.first[labels.index(i, c)];
          y.second[t] = labels.second[labels.index(i, c)];
        }
      }
    }
    const auto both = mul(s, x, y);
    for (std::size_t c = 0; c < nc; ++c) {
      RingElement l1 = 0, l2 = 0;
      for (std::size_t i = 0; i < m; ++i) {
        l1 += labels.first[labels.index(i, c)];
        l2 += labels.second[labels.index(i, c)];
      }
      for (std::size_t j = 0; j < p; ++j) {
        RingElement b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < m; ++i) {
          b1 += both.first[(i * p + j) * nc + c];
          b2 += both.second[(i * p + j) * nc + c];
        }
        k.B.first[k.B.index(j, c)] = b1;
        k.B.second[k.B.index(j, c)] = b2;
        k.A.first[k.A.index(j, c)] = l1 - b1;
        k.A.second[k.A.index(j, c)] = l2 - b2;
      }
    }
  }

  // Complement counts, local.
  k.a = const_minus(m, k.b);
  for (std::size_t j = 0; j < p; ++j) {
    RingElement a1 = k.a.first[j], a2 = k.a.second[j], b1 = k.b.first[j], b2 = k.b.second[j];
    for (std::size_t c = 0; c < nc; ++c) {
      a1 -= k.A.first[k.A.index(j, c)];
      a2 -= k.A.second[k.A.index(j, c)];
      b1 -= k.B.first[k.B.index(j, c)];
      b2 -= k.B.second[k.B.index(j, c)];
    }
    k.A.first[k.A.index(j, nc)] = a1;
    k.A.second[k.A.index(j, nc)] = a2;
    k.B.first[k.B.index(j, nc)] = b1;
    k.B.second[k.B.index(j, nc)] = b2;
  }

  // Gini impurity for both halves of the split at once: rows 0..p-1 are the
  // S_<=theta side, rows p..2p-1 the S_>theta side.
  SharedMatrix counts(me, kInteger, 2 * p, n);
  std::copy(k.A.first.begin(), k.A.first.end(), counts.first.begin());
  std::copy(k.A.second.begin(), k.A.second.end(), counts.second.begin());
  std::copy(k.B.first.begin(), k.B.first.end(), counts.first.begin() + static_cast<std::ptrdiff_t>(p * n));
  std::copy(k.B.second.begin(), k.B.second.end(), counts.second.begin() + static_cast<std::ptrdiff_t>(p * n));
  const auto sizes = concat(k.a, k.b);

  const auto squares = row_dots(s, counts, counts);  // exactly 0 when the side is empty
  const auto recip = pi_reciprocal(s, sizes);
  const auto ratio = trunc(s, mul(s, squares, recip), recip.scale - f);
  const auto impurity = sub(mul_const(sizes, pow2(f)), ratio);

  MsGiniResult out;
  out.scores = add(slice(impurity, 0, p), slice(impurity, p, p));
  out.scores.scale = f;
  out.counters = std::move(k);
  s.count_op("ms_gini", p);
  return out;
}

// Score of a single feature column.
inline ReplicatedShare pi_ms_gini(Session& s, const SharedVector& feature, const SharedMatrix& labels) {
  return pi_ms_gini_all(s, SharedMatrix::from_column(feature), labels).scores.at(0);
}

// Full pipeline: score every feature, then select with t = m.
inline SelectionResult pi_gini_fs(Session& s, const SharedMatrix& data, const SharedMatrix& labels, std::size_t k,
                                  SharedVector* scores_out = nullptr) {
  if (k < 1 || k > data.cols) {
    throw UsageError("k must lie in [1, " + std::to_string(data.cols) + "], got " + std::to_string(k));
  }
  auto scores = pi_ms_gini_all(s, data, labels).scores;
  const RingElement bound = static_cast<RingElement>(data.rows) << s.params().frac_bits;
  auto result = pi_filter_fs(s, data, scores, k, bound);
  if (scores_out != nullptr) *scores_out = std::move(scores);
  return result;
}

// ---- plaintext reference --------------------------------------------------

struct PlainSplit {
  std::int64_t a = 0, b = 0;
  std::vector<std::int64_t> A, B;  // per class, 0-based
  double score = 0.0;              // normalized by m
};

// Mean-split Gini on fixed-point encoded values and labels in 1..n, with
// the same convention as the secure protocol: ties with the mean fall in
// S_<=theta.
inline PlainSplit plaintext_ms_gini_encoded(std::span<const RingElement> encoded, std::span<const int> labels, int n) {
  const std::size_t m = encoded.size();
  if (labels.size() != m || m == 0) throw UsageError("feature and label lengths differ");
  __int128 total = 0;
  for (auto e : encoded) total += to_signed(e);
  PlainSplit out;
  out.A.assign(static_cast<std::size_t>(n), 0);
  out.B.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < m; ++i) {
    const bool above = static_cast<__int128>(to_signed(encoded[i])) * static_cast<__int128>(m) > total;
    const auto c = static_cast<std::size_t>(labels[i] - 1);
    if (above) {
      ++out.b;
      ++out.B.at(c);
    } else {
      ++out.a;
      ++out.A.at(c);
    }
  }
  auto side = [](std::int64_t size, const std::vector<std::int64_t>& counts) -> long double {
    if (size == 0) return 0.0L;
    long double sq = 0;
    for (auto c : counts) sq += static_cast<long double>(c) * static_cast<long double>(c);
    return static_cast<long double>(size) - sq / static_cast<long double>(size);
  };
  out.score = static_cast<double>((side(out.a, out.A) + side(out.b, out.B)) / static_cast<long double>(m));
  return out;
}

inline double plaintext_ms_gini(std::span<const double> values, std::span<const int> labels, int n,
                                const FixedPointParams& params = {}) {
  std::vector<RingElement> enc(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) enc[i] = encode(values[i], params);
  return plaintext_ms_gini_encoded(enc, labels, n).score;
}

// Lowest-k indices (1-based) in selection order; earlier index wins ties.
inline std::vector<std::size_t> plaintext_filter(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k && i < order.size(); ++i) out.push_back(order[i] + 1);
  return out;
}

}  // namespace mpcfs
