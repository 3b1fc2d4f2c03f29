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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/prf.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/sharing.hpp"

namespace mpcfs {

// Number of fractional bits carried by a shared container; 0 means an
// unscaled integer (counts, flags, indices).
using Scale = unsigned;
inline constexpr Scale kInteger = 0;

// Party-local shares of a vector, stored as two component arrays.
struct SharedVector {
  PartyId owner{};
  Scale scale = kInteger;
  std::vector<RingElement> first;
  std::vector<RingElement> second;

  SharedVector() = default;
  SharedVector(PartyId p, Scale s, std::size_t n = 0) : owner(p), scale(s), first(n), second(n) {}

  std::size_t size() const noexcept { return first.size(); }
  bool empty() const noexcept { return first.empty(); }

  ReplicatedShare at(std::size_t i) const { return {first.at(i), second.at(i), owner}; }
  void set(std::size_t i, const ReplicatedShare& s) {
    first.at(i) = s.first;
    second.at(i) = s.second;
  }
  void push_back(const ReplicatedShare& s) {
    first.push_back(s.first);
    second.push_back(s.second);
  }

  static SharedVector single(const ReplicatedShare& s, Scale scale) {
    SharedVector v(s.owner, scale);
    v.push_back(s);
    return v;
  }
};

// Row-major m x n shares.
struct SharedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  PartyId owner{};
  Scale scale = kInteger;
  std::vector<RingElement> first;
  std::vector<RingElement> second;

  SharedMatrix() = default;
  SharedMatrix(PartyId p, Scale s, std::size_t r, std::size_t c)
      : rows(r), cols(c), owner(p), scale(s), first(r * c), second(r * c) {}

  std::size_t index(std::size_t r, std::size_t c) const noexcept { return r * cols + c; }
  ReplicatedShare at(std::size_t r, std::size_t c) const { return {first.at(index(r, c)), second.at(index(r, c)), owner}; }
  void set(std::size_t r, std::size_t c, const ReplicatedShare& s) {
    first.at(index(r, c)) = s.first;
    second.at(index(r, c)) = s.second;
  }

  SharedVector column(std::size_t c) const {
    SharedVector v(owner, scale, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      v.first[r] = first[index(r, c)];
      v.second[r] = second[index(r, c)];
    }
    return v;
  }

  SharedVector row(std::size_t r) const {
    SharedVector v(owner, scale, cols);
    for (std::size_t c = 0; c < cols; ++c) {
      v.first[c] = first[index(r, c)];
      v.second[c] = second[index(r, c)];
    }
    return v;
  }

  void set_column(std::size_t c, const SharedVector& v) {
    if (v.size() != rows) throw UsageError("column length mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
      first[index(r, c)] = v.first[r];
      second[index(r, c)] = v.second[r];
    }
  }

  static SharedMatrix from_column(const SharedVector& v) {
    SharedMatrix m(v.owner, v.scale, v.size(), 1);
    m.first = v.first;
    m.second = v.second;
    return m;
  }
};

// Dealer-side sharing of a plaintext matrix; returns the three parties'
// views.
inline std::array<SharedMatrix, 3> share_matrix(std::span<const RingElement> values, std::size_t rows, std::size_t cols,
                                                Scale scale, Prg& rng) {
  if (values.size() != rows * cols) throw UsageError("matrix value count does not match shape");
  std::array<SharedMatrix, 3> out{SharedMatrix(PartyId(1), scale, rows, cols), SharedMatrix(PartyId(2), scale, rows, cols),
                                  SharedMatrix(PartyId(3), scale, rows, cols)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto t = share(values[i], rng);
    for (int p = 0; p < 3; ++p) {
      out[p].first[i] = t[p].first;
      out[p].second[i] = t[p].second;
    }
  }
  return out;
}

inline std::array<SharedVector, 3> share_vector(std::span<const RingElement> values, Scale scale, Prg& rng) {
  std::array<SharedVector, 3> out{SharedVector(PartyId(1), scale, values.size()),
                                  SharedVector(PartyId(2), scale, values.size()),
                                  SharedVector(PartyId(3), scale, values.size())};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto t = share(values[i], rng);
    for (int p = 0; p < 3; ++p) out[p].set(i, t[p]);
  }
  return out;
}

// Checked reconstruction from two or three party views.
inline std::vector<RingElement> reconstruct_values(std::span<const std::vector<RingElement>> firsts,
                                                   std::span<const std::vector<RingElement>> seconds,
                                                   std::span<const PartyId> owners) {
  const std::size_t n = firsts.empty() ? 0 : firsts[0].size();
  std::vector<RingElement> out(n);
  std::vector<ReplicatedShare> s(owners.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t q = 0; q < owners.size(); ++q) {
      if (firsts[q].size() != n || seconds[q].size() != n) throw IntegrityError("share views differ in length");
      s[q] = {firsts[q][i], seconds[q][i], owners[q]};
    }
    out[i] = reconstruct(s);
  }
  return out;
}

inline std::vector<RingElement> reconstruct_vector(std::span<const SharedVector> views) {
  std::vector<std::vector<RingElement>> f, s;
  std::vector<PartyId> o;
  for (const auto& v : views) {
    f.push_back(v.first);
    s.push_back(v.second);
    o.push_back(v.owner);
  }
  return reconstruct_values(f, s, o);
}

inline std::vector<RingElement> reconstruct_matrix(std::span<const SharedMatrix> views) {
  std::vector<std::vector<RingElement>> f, s;
  std::vector<PartyId> o;
  for (const auto& v : views) {
    if (v.rows != views[0].rows || v.cols != views[0].cols) throw IntegrityError("share views differ in shape");
    f.push_back(v.first);
    s.push_back(v.second);
    o.push_back(v.owner);
  }
  return reconstruct_values(f, s, o);
}

// ---- local (communication-free) operations ------------------------------

inline void require_compatible(const SharedVector& a, const SharedVector& b) {
  if (a.owner != b.owner) throw UsageError("shares belong to different parties");
  if (a.size() != b.size()) {
    throw UsageError("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

inline SharedVector add(const SharedVector& a, const SharedVector& b) {
  require_compatible(a, b);
  SharedVector z(a.owner, a.scale, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    z.first[i] = a.first[i] + b.first[i];
    z.second[i] = a.second[i] + b.second[i];
  }
  return z;
}

inline SharedVector sub(const SharedVector& a, const SharedVector& b) {
  require_compatible(a, b);
  SharedVector z(a.owner, a.scale, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    z.first[i] = a.first[i] - b.first[i];
    z.second[i] = a.second[i] - b.second[i];
  }
  return z;
}

inline SharedVector mul_const(const SharedVector& a, RingElement c) {
  SharedVector z(a.owner, a.scale, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    z.first[i] = a.first[i] * c;
    z.second[i] = a.second[i] * c;
  }
  return z;
}

// Adds public c[i] into the x_1 component of element i.
inline SharedVector add_public(const SharedVector& a, std::span<const RingElement> c) {
  if (c.size() != a.size()) throw UsageError("public vector length mismatch");
  SharedVector z = a;
  if (a.owner.value() == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) z.first[i] += c[i];
  } else if (a.owner.value() == 3) {
    for (std::size_t i = 0; i < a.size(); ++i) z.second[i] += c[i];
  }
  return z;
}

inline SharedVector add_const(const SharedVector& a, RingElement c) {
  std::vector<RingElement> cs(a.size(), c);
  return add_public(a, cs);
}

// c - a for public c.
inline SharedVector const_minus(RingElement c, const SharedVector& a) {
  return add_const(mul_const(a, ring_neg(1)), c);
}

// Public constants as a (trivial) sharing.
inline SharedVector public_vector(PartyId owner, std::span<const RingElement> c, Scale scale) {
  return add_public(SharedVector(owner, scale, c.size()), c);
}

inline SharedVector concat(const SharedVector& a, const SharedVector& b) {
  if (a.owner != b.owner) throw UsageError("shares belong to different parties");
  SharedVector z = a;
  z.first.insert(z.first.end(), b.first.begin(), b.first.end());
  z.second.insert(z.second.end(), b.second.begin(), b.second.end());
  return z;
}

inline SharedVector slice(const SharedVector& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.size()) throw UsageError("slice out of range");
  SharedVector z(a.owner, a.scale, count);
  std::copy_n(a.first.begin() + static_cast<std::ptrdiff_t>(begin), count, z.first.begin());
  std::copy_n(a.second.begin() + static_cast<std::ptrdiff_t>(begin), count, z.second.begin());
  return z;
}

inline ReplicatedShare sum(const SharedVector& a) {
  ReplicatedShare s{0, 0, a.owner};
  for (std::size_t i = 0; i < a.size(); ++i) {
    s.first += a.first[i];
    s.second += a.second[i];
  }
  return s;
}

}  // namespace mpcfs
