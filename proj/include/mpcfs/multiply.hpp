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

#include <span>
#include <utility>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/session.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/tensor.hpp"

namespace mpcfs {

// Turns local additive shares z_i (z_1 + z_2 + z_3 = value) back into a
// replicated sharing: mask with a zero sharing, send z_i to the
// predecessor, receive z_{i+1} from the successor. One element per value
// per party, one round.
inline SharedVector reshare(Session& s, std::vector<RingElement> z, Scale scale) {
  std::vector<RingElement> alpha(z.size());
  s.keys().zero_shares(alpha);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += alpha[i];
  auto in = s.exchange({}, z, z.size(), 0);
  SharedVector out(s.party(), scale);
  out.first = std::move(z);
  out.second = std::move(in.from_next);
  return out;
}

// Local cross term x_i*y_i + x_i*y_{i+1} + x_{i+1}*y_i.
inline RingElement cross_term(RingElement x1, RingElement x2, RingElement y1, RingElement y2) noexcept {
  return x1 * y1 + x1 * y2 + x2 * y1;
}

// Elementwise product; scales add (no truncation).
inline SharedVector mul(Session& s, const SharedVector& a, const SharedVector& b) {
  require_compatible(a, b);
  if (a.owner != s.party()) throw UsageError("shares belong to another party");
  std::vector<RingElement> z(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) z[i] = cross_term(a.first[i], a.second[i], b.first[i], b.second[i]);
  s.count_op("mul", a.size());
  return reshare(s, std::move(z), a.scale + b.scale);
}

inline ReplicatedShare mul(Session& s, const ReplicatedShare& a, const ReplicatedShare& b) {
  return mul(s, SharedVector::single(a, kInteger), SharedVector::single(b, kInteger)).at(0);
}

// Reveal without a consistency check: each party forwards `second` to its
// predecessor. Used for masked values inside protocols.
inline std::vector<RingElement> open_unchecked(Session& s, const SharedVector& a) {
  auto in = s.exchange({}, a.second, a.size(), 0);
  std::vector<RingElement> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.first[i] + a.second[i] + in.from_next[i];
  s.count_op("open", a.size());
  return out;
}

// Reveal to all parties. The missing component x_{i+2} arrives from both
// neighbours and must agree.
inline std::vector<RingElement> open(Session& s, const SharedVector& a) {
  auto in = s.exchange(a.first, a.second, a.size(), a.size());
  std::vector<RingElement> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (in.from_next[i] != in.from_prev[i]) {
      throw IntegrityError("opened share " + std::to_string(i) + " inconsistent between neighbours");
    }
    out[i] = a.first[i] + a.second[i] + in.from_next[i];
  }
  s.count_op("open", a.size());
  return out;
}

inline RingElement open(Session& s, const ReplicatedShare& a) {
  return open(s, SharedVector::single(a, kInteger)).at(0);
}

}  // namespace mpcfs
