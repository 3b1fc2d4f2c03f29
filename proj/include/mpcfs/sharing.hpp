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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/prf.hpp"
#include "mpcfs/ring.hpp"

namespace mpcfs {

// Party identity in {1, 2, 3}; successor is cyclic 1 -> 2 -> 3 -> 1.
class PartyId {
 public:
  constexpr PartyId() = default;
  constexpr explicit PartyId(int id) : id_(id) {
    if (id < 1 || id > 3) throw UsageError("party id must be 1, 2 or 3, got " + std::to_string(id));
  }
  constexpr int value() const noexcept { return id_; }
  constexpr int index() const noexcept { return id_ - 1; }
  constexpr PartyId next() const { return PartyId(id_ % 3 + 1); }
  constexpr PartyId prev() const { return PartyId((id_ + 1) % 3 + 1); }
  friend constexpr bool operator==(PartyId, PartyId) = default;

 private:
  int id_ = 1;
};

inline constexpr std::array<PartyId, 3> kAllParties{PartyId(1), PartyId(2), PartyId(3)};

// Party i holds (x_i, x_{i+1}).
struct ReplicatedShare {
  RingElement first = 0;
  RingElement second = 0;
  PartyId owner{};

  friend bool operator==(const ReplicatedShare&, const ReplicatedShare&) = default;
};

using ShareTriple = std::array<ReplicatedShare, 3>;

// Split x with explicit randomness: x_1 = r1, x_2 = r2, x_3 = x - r1 - r2.
inline ShareTriple share_with(RingElement x, RingElement r1, RingElement r2) {
  const std::array<RingElement, 3> parts{r1, r2, x - r1 - r2};
  ShareTriple out;
  for (PartyId p : kAllParties) {
    out[p.index()] = {parts[p.index()], parts[p.next().index()], p};
  }
  return out;
}

inline ShareTriple share(RingElement x, Prg& rng) {
  const RingElement r1 = rng.next();
  const RingElement r2 = rng.next();
  return share_with(x, r1, r2);
}

// Recombines shares from at least two distinct parties, checking every
// replicated overlap.
inline RingElement reconstruct(std::span<const ReplicatedShare> shares) {
  std::array<bool, 3> seen{};
  std::array<bool, 3> known{};
  std::array<RingElement, 3> parts{};
  auto put = [&](int slot, RingElement v) {
    if (known[slot] && parts[slot] != v) {
      throw IntegrityError("replicated share x_" + std::to_string(slot + 1) + " disagrees between parties");
    }
    parts[slot] = v;
    known[slot] = true;
  };
  for (const auto& s : shares) {
    if (seen[s.owner.index()]) throw UsageError("duplicate share from party " + std::to_string(s.owner.value()));
    seen[s.owner.index()] = true;
    put(s.owner.index(), s.first);
    put(s.owner.next().index(), s.second);
  }
  if (!(known[0] && known[1] && known[2])) throw UsageError("reconstruction needs shares from two parties");
  return parts[0] + parts[1] + parts[2];
}

inline RingElement reconstruct(const ReplicatedShare& a, const ReplicatedShare& b) {
  const std::array<ReplicatedShare, 2> s{a, b};
  return reconstruct(s);
}

inline void require_same_owner(const ReplicatedShare& a, const ReplicatedShare& b) {
  if (a.owner != b.owner) throw UsageError("shares belong to different parties");
}

inline ReplicatedShare add_shares(const ReplicatedShare& a, const ReplicatedShare& b) {
  require_same_owner(a, b);
  return {a.first + b.first, a.second + b.second, a.owner};
}

inline ReplicatedShare sub_shares(const ReplicatedShare& a, const ReplicatedShare& b) {
  require_same_owner(a, b);
  return {a.first - b.first, a.second - b.second, a.owner};
}

inline ReplicatedShare mul_const(const ReplicatedShare& a, RingElement c) {
  return {a.first * c, a.second * c, a.owner};
}

// The constant lands in x_1, held as `first` by P1 and `second` by P3.
inline ReplicatedShare add_const(const ReplicatedShare& a, RingElement c) {
  ReplicatedShare z = a;
  if (a.owner.value() == 1) z.first += c;
  if (a.owner.value() == 3) z.second += c;
  return z;
}

// Three pairwise seeds: k_j is known to the two parties holding x_j, so
// party i holds k_i and k_{i+1}.
struct KeyTriple {
  std::array<Seed, 3> k{};

  static KeyTriple from_master(std::uint64_t master) {
    return {{derive_seed(master, 1), derive_seed(master, 2), derive_seed(master, 3)}};
  }
};

// A party's correlated-randomness state. Every draw consumes fresh PRF
// counters.
class ZeroSharingKeys {
 public:
  ZeroSharingKeys(PartyId party, const Seed& own, const Seed& next, std::uint64_t session)
      : party_(party), own_(own), next_(next), session_(session) {}

  ZeroSharingKeys(PartyId party, const KeyTriple& keys, std::uint64_t session)
      : ZeroSharingKeys(party, keys.k[party.index()], keys.k[party.next().index()], session) {}

  PartyId party() const noexcept { return party_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // alpha_i = F(k_i, c) - F(k_{i+1}, c); the three alphas sum to zero.
  RingElement zero_share(std::uint64_t counter) {
    if (counter < counter_) {
      throw RandomnessError("zero-sharing counter " + std::to_string(counter) + " already consumed");
    }
    counter_ = counter + 1;
    return own_.eval(session_, counter) - next_.eval(session_, counter);
  }

  void zero_shares(std::span<RingElement> out) {
    std::vector<RingElement> tmp(out.size());
    own_.eval(session_, counter_, out);
    next_.eval(session_, counter_, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tmp[i];
    counter_ += out.size();
  }

  // Replicated sharing of a uniformly random ring element, no interaction.
  void random_shares(std::span<RingElement> first, std::span<RingElement> second) {
    own_.eval(session_, counter_, first);
    next_.eval(session_, counter_, second);
    counter_ += first.size();
  }

 private:
  PartyId party_;
  Prf own_;
  Prf next_;
  std::uint64_t session_;
  std::uint64_t counter_ = 0;
};

}  // namespace mpcfs
