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
#include <vector>

#include "mpcfs/prf.hpp"
#include "mpcfs/runner.hpp"
#include "mpcfs/tensor.hpp"

namespace mpcfs::testing {

// Three in-process parties plus a dealer that shares test inputs.
struct Trio {
  KeyTriple keys = KeyTriple::from_master(0x5eed);
  SessionSetup setup{};
  RunOptions options{};
  Prg dealer{derive_seed(0xdea1e5, 0)};

  explicit Trio(std::uint64_t seed = 1) {
    keys = KeyTriple::from_master(seed);
    dealer = Prg(derive_seed(seed, 99));
  }

  std::array<SharedVector, 3> vec(std::span<const RingElement> v, Scale scale = kInteger) {
    return share_vector(v, scale, dealer);
  }
  std::array<SharedVector, 3> vec(std::initializer_list<RingElement> v, Scale scale = kInteger) {
    std::vector<RingElement> tmp(v);
    return share_vector(tmp, scale, dealer);
  }
  std::array<SharedMatrix, 3> mat(std::span<const RingElement> v, std::size_t rows, std::size_t cols,
                                  Scale scale = kInteger) {
    return share_matrix(v, rows, cols, scale, dealer);
  }

  // fn(Session&, int party_index) -> SharedVector; returns the opened values
  // and the per-party counters.
  template <class Fn>
  auto run(Fn fn) {
    return run_three(keys, setup, [&](Session& s) { return fn(s, s.party().index()); }, options);
  }

  template <class Fn>
  std::vector<RingElement> open_vec(Fn fn) {
    auto out = run(fn);
    std::array<SharedVector, 3> views{out[0].value, out[1].value, out[2].value};
    return reconstruct_vector(views);
  }
};

inline std::vector<RingElement> encode_all(std::span<const double> v, const FixedPointParams& p = {}) {
  std::vector<RingElement> out;
  for (double x : v) out.push_back(encode(x, p));
  return out;
}

inline std::vector<RingElement> signed_values(std::initializer_list<std::int64_t> v) {
  std::vector<RingElement> out;
  for (auto x : v) out.push_back(from_signed(x));
  return out;
}

inline std::uint64_t total_payload(const auto& outcomes) {
  std::uint64_t t = 0;
  for (const auto& o : outcomes) t += o.counters.payload_bytes;
  return t;
}

}  // namespace mpcfs::testing
