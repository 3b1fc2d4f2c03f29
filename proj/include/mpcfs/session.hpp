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

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/transport.hpp"

namespace mpcfs {

// One party's view of a protocol execution: its identity, links to both
// neighbours, correlated randomness, fixed-point parameters and cost
// counters. Not thread-safe; one protocol thread per session.
class Session {
 public:
  Session(PartyId self, std::unique_ptr<Channel> to_next, std::unique_ptr<Channel> to_prev, ZeroSharingKeys keys,
          FixedPointParams params, std::uint64_t session_id)
      : self_(self),
        params_(params),
        session_id_(session_id),
        keys_(std::move(keys)),
        next_(std::move(to_next), self.next(), session_id, counters_),
        prev_(std::move(to_prev), self.prev(), session_id, counters_) {
    params_.validate();
    if (keys_.party() != self) throw UsageError("zero-sharing keys belong to another party");
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  PartyId party() const noexcept { return self_; }
  const FixedPointParams& params() const noexcept { return params_; }
  std::uint64_t session_id() const noexcept { return session_id_; }
  ZeroSharingKeys& keys() noexcept { return keys_; }
  const CostCounters& counters() const noexcept { return counters_; }

  void count_op(std::string_view op, std::uint64_t n = 1) { counters_.op_histogram[std::string(op)] += n; }

  struct Inbox {
    std::vector<RingElement> from_next;
    std::vector<RingElement> from_prev;
  };

  // One synchronized communication phase. Empty payloads are not sent;
  // the expected counts must mirror what the neighbours send.
  Inbox exchange(std::span<const RingElement> to_next, std::span<const RingElement> to_prev, std::size_t from_next,
                 std::size_t from_prev, bool with_empty = false) {
    if (!with_empty && to_next.empty() && to_prev.empty() && from_next == 0 && from_prev == 0) return {};
    if (with_empty || !to_next.empty()) next_.send_elems(to_next);
    if (with_empty || !to_prev.empty()) prev_.send_elems(to_prev);
    Inbox in;
    if (with_empty || from_next > 0) in.from_next = next_.recv_elems(from_next);
    if (with_empty || from_prev > 0) in.from_prev = prev_.recv_elems(from_prev);
    ++counters_.rounds;
    return in;
  }

  // Empty frame to and from both neighbours.
  void barrier_round() { exchange({}, {}, 0, 0, true); }

  void close() {
    next_.close();
    prev_.close();
  }

 private:
  PartyId self_;
  FixedPointParams params_;
  std::uint64_t session_id_;
  ZeroSharingKeys keys_;
  CostCounters counters_;
  Link next_;
  Link prev_;
};

}  // namespace mpcfs
