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
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/sharing.hpp"

namespace mpcfs {

inline constexpr std::uint32_t kProtocolVersion = 1;

// Frame layout: u32 body length | u64 session | u64 sequence | payload.
inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::size_t kFrameMetaBytes = 16;
inline constexpr std::size_t kFrameOverhead = kFrameHeaderBytes + kFrameMetaBytes;

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::uint64_t h, std::span<const std::byte> bytes) {
  for (auto b : bytes) {
    h ^= std::to_integer<std::uint8_t>(b);
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

struct CostCounters {
  std::uint64_t rounds = 0;
  std::uint64_t bytes_sent = 0;    // framed bytes on the wire
  std::uint64_t payload_bytes = 0; // ring elements only
  std::uint64_t frames_sent = 0;
  std::uint64_t transcript_digest = kFnvOffset;  // every sent frame, in order
  std::uint64_t shape_digest = kFnvOffset;       // (round, peer, size) of every sent frame
  std::map<std::string, std::uint64_t> op_histogram;
};

// Ordered, reliable byte-frame channel to one peer. Frames include the
// length prefix.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(std::vector<std::byte> frame) = 0;
  virtual std::vector<std::byte> recv() = 0;
  virtual void close() = 0;
};

class LoopbackQueue {
 public:
  void push(std::vector<std::byte> frame) {
    {
      std::lock_guard lock(mu_);
      if (closed_) throw TransportError("send on closed loopback channel");
      frames_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  std::vector<std::byte> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; })) {
      throw TransportError("loopback receive timed out");
    }
    if (frames_.empty()) throw TransportError("loopback channel closed by peer");
    auto f = std::move(frames_.front());
    frames_.pop_front();
    return f;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::byte>> frames_;
  bool closed_ = false;
};

class LoopbackChannel final : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackQueue> out, std::shared_ptr<LoopbackQueue> in,
                  std::chrono::milliseconds timeout)
      : out_(std::move(out)), in_(std::move(in)), timeout_(timeout) {}
  ~LoopbackChannel() override { close(); }

  void send(std::vector<std::byte> frame) override { out_->push(std::move(frame)); }
  std::vector<std::byte> recv() override { return in_->pop(timeout_); }
  void close() override { out_->close(); }

 private:
  std::shared_ptr<LoopbackQueue> out_;
  std::shared_ptr<LoopbackQueue> in_;
  std::chrono::milliseconds timeout_;
};

// In-process full mesh: one queue per directed pair.
class LoopbackMesh {
 public:
  explicit LoopbackMesh(std::chrono::milliseconds timeout = std::chrono::minutes(10)) : timeout_(timeout) {
    for (auto& row : queues_) {
      for (auto& q : row) q = std::make_shared<LoopbackQueue>();
    }
  }

  static constexpr std::size_t directed_channel_count() { return 6; }

  std::unique_ptr<Channel> endpoint(PartyId self, PartyId peer) const {
    if (self == peer) throw UsageError("no self channel");
    return std::make_unique<LoopbackChannel>(queues_[self.index()][peer.index()],
                                             queues_[peer.index()][self.index()], timeout_);
  }

 private:
  std::array<std::array<std::shared_ptr<LoopbackQueue>, 3>, 3> queues_;
  std::chrono::milliseconds timeout_;
};

// Session handshake: both sides must agree on version, session id and
// the digest of the public job configuration.
struct Hello {
  std::uint32_t version = kProtocolVersion;
  std::uint64_t session = 0;
  std::uint8_t party = 0;
  std::uint64_t config_digest = 0;
};

inline void send_hello(Channel& ch, PartyId self, Hello mine) {
  mine.party = static_cast<std::uint8_t>(self.value());
  std::vector<std::byte> f;
  put_le(f, 21, 4);
  put_le(f, mine.version, 4);
  put_le(f, mine.session, 8);
  put_le(f, mine.party, 1);
  put_le(f, mine.config_digest, 8);
  ch.send(std::move(f));
}

inline void expect_hello(Channel& ch, PartyId peer, const Hello& mine) {
  const auto in = ch.recv();
  if (in.size() != 25 || get_le(in, 0, 4) != 21) throw HandshakeError("malformed handshake frame");
  const auto version = static_cast<std::uint32_t>(get_le(in, 4, 4));
  const auto session = get_le(in, 8, 8);
  const auto party = static_cast<int>(get_le(in, 16, 1));
  const auto digest = get_le(in, 17, 8);
  const std::string who = "handshake with party " + std::to_string(peer.value()) + ": ";
  if (version != mine.version) {
    throw HandshakeError(who + "protocol version " + std::to_string(version) + " != " +
                         std::to_string(mine.version));
  }
  if (party != peer.value()) throw HandshakeError(who + "peer claims to be party " + std::to_string(party));
  if (session != mine.session) throw HandshakeError(who + "session id mismatch");
  if (digest != mine.config_digest) throw HandshakeError(who + "public job configuration differs");
}

inline void handshake(Channel& ch, PartyId self, PartyId peer, Hello mine) {
  send_hello(ch, self, mine);
  expect_hello(ch, peer, mine);
}

// Framed element stream to one peer with sequence checking and cost
// accounting.
class Link {
 public:
  Link(std::unique_ptr<Channel> channel, PartyId peer, std::uint64_t session, CostCounters& counters)
      : channel_(std::move(channel)), peer_(peer), session_(session), counters_(&counters) {}

  PartyId peer() const noexcept { return peer_; }

  void send_elems(std::span<const RingElement> elems) {
    std::vector<std::byte> f;
    f.reserve(kFrameOverhead + 8 * elems.size());
    put_le(f, kFrameMetaBytes + 8 * elems.size(), 4);
    put_le(f, session_);
    put_le(f, send_seq_++);
    for (auto e : elems) put_le(f, e);
    counters_->bytes_sent += f.size();
    counters_->payload_bytes += 8 * elems.size();
    counters_->frames_sent += 1;
    counters_->transcript_digest = fnv1a(counters_->transcript_digest, f);
    std::uint64_t h = fnv1a_u64(counters_->shape_digest, counters_->rounds);
    h = fnv1a_u64(h, static_cast<std::uint64_t>(peer_.value()));
    counters_->shape_digest = fnv1a_u64(h, f.size());
    channel_->send(std::move(f));
  }

  std::vector<RingElement> recv_elems(std::size_t count) {
    const auto f = channel_->recv();
    const std::string who = "from party " + std::to_string(peer_.value()) + ": ";
    if (f.size() < kFrameOverhead || get_le(f, 0, 4) != f.size() - kFrameHeaderBytes) {
      throw TransportError(who + "malformed frame");
    }
    if (get_le(f, 4) != session_) throw TransportError(who + "frame for foreign session");
    const auto seq = get_le(f, 12);
    if (seq != recv_seq_) {
      throw TransportError(who + "sequence gap: expected " + std::to_string(recv_seq_) + ", got " +
                           std::to_string(seq));
    }
    ++recv_seq_;
    const std::size_t n = (f.size() - kFrameOverhead) / 8;
    if ((f.size() - kFrameOverhead) % 8 != 0 || n != count) {
      throw TransportError(who + "expected " + std::to_string(count) + " elements, got " + std::to_string(n));
    }
    std::vector<RingElement> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = get_le(f, kFrameOverhead + 8 * i);
    return out;
  }

  void close() { channel_->close(); }

 private:
  std::unique_ptr<Channel> channel_;
  PartyId peer_;
  std::uint64_t session_;
  CostCounters* counters_;
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
};

}  // namespace mpcfs
