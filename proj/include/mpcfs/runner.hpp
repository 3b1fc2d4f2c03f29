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
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>

#include "mpcfs/errors.hpp"
#include "mpcfs/session.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/tcp.hpp"
#include "mpcfs/transport.hpp"

namespace mpcfs {

enum class Backend { kLoopback, kTcp };

inline Backend parse_backend(const std::string& name) {
  if (name == "loopback") return Backend::kLoopback;
  if (name == "tcp") return Backend::kTcp;
  throw UsageError("unknown backend '" + name + "' (expected loopback or tcp)");
}

struct SessionSetup {
  FixedPointParams params{};
  std::uint64_t session = 1;
  std::uint64_t config_digest = 0;
};

// Handshakes with both neighbours and builds the party's session.
inline std::unique_ptr<Session> open_session(PartyId self, std::map<int, std::unique_ptr<Channel>> channels,
                                             ZeroSharingKeys keys, const SessionSetup& setup) {
  auto& next = channels.at(self.next().value());
  auto& prev = channels.at(self.prev().value());
  Hello hello{kProtocolVersion, setup.session, 0, setup.config_digest};
  send_hello(*next, self, hello);
  send_hello(*prev, self, hello);
  expect_hello(*next, self.next(), hello);
  expect_hello(*prev, self.prev(), hello);
  return std::make_unique<Session>(self, std::move(next), std::move(prev), std::move(keys), setup.params,
                                   setup.session);
}

template <class R>
struct PartyOutcome {
  R value;
  CostCounters counters;
  double wall_ms = 0.0;
};

struct RunOptions {
  Backend backend = Backend::kLoopback;
  std::chrono::milliseconds timeout = std::chrono::minutes(10);
  // Per-party digest override for run_three, to exercise handshake failures.
  std::optional<std::array<std::uint64_t, 3>> digests;
};

// The two pairwise seeds a party holds: k_i and k_(i+1).
struct PartySecrets {
  Seed own{};
  Seed next{};
};

inline std::array<PartySecrets, 3> split_keys(const KeyTriple& keys) {
  std::array<PartySecrets, 3> out;
  for (PartyId p : kAllParties) out[p.index()] = {keys.k[p.index()], keys.k[p.next().index()]};
  return out;
}

// Runs fn(Session&) for all three parties in threads of this process,
// each with its own setup and seeds. The earliest failure is rethrown
// after every party has stopped.
template <class Fn>
auto run_parties(const std::array<SessionSetup, 3>& setups, const std::array<PartySecrets, 3>& secrets, Fn fn,
                 RunOptions opts = {}) -> std::array<PartyOutcome<std::invoke_result_t<Fn&, Session&>>, 3> {
  using R = std::invoke_result_t<Fn&, Session&>;
  std::array<std::optional<PartyOutcome<R>>, 3> results;
  std::array<std::exception_ptr, 3> errors;
  std::array<int, 3> error_order{};
  std::atomic<int> failures{0};

  LoopbackMesh mesh(opts.timeout);
  std::array<std::optional<TcpListener>, 3> listeners;
  std::array<PartyEndpoint, 3> endpoints{PartyEndpoint{PartyId(1), ""}, PartyEndpoint{PartyId(2), ""},
                                         PartyEndpoint{PartyId(3), ""}};
  if (opts.backend == Backend::kTcp) {
    for (PartyId p : kAllParties) {
      listeners[p.index()].emplace("127.0.0.1:0");
      endpoints[p.index()].address = listeners[p.index()]->address();
    }
  }

  auto body = [&](PartyId me) {
    try {
      const auto start = std::chrono::steady_clock::now();
      std::map<int, std::unique_ptr<Channel>> ch;
      if (opts.backend == Backend::kLoopback) {
        ch[me.next().value()] = mesh.endpoint(me, me.next());
        ch[me.prev().value()] = mesh.endpoint(me, me.prev());
      } else {
        ch = connect_tcp_mesh(me, endpoints, &*listeners[me.index()]);
      }
      const auto& setup = setups[me.index()];
      const auto& sec = secrets[me.index()];
      auto session = open_session(me, std::move(ch), ZeroSharingKeys(me, sec.own, sec.next, setup.session), setup);
      R value = fn(*session);
      session->close();
      const auto stop = std::chrono::steady_clock::now();
      results[me.index()].emplace(PartyOutcome<R>{
          std::move(value), session->counters(),
          std::chrono::duration<double, std::milli>(stop - start).count()});
    } catch (...) {
      errors[me.index()] = std::current_exception();
      error_order[me.index()] = ++failures;
    }
  };

  std::array<std::thread, 3> threads;
  for (PartyId p : kAllParties) threads[p.index()] = std::thread(body, p);
  for (auto& t : threads) t.join();
  // Later failures are usually peers reacting to a closed channel.
  for (int k = 1; k <= failures; ++k) {
    for (int i = 0; i < 3; ++i) {
      if (error_order[i] == k) std::rethrow_exception(errors[i]);
    }
  }
  return {std::move(*results[0]), std::move(*results[1]), std::move(*results[2])};
}

// All parties share one setup and derive their seeds from one triple.
template <class Fn>
auto run_three(const KeyTriple& keys, const SessionSetup& setup, Fn fn, RunOptions opts = {}) {
  std::array<SessionSetup, 3> setups{setup, setup, setup};
  if (opts.digests) {
    for (int i = 0; i < 3; ++i) setups[i].config_digest = (*opts.digests)[i];
  }
  return run_parties(setups, split_keys(keys), std::move(fn), opts);
}

}  // namespace mpcfs
