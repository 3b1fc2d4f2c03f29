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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpcfs/errors.hpp"
#include "mpcfs/prf.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/runner.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/tcp.hpp"
#include "mpcfs/transport.hpp"

namespace mpcfs {

enum class Partition { kHorizontal, kVertical };

inline const char* partition_name(Partition p) { return p == Partition::kHorizontal ? "horizontal" : "vertical"; }

// One server's job description. Fields marked public must agree across
// the three servers; the handshake compares their digest.
struct JobConfig {
  PartyId party{1};
  std::array<PartyEndpoint, 3> peers{PartyEndpoint{PartyId(1), "127.0.0.1:7701"},
                                     PartyEndpoint{PartyId(2), "127.0.0.1:7702"},
                                     PartyEndpoint{PartyId(3), "127.0.0.1:7703"}};  // public
  unsigned frac_bits = 16;                                                         // public
  double magnitude_bound = 1048576.0;                                              // public
  std::map<int, Seed> seeds;  // seed index j -> k_j; party i holds k_i and k_(i+1)
  std::uint64_t session = 1;  // public
  std::size_t k = 1;          // public
  int n = 2;                  // public
  bool reveal_scores = false;  // public
  Partition partition = Partition::kHorizontal;  // public
  std::optional<double> score_bound;              // public; defaults to m

  // Share files of this party, in partition order; relative paths are
  // resolved against the config file's directory.
  std::vector<std::filesystem::path> data_inputs;
  std::vector<std::filesystem::path> label_inputs;
  std::optional<std::filesystem::path> scores_input;  // injected scores skip MS-GINI

  FixedPointParams params() const { return FixedPointParams(frac_bits, magnitude_bound); }

  PartySecrets secrets() const {
    const int own = party.value(), next = party.next().value();
    if (!seeds.count(own) || !seeds.count(next)) {
      throw UsageError("party " + std::to_string(own) + " needs seeds k" + std::to_string(own) + " and k" +
                       std::to_string(next));
    }
    return {seeds.at(own), seeds.at(next)};
  }

  std::uint64_t public_digest() const {
    std::ostringstream os;
    os << "v" << kProtocolVersion << ";s" << session << ";f" << frac_bits << ";b" << magnitude_bound << ";k" << k
       << ";n" << n << ";r" << reveal_scores << ";p" << partition_name(partition) << ";g" << scores_input.has_value()
       << ";t";
    if (score_bound) os << *score_bound;
    for (const auto& e : peers) os << ";" << e.party.value() << "@" << e.address;
    const auto text = os.str();
    return fnv1a(kFnvOffset, std::as_bytes(std::span<const char>(text.data(), text.size())));
  }

  SessionSetup setup() const { return SessionSetup{params(), session, public_digest()}; }

  void validate() const {
    params();
    if (k < 1) throw UsageError("k must be at least 1");
    if (n < 2) throw UsageError("n must be at least 2");
    for (PartyId p : kAllParties) {
      if (peers[p.index()].party != p) throw UsageError("peers must list parties 1, 2, 3");
    }
    secrets();
    if (data_inputs.empty()) throw UsageError("config lists no data inputs");
    if (!scores_input && label_inputs.empty()) throw UsageError("config lists neither labels nor injected scores");
  }
};

inline JobConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  JobConfig c;
  try {
    c.party = PartyId(j.at("party").get<int>());
    if (j.contains("peers")) {
      const auto& peers = j.at("peers");
      if (!peers.is_array() || peers.size() != 3) throw UsageError("peers must list three endpoints");
      for (const auto& p : peers) {
        const PartyId id(p.at("party").get<int>());
        c.peers[id.index()] = {id, p.at("address").get<std::string>()};
      }
    }
    c.frac_bits = j.value("frac_bits", c.frac_bits);
    c.magnitude_bound = j.value("magnitude_bound", c.magnitude_bound);
    c.session = j.value("session", c.session);
    c.k = j.value("k", c.k);
    c.n = j.value("n", c.n);
    c.reveal_scores = j.value("reveal_scores", false);
    const auto part = j.value("partition", std::string("horizontal"));
    if (part == "horizontal") {
      c.partition = Partition::kHorizontal;
    } else if (part == "vertical") {
      c.partition = Partition::kVertical;
    } else {
      throw UsageError("partition must be horizontal or vertical, got '" + part + "'");
    }
    if (j.contains("score_bound")) c.score_bound = j.at("score_bound").get<double>();
    for (const auto& [key, hex] : j.at("seeds").items()) {
      const int idx = std::stoi(key);
      if (idx < 1 || idx > 3) throw UsageError("seed index must be 1..3, got " + key);
      c.seeds[idx] = seed_from_hex(hex.get<std::string>());
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() && !base.empty() ? base / path : path;
    };
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      for (const auto& p : in.value("data", std::vector<std::string>{})) c.data_inputs.push_back(resolve(p));
      for (const auto& p : in.value("labels", std::vector<std::string>{})) c.label_inputs.push_back(resolve(p));
      if (in.contains("scores")) c.scores_input = resolve(in.at("scores").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

inline JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

inline nlohmann::json config_to_json(const JobConfig& c) {
  nlohmann::json j;
  j["party"] = c.party.value();
  j["peers"] = nlohmann::json::array();
  for (const auto& e : c.peers) j["peers"].push_back({{"party", e.party.value()}, {"address", e.address}});
  j["frac_bits"] = c.frac_bits;
  j["magnitude_bound"] = c.magnitude_bound;
  j["session"] = c.session;
  j["k"] = c.k;
  j["n"] = c.n;
  j["reveal_scores"] = c.reveal_scores;
  j["partition"] = partition_name(c.partition);
  if (c.score_bound) j["score_bound"] = *c.score_bound;
  j["seeds"] = nlohmann::json::object();
  for (const auto& [idx, seed] : c.seeds) j["seeds"][std::to_string(idx)] = seed_to_hex(seed);
  nlohmann::json in;
  in["data"] = nlohmann::json::array();
  for (const auto& p : c.data_inputs) in["data"].push_back(p.string());
  in["labels"] = nlohmann::json::array();
  for (const auto& p : c.label_inputs) in["labels"].push_back(p.string());
  if (c.scores_input) in["scores"] = c.scores_input->string();
  j["inputs"] = in;
  return j;
}

// Three consistent configs with fresh pairwise seeds.
inline std::array<JobConfig, 3> make_configs(const JobConfig& base, const KeyTriple& keys) {
  std::array<JobConfig, 3> out;
  for (PartyId p : kAllParties) {
    auto& c = out[p.index()];
    c = base;
    c.party = p;
    c.seeds = {{p.value(), keys.k[p.index()]}, {p.next().value(), keys.k[p.next().index()]}};
  }
  return out;
}

}  // namespace mpcfs
