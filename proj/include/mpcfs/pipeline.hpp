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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpcfs/config.hpp"
#include "mpcfs/dataset.hpp"
#include "mpcfs/featsel.hpp"
#include "mpcfs/multiply.hpp"
#include "mpcfs/runner.hpp"
#include "mpcfs/sharefile.hpp"
#include "mpcfs/tcp.hpp"

namespace mpcfs {

// ---- owner side -------------------------------------------------------------

struct SplitOptions {
  FixedPointParams params{};
  int classes = 2;
  bool standardize = false;
  std::optional<Seed> seed;  // deterministic shares for tests; fresh randomness otherwise
};

struct SplitResult {
  std::array<ShareFile, 3> data;
  std::optional<std::array<ShareFile, 3>> labels;
};

inline SplitResult split_dataset(Dataset ds, const SplitOptions& opt) {
  if (opt.standardize) standardize(ds);
  const auto enc = encode_features(ds, opt.params);
  Prg rng(opt.seed ? *opt.seed : random_seed());
  SplitResult out;
  const auto d = share_matrix(enc, ds.rows, ds.cols, opt.params.frac_bits, rng);
  for (int p = 0; p < 3; ++p) out.data[p] = ShareFile{ShareSlot::kData, opt.params.frac_bits, d[p]};
  if (ds.has_labels()) {
    const auto cols = static_cast<std::size_t>(opt.classes - 1);
    const auto l = share_matrix(one_hot_labels(ds.labels, opt.classes), ds.rows, cols, kInteger, rng);
    out.labels.emplace();
    for (int p = 0; p < 3; ++p) (*out.labels)[p] = ShareFile{ShareSlot::kLabels, 0, l[p]};
  }
  return out;
}

// A public row of values shared as a p-length score column (p x 1).
inline std::array<ShareFile, 3> split_scores(const std::vector<double>& scores, const SplitOptions& opt) {
  std::vector<RingElement> enc;
  for (double s : scores) enc.push_back(encode(s, opt.params));
  Prg rng(opt.seed ? derive_seed(0x5c0, opt.seed->front()) : random_seed());
  const auto g = share_matrix(enc, enc.size(), 1, opt.params.frac_bits, rng);
  std::array<ShareFile, 3> out;
  for (int p = 0; p < 3; ++p) out[p] = ShareFile{ShareSlot::kScores, opt.params.frac_bits, g[p]};
  return out;
}

inline std::filesystem::path share_path(const std::filesystem::path& dir, const std::string& name, ShareSlot slot,
                                        PartyId p) {
  return dir / (name + "." + slot_name(slot) + ".p" + std::to_string(p.value()) + ".share");
}

// ---- server side ------------------------------------------------------------

struct ServeInputs {
  SharedMatrix data;
  std::optional<SharedMatrix> labels;
  std::optional<SharedVector> scores;
};

namespace detail {

inline SharedMatrix join(const std::vector<SharedMatrix>& parts, Partition how) {
  SharedMatrix out = parts.at(0);
  for (std::size_t q = 1; q < parts.size(); ++q) {
    const auto& b = parts[q];
    if (how == Partition::kHorizontal) {
      if (b.cols != out.cols) throw IngestError("horizontal parts disagree on column count");
      out.first.insert(out.first.end(), b.first.begin(), b.first.end());
      out.second.insert(out.second.end(), b.second.begin(), b.second.end());
      out.rows += b.rows;
    } else {
      if (b.rows != out.rows) throw IngestError("vertical parts disagree on row count");
      SharedMatrix m(out.owner, out.scale, out.rows, out.cols + b.cols);
      for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.cols; ++c) {
          m.first[m.index(r, c)] = out.first[out.index(r, c)];
          m.second[m.index(r, c)] = out.second[out.index(r, c)];
        }
        for (std::size_t c = 0; c < b.cols; ++c) {
          m.first[m.index(r, out.cols + c)] = b.first[b.index(r, c)];
          m.second[m.index(r, out.cols + c)] = b.second[b.index(r, c)];
        }
      }
      out = std::move(m);
    }
  }
  return out;
}

inline SharedMatrix load_parts(const std::vector<std::filesystem::path>& paths, ShareSlot slot, const JobConfig& cfg,
                               std::uint32_t frac_bits, Partition how) {
  std::vector<SharedMatrix> parts;
  for (const auto& path : paths) {
    auto f = read_share_file(path);
    if (f.slot != slot) throw IngestError(path.string() + ": expected slot " + slot_name(slot));
    if (f.party() != cfg.party) {
      throw IngestError(path.string() + ": shares of party " + std::to_string(f.party().value()) + ", not " +
                        std::to_string(cfg.party.value()));
    }
    if (f.frac_bits != frac_bits) throw IngestError(path.string() + ": fractional bits differ from config");
    parts.push_back(std::move(f.shares));
  }
  return join(parts, how);
}

}  // namespace detail

inline ServeInputs load_inputs(const JobConfig& cfg) {
  ServeInputs in;
  in.data = detail::load_parts(cfg.data_inputs, ShareSlot::kData, cfg, cfg.frac_bits, cfg.partition);
  if (!cfg.label_inputs.empty()) {
    if (cfg.partition == Partition::kVertical && cfg.label_inputs.size() != 1) {
      throw UsageError("vertical partitioning takes labels from exactly one owner");
    }
    in.labels = detail::load_parts(cfg.label_inputs, ShareSlot::kLabels, cfg, 0, Partition::kHorizontal);
    if (in.labels->rows != in.data.rows) throw IngestError("label rows do not match data rows");
    if (in.labels->cols != static_cast<std::size_t>(cfg.n - 1)) {
      throw IngestError("label matrix has " + std::to_string(in.labels->cols) + " columns, expected n-1 = " +
                        std::to_string(cfg.n - 1));
    }
  }
  if (cfg.scores_input) {
    auto g = detail::load_parts({*cfg.scores_input}, ShareSlot::kScores, cfg, cfg.frac_bits, Partition::kHorizontal);
    if (g.cols != 1 || g.rows != in.data.cols) throw IngestError("score vector length differs from feature count");
    in.scores = g.column(0);
  }
  return in;
}

struct ServeResult {
  SelectionResult selection;
  std::optional<std::vector<double>> scores;  // revealed, unnormalized
  std::size_t rows = 0;
};

// Protocol body of one server.
inline ServeResult serve_session(Session& s, const JobConfig& cfg, const ServeInputs& in) {
  const std::size_t m = in.data.rows, p = in.data.cols;
  if (cfg.k < 1 || cfg.k > p) {
    throw UsageError("k = " + std::to_string(cfg.k) + " must lie in [1, " + std::to_string(p) + "]");
  }
  ServeResult out;
  out.rows = m;
  SharedVector scores;
  if (in.scores) {
    scores = *in.scores;
    const double bound = cfg.score_bound ? *cfg.score_bound : static_cast<double>(m);
    out.selection = pi_filter_fs(s, in.data, scores, cfg.k, encode(bound, s.params()));
  } else {
    if (!in.labels) throw UsageError("MS-GINI scoring needs shared labels");
    out.selection = pi_gini_fs(s, in.data, *in.labels, cfg.k, &scores);
  }
  if (cfg.reveal_scores) {
    std::vector<double> plain;
    for (auto e : open(s, scores)) plain.push_back(decode(e, scores.scale));
    out.scores = std::move(plain);
  }
  return out;
}

inline nlohmann::json cost_json(const CostCounters& c) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(c.transcript_digest));
  return {{"rounds", c.rounds},
          {"bytes_sent", c.bytes_sent},
          {"payload_bytes", c.payload_bytes},
          {"frames_sent", c.frames_sent},
          {"transcript_digest", digest},
          {"op_histogram", c.op_histogram}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

// Writes D', I, the cost report and, if revealed, the scores.
inline void write_serve_outputs(const std::filesystem::path& dir, const JobConfig& cfg, const ServeResult& r,
                                const CostCounters& counters, double wall_ms) {
  const auto& sel = r.selection;
  write_share_file(share_path(dir, "out", ShareSlot::kReduced, cfg.party),
                   ShareFile{ShareSlot::kReduced, static_cast<std::uint32_t>(sel.reduced.scale), sel.reduced});
  write_share_file(share_path(dir, "out", ShareSlot::kIndices, cfg.party),
                   ShareFile{ShareSlot::kIndices, 0, SharedMatrix::from_column(sel.indices)});
  auto cost = cost_json(counters);
  cost["party"] = cfg.party.value();
  cost["wall_ms"] = wall_ms;
  write_json(dir / ("cost.p" + std::to_string(cfg.party.value()) + ".json"), cost);
  if (r.scores) {
    nlohmann::json j;
    j["scores"] = *r.scores;
    std::vector<double> norm;
    for (double s : *r.scores) norm.push_back(s / static_cast<double>(r.rows));
    j["normalized"] = norm;
    write_json(dir / ("scores.p" + std::to_string(cfg.party.value()) + ".json"), j);
  }
}

struct PartyRun {
  ServeResult result;
  CostCounters counters;
  double wall_ms = 0;
};

// All three servers in this process over the in-memory mesh.
inline std::array<PartyRun, 3> serve_loopback(const std::array<JobConfig, 3>& cfgs) {
  std::array<SessionSetup, 3> setups;
  std::array<PartySecrets, 3> secrets;
  std::array<ServeInputs, 3> inputs;
  for (const auto& c : cfgs) {
    c.validate();
    const auto i = c.party.index();
    if (!inputs[i].data.first.empty() || setups[i].config_digest != 0) {
      throw UsageError("two configs for party " + std::to_string(c.party.value()));
    }
    setups[i] = c.setup();
    secrets[i] = c.secrets();
    inputs[i] = load_inputs(c);
  }
  std::array<const JobConfig*, 3> by_party{};
  for (const auto& c : cfgs) by_party[c.party.index()] = &c;
  auto out = run_parties(setups, secrets, [&](Session& s) {
    return serve_session(s, *by_party[s.party().index()], inputs[s.party().index()]);
  });
  std::array<PartyRun, 3> runs;
  for (int i = 0; i < 3; ++i) runs[i] = {std::move(out[i].value), out[i].counters, out[i].wall_ms};
  return runs;
}

// One server connected to its peers over TCP.
inline PartyRun serve_tcp(const JobConfig& cfg, TcpMeshOptions tcp = {}) {
  cfg.validate();
  const auto inputs = load_inputs(cfg);
  const auto start = std::chrono::steady_clock::now();
  auto channels = connect_tcp_mesh(cfg.party, cfg.peers, nullptr, tcp);
  const auto sec = cfg.secrets();
  auto session = open_session(cfg.party, std::move(channels),
                              ZeroSharingKeys(cfg.party, sec.own, sec.next, cfg.session), cfg.setup());
  PartyRun run;
  run.result = serve_session(*session, cfg, inputs);
  session->close();
  run.counters = session->counters();
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return run;
}

// ---- benchmark ----------------------------------------------------------------

struct BenchSpec {
  std::size_t m = 126, p = 310, k = 103;
  int n = 2;
  std::uint64_t seed = 1;
  Backend backend = Backend::kLoopback;
  FixedPointParams params{};
};

// Synthetic data: a few informative features, the rest noise.
inline Dataset synthesize(const BenchSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> cls(1, spec.n);
  Dataset ds;
  ds.rows = spec.m;
  ds.cols = spec.p;
  for (std::size_t i = 0; i < spec.m; ++i) ds.labels.push_back(cls(rng));
  ds.values.resize(spec.m * spec.p);
  for (std::size_t j = 0; j < spec.p; ++j) {
    const double signal = j % 10 == 0 ? 1.5 : 0.0;
    for (std::size_t i = 0; i < spec.m; ++i) ds.values[i * spec.p + j] = signal * ds.labels[i] + noise(rng);
  }
  for (std::size_t j = 0; j < spec.p; ++j) ds.names.push_back("f" + std::to_string(j + 1));
  return ds;
}

inline nlohmann::json run_bench(const BenchSpec& spec) {
  if (spec.k < 1 || spec.k > spec.p) throw UsageError("bench needs 1 <= k <= p");
  const auto ds = synthesize(spec);
  SplitOptions opt;
  opt.params = spec.params;
  opt.classes = spec.n;
  opt.seed = derive_seed(spec.seed, 1);
  const auto shares = split_dataset(ds, opt);
  const auto keys = KeyTriple::from_master(spec.seed);
  SessionSetup setup{spec.params, spec.seed, 0};
  RunOptions ro;
  ro.backend = spec.backend;
  const auto start = std::chrono::steady_clock::now();
  auto out = run_three(keys, setup,
                       [&](Session& s) {
                         const auto i = s.party().index();
                         return pi_gini_fs(s, shares.data[i].shares, (*shares.labels)[i].shares, spec.k).reduced.rows;
                       },
                       ro);
  const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json j;
  j["shape"] = {{"m", spec.m}, {"p", spec.p}, {"k", spec.k}, {"n", spec.n}};
  j["backend"] = spec.backend == Backend::kLoopback ? "loopback" : "tcp";
  j["wall_ms"] = wall;
  j["rounds"] = out[0].counters.rounds;
  j["bytes_per_party"] = nlohmann::json::array();
  j["payload_bytes_per_party"] = nlohmann::json::array();
  for (const auto& o : out) {
    j["bytes_per_party"].push_back(o.counters.bytes_sent);
    j["payload_bytes_per_party"].push_back(o.counters.payload_bytes);
  }
  j["op_histogram"] = out[0].counters.op_histogram;
  return j;
}

}  // namespace mpcfs
