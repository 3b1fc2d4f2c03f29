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

// mpcfs_cli: data-owner, server and analyst entry points.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpcfs/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mpcfs;

namespace {

int exit_code(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const IngestError*>(&e)) return 3;
  if (dynamic_cast<const EncodingError*>(&e)) return 3;
  if (dynamic_cast<const IntegrityError*>(&e)) return 4;
  if (dynamic_cast<const HandshakeError*>(&e)) return 5;
  if (dynamic_cast<const TransportError*>(&e)) return 6;
  return 1;
}

std::vector<double> read_numbers(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto text = buf.str();
  for (char& c : text) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw IngestError(path.string() + ": entry " + std::to_string(out.size() + 1) + " is not a number: '" + tok +
                        "'");
    }
  }
  return out;
}

std::string fill_party(std::string tmpl, int party) {
  const std::string key = "{party}";
  for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key)) {
    tmpl.replace(pos, key.size(), std::to_string(party));
  }
  return tmpl;
}

std::vector<PartyEndpoint> parse_peers(const std::vector<std::string>& addrs) {
  std::vector<PartyEndpoint> out;
  for (std::size_t i = 0; i < addrs.size(); ++i) out.push_back({PartyId(static_cast<int>(i) + 1), addrs[i]});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-server MPC feature selection"};
  app.require_subcommand(1);

  // configure
  auto* configure = app.add_subcommand("configure", "Write three consistent server configs with fresh seeds");
  std::string cfg_out;
  JobConfig base;
  std::string partition = "horizontal";
  std::vector<std::string> peers{"127.0.0.1:7101", "127.0.0.1:7102", "127.0.0.1:7103"};
  std::vector<std::string> data_tmpl, label_tmpl;
  std::string scores_tmpl;
  std::optional<std::uint64_t> cfg_seed;
  double score_bound = 0;
  configure->add_option("--out", cfg_out, "Directory for p1.json, p2.json, p3.json")->required();
  configure->add_option("-k", base.k, "Number of features to keep")->required();
  configure->add_option("-n", base.n, "Number of classes");
  configure->add_option("--session", base.session, "Session id");
  configure->add_option("--frac-bits", base.frac_bits, "Fractional bits");
  configure->add_flag("--reveal-scores", base.reveal_scores, "Open the score vector to all servers");
  configure->add_option("--partition", partition)->check(CLI::IsMember({"horizontal", "vertical"}));
  configure->add_option("--peers", peers, "host:port of parties 1, 2, 3")->expected(3);
  configure->add_option("--data", data_tmpl, "Data share path; {party} is substituted");
  configure->add_option("--labels", label_tmpl, "Label share path; {party} is substituted");
  configure->add_option("--scores", scores_tmpl, "Injected score share path; {party} is substituted");
  configure->add_option("--score-bound", score_bound, "Public upper bound on injected scores");
  configure->add_option("--seed", cfg_seed, "Derive pairwise seeds deterministically (testing only)");

  // split
  auto* split = app.add_subcommand("split", "Encode a CSV dataset and write one share file per server");
  fs::path dataset, split_out, scores_file;
  std::string name = "data";
  SplitOptions sopt;
  unsigned split_frac = sopt.params.frac_bits;
  bool no_labels = false;
  std::optional<std::uint64_t> split_seed;
  split->add_option("--dataset", dataset, "CSV with a header row; last column is the label")->check(CLI::ExistingFile);
  split->add_option("--out", split_out, "Output directory")->required();
  split->add_option("--name", name, "File name prefix");
  split->add_option("--frac-bits", split_frac, "Fractional bits");
  split->add_option("--classes", sopt.classes, "Number of classes");
  split->add_flag("--no-labels", no_labels, "Dataset has no label column");
  split->add_flag("--standardize", sopt.standardize, "Scale each column to zero mean, unit variance");
  split->add_option("--scores", scores_file, "Also share a public score vector")->check(CLI::ExistingFile);
  split->add_option("--seed", split_seed, "Deterministic share randomness (testing only)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the feature-selection protocol");
  std::vector<fs::path> serve_cfgs;
  fs::path serve_out;
  std::string backend_name = "tcp";
  bool reveal = false;
  serve->add_option("--config", serve_cfgs, "Server config; give all three for the loopback backend")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--out", serve_out, "Output directory")->required();
  serve->add_option("--backend", backend_name)->check(CLI::IsMember({"loopback", "tcp"}));
  serve->add_flag("--reveal-scores", reveal, "Open the score vector (must match on all servers)");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Combine share files from two or three servers");
  std::vector<fs::path> recon_files;
  fs::path recon_out;
  recon->add_option("files", recon_files, "Share files")->required()->check(CLI::ExistingFile);
  recon->add_option("--out", recon_out, "CSV output (stdout if omitted)");

  // bench
  auto* bench = app.add_subcommand("bench", "Time MS-GINI selection on synthetic data");
  BenchSpec spec;
  std::string bench_backend = "loopback";
  fs::path bench_out;
  bench->add_option("-m", spec.m, "Rows");
  bench->add_option("-p", spec.p, "Features");
  bench->add_option("-k", spec.k, "Features to keep");
  bench->add_option("-n", spec.n, "Classes");
  bench->add_option("--seed", spec.seed, "Data and key seed");
  bench->add_option("--backend", bench_backend)->check(CLI::IsMember({"loopback", "tcp"}));
  bench->add_option("--out", bench_out, "JSON report (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*configure) {
      base.partition = partition == "vertical" ? Partition::kVertical : Partition::kHorizontal;
      if (score_bound > 0) base.score_bound = score_bound;
      const auto eps = parse_peers(peers);
      std::copy(eps.begin(), eps.end(), base.peers.begin());
      const auto keys = cfg_seed ? KeyTriple::from_master(*cfg_seed)
                                 : KeyTriple{{random_seed(), random_seed(), random_seed()}};
      auto cfgs = make_configs(base, keys);
      for (auto& c : cfgs) {
        const int p = c.party.value();
        for (const auto& t : data_tmpl) c.data_inputs.emplace_back(fill_party(t, p));
        for (const auto& t : label_tmpl) c.label_inputs.emplace_back(fill_party(t, p));
        if (!scores_tmpl.empty()) c.scores_input = fill_party(scores_tmpl, p);
        c.validate();
        write_json(fs::path(cfg_out) / ("p" + std::to_string(p) + ".json"), config_to_json(c));
      }
      return 0;
    }

    if (*split) {
      if (dataset.empty() && scores_file.empty()) throw UsageError("split needs --dataset or --scores");
      sopt.params = FixedPointParams(split_frac, sopt.params.magnitude_bound);
      if (split_seed) sopt.seed = derive_seed(*split_seed, 0);
      fs::create_directories(split_out);
      if (!dataset.empty()) {
        const auto res = split_dataset(read_dataset(dataset, !no_labels, sopt.classes), sopt);
        for (PartyId p : kAllParties) {
          write_share_file(share_path(split_out, name, ShareSlot::kData, p), res.data[p.index()]);
          if (res.labels) {
            write_share_file(share_path(split_out, name, ShareSlot::kLabels, p), (*res.labels)[p.index()]);
          }
        }
      }
      if (!scores_file.empty()) {
        const auto g = split_scores(read_numbers(scores_file), sopt);
        for (PartyId p : kAllParties) write_share_file(share_path(split_out, name, ShareSlot::kScores, p), g[p.index()]);
      }
      return 0;
    }

    if (*serve) {
      const auto backend = parse_backend(backend_name);
      std::vector<JobConfig> cfgs;
      for (const auto& path : serve_cfgs) {
        cfgs.push_back(load_config(path));
        if (reveal) cfgs.back().reveal_scores = true;
      }
      if (backend == Backend::kLoopback) {
        if (cfgs.size() != 3) throw UsageError("loopback serve needs three --config files");
        const auto runs = serve_loopback({cfgs[0], cfgs[1], cfgs[2]});
        for (const auto& c : cfgs) {
          const auto& r = runs[c.party.index()];
          write_serve_outputs(serve_out, c, r.result, r.counters, r.wall_ms);
        }
      } else {
        if (cfgs.size() != 1) throw UsageError("tcp serve runs one party; pass exactly one --config");
        const auto r = serve_tcp(cfgs[0]);
        write_serve_outputs(serve_out, cfgs[0], r.result, r.counters, r.wall_ms);
      }
      return 0;
    }

    if (*recon) {
      std::vector<ShareFile> files;
      for (const auto& f : recon_files) files.push_back(read_share_file(f));
      const auto r = reconstruct_share_files(files);
      if (recon_out.empty()) {
        write_matrix_csv(std::cout, r.rows, r.cols, r.values, r.frac_bits);
      } else {
        if (recon_out.has_parent_path()) fs::create_directories(recon_out.parent_path());
        std::ofstream out(recon_out);
        write_matrix_csv(out, r.rows, r.cols, r.values, r.frac_bits);
        if (!out) throw Error("cannot write " + recon_out.string());
      }
      return 0;
    }

    if (*bench) {
      spec.backend = parse_backend(bench_backend);
      const auto report = run_bench(spec);
      if (bench_out.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        write_json(bench_out, report);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mpcfs_cli: %s\n", e.what());
    return exit_code(e);
  }
  return 0;
}
