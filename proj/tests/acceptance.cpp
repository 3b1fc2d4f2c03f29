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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "mpcfs/featsel.hpp"
#include "mpcfs/pipeline.hpp"
#include "stats.hpp"

namespace fs = std::filesystem;
using namespace mpcfs;
using testing::Trio;

namespace {

const FixedPointParams kParams;
const unsigned kF = kParams.frac_bits;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << " [" << why << "]";
    }
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Verdict&)>& body) {
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.pass) ++failures;
  std::printf("%s %s:%s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const fs::path& dir, const std::string& cmd) {
  const auto full = "cd '" + dir.string() + "' && { " + cmd + "; } > cmd.log 2>&1";
  return std::system(full.c_str());
}

// ---- plaintext reference, in doubles --------------------------------------

// Normalized mean-split Gini of one column. Instances with value <= mean
// form the low branch; an empty branch contributes zero.
double reference_gini(const std::vector<double>& col, const std::vector<int>& labels, int n) {
  const double m = static_cast<double>(col.size());
  double sum = 0;
  for (double v : col) sum += v;
  std::vector<double> low(n + 1, 0), high(n + 1, 0);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] * m > sum) {
      ++b;
      ++high[labels[i]];
    } else {
      ++a;
      ++low[labels[i]];
    }
  }
  auto branch = [](double size, const std::vector<double>& counts) {
    if (size == 0) return 0.0;
    double sq = 0;
    for (double c : counts) sq += c * c;
    return size - sq / size;
  };
  return (branch(a, low) + branch(b, high)) / m;
}

std::vector<std::size_t> lowest_k(const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return scores[x] < scores[y]; });
  idx.resize(k);
  return idx;
}

std::vector<RingElement> one_hot(const std::vector<int>& labels, int n) {
  std::vector<RingElement> out;
  for (int l : labels) {
    for (int c = 1; c < n; ++c) out.push_back(l == c ? 1 : 0);
  }
  return out;
}

template <class Out>
std::vector<RingElement> opened(const Out& out) {
  std::array<SharedVector, 3> v{out[0].value, out[1].value, out[2].value};
  return reconstruct_vector(v);
}

// ---- criteria ------------------------------------------------------------------

void example_one(Verdict& v) {
  const auto dir = fs::temp_directory_path() / ("mpcfs_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "d.csv") << "a,b,c,d\n1,2,3,4\n5,6,7,8\n9,10,11,12\n13,14,15,16\n17,18,19,20\n";
    std::ofstream(dir / "g.txt") << "65,26,83,14\n";
  }
  const std::string cli = "'" + std::string(MPCFS_CLI_PATH) + "' ";
  const auto start = Clock::now();
  int rc = shell(dir, cli + "split --dataset d.csv --no-labels --scores g.txt --out shares --name ex");
  rc |= shell(dir, cli + "configure --out cfg -k 2 --score-bound 100 --data ../shares/ex.D.p{party}.share "
                         "--scores ../shares/ex.G.p{party}.share");
  rc |= shell(dir, cli + "serve --backend loopback --config cfg/p1.json --config cfg/p2.json --config cfg/p3.json "
                         "--out out");
  rc |= shell(dir, cli + "reconstruct out/out.Dprime.p1.share out/out.Dprime.p2.share --out dprime.csv");
  rc |= shell(dir, cli + "reconstruct out/out.I.p2.share out/out.I.p3.share --out i.csv");
  const double secs = seconds_since(start);
  v.require(rc == 0, "cli exit status " + std::to_string(rc) + ": " + slurp(dir / "cmd.log"));
  const auto dprime = slurp(dir / "dprime.csv"), idx = slurp(dir / "i.csv");
  v.require(dprime == "c1,c2\n4,2\n8,6\n12,10\n16,14\n20,18\n", "D' = " + dprime);
  v.require(idx == "c1\n4\n2\n", "I = " + idx);
  v.require(secs < 5, "runtime");
  v.detail << " D' exact, I = [4,2], " << secs << " s";
  if (v.pass) fs::remove_all(dir);
}

void oracle_equivalence(Verdict& v) {
  std::mt19937_64 rng(2026);
  const auto start = Clock::now();
  std::size_t accepted = 0, rejected = 0, set_matches = 0;
  double worst = 0;
  while (accepted < 200) {
    const std::size_t m = 8 + rng() % 57, p = 2 + rng() % 9;
    const int n = 2 + static_cast<int>(rng() % 2);
    const std::size_t k = 1 + rng() % p;
    std::vector<int> labels(m);
    for (auto& l : labels) l = 1 + static_cast<int>(rng() % n);
    std::vector<double> values(m * p);
    std::uniform_int_distribution<int> grid(-256, 256);
    for (std::size_t j = 0; j < p; ++j) {
      // Some columns lean on the label so scores spread out.
      const double lean = (rng() % 3 == 0) ? 1.0 : 0.0;
      for (std::size_t i = 0; i < m; ++i) values[i * p + j] = grid(rng) / 64.0 + lean * labels[i];
    }
    std::vector<double> ref(p);
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> col(m);
      for (std::size_t i = 0; i < m; ++i) col[i] = values[i * p + j];
      ref[j] = reference_gini(col, labels, n);
    }
    auto sorted = ref;
    std::sort(sorted.begin(), sorted.end());
    if (k < p && sorted[k] - sorted[k - 1] <= 0.02) {
      ++rejected;
      continue;
    }
    ++accepted;
    Trio t(accepted);
    std::vector<RingElement> enc;
    for (double x : values) enc.push_back(encode(x, kParams));
    auto d = t.mat(enc, m, p, kF);
    auto l = t.mat(one_hot(labels, n), m, static_cast<std::size_t>(n - 1));
    auto out = t.run([&](Session& s, int i) {
      SharedVector scores;
      auto sel = pi_gini_fs(s, d[i], l[i], k, &scores);
      SharedVector both = scores;
      for (std::size_t q = 0; q < sel.indices.size(); ++q) both.push_back(sel.indices.at(q));
      return open(s, both);
    });
    const auto& o = out[0].value;
    std::set<std::size_t> got, want;
    for (std::size_t q = 0; q < k; ++q) got.insert(static_cast<std::size_t>(o[p + q]));
    for (auto i : lowest_k(ref, k)) want.insert(i + 1);
    if (got == want) ++set_matches;
    for (std::size_t j = 0; j < p; ++j) {
      worst = std::max(worst, std::fabs(decode(o[j], kF) / static_cast<double>(m) - ref[j]));
    }
  }
  const double secs = seconds_since(start);
  v.require(set_matches == 200, "index sets");
  v.require(worst <= 0.02, "score tolerance");
  v.require(secs < 600, "runtime");
  v.detail << " sets " << set_matches << "/200, max |score err| " << worst << ", " << rejected
           << " draws rejected for gap <= 0.02, " << secs << " s";
}

void building_blocks(Verdict& v) {
  // Comparison and equality: all pairs of 6-bit signed integers, plus a
  // fixed-point grid at the default width.
  std::vector<RingElement> xs, ys, lt_want, eq_want;
  for (std::int64_t a = -32; a < 32; ++a) {
    for (std::int64_t b = -32; b < 32; ++b) {
      xs.push_back(from_signed(a));
      ys.push_back(from_signed(b));
      lt_want.push_back(a < b);
      eq_want.push_back(a == b);
    }
  }
  std::vector<RingElement> fx, fy, flt, feq;
  std::vector<double> pts{-kParams.magnitude_bound, kParams.magnitude_bound, 0.0, 1.0, -1.0, 0.5, -0.5, 1e5, -1e5};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kParams.magnitude_bound, kParams.magnitude_bound);
  while (pts.size() < 48) pts.push_back(u(rng));
  for (double a : pts) {
    for (double b : pts) {
      const auto ea = encode(a, kParams), eb = encode(b, kParams);
      fx.push_back(ea);
      fy.push_back(eb);
      flt.push_back(to_signed(ea) < to_signed(eb));
      feq.push_back(ea == eb);
    }
  }
  Trio t(31);
  auto x = t.vec(xs), y = t.vec(ys), a = t.vec(fx, kF), b = t.vec(fy, kF);
  const unsigned w = comparison_width(kParams);
  auto out = t.run([&](Session& s, int i) {
    auto r = pi_lt(s, x[i], y[i], 7);
    auto e = pi_eq(s, x[i], y[i], 7);
    auto fl = pi_lt(s, a[i], b[i], w);
    auto fe = pi_eq(s, a[i], b[i], w);
    for (const auto* z : {&e, &fl, &fe}) {
      for (std::size_t q = 0; q < z->size(); ++q) r.push_back(z->at(q));
    }
    return open(s, r);
  });
  const auto& o = out[0].value;
  const std::size_t g = xs.size(), h = fx.size();
  std::size_t cmp_ok = 0;
  for (std::size_t q = 0; q < g; ++q) cmp_ok += (o[q] == lt_want[q]) + (o[g + q] == eq_want[q]);
  for (std::size_t q = 0; q < h; ++q) cmp_ok += (o[2 * g + q] == flt[q]) + (o[2 * g + h + q] == feq[q]);
  const std::size_t cmp_total = 2 * (g + h);
  v.require(cmp_ok == cmp_total, "LT/EQ grid");

  // Argmin with planted ties, batched by length.
  std::size_t argmin_ok = 0, argmin_total = 0;
  for (std::size_t len = 2; argmin_total < 1000; ++len) {
    const std::size_t rows = 50;
    std::vector<RingElement> vals, want;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::int64_t> row(len);
      for (auto& z : row) z = static_cast<std::int64_t>(rng() % 41) - 20;
      const std::int64_t lo = *std::min_element(row.begin(), row.end()) - static_cast<std::int64_t>(rng() % 2);
      row[rng() % len] = lo;
      row[rng() % len] = lo;
      if (len > 3) row[rng() % len] = lo;
      std::size_t first = 0;
      for (std::size_t c = 1; c < len; ++c) {
        if (row[c] < row[first]) first = c;
      }
      want.push_back(first + 1);
      for (auto z : row) vals.push_back(encode(static_cast<double>(z) / 4.0, kParams));
    }
    auto mtx = t.mat(vals, rows, len, kF);
    const auto got = opened(t.run([&](Session& s, int i) { return pi_argmin_rows(s, mtx[i], w); }));
    for (std::size_t r = 0; r < rows; ++r) argmin_ok += got[r] == want[r];
    argmin_total += rows;
  }
  v.require(argmin_ok == argmin_total, "argmin");

  // Division 1/y over y = 1..1024.
  std::vector<RingElement> den, one;
  for (RingElement d = 1; d <= 1024; ++d) {
    den.push_back(d);
    one.push_back(encode(1.0, kParams));
  }
  auto dy = t.vec(den), dx = t.vec(one, kF);
  auto dv = t.run([&](Session& s, int i) { return open(s, pi_div(s, dx[i], dy[i])); });
  double worst = 0;
  for (std::size_t q = 0; q < den.size(); ++q) {
    const double exact = 1.0 / static_cast<double>(den[q]);
    worst = std::max(worst, std::fabs(decode(dv[0].value[q], reciprocal_scale(kParams)) -
                                      exact) / exact);
  }
  const double tol = std::ldexp(1.0, -static_cast<int>(kF) + 2);
  v.require(worst <= tol, "division");
  v.detail << " LT/EQ " << cmp_ok << "/" << cmp_total << ", argmin " << argmin_ok << "/" << argmin_total
           << ", div max rel err " << worst << " (tol " << tol << ", output scale " << reciprocal_scale(kParams)
           << " bits)";
}

void communication(Verdict& v) {
  Trio t(41);
  auto a = t.vec({6}), b = t.vec({7});
  auto out = t.run([&](Session& s, int i) { return SharedVector::single(mul(s, a[i].at(0), b[i].at(0)), kInteger); });
  const auto payload = testing::total_payload(out);
  const auto rounds = out[0].counters.rounds;
  v.require(opened(out)[0] == 42, "mul value");
  v.require(payload == 3 * sizeof(RingElement), "mul bytes");
  v.require(rounds == 1, "mul rounds");
  std::vector<std::uint64_t> dp_bytes;
  std::vector<std::uint64_t> dp_rounds;
  for (std::size_t len : {1u, 10u, 100u, 1000u, 10000u}) {
    std::vector<RingElement> x(len, 3), y(len, 5);
    auto xa = t.vec(x), ya = t.vec(y);
    auto o = t.run([&](Session& s, int i) { return SharedVector::single(pi_dp(s, xa[i], ya[i]), kInteger); });
    v.require(opened(o)[0] == 15 * len, "dp value");
    dp_bytes.push_back(testing::total_payload(o));
    dp_rounds.push_back(o[0].counters.rounds);
  }
  v.require(std::all_of(dp_bytes.begin(), dp_bytes.end(), [&](auto b) { return b == dp_bytes[0]; }), "dp bytes");
  v.require(std::all_of(dp_rounds.begin(), dp_rounds.end(), [](auto r) { return r == 1; }), "dp rounds");
  v.detail << " mul " << payload << " bytes (3 ring elements), " << rounds << " round; dot product " << dp_bytes[0]
           << " bytes for lengths 1..10^4";
}

void privacy(Verdict& v) {
  // Each party's pair from the input sharing and from a multiplication's
  // fresh output, 10^4 samples of a fixed secret.
  const std::size_t samples = 10000;
  Trio t(51);
  std::vector<RingElement> xs(samples, 1234567), ys(samples, 89);
  auto x = t.vec(xs), y = t.vec(ys);
  auto out = t.run([&](Session& s, int i) { return mul(s, x[i], y[i]); });
  double worst = 1;
  for (int party = 0; party < 3; ++party) {
    std::vector<std::size_t> in_bins(256, 0), out_bins(256, 0);
    for (std::size_t q = 0; q < samples; ++q) {
      ++in_bins[((x[party].first[q] >> 60) << 4) | (x[party].second[q] >> 60)];
      ++out_bins[((out[party].value.first[q] >> 60) << 4) | (out[party].value.second[q] >> 60)];
    }
    worst = std::min({worst, testing::chi_square_uniform_p(in_bins), testing::chi_square_uniform_p(out_bins)});
  }
  v.require(worst > 0.001, "chi-square");

  // Same shape, different data: identical message pattern.
  auto transcript = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t m = 24, p = 5;
    std::vector<double> vals(m * p);
    std::vector<int> labels(m);
    for (auto& l : labels) l = 1 + static_cast<int>(rng() % 3);
    for (auto& z : vals) z = static_cast<double>(static_cast<int>(rng() % 512) - 256) / 32.0;
    Trio tr(seed);
    std::vector<RingElement> enc;
    for (double z : vals) enc.push_back(encode(z, kParams));
    auto d = tr.mat(enc, m, p, kF);
    auto l = tr.mat(one_hot(labels, 3), m, 2);
    auto o = tr.run([&](Session& s, int i) { return pi_gini_fs(s, d[i], l[i], 2).indices; });
    std::vector<std::uint64_t> shape;
    for (const auto& po : o) {
      shape.insert(shape.end(), {po.counters.shape_digest, po.counters.frames_sent, po.counters.bytes_sent,
                                 po.counters.rounds});
    }
    return std::make_pair(shape, o[0].counters.transcript_digest);
  };
  const auto t1 = transcript(61), t2 = transcript(62);
  v.require(t1.first == t2.first, "transcript shape");
  v.require(t1.second != t2.second, "transcripts should differ in content");
  v.detail << " min chi-square p " << worst << " over " << samples
           << " samples per party; same-shape transcripts have identical message counts and sizes";
}

void degenerate(Verdict& v) {
  // Column 1 constant, column 2 informative; labels either mixed or single-class.
  const std::size_t m = 8;
  std::vector<RingElement> enc;
  for (std::size_t i = 0; i < m; ++i) {
    enc.push_back(encode(3.5, kParams));
    enc.push_back(encode(static_cast<double>(i), kParams));
  }
  double worst = 0;
  for (const std::vector<int>& labels :
       {std::vector<int>{1, 2, 1, 2, 1, 2, 2, 2}, std::vector<int>(m, 1), std::vector<int>(m, 2)}) {
    Trio t(71);
    auto d = t.mat(enc, m, 2, kF);
    auto l = t.mat(one_hot(labels, 2), m, 1);
    auto out = t.run([&](Session& s, int i) {
      const auto r = pi_ms_gini_all(s, d[i], l[i]);
      SharedVector all = r.scores;
      all.scale = kInteger;
      for (std::size_t q = 0; q < 2; ++q) {
        all.push_back(r.counters.b.at(q));
        all.push_back(r.counters.B.row(q).at(0));
      }
      return open(s, all);
    });
    const auto& o = out[0].value;
    std::vector<double> col0(m, 3.5), col1;
    for (std::size_t i = 0; i < m; ++i) col1.push_back(static_cast<double>(i));
    v.require(o[2] == 0 && o[3] == 0, "constant column high branch not empty");
    for (int j = 0; j < 2; ++j) {
      const double want = reference_gini(j == 0 ? col0 : col1, labels, 2);
      worst = std::max(worst, std::fabs(decode(o[j], kF) / static_cast<double>(m) - want));
    }
    if (labels[0] == labels[1]) {
      v.require(std::fabs(decode(o[0], kF)) < 1e-3 && std::fabs(decode(o[1], kF)) < 1e-3, "single class not pure");
    }
  }
  v.require(worst < 1e-3, "scores");
  v.detail << " constant column and single-class labels score as the reference with an empty branch worth 0"
           << " (max err " << worst << ")";
}

void scale_benchmark(Verdict& v) {
  BenchSpec spec;
  spec.m = 126;
  spec.p = 310;
  spec.k = 103;
  spec.seed = 7;
  const auto start = Clock::now();
  const auto report = run_bench(spec);
  const double secs = seconds_since(start);
  v.require(secs < 600, "runtime");
  v.detail << " 126x310 k=103 loopback " << secs << " s, " << report.at("rounds").get<std::uint64_t>() << " rounds, "
           << report.at("bytes_per_party").at(0).get<std::uint64_t>() << " bytes sent per party";
}

}  // namespace

int main() {
  report("example-1 bit-exactness", example_one);
  report("oracle equivalence (200 random instances)", oracle_equivalence);
  report("building-block exactness", building_blocks);
  report("communication cost", communication);
  report("privacy properties", privacy);
  report("degenerate inputs", degenerate);
  report("scale benchmark", scale_benchmark);
  return failures == 0 ? 0 : 1;
}
