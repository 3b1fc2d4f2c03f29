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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"

namespace mpcfs {

// A plaintext table as held by one data owner: feature columns and, for
// the label holder, a final integer class column in 1..n.
struct Dataset {
  std::vector<std::string> names;  // feature names; never shared
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows x cols, row-major
  std::vector<int> labels;     // empty when the owner holds no labels

  bool has_labels() const noexcept { return !labels.empty(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace detail

// Parses a CSV with a header row. Rows are numbered from 1 for the first
// data row; columns from 1.
inline Dataset parse_dataset(std::istream& in, bool with_labels, int classes) {
  if (with_labels && classes < 2) throw UsageError("need at least two classes");
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty dataset");
  for (auto name : detail::split_csv_line(line)) ds.names.emplace_back(detail::trim(name));
  const std::size_t width = ds.names.size();
  if (with_labels) {
    if (width < 2) throw IngestError("header needs at least one feature and a label column");
    ds.names.pop_back();
  }
  ds.cols = ds.names.size();
  if (ds.cols == 0) throw IngestError("no feature columns");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != width) {
      throw IngestError("ragged CSV at " + detail::where(row, std::min(cells.size(), width) + 1) + ": expected " +
                        std::to_string(width) + " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < ds.cols; ++c) {
      const auto cell = detail::trim(cells[c]);
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw IngestError("not a number at " + detail::where(row, c + 1) + ": '" + std::string(cell) + "'");
      }
      ds.values.push_back(v);
    }
    if (with_labels) {
      const auto cell = detail::trim(cells[width - 1]);
      int label = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw IngestError("label is not an integer at " + detail::where(row, width) + ": '" + std::string(cell) + "'");
      }
      if (label < 1 || label > classes) {
        throw IngestError("label " + std::to_string(label) + " at " + detail::where(row, width) + " outside 1.." +
                          std::to_string(classes));
      }
      ds.labels.push_back(label);
    }
  }
  ds.rows = row;
  if (ds.rows == 0) throw IngestError("dataset has no rows");
  return ds;
}

inline Dataset read_dataset(const std::filesystem::path& path, bool with_labels, int classes) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  return parse_dataset(in, with_labels, classes);
}

// Per-column z-scores, for owners that want standardized inputs.
inline void standardize(Dataset& ds) {
  for (std::size_t c = 0; c < ds.cols; ++c) {
    double mean = 0, sq = 0;
    for (std::size_t r = 0; r < ds.rows; ++r) mean += ds.at(r, c);
    mean /= static_cast<double>(ds.rows);
    for (std::size_t r = 0; r < ds.rows; ++r) sq += (ds.at(r, c) - mean) * (ds.at(r, c) - mean);
    const double sd = std::sqrt(sq / static_cast<double>(ds.rows));
    for (std::size_t r = 0; r < ds.rows; ++r) {
      ds.values[r * ds.cols + c] = sd > 0 ? (ds.at(r, c) - mean) / sd : 0.0;
    }
  }
}

inline std::vector<RingElement> encode_features(const Dataset& ds, const FixedPointParams& p) {
  std::vector<RingElement> out(ds.values.size());
  for (std::size_t r = 0; r < ds.rows; ++r) {
    for (std::size_t c = 0; c < ds.cols; ++c) {
      try {
        out[r * ds.cols + c] = encode(ds.at(r, c), p);
      } catch (const EncodingError& e) {
        throw IngestError("value overflow at " + detail::where(r + 1, c + 1) + ": " + e.what());
      }
    }
  }
  return out;
}

// m x (n-1) one-hot rows; class n is the all-zero row.
inline std::vector<RingElement> one_hot_labels(const std::vector<int>& labels, int classes) {
  std::vector<RingElement> out;
  out.reserve(labels.size() * static_cast<std::size_t>(classes - 1));
  for (int l : labels) {
    if (l < 1 || l > classes) throw UsageError("label " + std::to_string(l) + " outside 1.." + std::to_string(classes));
    for (int c = 1; c < classes; ++c) out.push_back(l == c ? 1 : 0);
  }
  return out;
}

// Decoded matrix as CSV with anonymous headers c1..ck.
inline void write_matrix_csv(std::ostream& out, std::size_t rows, std::size_t cols, const std::vector<RingElement>& values,
                             unsigned frac_bits) {
  for (std::size_t c = 0; c < cols; ++c) out << (c ? "," : "") << 'c' << c + 1;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto e = values[r * cols + c];
      std::to_chars_result res;
      if (frac_bits == 0) {
        res = std::to_chars(buf, buf + sizeof buf, to_signed(e));
      } else {
        res = std::to_chars(buf, buf + sizeof buf, decode(e, frac_bits));
      }
      out << (c ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace mpcfs
