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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/tensor.hpp"

namespace mpcfs {

// On-disk layout, all integers little-endian:
//   "MPCFS1" | u32 version | u8 party | u8 slot | u32 f | u64 rows | u64 cols
//   | rows*cols pairs (first, second) of u64, row-major.
inline constexpr char kShareMagic[6] = {'M', 'P', 'C', 'F', 'S', '1'};
inline constexpr std::uint32_t kShareFileVersion = 1;
inline constexpr std::size_t kShareHeaderBytes = 6 + 4 + 1 + 1 + 4 + 8 + 8;

enum class ShareSlot : std::uint8_t { kData = 0, kLabels = 1, kReduced = 2, kScores = 3, kIndices = 4 };

inline const char* slot_name(ShareSlot s) {
  switch (s) {
    case ShareSlot::kData: return "D";
    case ShareSlot::kLabels: return "L";
    case ShareSlot::kReduced: return "Dprime";
    case ShareSlot::kScores: return "G";
    case ShareSlot::kIndices: return "I";
  }
  return "?";
}

struct ShareFile {
  ShareSlot slot = ShareSlot::kData;
  std::uint32_t frac_bits = 0;  // scale of the stored values; 0 for integers
  SharedMatrix shares;

  PartyId party() const { return shares.owner; }
};

inline std::vector<std::byte> serialize_share_file(const ShareFile& f) {
  std::vector<std::byte> out;
  out.reserve(kShareHeaderBytes + 16 * f.shares.first.size());
  for (char c : kShareMagic) out.push_back(static_cast<std::byte>(c));
  put_le(out, kShareFileVersion, 4);
  put_le(out, static_cast<std::uint64_t>(f.shares.owner.value()), 1);
  put_le(out, static_cast<std::uint64_t>(f.slot), 1);
  put_le(out, f.frac_bits, 4);
  put_le(out, f.shares.rows);
  put_le(out, f.shares.cols);
  for (std::size_t i = 0; i < f.shares.first.size(); ++i) {
    put_le(out, f.shares.first[i]);
    put_le(out, f.shares.second[i]);
  }
  return out;
}

inline ShareFile parse_share_file(std::span<const std::byte> in, const std::string& origin = "share file") {
  if (in.size() < kShareHeaderBytes || std::memcmp(in.data(), kShareMagic, 6) != 0) {
    throw IntegrityError(origin + ": not an MPCFS1 share file");
  }
  const auto version = get_le(in, 6, 4);
  if (version != kShareFileVersion) {
    throw IntegrityError(origin + ": unsupported share file version " + std::to_string(version));
  }
  const auto party = static_cast<int>(get_le(in, 10, 1));
  const auto slot = get_le(in, 11, 1);
  if (party < 1 || party > 3) throw IntegrityError(origin + ": bad party id " + std::to_string(party));
  if (slot > static_cast<std::uint64_t>(ShareSlot::kIndices)) {
    throw IntegrityError(origin + ": unknown share slot " + std::to_string(slot));
  }
  ShareFile f;
  f.slot = static_cast<ShareSlot>(slot);
  f.frac_bits = static_cast<std::uint32_t>(get_le(in, 12, 4));
  const auto rows = get_le(in, 16), cols = get_le(in, 24);
  if (cols != 0 && rows > (in.size() - kShareHeaderBytes) / 16 / cols) {
    throw IntegrityError(origin + ": truncated share file");
  }
  if (in.size() != kShareHeaderBytes + 16 * rows * cols) {
    throw IntegrityError(origin + ": share file length does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  f.shares = SharedMatrix(PartyId(party), f.frac_bits, rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    f.shares.first[i] = get_le(in, kShareHeaderBytes + 16 * i);
    f.shares.second[i] = get_le(in, kShareHeaderBytes + 16 * i + 8);
  }
  return f;
}

inline void write_share_file(const std::filesystem::path& path, const ShareFile& f) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto bytes = serialize_share_file(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path.string());
}

inline ShareFile read_share_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_share_file(std::as_bytes(std::span<const char>(raw)), path.string());
}

struct Reconstructed {
  ShareSlot slot = ShareSlot::kData;
  std::uint32_t frac_bits = 0;
  std::size_t rows = 0, cols = 0;
  std::vector<RingElement> values;  // row-major
};

// Opens every entry from two or three parties' files of one matrix.
inline Reconstructed reconstruct_share_files(std::span<const ShareFile> files) {
  if (files.size() < 2) throw UsageError("reconstruction needs share files from at least two parties");
  const auto& a = files[0];
  for (const auto& f : files) {
    if (f.slot != a.slot) throw IntegrityError("share files hold different matrices");
    if (f.frac_bits != a.frac_bits) throw IntegrityError("share files disagree on fractional bits");
    if (f.shares.rows != a.shares.rows || f.shares.cols != a.shares.cols) {
      throw IntegrityError("share files disagree on dimensions");
    }
  }
  std::vector<SharedMatrix> views;
  for (const auto& f : files) views.push_back(f.shares);
  Reconstructed r;
  r.slot = a.slot;
  r.frac_bits = a.frac_bits;
  r.rows = a.shares.rows;
  r.cols = a.shares.cols;
  r.values = reconstruct_matrix(views);
  return r;
}

}  // namespace mpcfs
