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

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/ring.hpp"

namespace mpcfs {

using Seed = std::array<std::uint8_t, 16>;

inline Seed seed_from_hex(std::string_view hex) {
  if (hex.size() != 32) throw UsageError("seed must be 32 hex characters");
  Seed s{};
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw UsageError(std::string("bad hex digit '") + c + "' in seed");
  };
  for (std::size_t i = 0; i < 16; ++i) {
    s[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return s;
}

inline std::string seed_to_hex(const Seed& s) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : s) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

inline Seed random_seed() {
  Seed s{};
  if (RAND_bytes(s.data(), static_cast<int>(s.size())) != 1) throw RandomnessError("RAND_bytes failed");
  return s;
}

// Seed derived deterministically from a test seed and a label.
inline Seed derive_seed(std::uint64_t master, std::uint64_t label) {
  Seed s{};
  std::uint64_t z = master ^ (label * 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < 16; i += 8) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = z;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x ^= x >> 31;
    for (std::size_t j = 0; j < 8; ++j) s[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
  }
  return s;
}

// AES-128 keyed PRF: F(key, tweak, counter) is the low 64 bits of
// AES_key(tweak || counter).
class Prf {
 public:
  explicit Prf(const Seed& key) : ctx_(EVP_CIPHER_CTX_new()) {
    if (!ctx_ || EVP_EncryptInit_ex(ctx_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
      throw RandomnessError("AES key setup failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx_.get(), 0);
  }

  void eval(std::uint64_t tweak, std::uint64_t counter, std::span<RingElement> out) const {
    if (out.empty()) return;
    std::vector<std::uint64_t> blocks(out.size() * 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
      blocks[2 * i] = tweak;
      blocks[2 * i + 1] = counter + i;
    }
    auto* bytes = reinterpret_cast<unsigned char*>(blocks.data());
    int len = 0;
    const int total = static_cast<int>(blocks.size() * sizeof(std::uint64_t));
    if (EVP_EncryptUpdate(ctx_.get(), bytes, &len, bytes, total) != 1 || len != total) {
      throw RandomnessError("AES evaluation failed");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = blocks[2 * i];
  }

  RingElement eval(std::uint64_t tweak, std::uint64_t counter) const {
    RingElement v;
    eval(tweak, counter, std::span<RingElement>(&v, 1));
    return v;
  }

 private:
  struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const noexcept { EVP_CIPHER_CTX_free(c); }
  };
  std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx_;
};

// Counter-mode generator over Prf; deterministic given the seed.
class Prg {
 public:
  explicit Prg(const Seed& seed) : prf_(seed) {}
  Prg() : Prg(random_seed()) {}

  RingElement next() { return prf_.eval(0, counter_++); }

  void fill(std::span<RingElement> out) {
    prf_.eval(0, counter_, out);
    counter_ += out.size();
  }

 private:
  Prf prf_;
  std::uint64_t counter_ = 0;
};

}  // namespace mpcfs
