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

#include <stdexcept>
#include <string>

namespace mpcfs {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an API contract (shape mismatch, k out of range, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Fixed-point input outside the admitted magnitude.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Replicated shares disagree on an overlapping component.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class RandomnessError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConnectionError : public TransportError {
 public:
  ConnectionError(int party, const std::string& what)
      : TransportError("party " + std::to_string(party) + ": " + what), party_(party) {}
  int party() const noexcept { return party_; }

 private:
  int party_;
};

class HandshakeError : public TransportError {
 public:
  using TransportError::TransportError;
};

// Malformed CSV / share file / config on ingestion.
class IngestError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpcfs
