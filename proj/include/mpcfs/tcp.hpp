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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mpcfs/errors.hpp"
#include "mpcfs/sharing.hpp"
#include "mpcfs/transport.hpp"

namespace mpcfs {

struct PartyEndpoint {
  PartyId party;
  std::string address;  // host:port
};

namespace detail {

inline std::pair<std::string, std::string> split_host_port(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw UsageError("address '" + address + "' is not host:port");
  }
  return {address.substr(0, colon), address.substr(colon + 1)};
}

inline sockaddr_in resolve(const std::string& address) {
  const auto [host, port] = split_host_port(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw UsageError("cannot resolve '" + address + "'");
  }
  sockaddr_in sa{};
  std::memcpy(&sa, res->ai_addr, sizeof(sa));
  freeaddrinfo(res);
  return sa;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }
  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline void write_all(int fd, const std::byte* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) throw TransportError(std::string("tcp send failed: ") + std::strerror(errno));
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

inline void read_all(int fd, std::byte* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) throw TransportError("tcp connection closed by peer");
    if (r < 0) throw TransportError(std::string("tcp recv failed: ") + std::strerror(errno));
    data += r;
    n -= static_cast<std::size_t>(r);
  }
}

}  // namespace detail

// Bidirectional TCP channel. Sends go through a writer thread.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(detail::Fd fd) : fd_(std::move(fd)) {
    int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    writer_ = std::thread([this] { write_loop(); });
  }
  ~TcpChannel() override {
    close();
    if (writer_.joinable()) writer_.join();
  }

  void send(std::vector<std::byte> frame) override {
    {
      std::lock_guard lock(mu_);
      if (error_) throw TransportError(*error_);
      if (closing_) throw TransportError("send on closed tcp channel");
      queue_.push_back(std::move(frame));
    }
    cv_.notify_one();
  }

  std::vector<std::byte> recv() override {
    std::vector<std::byte> frame(kFrameHeaderBytes);
    detail::read_all(fd_.get(), frame.data(), kFrameHeaderBytes);
    const auto len = get_le(frame, 0, 4);
    if (len > (std::uint64_t{1} << 31)) throw TransportError("tcp frame too large");
    frame.resize(kFrameHeaderBytes + len);
    detail::read_all(fd_.get(), frame.data() + kFrameHeaderBytes, len);
    return frame;
  }

  void close() override {
    {
      std::lock_guard lock(mu_);
      closing_ = true;
    }
    cv_.notify_one();
  }

 private:
  void write_loop() {
    for (;;) {
      std::vector<std::byte> frame;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return !queue_.empty() || closing_; });
        if (queue_.empty()) break;
        frame = std::move(queue_.front());
        queue_.pop_front();
      }
      try {
        detail::write_all(fd_.get(), frame.data(), frame.size());
      } catch (const TransportError& e) {
        std::lock_guard lock(mu_);
        error_ = e.what();
        queue_.clear();
        break;
      }
    }
    ::shutdown(fd_.get(), SHUT_WR);
  }

  detail::Fd fd_;
  std::thread writer_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::byte>> queue_;
  bool closing_ = false;
  std::optional<std::string> error_;
};

// Listening socket; bind to port 0 to get an ephemeral port.
class TcpListener {
 public:
  explicit TcpListener(const std::string& address) {
    auto sa = detail::resolve(address);
    fd_ = detail::Fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd_) throw TransportError("socket() failed");
    int one = 1;
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0 || ::listen(fd_.get(), 8) != 0) {
      throw TransportError("cannot listen on " + address + ": " + std::strerror(errno));
    }
    socklen_t len = sizeof(sa);
    ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    host_ = detail::split_host_port(address).first;
  }

  std::uint16_t port() const noexcept { return port_; }
  std::string address() const { return host_ + ":" + std::to_string(port_); }

  // Returns an accepted socket or an empty Fd on timeout.
  detail::Fd accept_until(std::chrono::steady_clock::time_point deadline) {
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return {};
      pollfd p{fd_.get(), POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) return {};
      detail::Fd c(::accept(fd_.get(), nullptr, nullptr));
      if (c) return c;
    }
  }

 private:
  detail::Fd fd_;
  std::uint16_t port_ = 0;
  std::string host_;
};

struct TcpMeshOptions {
  std::chrono::milliseconds connect_timeout = std::chrono::seconds(30);
};

// Full mesh for one party. For each pair the lower party id dials; the
// dialer announces itself with a single id byte before the handshake.
inline std::map<int, std::unique_ptr<Channel>> connect_tcp_mesh(PartyId self, const std::array<PartyEndpoint, 3>& endpoints,
                                                                TcpListener* listener = nullptr,
                                                                TcpMeshOptions options = {}) {
  const auto deadline = std::chrono::steady_clock::now() + options.connect_timeout;
  std::map<int, std::unique_ptr<Channel>> out;

  std::optional<TcpListener> own_listener;
  if (listener == nullptr && self.value() > 1) {
    own_listener.emplace(endpoints[self.index()].address);
    listener = &*own_listener;
  }

  for (PartyId peer : kAllParties) {
    if (peer.value() <= self.value()) continue;
    const auto sa = detail::resolve(endpoints[peer.index()].address);
    detail::Fd fd;
    while (!fd) {
      detail::Fd s(::socket(AF_INET, SOCK_STREAM, 0));
      if (::connect(s.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) == 0) {
        fd = std::move(s);
        break;
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        throw ConnectionError(peer.value(), "unreachable at " + endpoints[peer.index()].address);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    const std::byte id{static_cast<std::uint8_t>(self.value())};
    detail::write_all(fd.get(), &id, 1);
    out[peer.value()] = std::make_unique<TcpChannel>(std::move(fd));
  }

  for (int expected = 1; expected < self.value(); ++expected) {
    auto fd = listener->accept_until(deadline);
    if (!fd) {
      for (int p = 1; p < self.value(); ++p) {
        if (!out.count(p)) throw ConnectionError(p, "never connected");
      }
    }
    std::byte id{};
    detail::read_all(fd.get(), &id, 1);
    const int who = std::to_integer<int>(id);
    if (who < 1 || who >= self.value() || out.count(who)) throw ConnectionError(who, "unexpected dialer");
    out[who] = std::make_unique<TcpChannel>(std::move(fd));
  }
  return out;
}

}  // namespace mpcfs
