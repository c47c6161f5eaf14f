/*
 * Copyright 2026 The heartvault Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "heartvault/common/bytes.hpp"

namespace hv::secure {

/// Duplex byte channel. recv_exact and send throw TransportClosed once the
/// peer or the local side has closed.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(ByteView data) = 0;
  virtual void recv_exact(std::span<std::uint8_t> out) = 0;
  virtual void close() = 0;

  Bytes recv(std::size_t n) {
    Bytes b(n);
    recv_exact(b);
    return b;
  }
};

/// Called on every send of side `from` (0 or 1) before delivery; may edit the
/// bytes in flight.
using Tamper = std::function<void(int from, Bytes& data)>;

/// In-process pipe pair; side 0 is the first element.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> memory_pair(Tamper tamper = {});

/// Blocking TCP socket. Owns the descriptor.
class SocketTransport final : public Transport {
 public:
  explicit SocketTransport(int fd) : fd_(fd) {}
  ~SocketTransport() override;
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  void send(ByteView data) override;
  void recv_exact(std::span<std::uint8_t> out) override;
  void close() override;
  int fd() const { return fd_; }

 private:
  int fd_;
};

/// "host:port" or ":port"; throws IoFailure.
std::unique_ptr<SocketTransport> tcp_connect(const std::string& address);

class TcpListener {
 public:
  /// Port 0 picks a free port; see port().
  explicit TcpListener(const std::string& address);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Blocks; returns nullptr once shutdown() has been called.
  std::unique_ptr<SocketTransport> accept();
  void shutdown();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::pair<std::string, std::uint16_t> split_address(const std::string& address);

void send_frame16(Transport& t, ByteView payload);
Bytes recv_frame16(Transport& t, std::size_t max_len);
void send_frame32(Transport& t, ByteView payload);
Bytes recv_frame32(Transport& t, std::size_t max_len);

}  // namespace hv::secure
