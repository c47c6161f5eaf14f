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

#include "heartvault/secure/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "heartvault/common/error.hpp"

namespace hv::secure {

namespace {

struct PipeState {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> queue[2];  // queue[i] holds bytes readable by side i
  bool closed = false;
  Tamper tamper;
};

class MemoryEnd final : public Transport {
 public:
  MemoryEnd(std::shared_ptr<PipeState> s, int side) : s_(std::move(s)), side_(side) {}
  ~MemoryEnd() override { close(); }

  void send(ByteView data) override {
    Bytes copy(data.begin(), data.end());
    if (s_->tamper) s_->tamper(side_, copy);
    std::lock_guard lock(s_->mu);
    if (s_->closed) throw Error(ErrorCode::TransportClosed, "pipe closed");
    auto& q = s_->queue[1 - side_];
    q.insert(q.end(), copy.begin(), copy.end());
    s_->cv.notify_all();
  }

  void recv_exact(std::span<std::uint8_t> out) override {
    std::unique_lock lock(s_->mu);
    auto& q = s_->queue[side_];
    s_->cv.wait(lock, [&] { return q.size() >= out.size() || s_->closed; });
    if (q.size() < out.size()) throw Error(ErrorCode::TransportClosed, "pipe closed");
    std::copy_n(q.begin(), out.size(), out.begin());
    q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(out.size()));
  }

  void close() override {
    std::lock_guard lock(s_->mu);
    s_->closed = true;
    s_->cv.notify_all();
  }

 private:
  std::shared_ptr<PipeState> s_;
  int side_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> memory_pair(Tamper tamper) {
  auto s = std::make_shared<PipeState>();
  s->tamper = std::move(tamper);
  return {std::make_unique<MemoryEnd>(s, 0), std::make_unique<MemoryEnd>(s, 1)};
}

SocketTransport::~SocketTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void SocketTransport::send(ByteView data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::TransportClosed, std::string("send: ") + std::strerror(errno));
    off += static_cast<std::size_t>(n);
  }
}

void SocketTransport::recv_exact(std::span<std::uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + off, out.size() - off, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::TransportClosed, "connection closed");
    off += static_cast<std::size_t>(n);
  }
}

void SocketTransport::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::pair<std::string, std::uint16_t> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::BadRequest, "address must be host:port");
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "bad port in '" + address + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::BadRequest, "bad port in '" + address + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

std::unique_ptr<SocketTransport> tcp_connect(const std::string& address) {
  const auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::IoFailure, "cannot resolve " + host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string why = std::strerror(errno);
    freeaddrinfo(res);
    if (fd >= 0) ::close(fd);
    throw Error(ErrorCode::IoFailure, "connect " + address + ": " + why);
  }
  freeaddrinfo(res);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<SocketTransport>(fd);
}

TcpListener::TcpListener(const std::string& address) {
  const auto [host, port] = split_address(address);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::IoFailure, "socket");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error(ErrorCode::BadRequest, "listen address must be an IPv4 literal: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    throw Error(ErrorCode::IoFailure, "listen " + address + ": " + why);
  }
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  shutdown();
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<SocketTransport> TcpListener::accept() {
  while (true) {
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c >= 0) {
      int one = 1;
      setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return std::make_unique<SocketTransport>(c);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

void TcpListener::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void send_frame16(Transport& t, ByteView payload) {
  if (payload.size() > 0xFFFF) throw Error(ErrorCode::BadRequest, "frame too large");
  Bytes b;
  put_u16(b, static_cast<std::uint16_t>(payload.size()));
  put_bytes(b, payload);
  t.send(b);
}

Bytes recv_frame16(Transport& t, std::size_t max_len) {
  const auto h = t.recv(2);
  const std::size_t n = h[0] | (h[1] << 8);
  if (n > max_len) throw Error(ErrorCode::MalformedRecord, "frame length " + std::to_string(n));
  return t.recv(n);
}

void send_frame32(Transport& t, ByteView payload) {
  Bytes b;
  put_u32(b, static_cast<std::uint32_t>(payload.size()));
  put_bytes(b, payload);
  t.send(b);
}

Bytes recv_frame32(Transport& t, std::size_t max_len) {
  const auto h = t.recv(4);
  const std::size_t n = h[0] | (h[1] << 8) | (h[2] << 16) | (static_cast<std::size_t>(h[3]) << 24);
  if (n > max_len) throw Error(ErrorCode::MalformedRecord, "frame length " + std::to_string(n));
  return t.recv(n);
}

}  // namespace hv::secure
