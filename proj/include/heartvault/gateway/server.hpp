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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "heartvault/fhe/backend.hpp"
#include "heartvault/gateway/realtime.hpp"
#include "heartvault/secure/transport.hpp"
#include "heartvault/store/log.hpp"

namespace httplib {
class Server;
}

namespace hv::gateway {

struct GatewayConfig {
  std::string listen = "127.0.0.1:7700";  // agent sessions
  std::string api = "127.0.0.1:7701";     // JSON API and event stream
  std::filesystem::path store_dir;
  secure::Mode mode = secure::Mode::Ecdh;
  std::optional<secure::Key32> psk;
  secure::Key32 analyst_escrow_public{};
  Bytes analyst_he_public;  // CKKS public key file contents
  std::shared_ptr<const fhe::HeBackend> he_backend;  // takes precedence over analyst_he_public
  std::shared_ptr<const classifier::CnnModel> model;
  RealtimeConfig realtime;
  double stream_rate_hz = 25.0;
  double block_s = 10.0;  // analysis block length, capped at the slot count
  bool autostart = true;  // new sessions start acquiring
  std::vector<std::string> patients;  // enrolled; may be watched before their first session
  store::LogOptions log;
};

/// One line of the stream endpoint.
struct StreamEvent {
  std::uint64_t t_ms = 0;
  std::optional<double> raw;        // live path
  std::optional<double> decrypted;  // read back from the store and decrypted
  bool filtered = false;            // decrypted value passed through the display bandpass
  LiveMetrics metrics;
};

nlohmann::json to_json(const StreamEvent& e);

/// Bounded per-subscriber queue of JSON lines.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}
  void push(std::string line);
  /// Waits up to `timeout`; empty result on timeout or close.
  std::vector<std::string> drain(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  std::uint64_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

class Gateway {
 public:
  /// Opens the store, loads or creates the gateway secret and the session
  /// registry. Throws BadRequest for an incomplete configuration.
  explicit Gateway(GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Starts the agent listener and the HTTP server.
  void start();
  void stop();
  std::uint16_t agent_port() const;
  std::uint16_t api_port() const;

  /// Runs one agent session to completion on the calling thread.
  void handle_session(std::shared_ptr<secure::Transport> transport);

  /// The JSON API without HTTP. Throws Error.
  nlohmann::json call(const std::string& method, const nlohmann::json& params);

  std::shared_ptr<Subscription> subscribe(const std::string& patient_id);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);

  const store::RecordLog& log() const { return *log_; }
  const fhe::HeBackend& he() const { return *he_; }
  /// Blocks until no session is active or the timeout passes; true if idle.
  bool wait_idle(std::chrono::milliseconds timeout);
  /// Blocks until at least `count` sessions have ended.
  bool wait_sessions_ended(std::size_t count, std::chrono::milliseconds timeout);

 private:
  struct Session;

  nlohmann::json session_list();
  nlohmann::json session_control(const nlohmann::json& params);
  nlohmann::json analysis_run(const nlohmann::json& params);

  void register_session(const RegisteredSession& s);
  void publish(const std::string& patient_id, const std::string& line);
  void finish_block(Session& s);
  void process_record(Session& s, const secure::CipherRecord& rec, ByteView plain, std::uint64_t ingest_ms);

  GatewayConfig config_;
  std::unique_ptr<store::RecordLog> log_;
  std::shared_ptr<const fhe::HeBackend> he_;
  secure::Key32 secret_{};

  std::mutex registry_mu_;
  std::map<std::string, RegisteredSession> registry_;

  std::mutex sessions_mu_;
  std::condition_variable sessions_cv_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;  // by session id, active and finished
  std::size_t ended_ = 0;

  std::mutex subs_mu_;
  std::multimap<std::string, std::shared_ptr<Subscription>> subs_;

  std::unique_ptr<secure::TcpListener> listener_;
  std::unique_ptr<httplib::Server> http_;
  std::thread accept_thread_, http_thread_;
  std::mutex handlers_mu_;
  std::vector<std::thread> handlers_;
  std::atomic<bool> running_{false};
  std::uint16_t api_port_ = 0;
};

/// Maps an error code to the API's HTTP status.
int http_status(ErrorCode code);

}  // namespace hv::gateway
