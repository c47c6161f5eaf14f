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

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include <unistd.h>

#include "heartvault/common/error.hpp"
#include "heartvault/fhe/backend.hpp"
#include "heartvault/gateway/agent.hpp"
#include "heartvault/gateway/analyst.hpp"
#include "heartvault/gateway/server.hpp"

namespace hvtest {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "gw") {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("hv-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// One CKKS key set and escrow pair for the whole test binary.
inline const hv::gateway::AnalystKeys& analyst_keys() {
  static const hv::gateway::AnalystKeys keys = [] {
    hv::fhe::HeParams p;
    p.seed = 20240601;
    hv::gateway::AnalystKeys k;
    k.escrow = hv::secure::X25519::from_private(hv::secure::sha256(hv::Bytes{'a', 'n', 'a', 'l', 'y', 's', 't'}));
    k.he = hv::fhe::CkksBackend::generate(p);
    return k;
  }();
  return keys;
}

inline hv::gateway::GatewayConfig gateway_config(const fs::path& dir) {
  hv::gateway::GatewayConfig c;
  c.store_dir = dir;
  c.listen = "127.0.0.1:0";
  c.api = "127.0.0.1:0";
  c.analyst_escrow_public = analyst_keys().escrow.public_key();
  c.he_backend = analyst_keys().he;
  c.patients = {"patient-1", "patient-2"};
  return c;
}

inline hv::gateway::AgentConfig agent_config(const std::string& patient = "patient-1", double duration_s = 30.0) {
  hv::gateway::AgentConfig a;
  a.patient_id = patient;
  a.duration_s = duration_s;
  a.accelerated = true;
  a.t0_ms = 1'700'000'000'000ULL;
  return a;
}

struct InProcessRun {
  hv::gateway::AgentReport report;
  std::optional<hv::ErrorCode> agent_error;
};

/// Runs one agent against `gw` over an in-memory pipe and waits for the
/// gateway's session handler to finish.
inline InProcessRun run_in_process(hv::gateway::Gateway& gw, const hv::gateway::AgentConfig& cfg,
                                   hv::secure::Tamper tamper = {}) {
  auto [agent_side, gateway_side] = hv::secure::memory_pair(std::move(tamper));
  std::shared_ptr<hv::secure::Transport> g(std::move(gateway_side));
  std::thread handler([&gw, g] { gw.handle_session(g); });
  InProcessRun run;
  try {
    run.report = hv::gateway::run_agent(cfg, *agent_side);
  } catch (const hv::Error& e) {
    run.agent_error = e.code();
    agent_side->close();
  }
  handler.join();
  return run;
}

}  // namespace hvtest
