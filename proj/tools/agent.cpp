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

// Patient agent: synthesizes (or replays) a marker-byte ECG stream and sends
// it to a gateway over the secure channel.

#include <iostream>

#include "CLI11.hpp"

#include "heartvault/gateway/agent.hpp"
#include "tool_util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ECG patient agent"};
  std::string profile_path, replay_path, connect = "127.0.0.1:7700", mode = "ecdh", psk_hex, psk_file;
  std::vector<std::string> lead_off;
  hv::gateway::AgentConfig cfg;
  app.add_option("--profile", profile_path, "Synthesis profile (key = value file)");
  app.add_option("--fs", cfg.fs_hz, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  app.add_option("--duration", cfg.duration_s, "Seconds of signal")->check(CLI::PositiveNumber);
  app.add_option("--connect", connect, "Gateway agent address host:port");
  app.add_option("--replay", replay_path, "Send this raw wire-byte file instead of synthesizing");
  app.add_option("--patient", cfg.patient_id, "Patient id");
  app.add_option("--mode", mode, "Key agreement: ecdh or preshared")->check(CLI::IsMember({"ecdh", "preshared"}));
  app.add_option("--psk", psk_hex, "Pre-shared key, 64 hex characters");
  app.add_option("--psk-file", psk_file, "File holding the pre-shared key");
  app.add_flag("--accelerated", cfg.accelerated, "Send as fast as possible instead of in real time");
  app.add_option("--lead-off", lead_off, "Inject a lead-off fault AT:SECONDS (repeatable)");
  app.add_option("--chunk", cfg.stream.chunk_samples, "Samples per wave chunk")->check(CLI::PositiveNumber);
  app.add_option("--t0", cfg.t0_ms, "Timestamp of the first sample in ms (default: now)");
  CLI11_PARSE(app, argc, argv);

  return hvtool::guarded("agent", [&] {
    if (!profile_path.empty()) cfg.profile = hv::signal::load_profile(profile_path);
    if (!replay_path.empty()) cfg.replay = hvtool::read_file(replay_path);
    cfg.mode = *hv::secure::mode_from_name(mode);
    if (!psk_file.empty()) psk_hex = hvtool::read_trimmed(psk_file);
    if (!psk_hex.empty()) cfg.psk = hv::secure::parse_psk(psk_hex);
    for (const auto& f : lead_off) {
      const auto colon = f.find(':');
      if (colon == std::string::npos) throw hv::Error(hv::ErrorCode::BadRequest, "--lead-off wants AT:SECONDS");
      cfg.stream.faults.push_back({std::stod(f.substr(0, colon)), std::stod(f.substr(colon + 1))});
    }
    auto transport = hv::secure::tcp_connect(connect);
    const auto rep = hv::gateway::run_agent(cfg, *transport);
    std::cout << nlohmann::json{{"session_id", rep.session_id},
                                {"patient_id", cfg.patient_id},
                                {"records", rep.records},
                                {"samples", rep.samples},
                                {"wire_bytes", rep.wire_bytes},
                                {"descriptor", hv::gateway::to_json(rep.descriptor)}}
                     .dump(2)
              << "\n";
    return 0;
  });
}
