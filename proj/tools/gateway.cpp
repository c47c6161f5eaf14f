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

// Gateway server: agent sessions in, ciphertext to the store, JSON API and
// event stream out.

#include <chrono>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "heartvault/gateway/analyst.hpp"
#include "heartvault/gateway/server.hpp"
#include "tool_util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ECG gateway"};
  hv::gateway::GatewayConfig cfg;
  std::string store, mode = "ecdh", psk_hex, psk_file, keys_dir, escrow_pub, he_public, model;
  std::string patients;
  bool no_autostart = false;
  app.add_option("--listen", cfg.listen, "Agent address host:port");
  app.add_option("--api", cfg.api, "JSON API and stream address host:port");
  app.add_option("--store", store, "Store directory")->required();
  app.add_option("--mode", mode, "Key agreement: ecdh or preshared")->check(CLI::IsMember({"ecdh", "preshared"}));
  app.add_option("--psk", psk_hex, "Pre-shared key, 64 hex characters");
  app.add_option("--psk-file", psk_file, "File holding the pre-shared key");
  app.add_option("--analyst-keys", keys_dir, "Analyst key directory (reads escrow.pub and he.public)");
  app.add_option("--analyst-escrow-pub", escrow_pub, "Analyst escrow public key file (hex)");
  app.add_option("--analyst-he-pub", he_public, "Analyst CKKS public key file");
  app.add_option("--model", model, "Beat classifier model file");
  app.add_option("--patients", patients, "Comma-separated patients that may be watched before they connect");
  app.add_option("--stream-rate", cfg.stream_rate_hz, "Stream events per second")->check(CLI::PositiveNumber);
  app.add_option("--block", cfg.block_s, "Analysis block length in seconds")->check(CLI::PositiveNumber);
  app.add_flag("--no-autostart", no_autostart, "New sessions wait for session.control start");
  CLI11_PARSE(app, argc, argv);

  return hvtool::guarded("gateway", [&] {
    cfg.store_dir = store;
    cfg.mode = *hv::secure::mode_from_name(mode);
    if (!psk_file.empty()) psk_hex = hvtool::read_trimmed(psk_file);
    if (!psk_hex.empty()) cfg.psk = hv::secure::parse_psk(psk_hex);
    if (!keys_dir.empty()) {
      if (escrow_pub.empty()) escrow_pub = (std::filesystem::path(keys_dir) / "escrow.pub").string();
      if (he_public.empty()) he_public = (std::filesystem::path(keys_dir) / "he.public").string();
    }
    if (escrow_pub.empty() || he_public.empty()) {
      throw hv::Error(hv::ErrorCode::BadRequest, "give --analyst-keys or both --analyst-escrow-pub and --analyst-he-pub");
    }
    cfg.analyst_escrow_public = hv::gateway::read_escrow_public(escrow_pub);
    cfg.analyst_he_public = hvtool::read_file(he_public);
    if (!model.empty()) cfg.model = std::make_shared<const hv::classifier::CnnModel>(hv::classifier::CnnModel::load(model));
    std::stringstream ss(patients);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) cfg.patients.push_back(p);
    }
    cfg.autostart = !no_autostart;

    hv::gateway::Gateway gw(cfg);
    hvtool::install_stop_handlers();
    gw.start();
    std::cerr << "gateway: agents on port " << gw.agent_port() << ", API on port " << gw.api_port() << "\n";
    while (!hvtool::stop_flag()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    std::cerr << "gateway: stopping\n";
    gw.stop();
    return 0;
  });
}
