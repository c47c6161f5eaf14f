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

// Analyst side: key generation, range analysis against a gateway, and a
// proxy that serves finished reports to the console.

#include <iostream>

#include "CLI11.hpp"

#include "heartvault/gateway/analyst.hpp"
#include "heartvault/secure/crypto.hpp"
#include "tool_util.hpp"

namespace {

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw hv::Error(hv::ErrorCode::BadRequest, "--range wants T0,T1 in ms");
  try {
    return {std::stoull(s.substr(0, comma)), std::stoull(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw hv::Error(hv::ErrorCode::BadRequest, "--range wants T0,T1 in ms");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECG analyst"};
  app.require_subcommand(1);

  std::string keys_dir = "analyst-keys";
  hv::fhe::HeParams params;
  std::uint64_t seed = 0;
  auto* keygen = app.add_subcommand("keygen", "Generate the escrow pair and a CKKS key set");
  keygen->add_option("--keys", keys_dir, "Output directory");
  keygen->add_option("--slots", params.slot_count, "CKKS slot count (power of two)");
  keygen->add_option("--scale-bits", params.scale_bits, "CKKS scale in bits");
  keygen->add_option("--seed", seed, "Deterministic key generation");

  std::string gateway = "127.0.0.1:7701", patient, range, analyses = "peaks,stats,frequency,hrv", mode = "compare";
  bool as_json = false;
  auto* run = app.add_subcommand("run", "Analyse a patient's time range");
  run->add_option("--gateway", gateway, "Gateway API address host:port");
  run->add_option("--patient", patient, "Patient id")->required();
  run->add_option("--range", range, "T0,T1 in ms since the epoch")->required();
  run->add_option("--analyses", analyses, "Comma-separated: peaks,stats,frequency,hrv");
  run->add_option("--mode", mode, "plaintext, encrypted or compare");
  run->add_option("--keys", keys_dir, "Key directory");
  run->add_flag("--json", as_json, "Print the report as JSON");

  std::string listen = "127.0.0.1:7702";
  auto* serve = app.add_subcommand("serve", "Serve the API to the console, finishing analyses locally");
  serve->add_option("--listen", listen, "Address host:port");
  serve->add_option("--gateway", gateway, "Gateway API address host:port");
  serve->add_option("--keys", keys_dir, "Key directory");

  CLI11_PARSE(app, argc, argv);

  return hvtool::guarded("analyst", [&] {
    if (*keygen) {
      if (keygen->count("--seed")) params.seed = seed;
      params.validate();
      auto escrow = hv::secure::X25519::generate();
      if (params.seed) {
        const auto tag = "escrow:" + std::to_string(*params.seed);
        escrow = hv::secure::X25519::from_private(hv::secure::sha256(hv::Bytes(tag.begin(), tag.end())));
      }
      const auto he = hv::fhe::CkksBackend::generate(params);
      hv::gateway::write_keys(keys_dir, escrow, *he);
      std::cout << "wrote " << keys_dir << "/{escrow.key,escrow.pub,he.public,he.secret}\n";
      return 0;
    }
    const auto keys = hv::gateway::load_keys(keys_dir);
    if (*run) {
      hv::gateway::AnalysisRequest req;
      req.patient_id = patient;
      std::tie(req.t0_ms, req.t1_ms) = parse_range(range);
      req.analyses = hv::fhe::parse_analyses(analyses);
      req.mode = hv::gateway::analysis_mode_from_name(mode);
      const auto report = hv::gateway::run_analysis(gateway, req, keys);
      if (as_json) {
        std::cout << hv::gateway::to_json(report).dump(2) << "\n";
      } else if (report.comparison) {
        std::cout << "sessions " << report.sessions.size() << ", blocks " << report.blocks << ", samples "
                  << report.samples << (report.lead_off ? ", lead-off in range" : "") << "\n";
        std::cout << hv::fhe::format_report(*report.comparison);
      } else {
        std::cout << hv::gateway::to_json(report).dump(2) << "\n";
      }
      return 0;
    }
    hvtool::install_stop_handlers();
    std::cerr << "analyst: serving on " << listen << " for gateway " << gateway << "\n";
    hv::gateway::serve_proxy(listen, gateway, keys, hvtool::stop_flag());
    return 0;
  });
}
