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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heartvault/fhe/backend.hpp"
#include "heartvault/fhe/pipeline.hpp"
#include "heartvault/gateway/protocol.hpp"

namespace hv::gateway {

/// The doctor-side secrets: the escrow key pair the gateway wraps session
/// keys to, and the CKKS key set.
struct AnalystKeys {
  secure::X25519 escrow = secure::X25519::generate();
  std::shared_ptr<const fhe::HeBackend> he;  // must be able to decrypt
};

/// Key directory layout: escrow.key (hex private), escrow.pub (hex public),
/// he.public and he.secret (CKKS key files). Secret files are mode 0600.
void write_keys(const std::filesystem::path& dir, const secure::X25519& escrow, const fhe::CkksBackend& he);
AnalystKeys load_keys(const std::filesystem::path& dir);
secure::Key32 read_escrow_public(const std::filesystem::path& file);

struct AnalysisReport {
  AnalysisRequest request;
  std::vector<std::string> sessions;
  std::size_t blocks = 0;
  std::size_t samples = 0;
  double fs_hz = 0.0;
  bool lead_off = false;  // some block of the range contains a lead-off event
  std::optional<fhe::WindowResults> plaintext;
  std::optional<fhe::WindowResults> encrypted;
  std::optional<fhe::ComparisonReport> comparison;  // Compare mode
};

nlohmann::json to_json(const AnalysisReport& r);

/// Turns the gateway's analysis.run bundle into the report: unwraps the
/// session keys and decodes the stored records for the plaintext path,
/// decrypts the evaluator outputs for the encrypted path.
AnalysisReport finish_analysis(const nlohmann::json& bundle, const AnalystKeys& keys);

/// POST {"method", "params"} to http://<address>/api. Gateway errors are
/// rethrown with their code; connection failures are IoFailure.
nlohmann::json api_call(const std::string& address, const std::string& method, const nlohmann::json& params);

/// Runs analysis.run against the gateway and finishes it locally.
AnalysisReport run_analysis(const std::string& gateway, const AnalysisRequest& request, const AnalystKeys& keys);

/// Serves the gateway API on `listen` for the console: analysis.run returns
/// the finished report, everything else (and /stream) is forwarded. Blocks
/// until `stop` becomes true.
void serve_proxy(const std::string& listen, const std::string& gateway, const AnalystKeys& keys,
                 const std::atomic<bool>& stop);

/// Parses an error code name as produced by to_string(ErrorCode).
std::optional<ErrorCode> error_code_from_name(std::string_view name);

}  // namespace hv::gateway
