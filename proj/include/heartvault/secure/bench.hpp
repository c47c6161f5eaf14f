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

#include <string>
#include <vector>

#include "json.hpp"

#include "heartvault/secure/channel.hpp"

namespace hv::secure {

struct ModeBench {
  Mode mode;
  double setup_ms;  // 0 for PreShared by definition
  double seal_median_us;
  double seal_p95_us;
  double open_median_us;
  double open_p95_us;
  double throughput_rps;  // records / (total seal + open time)
};

struct BenchReport {
  std::size_t payload_size;
  std::size_t n_records;
  std::vector<ModeBench> modes;
};

/// Times both modes over in-process transports. The ECDH setup time is the
/// median of five handshakes.
BenchReport bench_modes(std::size_t payload_size, std::size_t n_records);

nlohmann::json to_json(const BenchReport& report);
std::string format_table(const std::vector<BenchReport>& reports);

}  // namespace hv::secure
