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

#include "heartvault/secure/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>

namespace hv::secure {

namespace {

using Clock = std::chrono::steady_clock;

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

std::pair<SessionKey, SessionKey> connect(Mode mode, const Key32& psk) {
  auto [a, b] = memory_pair();
  auto responder = std::async(std::launch::async, [&, t = b.get()] {
    return mode == Mode::Ecdh ? handshake(Role::Responder, *t) : handshake_psk(Role::Responder, *t, psk);
  });
  auto ki = mode == Mode::Ecdh ? handshake(Role::Initiator, *a) : handshake_psk(Role::Initiator, *a, psk);
  return {ki, responder.get()};
}

ModeBench run(Mode mode, std::size_t payload_size, std::size_t n) {
  const auto psk = [] {
    Key32 k{};
    const auto r = random_bytes(32);
    std::copy(r.begin(), r.end(), k.begin());
    return k;
  }();
  ModeBench out{mode, 0.0, 0, 0, 0, 0, 0};
  std::pair<SessionKey, SessionKey> keys;
  if (mode == Mode::Ecdh) {
    std::vector<double> setups;
    for (int i = 0; i < 5; ++i) {
      const auto t0 = Clock::now();
      keys = connect(mode, psk);
      setups.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    out.setup_ms = quantile(setups, 0.5);
  } else {
    keys = connect(mode, psk);
  }

  Sealer sealer(keys.first, Direction::InitiatorToResponder);
  Opener opener(keys.second, Direction::InitiatorToResponder);
  const Bytes payload = random_bytes(payload_size);
  std::vector<double> seal_us, open_us;
  seal_us.reserve(n);
  open_us.reserve(n);
  double total_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    auto rec = sealer.seal_next(RecordKind::RawFrame, "bench", i, payload);
    const auto t1 = Clock::now();
    auto pt = opener.open(rec);
    const auto t2 = Clock::now();
    seal_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    open_us.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
    total_s += std::chrono::duration<double>(t2 - t0).count();
  }
  out.seal_median_us = quantile(seal_us, 0.5);
  out.seal_p95_us = quantile(seal_us, 0.95);
  out.open_median_us = quantile(open_us, 0.5);
  out.open_p95_us = quantile(open_us, 0.95);
  out.throughput_rps = total_s > 0 ? static_cast<double>(n) / total_s : 0.0;
  return out;
}

}  // namespace

BenchReport bench_modes(std::size_t payload_size, std::size_t n_records) {
  BenchReport r{payload_size, n_records, {}};
  r.modes.push_back(run(Mode::PreShared, payload_size, n_records));
  r.modes.push_back(run(Mode::Ecdh, payload_size, n_records));
  return r;
}

nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : r.modes) {
    modes.push_back({{"mode", mode_name(m.mode)},
                     {"setup_ms", m.setup_ms},
                     {"seal_median_us", m.seal_median_us},
                     {"seal_p95_us", m.seal_p95_us},
                     {"open_median_us", m.open_median_us},
                     {"open_p95_us", m.open_p95_us},
                     {"throughput_rps", m.throughput_rps}});
  }
  return {{"payload_size", r.payload_size}, {"n_records", r.n_records}, {"modes", modes}};
}

std::string format_table(const std::vector<BenchReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %9s %10s %10s %10s %10s %10s %12s\n", "mode", "payload", "setup_ms",
                "seal_p50", "seal_p95", "open_p50", "open_p95", "records/s");
  out += line;
  for (const auto& r : reports) {
    for (const auto& m : r.modes) {
      std::snprintf(line, sizeof line, "%-10s %9zu %10.3f %10.2f %10.2f %10.2f %10.2f %12.0f\n", mode_name(m.mode),
                    r.payload_size, m.setup_ms, m.seal_median_us, m.seal_p95_us, m.open_median_us, m.open_p95_us,
                    m.throughput_rps);
      out += line;
    }
  }
  return out;
}

}  // namespace hv::secure
