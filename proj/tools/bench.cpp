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

// Secure channel timing per mode, and optionally one plaintext vs encrypted
// comparison run on a synthetic window.

#include <iostream>

#include "CLI11.hpp"

#include "heartvault/fhe/pipeline.hpp"
#include "heartvault/secure/bench.hpp"
#include "heartvault/signal/synth.hpp"
#include "tool_util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks"};
  std::vector<std::size_t> payloads{64, 1024, 16384};
  std::size_t records = 1000;
  bool as_json = false, compare = false;
  double duration = 30.0, fs = 50.0;
  std::string profile_path;
  app.add_option("--payload", payloads, "Payload sizes in bytes (repeatable)");
  app.add_option("--records", records, "Records per mode")->check(CLI::PositiveNumber);
  app.add_flag("--json", as_json, "JSON output");
  app.add_flag("--compare", compare, "Also run plaintext vs encrypted analysis on a synthetic window");
  app.add_option("--duration", duration, "Comparison window length in seconds");
  app.add_option("--fs", fs, "Comparison sampling rate");
  app.add_option("--profile", profile_path, "Synthesis profile for the comparison window");
  CLI11_PARSE(app, argc, argv);

  return hvtool::guarded("bench", [&] {
    std::vector<hv::secure::BenchReport> reports;
    for (auto p : payloads) reports.push_back(hv::secure::bench_modes(p, records));
    nlohmann::json out{{"channel", nlohmann::json::array()}};
    for (const auto& r : reports) out["channel"].push_back(hv::secure::to_json(r));
    if (!as_json) std::cout << hv::secure::format_table(reports);

    if (compare) {
      hv::signal::SynthProfile profile;
      if (!profile_path.empty()) profile = hv::signal::load_profile(profile_path);
      const auto window = hv::signal::synth(profile, duration, fs);
      const auto rep = hv::fhe::compare_pipelines(window, hv::fhe::HeParams{});
      out["comparison"] = hv::fhe::to_json(rep);
      if (!as_json) std::cout << "\n" << hv::fhe::format_report(rep);
    }
    if (as_json) std::cout << out.dump(2) << "\n";
    return 0;
  });
}
