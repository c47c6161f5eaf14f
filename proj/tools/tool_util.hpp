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
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "heartvault/common/bytes.hpp"
#include "heartvault/common/error.hpp"

namespace hvtool {

inline hv::Bytes read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw hv::Error(hv::ErrorCode::IoFailure, "cannot read " + p.string());
  return hv::Bytes(std::istreambuf_iterator<char>(in), {});
}

inline std::string read_trimmed(const std::filesystem::path& p) {
  const auto b = read_file(p);
  std::string s(b.begin(), b.end());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

inline std::atomic<bool>& stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline void install_stop_handlers() {
  auto h = [](int) { stop_flag() = true; };
  std::signal(SIGINT, h);
  std::signal(SIGTERM, h);
}

/// Runs `body`, printing an Error as "<tool>: <code>: <message>" with exit code 1.
template <typename F>
int guarded(const char* tool, F&& body) {
  try {
    return body();
  } catch (const hv::Error& e) {
    std::cerr << tool << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << tool << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hvtool
