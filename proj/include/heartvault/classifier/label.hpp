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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace hv {

/// Beat classes: normal, left/right bundle branch block, atrial and
/// ventricular premature contraction.
enum class ClassLabel : std::uint8_t { N = 0, L = 1, R = 2, A = 3, V = 4 };

inline constexpr std::size_t kNumClasses = 5;
inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses{ClassLabel::N, ClassLabel::L,
                                                                 ClassLabel::R, ClassLabel::A,
                                                                 ClassLabel::V};

inline constexpr char label_char(ClassLabel c) { return "NLRAV"[static_cast<int>(c)]; }

inline std::optional<ClassLabel> label_from_char(char c) {
  switch (c) {
    case 'N': return ClassLabel::N;
    case 'L': return ClassLabel::L;
    case 'R': return ClassLabel::R;
    case 'A': return ClassLabel::A;
    case 'V': return ClassLabel::V;
    default: return std::nullopt;
  }
}

}  // namespace hv
