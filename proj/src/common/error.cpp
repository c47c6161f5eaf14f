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

#include "heartvault/common/error.hpp"

namespace hv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SampleOutOfRange: return "SampleOutOfRange";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::QuantizationOverflow: return "QuantizationOverflow";
    case ErrorCode::InvalidFilterSpec: return "InvalidFilterSpec";
    case ErrorCode::UnstableDesign: return "UnstableDesign";
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPeaks: return "TooFewPeaks";
    case ErrorCode::ClassMissing: return "ClassMissing";
    case ErrorCode::UnnormalizedInput: return "UnnormalizedInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadModelFile: return "BadModelFile";
    case ErrorCode::ConfirmFailure: return "ConfirmFailure";
    case ErrorCode::TransportClosed: return "TransportClosed";
    case ErrorCode::SeqReplay: return "SeqReplay";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::CryptoFailure: return "CryptoFailure";
    case ErrorCode::UnsupportedParams: return "UnsupportedParams";
    case ErrorCode::LevelExhausted: return "LevelExhausted";
    case ErrorCode::RotationUnsupported: return "RotationUnsupported";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::ParamsMismatch: return "ParamsMismatch";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::UnknownPatient: return "UnknownPatient";
    case ErrorCode::BadRequest: return "BadRequest";
  }
  return "Unknown";
}

}  // namespace hv
