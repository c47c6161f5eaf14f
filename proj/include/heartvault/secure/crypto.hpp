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
#include <optional>
#include <string_view>

#include "heartvault/common/bytes.hpp"

namespace hv::secure {

using Key32 = std::array<std::uint8_t, 32>;

Bytes random_bytes(std::size_t n);
Key32 sha256(ByteView data);
Key32 hmac_sha256(ByteView key, ByteView data);
Bytes hkdf_sha256(ByteView ikm, ByteView salt, std::string_view info, std::size_t length);
bool equal_ct(ByteView a, ByteView b);

/// X25519 key pair with raw 32-byte encodings.
class X25519 {
 public:
  static X25519 generate();
  static X25519 from_private(const Key32& priv);

  const Key32& public_key() const { return pub_; }
  const Key32& private_key() const { return priv_; }
  /// Throws CryptoFailure for a malformed or low-order peer value.
  Key32 agree(ByteView peer_public) const;

 private:
  Key32 priv_{};
  Key32 pub_{};
};

struct Sealed {
  Bytes ciphertext;
  std::array<std::uint8_t, 16> tag;
};

Sealed aes256gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext);
/// nullopt when the tag does not verify.
std::optional<Bytes> aes256gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView ciphertext,
                                    ByteView tag);

/// Encrypts `plaintext` to an X25519 public key: ephemeral public (32) |
/// ciphertext | tag (16). The content key is HKDF(shared, salt = eph | recipient).
Bytes wrap_to(const Key32& recipient_public, ByteView plaintext, std::string_view context);
/// Throws AuthFailure on any mismatch.
Bytes unwrap_with(const X25519& recipient, ByteView wrapped, std::string_view context);

}  // namespace hv::secure
