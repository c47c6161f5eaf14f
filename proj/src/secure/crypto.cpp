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

#include "heartvault/secure/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include <algorithm>
#include <memory>

#include "heartvault/common/error.hpp"

namespace hv::secure {

namespace {

[[noreturn]] void fail(const char* what) { throw Error(ErrorCode::CryptoFailure, what); }

struct PkeyFree {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxFree {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

int isize(std::size_t n) { return static_cast<int>(n); }

}  // namespace

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), isize(n)) != 1) fail("RAND_bytes");
  return out;
}

Key32 sha256(ByteView data) {
  Key32 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) fail("sha256");
  return out;
}

Key32 hmac_sha256(ByteView key, ByteView data) {
  Key32 out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), isize(key.size()), data.data(), data.size(), out.data(), &len)) {
    fail("hmac");
  }
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, std::string_view info, std::size_t length) {
  PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  Bytes out(length);
  std::size_t outlen = length;
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), isize(salt.size())) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), isize(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const unsigned char*>(info.data()),
                                  isize(info.size())) <= 0 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &outlen) <= 0 || outlen != length) {
    fail("hkdf");
  }
  return out;
}

bool equal_ct(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

X25519 X25519::generate() {
  PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_X25519, nullptr));
  EVP_PKEY* raw = nullptr;
  if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 || EVP_PKEY_keygen(ctx.get(), &raw) <= 0) fail("x25519 keygen");
  Pkey key(raw);
  X25519 out;
  std::size_t len = 32;
  if (EVP_PKEY_get_raw_private_key(key.get(), out.priv_.data(), &len) != 1 || len != 32) fail("x25519 export");
  len = 32;
  if (EVP_PKEY_get_raw_public_key(key.get(), out.pub_.data(), &len) != 1 || len != 32) fail("x25519 export");
  return out;
}

X25519 X25519::from_private(const Key32& priv) {
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, priv.data(), priv.size()));
  if (!key) fail("x25519 import");
  X25519 out;
  out.priv_ = priv;
  std::size_t len = 32;
  if (EVP_PKEY_get_raw_public_key(key.get(), out.pub_.data(), &len) != 1) fail("x25519 export");
  return out;
}

Key32 X25519::agree(ByteView peer_public) const {
  if (peer_public.size() != 32) fail("x25519 peer value must be 32 bytes");
  Pkey self(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, priv_.data(), priv_.size()));
  Pkey peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
  if (!self || !peer) fail("x25519 import");
  PkeyCtx ctx(EVP_PKEY_CTX_new(self.get(), nullptr));
  Key32 out{};
  std::size_t len = out.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) <= 0 ||
      EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0 || len != 32) {
    fail("x25519 agreement");
  }
  return out;
}

Sealed aes256gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext) {
  if (key.size() != 32 || nonce.size() != 12) fail("gcm key/nonce size");
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  Sealed out;
  out.ciphertext.resize(plaintext.size());
  int len = 0;
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1 ||
      (!aad.empty() && EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), isize(aad.size())) != 1) ||
      (!plaintext.empty() && EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                                               isize(plaintext.size())) != 1) ||
      EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + plaintext.size(), &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.tag.data()) != 1) {
    fail("gcm seal");
  }
  return out;
}

std::optional<Bytes> aes256gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView ciphertext,
                                    ByteView tag) {
  if (key.size() != 32 || nonce.size() != 12 || tag.size() != 16) return std::nullopt;
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  Bytes out(ciphertext.size());
  int len = 0;
  Bytes tag_copy(tag.begin(), tag.end());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1 ||
      (!aad.empty() && EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), isize(aad.size())) != 1) ||
      (!ciphertext.empty() &&
       EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(), isize(ciphertext.size())) != 1) ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag_copy.data()) != 1 ||
      EVP_DecryptFinal_ex(ctx.get(), out.data() + ciphertext.size(), &len) != 1) {
    return std::nullopt;
  }
  return out;
}

namespace {

Bytes wrap_key(const Key32& shared, const Key32& eph, const Key32& recipient, std::string_view context) {
  Bytes salt(eph.begin(), eph.end());
  salt.insert(salt.end(), recipient.begin(), recipient.end());
  return hkdf_sha256(shared, salt, context, 32);
}

}  // namespace

Bytes wrap_to(const Key32& recipient_public, ByteView plaintext, std::string_view context) {
  const auto eph = X25519::generate();
  const auto k = wrap_key(eph.agree(recipient_public), eph.public_key(), recipient_public, context);
  const Bytes nonce(12, 0);  // the content key is single-use
  const auto s = aes256gcm_seal(k, nonce, {}, plaintext);
  Bytes out(eph.public_key().begin(), eph.public_key().end());
  out.insert(out.end(), s.ciphertext.begin(), s.ciphertext.end());
  out.insert(out.end(), s.tag.begin(), s.tag.end());
  return out;
}

Bytes unwrap_with(const X25519& recipient, ByteView wrapped, std::string_view context) {
  if (wrapped.size() < 48) throw Error(ErrorCode::AuthFailure, "wrapped blob too short");
  Key32 eph{};
  std::copy_n(wrapped.begin(), 32, eph.begin());
  Key32 shared{};
  try {
    shared = recipient.agree(eph);
  } catch (const Error&) {
    throw Error(ErrorCode::AuthFailure, "bad ephemeral value");
  }
  const auto k = wrap_key(shared, eph, recipient.public_key(), context);
  const Bytes nonce(12, 0);
  auto pt = aes256gcm_open(k, nonce, {}, wrapped.subspan(32, wrapped.size() - 48), wrapped.last(16));
  if (!pt) throw Error(ErrorCode::AuthFailure, "unwrap failed");
  return *pt;
}

}  // namespace hv::secure
