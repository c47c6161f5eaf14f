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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heartvault/common/bytes.hpp"
#include "heartvault/secure/crypto.hpp"

namespace hv::fhe {

struct HeParams {
  std::size_t slot_count = 4096;
  int scale_bits = 40;
  int multiplicative_depth = 2;  // ct x ct levels
  int plaintext_depth = 3;       // ct x pt levels (masks, filters, DFT weights)
  double error_budget = 1e-3;
  std::optional<std::uint64_t> seed;  // deterministic keygen when set

  /// Throws UnsupportedParams.
  void validate() const;
  bool operator==(const HeParams&) const = default;
};

Bytes serialize(const HeParams& p);
HeParams parse_params(Reader& rd);

/// Backend-specific ciphertext body.
struct CipherPayload {
  virtual ~CipherPayload() = default;
};

/// Value handle: copies share the immutable payload.
struct CipherVector {
  int level = 0;                 // remaining ct x ct multiplications
  int pt_level = 0;              // remaining ct x pt multiplications
  std::uint32_t logical_len = 0;
  std::uint32_t extent = 0;      // slots at or beyond extent hold zeros
  std::shared_ptr<const CipherPayload> payload;
};

/// Slot-vector arithmetic contract shared by the CKKS and null schemes.
/// Binary operations align operands to the lower level first. Rotations are
/// cyclic over slot_count slots; positive steps move slot i+k to slot i.
class HeBackend {
 public:
  virtual ~HeBackend() = default;

  virtual const HeParams& params() const = 0;
  virtual std::string name() const = 0;
  virtual bool can_decrypt() const = 0;
  std::size_t slots() const { return params().slot_count; }
  /// SHA-256 over the backend name and the scheme-defining parameters.
  secure::Key32 fingerprint() const;

  virtual CipherVector encrypt(std::span<const double> values) const = 0;
  virtual std::vector<std::complex<double>> decrypt_complex(const CipherVector& ct) const = 0;
  /// Real parts of the first logical_len slots.
  std::vector<double> decrypt(const CipherVector& ct) const;

  virtual CipherVector add(const CipherVector& a, const CipherVector& b) const = 0;
  virtual CipherVector sub(const CipherVector& a, const CipherVector& b) const = 0;
  /// ct x ct; consumes one level.
  virtual CipherVector mul(const CipherVector& a, const CipherVector& b) const = 0;
  /// Slotwise product with a plaintext vector (zero padded); consumes one pt level.
  virtual CipherVector mul_plain(const CipherVector& a, std::span<const std::complex<double>> v) const = 0;
  /// sum_i cts[i] * pts[i]; one pt level for the whole sum.
  virtual CipherVector dot_plain(std::span<const CipherVector> cts,
                                 std::span<const std::vector<std::complex<double>>> pts) const = 0;
  /// sum_i cts[i] * coeffs[i]; one pt level for the whole sum.
  virtual CipherVector dot_scalar(std::span<const CipherVector> cts, std::span<const double> coeffs) const = 0;
  /// Exact integer multiple; free.
  virtual CipherVector mul_integer(const CipherVector& a, std::int64_t k) const = 0;
  /// Reinterprets the encoding so the represented values are divided by d; free.
  virtual CipherVector divide_exact(const CipherVector& a, double d) const = 0;
  /// Throws RotationUnsupported when no key path exists.
  virtual CipherVector rotate(const CipherVector& a, long steps) const = 0;

  virtual Bytes serialize_payload(const CipherVector& ct) const = 0;
  virtual CipherVector deserialize_payload(int level, std::uint32_t logical_len, ByteView payload) const = 0;

 protected:
  CipherVector scalar_multiply(const CipherVector& a, double c) const;
};

/// Envelope: fingerprint 32 | level u8 | logical_len u32 | payload_len u32 | payload.
Bytes to_envelope(const HeBackend& backend, const CipherVector& ct);
/// Throws ParamsMismatch for a foreign fingerprint, MalformedRecord for bad structure.
CipherVector from_envelope(const HeBackend& backend, ByteView bytes);

/// Plaintext stand-in: payload is the slot vector itself. Level accounting
/// and error behaviour follow the CKKS backend exactly; values are exact.
class NullBackend final : public HeBackend {
 public:
  explicit NullBackend(HeParams params);

  const HeParams& params() const override { return params_; }
  std::string name() const override { return "null"; }
  bool can_decrypt() const override { return true; }

  CipherVector encrypt(std::span<const double> values) const override;
  std::vector<std::complex<double>> decrypt_complex(const CipherVector& ct) const override;
  CipherVector add(const CipherVector& a, const CipherVector& b) const override;
  CipherVector sub(const CipherVector& a, const CipherVector& b) const override;
  CipherVector mul(const CipherVector& a, const CipherVector& b) const override;
  CipherVector mul_plain(const CipherVector& a, std::span<const std::complex<double>> v) const override;
  CipherVector dot_plain(std::span<const CipherVector> cts,
                         std::span<const std::vector<std::complex<double>>> pts) const override;
  CipherVector dot_scalar(std::span<const CipherVector> cts, std::span<const double> coeffs) const override;
  CipherVector mul_integer(const CipherVector& a, std::int64_t k) const override;
  CipherVector divide_exact(const CipherVector& a, double d) const override;
  CipherVector rotate(const CipherVector& a, long steps) const override;
  Bytes serialize_payload(const CipherVector& ct) const override;
  CipherVector deserialize_payload(int level, std::uint32_t logical_len, ByteView payload) const override;

 private:
  HeParams params_;
};

namespace ckks {
class Context;
struct SecretKey;
struct PublicKey;
struct EvalKeys;
}  // namespace ckks

/// Leveled RNS-CKKS. Holds public and evaluation keys, and the secret key
/// only on the analyst side.
class CkksBackend final : public HeBackend {
 public:
  /// Fresh key set (deterministic when params.seed is set). Rotation keys
  /// cover +-2^i for every i below log2(slot_count).
  static std::shared_ptr<CkksBackend> generate(const HeParams& params);
  /// Encrypt-and-evaluate only.
  static std::shared_ptr<CkksBackend> load_public(ByteView public_file);
  static std::shared_ptr<CkksBackend> load(ByteView public_file, ByteView secret_file);

  ~CkksBackend() override;

  Bytes export_public() const;
  /// Throws BadRequest when this instance has no secret key.
  Bytes export_secret() const;

  const HeParams& params() const override { return params_; }
  std::string name() const override { return "ckks"; }
  bool can_decrypt() const override { return sk_ != nullptr; }

  CipherVector encrypt(std::span<const double> values) const override;
  std::vector<std::complex<double>> decrypt_complex(const CipherVector& ct) const override;
  CipherVector add(const CipherVector& a, const CipherVector& b) const override;
  CipherVector sub(const CipherVector& a, const CipherVector& b) const override;
  CipherVector mul(const CipherVector& a, const CipherVector& b) const override;
  CipherVector mul_plain(const CipherVector& a, std::span<const std::complex<double>> v) const override;
  CipherVector dot_plain(std::span<const CipherVector> cts,
                         std::span<const std::vector<std::complex<double>>> pts) const override;
  CipherVector dot_scalar(std::span<const CipherVector> cts, std::span<const double> coeffs) const override;
  CipherVector mul_integer(const CipherVector& a, std::int64_t k) const override;
  CipherVector divide_exact(const CipherVector& a, double d) const override;
  CipherVector rotate(const CipherVector& a, long steps) const override;
  Bytes serialize_payload(const CipherVector& ct) const override;
  CipherVector deserialize_payload(int level, std::uint32_t logical_len, ByteView payload) const override;

  /// Ciphertext scale, exposed for tests.
  double scale_of(const CipherVector& ct) const;
  std::size_t primes_of(const CipherVector& ct) const;

 private:
  CkksBackend() = default;

  HeParams params_;
  std::shared_ptr<const ckks::Context> ctx_;
  std::shared_ptr<const ckks::PublicKey> pk_;
  std::shared_ptr<const ckks::EvalKeys> ek_;
  std::shared_ptr<const ckks::SecretKey> sk_;
};

}  // namespace hv::fhe
