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

#include "heartvault/fhe/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "heartvault/common/error.hpp"
#include "heartvault/fhe/ckks.hpp"

namespace hv::fhe {

// ---------------------------------------------------------------------------
// Params

void HeParams::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::UnsupportedParams, why); };
  if (slot_count < 4 || slot_count > 16384 || (slot_count & (slot_count - 1)) != 0) {
    fail("slot_count must be a power of two in [4, 16384]");
  }
  if (scale_bits < 20 || scale_bits > 50) fail("scale_bits must be in [20, 50]");
  if (multiplicative_depth < 1) fail("multiplicative_depth must be at least 1");
  if (plaintext_depth < 0) fail("plaintext_depth must be non-negative");
  if (multiplicative_depth + plaintext_depth > 16) fail("total depth above 16");
  if (!(error_budget >= 0.0) || !std::isfinite(error_budget)) fail("error_budget must be finite and >= 0");
}

Bytes serialize(const HeParams& p) {
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(p.slot_count));
  put_u8(out, static_cast<std::uint8_t>(p.scale_bits));
  put_u8(out, static_cast<std::uint8_t>(p.multiplicative_depth));
  put_u8(out, static_cast<std::uint8_t>(p.plaintext_depth));
  put_f64(out, p.error_budget);
  put_u8(out, p.seed ? 1 : 0);
  put_u64(out, p.seed.value_or(0));
  return out;
}

HeParams parse_params(Reader& rd) {
  HeParams p;
  p.slot_count = rd.u32();
  p.scale_bits = rd.u8();
  p.multiplicative_depth = rd.u8();
  p.plaintext_depth = rd.u8();
  p.error_budget = rd.f64();
  const bool has_seed = rd.u8() != 0;
  const std::uint64_t seed = rd.u64();
  if (has_seed) p.seed = seed;
  return p;
}

// ---------------------------------------------------------------------------
// Shared backend helpers

secure::Key32 HeBackend::fingerprint() const {
  const auto& p = params();
  Bytes in;
  put_string(in, "heartvault-he/");
  put_string(in, name());
  put_u32(in, static_cast<std::uint32_t>(p.slot_count));
  put_u8(in, static_cast<std::uint8_t>(p.scale_bits));
  put_u8(in, static_cast<std::uint8_t>(p.multiplicative_depth));
  put_u8(in, static_cast<std::uint8_t>(p.plaintext_depth));
  return secure::sha256(in);
}

std::vector<double> HeBackend::decrypt(const CipherVector& ct) const {
  const auto z = decrypt_complex(ct);
  std::vector<double> out(std::min<std::size_t>(ct.logical_len, z.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i].real();
  return out;
}

CipherVector HeBackend::scalar_multiply(const CipherVector& a, double c) const {
  const CipherVector one[] = {a};
  const double coeff[] = {c};
  return dot_scalar(one, coeff);
}

namespace {

struct Meta {
  int level;
  int pt_level;
  std::uint32_t logical_len;
  std::uint32_t extent;
};

Meta joined(const CipherVector& a, const CipherVector& b) {
  return {std::min(a.level, b.level), std::min(a.pt_level, b.pt_level), std::max(a.logical_len, b.logical_len),
          std::max(a.extent, b.extent)};
}

void need_level(const CipherVector& a) {
  if (a.level < 1) throw Error(ErrorCode::LevelExhausted, "no ciphertext multiplication level left");
}

void need_pt_level(const CipherVector& a) {
  if (a.pt_level < 1) throw Error(ErrorCode::LevelExhausted, "no plaintext multiplication level left");
}

std::uint32_t support(std::span<const std::complex<double>> v) {
  for (std::size_t i = v.size(); i-- > 0;) {
    if (v[i] != std::complex<double>(0.0, 0.0)) return static_cast<std::uint32_t>(i + 1);
  }
  return 0;
}

std::uint32_t rotated_extent(const CipherVector& a, long steps, std::size_t slots) {
  const long s = static_cast<long>(slots);
  const long k = ((steps % s) + s) % s;
  if (k == 0) return a.extent;
  const long right = s - k;  // a right shift by `right` keeps the support contiguous
  if (static_cast<long>(a.extent) + right <= s) return static_cast<std::uint32_t>(a.extent + right);
  return static_cast<std::uint32_t>(slots);
}

void check_dot_inputs(std::size_t cts, std::size_t weights) {
  if (cts == 0 || cts != weights) throw Error(ErrorCode::BadRequest, "dot product needs matching non-empty inputs");
}

}  // namespace

Bytes to_envelope(const HeBackend& backend, const CipherVector& ct) {
  Bytes out;
  const auto fp = backend.fingerprint();
  put_bytes(out, fp);
  put_u8(out, static_cast<std::uint8_t>(ct.level));
  put_u32(out, ct.logical_len);
  const Bytes payload = backend.serialize_payload(ct);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_bytes(out, payload);
  return out;
}

CipherVector from_envelope(const HeBackend& backend, ByteView bytes) {
  Reader rd(bytes, ErrorCode::MalformedRecord);
  const auto fp = rd.bytes(32);
  const auto mine = backend.fingerprint();
  if (!std::equal(fp.begin(), fp.end(), mine.begin())) {
    throw Error(ErrorCode::ParamsMismatch, "ciphertext was produced under different parameters");
  }
  const int level = rd.u8();
  const std::uint32_t logical_len = rd.u32();
  const std::uint32_t len = rd.u32();
  const auto payload = rd.bytes(len);
  if (!rd.done()) throw Error(ErrorCode::MalformedRecord, "trailing bytes after ciphertext envelope");
  if (level > backend.params().multiplicative_depth) throw Error(ErrorCode::MalformedRecord, "level out of range");
  return backend.deserialize_payload(level, logical_len, payload);
}

// ---------------------------------------------------------------------------
// Null scheme

namespace {

struct NullPayload final : CipherPayload {
  std::vector<std::complex<double>> v;
};

const std::vector<std::complex<double>>& slots_of(const CipherVector& ct) {
  const auto* p = dynamic_cast<const NullPayload*>(ct.payload.get());
  if (!p) throw Error(ErrorCode::ParamsMismatch, "ciphertext does not belong to the null backend");
  return p->v;
}

CipherVector wrap(Meta m, std::vector<std::complex<double>> v) {
  auto p = std::make_shared<NullPayload>();
  p->v = std::move(v);
  return {m.level, m.pt_level, m.logical_len, m.extent, std::move(p)};
}

}  // namespace

NullBackend::NullBackend(HeParams params) : params_(std::move(params)) { params_.validate(); }

CipherVector NullBackend::encrypt(std::span<const double> values) const {
  if (values.size() > slots()) throw Error(ErrorCode::UnsupportedParams, "more values than slots");
  std::vector<std::complex<double>> v(slots());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  const auto len = static_cast<std::uint32_t>(values.size());
  return wrap({params_.multiplicative_depth, params_.plaintext_depth, len, len}, std::move(v));
}

std::vector<std::complex<double>> NullBackend::decrypt_complex(const CipherVector& ct) const { return slots_of(ct); }

CipherVector NullBackend::add(const CipherVector& a, const CipherVector& b) const {
  auto v = slots_of(a);
  const auto& w = slots_of(b);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  return wrap(joined(a, b), std::move(v));
}

CipherVector NullBackend::sub(const CipherVector& a, const CipherVector& b) const {
  auto v = slots_of(a);
  const auto& w = slots_of(b);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
  return wrap(joined(a, b), std::move(v));
}

CipherVector NullBackend::mul(const CipherVector& a, const CipherVector& b) const {
  need_level(a);
  need_level(b);
  auto v = slots_of(a);
  const auto& w = slots_of(b);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
  auto m = joined(a, b);
  m.level -= 1;
  m.extent = std::min(a.extent, b.extent);
  return wrap(m, std::move(v));
}

CipherVector NullBackend::mul_plain(const CipherVector& a, std::span<const std::complex<double>> pt) const {
  need_pt_level(a);
  if (pt.size() > slots()) throw Error(ErrorCode::UnsupportedParams, "plaintext longer than slot count");
  auto v = slots_of(a);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= i < pt.size() ? pt[i] : 0.0;
  Meta m{a.level, a.pt_level - 1, a.logical_len, std::min(a.extent, support(pt))};
  return wrap(m, std::move(v));
}

CipherVector NullBackend::dot_plain(std::span<const CipherVector> cts,
                                    std::span<const std::vector<std::complex<double>>> pts) const {
  check_dot_inputs(cts.size(), pts.size());
  Meta m{cts[0].level, cts[0].pt_level, 0, 0};
  std::vector<std::complex<double>> v(slots());
  for (std::size_t t = 0; t < cts.size(); ++t) {
    need_pt_level(cts[t]);
    const auto& x = slots_of(cts[t]);
    const auto& p = pts[t];
    if (p.size() > slots()) throw Error(ErrorCode::UnsupportedParams, "plaintext longer than slot count");
    for (std::size_t i = 0; i < p.size(); ++i) v[i] += x[i] * p[i];
    m.level = std::min(m.level, cts[t].level);
    m.pt_level = std::min(m.pt_level, cts[t].pt_level);
    m.logical_len = std::max(m.logical_len, cts[t].logical_len);
    m.extent = std::max(m.extent, std::min(cts[t].extent, support(p)));
  }
  m.pt_level -= 1;
  return wrap(m, std::move(v));
}

CipherVector NullBackend::dot_scalar(std::span<const CipherVector> cts, std::span<const double> coeffs) const {
  check_dot_inputs(cts.size(), coeffs.size());
  Meta m{cts[0].level, cts[0].pt_level, 0, 0};
  std::vector<std::complex<double>> v(slots());
  for (std::size_t t = 0; t < cts.size(); ++t) {
    need_pt_level(cts[t]);
    const auto& x = slots_of(cts[t]);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += x[i] * coeffs[t];
    m.level = std::min(m.level, cts[t].level);
    m.pt_level = std::min(m.pt_level, cts[t].pt_level);
    m.logical_len = std::max(m.logical_len, cts[t].logical_len);
    if (coeffs[t] != 0.0) m.extent = std::max(m.extent, cts[t].extent);
  }
  m.pt_level -= 1;
  return wrap(m, std::move(v));
}

CipherVector NullBackend::mul_integer(const CipherVector& a, std::int64_t k) const {
  auto v = slots_of(a);
  for (auto& x : v) x *= static_cast<double>(k);
  return wrap({a.level, a.pt_level, a.logical_len, k == 0 ? 0u : a.extent}, std::move(v));
}

CipherVector NullBackend::divide_exact(const CipherVector& a, double d) const {
  if (d == 0.0 || !std::isfinite(d)) throw Error(ErrorCode::BadRequest, "divisor must be finite and non-zero");
  auto v = slots_of(a);
  for (auto& x : v) x /= d;
  return wrap({a.level, a.pt_level, a.logical_len, a.extent}, std::move(v));
}

CipherVector NullBackend::rotate(const CipherVector& a, long steps) const {
  const auto& v = slots_of(a);
  const long s = static_cast<long>(v.size());
  const long k = ((steps % s) + s) % s;
  std::vector<std::complex<double>> out(v.size());
  for (long i = 0; i < s; ++i) out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>((i + k) % s)];
  return wrap({a.level, a.pt_level, a.logical_len, rotated_extent(a, steps, v.size())}, std::move(out));
}

Bytes NullBackend::serialize_payload(const CipherVector& ct) const {
  Bytes out;
  put_u8(out, static_cast<std::uint8_t>(ct.pt_level));
  put_u32(out, ct.extent);
  for (const auto& x : slots_of(ct)) {
    put_f64(out, x.real());
    put_f64(out, x.imag());
  }
  return out;
}

CipherVector NullBackend::deserialize_payload(int level, std::uint32_t logical_len, ByteView payload) const {
  Reader rd(payload, ErrorCode::MalformedRecord);
  const int pt_level = rd.u8();
  const std::uint32_t extent = rd.u32();
  if (pt_level > params_.plaintext_depth || extent > slots() || logical_len > slots()) {
    throw Error(ErrorCode::MalformedRecord, "ciphertext header out of range");
  }
  std::vector<std::complex<double>> v(slots());
  for (auto& x : v) {
    const double re = rd.f64();
    x = {re, rd.f64()};
  }
  if (!rd.done()) throw Error(ErrorCode::MalformedRecord, "trailing payload bytes");
  return wrap({level, pt_level, logical_len, extent}, std::move(v));
}

// ---------------------------------------------------------------------------
// CKKS

namespace {

struct CkksPayload final : CipherPayload {
  ckks::Ciphertext ct;
};

const ckks::Ciphertext& ct_of(const CipherVector& c) {
  const auto* p = dynamic_cast<const CkksPayload*>(c.payload.get());
  if (!p) throw Error(ErrorCode::ParamsMismatch, "ciphertext does not belong to the CKKS backend");
  return p->ct;
}

CipherVector wrap(Meta m, ckks::Ciphertext ct) {
  auto p = std::make_shared<CkksPayload>();
  p->ct = std::move(ct);
  return {m.level, m.pt_level, m.logical_len, m.extent, std::move(p)};
}

void check_scales(double a, double b) {
  if (std::fabs(a - b) > 1e-9 * std::max(std::fabs(a), std::fabs(b))) {
    throw Error(ErrorCode::LevelMismatch, "ciphertext scales differ; rescale explicitly before combining");
  }
}

// Copies of both operands reduced to a common prime count.
std::pair<ckks::Ciphertext, ckks::Ciphertext> aligned(const CipherVector& a, const CipherVector& b) {
  ckks::Ciphertext x = ct_of(a), y = ct_of(b);
  const std::size_t p = std::min(x.primes(), y.primes());
  ckks::drop_to(x, p);
  ckks::drop_to(y, p);
  return {std::move(x), std::move(y)};
}

std::size_t limb_bytes(const ckks::Context& ctx, std::size_t i) {
  return static_cast<std::size_t>((ctx.modulus(i).bits() + 7) / 8);
}

void put_limbs(Bytes& out, const ckks::Context& ctx, const ckks::Poly& p, bool special_last) {
  for (std::size_t t = 0; t < p.limbs; ++t) {
    const std::size_t mi = (special_last && t + 1 == p.limbs) ? ctx.special() : t;
    const std::size_t nb = limb_bytes(ctx, mi);
    const u64* src = p.limb(t);
    const std::size_t base = out.size();
    out.resize(base + nb * p.n);
    std::uint8_t* dst = out.data() + base;
    for (std::size_t k = 0; k < p.n; ++k) {
      u64 v = src[k];
      for (std::size_t b = 0; b < nb; ++b) {
        *dst++ = static_cast<std::uint8_t>(v);
        v >>= 8;
      }
    }
  }
}

ckks::Poly get_limbs(Reader& rd, const ckks::Context& ctx, std::size_t limbs, bool special_last) {
  ckks::Poly p(ctx.n(), limbs);
  for (std::size_t t = 0; t < limbs; ++t) {
    const std::size_t mi = (special_last && t + 1 == limbs) ? ctx.special() : t;
    const std::size_t nb = limb_bytes(ctx, mi);
    const u64 q = ctx.prime(mi);
    const auto raw = rd.bytes(nb * ctx.n());
    u64* dst = p.limb(t);
    for (std::size_t k = 0; k < ctx.n(); ++k) {
      u64 v = 0;
      for (std::size_t b = nb; b-- > 0;) v = (v << 8) | raw[k * nb + b];
      if (v >= q) throw Error(ErrorCode::MalformedRecord, "coefficient not reduced");
      dst[k] = v;
    }
  }
  return p;
}

void put_switch_key(Bytes& out, const ckks::Context& ctx, const ckks::SwitchKey& k) {
  put_bytes(out, k.a_seed);
  for (const auto& b : k.b) put_limbs(out, ctx, b, true);
}

ckks::SwitchKey get_switch_key(Reader& rd, const ckks::Context& ctx) {
  ckks::SwitchKey k;
  const auto seed = rd.bytes(32);
  std::copy(seed.begin(), seed.end(), k.a_seed.begin());
  k.b.resize(ctx.max_primes());
  for (auto& b : k.b) b = get_limbs(rd, ctx, ctx.max_primes() + 1, true);
  ckks::expand(ctx, k);
  return k;
}

constexpr char kPublicMagic[] = "HVHEPUB1";
constexpr char kSecretMagic[] = "HVHESEC1";

void expect_magic(Reader& rd, const char* magic) {
  const auto m = rd.bytes(8);
  if (std::memcmp(m.data(), magic, 8) != 0) throw Error(ErrorCode::ParamsMismatch, "not a heartvault key file");
}

std::vector<long> rotation_steps(std::size_t slots) {
  std::vector<long> steps;
  for (long p = 1; p < static_cast<long>(slots); p <<= 1) {
    steps.push_back(p);
    steps.push_back(-p);
  }
  return steps;
}

// NAF digits of the shortest signed representative of `steps` modulo slots.
std::vector<long> naf_steps(long steps, std::size_t slots) {
  const long s = static_cast<long>(slots);
  long k = ((steps % s) + s) % s;
  if (k > s / 2) k -= s;
  const long sign = k < 0 ? -1 : 1;
  long v = k < 0 ? -k : k;
  std::vector<long> out;
  for (long bit = 1; v != 0; bit <<= 1) {
    if (v & 1) {
      const long z = 2 - (v & 3);
      out.push_back(sign * z * bit);
      v -= z;
    }
    v >>= 1;
  }
  return out;
}

}  // namespace

CkksBackend::~CkksBackend() = default;

std::shared_ptr<CkksBackend> CkksBackend::generate(const HeParams& params) {
  params.validate();
  auto be = std::shared_ptr<CkksBackend>(new CkksBackend());
  be->params_ = params;
  auto ctx = std::make_shared<ckks::Context>(params.slot_count, params.scale_bits, params.multiplicative_depth,
                                             params.plaintext_depth);
  secure::Key32 master{};
  if (params.seed) {
    Bytes in;
    put_string(in, "heartvault-he-keygen");
    put_u64(in, *params.seed);
    master = secure::sha256(in);
  } else {
    const auto r = secure::random_bytes(32);
    std::copy(r.begin(), r.end(), master.begin());
  }
  const auto steps = rotation_steps(params.slot_count);
  auto kb = ckks::keygen(*ctx, master, steps);
  be->ctx_ = ctx;
  be->sk_ = std::make_shared<ckks::SecretKey>(std::move(kb.sk));
  be->pk_ = std::make_shared<ckks::PublicKey>(std::move(kb.pk));
  be->ek_ = std::make_shared<ckks::EvalKeys>(std::move(kb.ek));
  return be;
}

Bytes CkksBackend::export_public() const {
  Bytes out(kPublicMagic, kPublicMagic + 8);
  put_bytes(out, serialize(params_));
  put_bytes(out, pk_->a_seed);
  put_limbs(out, *ctx_, pk_->b, false);
  put_switch_key(out, *ctx_, ek_->relin);
  put_u32(out, static_cast<std::uint32_t>(ek_->galois.size()));
  for (const auto& [g, key] : ek_->galois) {
    put_u64(out, g);
    put_switch_key(out, *ctx_, key);
  }
  return out;
}

Bytes CkksBackend::export_secret() const {
  if (!sk_) throw Error(ErrorCode::BadRequest, "this key set has no secret key");
  Bytes out(kSecretMagic, kSecretMagic + 8);
  put_bytes(out, serialize(params_));
  for (auto c : sk_->coeffs) put_u8(out, static_cast<std::uint8_t>(c));
  return out;
}

std::shared_ptr<CkksBackend> CkksBackend::load_public(ByteView bytes) {
  Reader rd(bytes, ErrorCode::ParamsMismatch);
  expect_magic(rd, kPublicMagic);
  auto be = std::shared_ptr<CkksBackend>(new CkksBackend());
  be->params_ = parse_params(rd);
  be->params_.validate();
  auto ctx = std::make_shared<ckks::Context>(be->params_.slot_count, be->params_.scale_bits,
                                             be->params_.multiplicative_depth, be->params_.plaintext_depth);
  try {
    auto pk = std::make_shared<ckks::PublicKey>();
    const auto seed = rd.bytes(32);
    std::copy(seed.begin(), seed.end(), pk->a_seed.begin());
    pk->b = get_limbs(rd, *ctx, ctx->max_primes(), false);
    ckks::expand(*ctx, *pk);
    auto ek = std::make_shared<ckks::EvalKeys>();
    ek->relin = get_switch_key(rd, *ctx);
    const std::uint32_t count = rd.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      const u64 g = rd.u64();
      ek->galois.emplace(g, get_switch_key(rd, *ctx));
    }
    if (!rd.done()) throw Error(ErrorCode::ParamsMismatch, "trailing bytes in public key file");
    be->pk_ = pk;
    be->ek_ = ek;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRecord) throw Error(ErrorCode::ParamsMismatch, "corrupt public key file");
    throw;
  }
  be->ctx_ = ctx;
  return be;
}

std::shared_ptr<CkksBackend> CkksBackend::load(ByteView public_file, ByteView secret_file) {
  auto be = load_public(public_file);
  Reader rd(secret_file, ErrorCode::ParamsMismatch);
  expect_magic(rd, kSecretMagic);
  const HeParams p = parse_params(rd);
  if (!(p == be->params_)) throw Error(ErrorCode::ParamsMismatch, "secret and public key parameters differ");
  const auto raw = rd.bytes(be->ctx_->n());
  if (!rd.done()) throw Error(ErrorCode::ParamsMismatch, "trailing bytes in secret key file");
  std::vector<std::int8_t> coeffs(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    coeffs[i] = static_cast<std::int8_t>(raw[i]);
    if (coeffs[i] < -1 || coeffs[i] > 1) throw Error(ErrorCode::ParamsMismatch, "secret key is not ternary");
  }
  auto sk = std::make_shared<ckks::SecretKey>(ckks::secret_from_coeffs(*be->ctx_, std::move(coeffs)));
  // b + a s must be the small public error under a matching secret.
  const auto& q = be->ctx_->modulus(0);
  ckks::Poly e(be->ctx_->n(), 1);
  for (std::size_t k = 0; k < be->ctx_->n(); ++k) {
    e.limb(0)[k] = q.add(be->pk_->b.limb(0)[k], q.mul(be->pk_->a.limb(0)[k], sk->ntt.limb(0)[k]));
  }
  be->ctx_->ntt(0).inverse(e.limb(0));
  for (std::size_t k = 0; k < be->ctx_->n(); ++k) {
    if (std::llabs(q.centered(e.limb(0)[k])) > 64) {
      throw Error(ErrorCode::ParamsMismatch, "secret key does not match public key");
    }
  }
  be->sk_ = sk;
  return be;
}

double CkksBackend::scale_of(const CipherVector& ct) const { return ct_of(ct).scale; }
std::size_t CkksBackend::primes_of(const CipherVector& ct) const { return ct_of(ct).primes(); }

CipherVector CkksBackend::encrypt(std::span<const double> values) const {
  if (values.size() > slots()) throw Error(ErrorCode::UnsupportedParams, "more values than slots");
  std::vector<std::complex<double>> z(values.begin(), values.end());
  const double scale = std::ldexp(1.0, params_.scale_bits);
  const auto m = ckks::encode(*ctx_, z, scale, ctx_->max_primes());
  auto rng = Prng::random();
  const auto len = static_cast<std::uint32_t>(values.size());
  return wrap({params_.multiplicative_depth, params_.plaintext_depth, len, len},
              ckks::encrypt(*ctx_, *pk_, m, scale, rng));
}

std::vector<std::complex<double>> CkksBackend::decrypt_complex(const CipherVector& ct) const {
  if (!sk_) throw Error(ErrorCode::BadRequest, "decryption requires the secret key");
  const auto& c = ct_of(ct);
  return ckks::decode(*ctx_, ckks::decrypt(*ctx_, *sk_, c), c.scale);
}

CipherVector CkksBackend::add(const CipherVector& a, const CipherVector& b) const {
  auto [x, y] = aligned(a, b);
  check_scales(x.scale, y.scale);
  ckks::add_inplace(*ctx_, x, y);
  return wrap(joined(a, b), std::move(x));
}

CipherVector CkksBackend::sub(const CipherVector& a, const CipherVector& b) const {
  auto [x, y] = aligned(a, b);
  check_scales(x.scale, y.scale);
  ckks::sub_inplace(*ctx_, x, y);
  return wrap(joined(a, b), std::move(x));
}

CipherVector CkksBackend::mul(const CipherVector& a, const CipherVector& b) const {
  need_level(a);
  need_level(b);
  auto [x, y] = aligned(a, b);
  auto out = ckks::multiply(*ctx_, x, y, ek_->relin);
  ckks::rescale_inplace(*ctx_, out);
  auto m = joined(a, b);
  m.level -= 1;
  m.extent = std::min(a.extent, b.extent);
  return wrap(m, std::move(out));
}

CipherVector CkksBackend::mul_plain(const CipherVector& a, std::span<const std::complex<double>> v) const {
  const CipherVector one[] = {a};
  const std::vector<std::complex<double>> pts[] = {std::vector<std::complex<double>>(v.begin(), v.end())};
  return dot_plain(one, pts);
}

CipherVector CkksBackend::dot_plain(std::span<const CipherVector> cts,
                                    std::span<const std::vector<std::complex<double>>> pts) const {
  check_dot_inputs(cts.size(), pts.size());
  Meta m{cts[0].level, cts[0].pt_level, 0, 0};
  std::size_t primes = ct_of(cts[0]).primes();
  for (std::size_t t = 0; t < cts.size(); ++t) {
    need_pt_level(cts[t]);
    if (pts[t].size() > slots()) throw Error(ErrorCode::UnsupportedParams, "plaintext longer than slot count");
    primes = std::min(primes, ct_of(cts[t]).primes());
    check_scales(ct_of(cts[t]).scale, ct_of(cts[0]).scale);
    m.level = std::min(m.level, cts[t].level);
    m.pt_level = std::min(m.pt_level, cts[t].pt_level);
    m.logical_len = std::max(m.logical_len, cts[t].logical_len);
    m.extent = std::max(m.extent, std::min(cts[t].extent, support(pts[t])));
  }
  const double top = static_cast<double>(ctx_->prime(primes - 1));
  ckks::Ciphertext acc;
  acc.c0 = ckks::Poly(ctx_->n(), primes);
  acc.c1 = ckks::Poly(ctx_->n(), primes);
  for (std::size_t t = 0; t < cts.size(); ++t) {
    if (support(pts[t]) == 0) continue;
    ckks::Ciphertext x = ct_of(cts[t]);
    ckks::drop_to(x, primes);
    const auto pt = ckks::encode(*ctx_, pts[t], top, primes);
    ckks::add_mul_plain_inplace(*ctx_, acc, x, pt);
  }
  ckks::rescale_inplace(*ctx_, acc);
  acc.scale = ct_of(cts[0]).scale;
  m.pt_level -= 1;
  return wrap(m, std::move(acc));
}

CipherVector CkksBackend::dot_scalar(std::span<const CipherVector> cts, std::span<const double> coeffs) const {
  check_dot_inputs(cts.size(), coeffs.size());
  Meta m{cts[0].level, cts[0].pt_level, 0, 0};
  std::size_t primes = ct_of(cts[0]).primes();
  for (std::size_t t = 0; t < cts.size(); ++t) {
    need_pt_level(cts[t]);
    primes = std::min(primes, ct_of(cts[t]).primes());
    check_scales(ct_of(cts[t]).scale, ct_of(cts[0]).scale);
    m.level = std::min(m.level, cts[t].level);
    m.pt_level = std::min(m.pt_level, cts[t].pt_level);
    m.logical_len = std::max(m.logical_len, cts[t].logical_len);
    if (coeffs[t] != 0.0) m.extent = std::max(m.extent, cts[t].extent);
  }
  const double top = static_cast<double>(ctx_->prime(primes - 1));
  ckks::Ciphertext acc;
  acc.c0 = ckks::Poly(ctx_->n(), primes);
  acc.c1 = ckks::Poly(ctx_->n(), primes);
  for (std::size_t t = 0; t < cts.size(); ++t) {
    const double k = std::round(coeffs[t] * top);
    if (!(std::fabs(k) < 0x1.0p62)) throw Error(ErrorCode::UnsupportedParams, "coefficient too large");
    if (k == 0.0) continue;
    ckks::Ciphertext x = ct_of(cts[t]);
    ckks::drop_to(x, primes);
    ckks::add_mul_int_inplace(*ctx_, acc, x, static_cast<std::int64_t>(k));
  }
  ckks::rescale_inplace(*ctx_, acc);
  acc.scale = ct_of(cts[0]).scale;
  m.pt_level -= 1;
  return wrap(m, std::move(acc));
}

CipherVector CkksBackend::mul_integer(const CipherVector& a, std::int64_t k) const {
  ckks::Ciphertext x = ct_of(a);
  ckks::mul_int_inplace(*ctx_, x, k);
  return wrap({a.level, a.pt_level, a.logical_len, k == 0 ? 0u : a.extent}, std::move(x));
}

CipherVector CkksBackend::divide_exact(const CipherVector& a, double d) const {
  if (d == 0.0 || !std::isfinite(d)) throw Error(ErrorCode::BadRequest, "divisor must be finite and non-zero");
  ckks::Ciphertext x = ct_of(a);
  if (d < 0) ckks::negate_inplace(*ctx_, x);
  x.scale *= std::fabs(d);
  return wrap({a.level, a.pt_level, a.logical_len, a.extent}, std::move(x));
}

CipherVector CkksBackend::rotate(const CipherVector& a, long steps) const {
  ckks::Ciphertext x = ct_of(a);
  for (long part : naf_steps(steps, slots())) {
    const u64 g = ctx_->galois_element(part);
    const auto it = ek_->galois.find(g);
    if (it == ek_->galois.end()) {
      throw Error(ErrorCode::RotationUnsupported, "no rotation key for step " + std::to_string(part));
    }
    x = ckks::apply_galois(*ctx_, x, g, it->second);
  }
  return wrap({a.level, a.pt_level, a.logical_len, rotated_extent(a, steps, slots())}, std::move(x));
}

Bytes CkksBackend::serialize_payload(const CipherVector& ct) const {
  const auto& c = ct_of(ct);
  Bytes out;
  put_u8(out, static_cast<std::uint8_t>(ct.pt_level));
  put_u32(out, ct.extent);
  put_u8(out, static_cast<std::uint8_t>(c.primes()));
  put_f64(out, c.scale);
  put_limbs(out, *ctx_, c.c0, false);
  put_limbs(out, *ctx_, c.c1, false);
  return out;
}

CipherVector CkksBackend::deserialize_payload(int level, std::uint32_t logical_len, ByteView payload) const {
  Reader rd(payload, ErrorCode::MalformedRecord);
  const int pt_level = rd.u8();
  const std::uint32_t extent = rd.u32();
  const std::size_t primes = rd.u8();
  const double scale = rd.f64();
  if (pt_level > params_.plaintext_depth || extent > slots() || logical_len > slots() ||
      primes > ctx_->max_primes() || primes < static_cast<std::size_t>(1 + level + pt_level) ||
      !(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::MalformedRecord, "ciphertext header out of range");
  }
  ckks::Ciphertext c;
  c.scale = scale;
  c.c0 = get_limbs(rd, *ctx_, primes, false);
  c.c1 = get_limbs(rd, *ctx_, primes, false);
  if (!rd.done()) throw Error(ErrorCode::MalformedRecord, "trailing payload bytes");
  return wrap({level, pt_level, logical_len, extent}, std::move(c));
}

}  // namespace hv::fhe
