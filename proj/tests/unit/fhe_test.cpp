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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "heartvault/common/error.hpp"
#include "heartvault/dsp/filter.hpp"
#include "heartvault/fhe/backend.hpp"
#include "heartvault/fhe/modarith.hpp"
#include "heartvault/fhe/ntt.hpp"
#include "heartvault/fhe/ops.hpp"
#include "heartvault/fhe/pipeline.hpp"
#include "heartvault/signal/synth.hpp"

using namespace hv;
using namespace hv::fhe;
using cplx = std::complex<double>;

namespace {

const CkksBackend& ckks_default() {
  static const auto be = [] {
    HeParams p;
    p.seed = 7;
    return CkksBackend::generate(p);
  }();
  return *be;
}

const CkksBackend& ckks_small() {
  static const auto be = [] {
    HeParams p;
    p.slot_count = 512;
    p.seed = 11;
    return CkksBackend::generate(p);
  }();
  return *be;
}

std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// |got - want| / max(|want|, floor). With the default floor and a 1e-3 budget
// this accepts an absolute error of 1e-6 near zero.
double rel_err(double got, double want, double floor = 1e-3) {
  return std::fabs(got - want) / std::max(std::fabs(want), floor);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t i = from; i < to; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t i = from; i < to; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

}  // namespace

// ---- modular arithmetic and NTT ---------------------------------------------

TEST(ModArith, BarrettMatchesRemainder) {
  const auto primes = find_primes(60, 2, 1 << 14);
  std::mt19937_64 rng(3);
  for (u64 qv : primes) {
    const Modulus q(qv);
    for (int i = 0; i < 20000; ++i) {
      const u64 a = rng() % qv, b = rng() % qv;
      EXPECT_EQ(q.mul(a, b), static_cast<u64>((static_cast<u128>(a) * b) % qv));
    }
  }
}

TEST(ModArith, PrimesAreNttFriendly) {
  const auto primes = find_primes(40, 5, 1 << 14);
  ASSERT_EQ(primes.size(), 5u);
  for (u64 p : primes) {
    EXPECT_TRUE(is_prime(p));
    EXPECT_EQ(p % (1 << 14), 1u);
    EXPECT_LT(p, u64{1} << 40);
  }
  EXPECT_TRUE(std::is_sorted(primes.rbegin(), primes.rend()));
  EXPECT_FALSE(is_prime(561));  // Carmichael
  EXPECT_TRUE(is_prime(2305843009213693951ULL));
}

TEST(ModArith, InverseAndRootOfUnity) {
  const Modulus q(find_primes(50, 1, 64)[0]);
  for (u64 a : {2ULL, 3ULL, 12345ULL}) EXPECT_EQ(q.mul(a, q.inv(a)), 1u);
  const u64 w = primitive_root_of_unity(q, 64);
  EXPECT_EQ(q.pow(w, 64), 1u);
  EXPECT_NE(q.pow(w, 32), 1u);
  EXPECT_EQ(q.centered(q.from_signed(-5)), -5);
}

TEST(Ntt, RoundTripAndNegacyclicProduct) {
  const std::size_t n = 64;
  const Modulus q(find_primes(50, 1, 2 * n)[0]);
  const NttTables t(n, q);
  std::mt19937_64 rng(5);
  std::vector<u64> a(n), b(n);
  for (auto& v : a) v = rng() % q.value();
  for (auto& v : b) v = rng() % q.value();

  auto fa = a;
  t.forward(fa.data());
  auto back = fa;
  t.inverse(back.data());
  for (auto& v : back) v %= q.value();
  EXPECT_EQ(back, a);

  // Schoolbook product mod X^n + 1.
  std::vector<u64> want(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const u64 p = q.mul(a[i], b[j]);
      const std::size_t k = (i + j) % n;
      want[k] = i + j < n ? q.add(want[k], p) : q.sub(want[k], p);
    }
  }
  auto fb = b;
  t.forward(fb.data());
  std::vector<u64> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = q.mul(q.reduce(fa[i]), q.reduce(fb[i]));
  t.inverse(prod.data());
  for (auto& v : prod) v %= q.value();
  EXPECT_EQ(prod, want);
}

// ---- params and keys ----------------------------------------------------------

TEST(HeParams, Validation) {
  HeParams p;
  EXPECT_NO_THROW(p.validate());
  p.slot_count = 1000;
  EXPECT_THROW(p.validate(), Error);
  p = HeParams{};
  p.multiplicative_depth = 0;
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedParams);
  }
}

TEST(Ckks, RoundTripRandom512WithinBudget) {
  const auto& be = ckks_default();
  const auto x = uniform(512, 1);
  const auto y = be.decrypt(be.encrypt(x));
  ASSERT_EQ(y.size(), 512u);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(rel_err(y[i], x[i]), be.params().error_budget) << i;
}

TEST(Ckks, UnrelatedKeyDecryptsToNoise) {
  const auto& be = ckks_default();
  HeParams p;
  p.seed = 99;
  const auto other = CkksBackend::generate(p);
  const auto x = uniform(512, 2);
  const auto y = other->decrypt(be.encrypt(x));
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 512.0;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / 512.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < 512; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_LT(std::fabs(sxy / std::sqrt(sxx * syy)), 0.2);
}

TEST(Ckks, SeededKeygenIsDeterministic) {
  HeParams p;
  p.slot_count = 256;
  p.seed = 42;
  const auto a = CkksBackend::generate(p);
  const auto b = CkksBackend::generate(p);
  EXPECT_EQ(a->export_public(), b->export_public());
  EXPECT_EQ(a->export_secret(), b->export_secret());
  p.seed = 43;
  EXPECT_NE(CkksBackend::generate(p)->export_secret(), a->export_secret());
}

TEST(Ckks, KeyFilesRoundTrip) {
  const auto& be = ckks_small();
  const auto pub = CkksBackend::load_public(be.export_public());
  EXPECT_FALSE(pub->can_decrypt());
  EXPECT_THROW(pub->export_secret(), Error);
  const auto full = CkksBackend::load(be.export_public(), be.export_secret());
  const auto x = uniform(100, 3);
  // Encrypted and rotated with the loaded public keys, decrypted with the original.
  const auto ct = pub->rotate(pub->encrypt(x), 1);
  const auto y = full->decrypt(ct);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) EXPECT_NEAR(y[i], x[i + 1], 1e-5);
  EXPECT_EQ(pub->fingerprint(), be.fingerprint());
}

TEST(Ckks, MismatchedSecretRejected) {
  HeParams p;
  p.slot_count = 256;
  p.seed = 1;
  const auto a = CkksBackend::generate(p);
  p.seed = 2;
  const auto b = CkksBackend::generate(p);
  try {
    CkksBackend::load(a->export_public(), b->export_secret());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParamsMismatch);
  }
}

TEST(Ckks, RotationsBothDirections) {
  const auto& be = ckks_small();
  const auto x = uniform(512, 4);
  const auto ct = be.encrypt(x);
  for (long k : {1L, 3L, 7L, -1L, -5L, 100L, 511L}) {
    CipherVector r = be.rotate(ct, k);
    r.logical_len = 512;
    const auto y = be.decrypt(r);
    for (std::size_t i = 0; i < 512; ++i) {
      const std::size_t src = static_cast<std::size_t>((static_cast<long>(i) + k + 512) % 512);
      ASSERT_NEAR(y[i], x[src], 1e-5) << "k=" << k << " i=" << i;
    }
  }
}

TEST(Ckks, DepthAccountingRaisesLevelExhausted) {
  const auto& be = ckks_small();
  auto ct = be.encrypt(uniform(16, 5));
  EXPECT_EQ(ct.level, 2);
  ct = be.mul(ct, ct);
  ct = be.mul(ct, ct);
  EXPECT_EQ(ct.level, 0);
  try {
    (void)be.mul(ct, ct);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LevelExhausted);
  }
  // Plaintext multiplications have their own budget.
  auto pt = be.encrypt(uniform(16, 6));
  const std::vector<cplx> w(16, 0.5);
  for (int i = 0; i < be.params().plaintext_depth; ++i) pt = be.mul_plain(pt, w);
  EXPECT_THROW((void)be.mul_plain(pt, w), Error);
  // Null scheme follows the same accounting.
  NullBackend nb(be.params());
  auto nc = nb.encrypt(uniform(16, 5));
  nc = nb.mul(nb.mul(nc, nc), nc);
  EXPECT_THROW((void)nb.mul(nc, nc), Error);
}

TEST(Ckks, MixedScalesRejected) {
  const auto& be = ckks_small();
  const auto x = uniform(64, 7);
  const auto ct = be.encrypt(x);
  const auto sq = be.mul(ct, ct);
  try {
    (void)be.add(sq, ct);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LevelMismatch);
  }
  // Same history on both sides combines fine.
  const auto s = be.add(sq, be.mul(ct, ct));
  EXPECT_EQ(s.level, 1);
  const auto y = be.decrypt(s);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(y[i], 2.0 * x[i] * x[i], 1e-5);
}

TEST(Envelope, RoundTripAndForeignParams) {
  const auto& be = ckks_small();
  const auto x = uniform(300, 8);
  const auto ct = be.mul(be.encrypt(x), be.encrypt(x));
  const Bytes env = to_envelope(be, ct);
  const auto back = from_envelope(be, env);
  EXPECT_EQ(back.level, ct.level);
  EXPECT_EQ(back.logical_len, 300u);
  EXPECT_EQ(to_envelope(be, back), env);
  const auto y = be.decrypt(back);
  for (std::size_t i = 0; i < 300; ++i) EXPECT_NEAR(y[i], x[i] * x[i], 1e-5);

  try {
    (void)from_envelope(ckks_default(), env);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParamsMismatch);
  }
  Bytes cut(env.begin(), env.end() - 1);
  EXPECT_THROW((void)from_envelope(be, cut), Error);

  NullBackend nb(be.params());
  const Bytes nenv = to_envelope(nb, nb.encrypt(x));
  EXPECT_EQ(nb.decrypt(from_envelope(nb, nenv)), x);
  EXPECT_THROW((void)from_envelope(be, nenv), Error);
}

// ---- operations ---------------------------------------------------------------

TEST(HeSum, AllOnes256) {
  const auto& be = ckks_default();
  const std::vector<double> ones(256, 1.0);
  EXPECT_NEAR(be.decrypt(he_sum(be, be.encrypt(ones), 256))[0], 256.0, 0.1);
}

TEST(HeSum, ZeroVector) {
  const auto& be = ckks_default();
  const std::vector<double> z(1000, 0.0);
  EXPECT_NEAR(be.decrypt(he_sum(be, be.encrypt(z), 1000))[0], 0.0, be.params().error_budget);
}

TEST(HeSum, RandomMatchesPlaintext) {
  const auto& be = ckks_default();
  const auto x = uniform(3600, 9, 0.0, 1.0);
  const double want = std::accumulate(x.begin(), x.end(), 0.0);
  EXPECT_LE(rel_err(be.decrypt(he_sum(be, be.encrypt(x), x.size()))[0], want), 1e-3);
}

TEST(HeSum, PartialLengthAndBadLength) {
  const auto& be = ckks_small();
  const auto x = uniform(200, 10);
  const auto ct = be.encrypt(x);
  EXPECT_NEAR(be.decrypt(he_sum(be, ct, 37))[0], std::accumulate(x.begin(), x.begin() + 37, 0.0), 1e-4);
  EXPECT_THROW((void)he_sum(be, ct, 0), Error);
  EXPECT_THROW((void)he_sum(be, ct, 201), Error);
}

TEST(HeMeanVar, ConstantVector) {
  const auto& be = ckks_default();
  const std::vector<double> c(1000, 0.37);
  const auto mv = he_mean_var(be, be.encrypt(c), c.size());
  EXPECT_NEAR(be.decrypt(mv.mean)[0], 0.37, 1e-3 * 0.37);
  EXPECT_NEAR(be.decrypt(mv.variance)[0], 0.0, be.params().error_budget);
}

TEST(HeMeanVar, OneTwoThreeFour) {
  const auto& be = ckks_default();
  const std::vector<double> x{1, 2, 3, 4};
  const auto mv = he_mean_var(be, be.encrypt(x), 4);
  EXPECT_NEAR(be.decrypt(mv.mean)[0], 2.5, 2.5e-3);
  EXPECT_NEAR(be.decrypt(mv.variance)[0], 1.25, 1.25e-3);
}

TEST(HeMeanVar, NullSchemeIsExactToRounding) {
  NullBackend nb{HeParams{}};
  const std::vector<double> x{1, 2, 3, 4};
  const auto mv = he_mean_var(nb, nb.encrypt(x), 4);
  EXPECT_NEAR(nb.decrypt(mv.mean)[0], 2.5, 1e-12);
  EXPECT_NEAR(nb.decrypt(mv.variance)[0], 1.25, 1e-12);
}

TEST(HeLinearFilter, IdentityTap) {
  const auto& be = ckks_default();
  const auto x = uniform(500, 11);
  const std::vector<double> taps{1.0};
  const auto y = be.decrypt(he_linear_filter(be, be.encrypt(x), taps));
  EXPECT_LE(max_abs_diff(y, x, 0, x.size()), 1e-3);
}

TEST(HeLinearFilter, DerivativeOfRampIsConstant) {
  const auto& be = ckks_default();
  const auto stages = dsp::pan_tompkins_stages(200.0);
  std::vector<double> ramp(400);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.01 * static_cast<double>(i);
  const auto y = be.decrypt(he_linear_filter(be, be.encrypt(ramp), stages.derivative));
  const auto plain = dsp::fir(stages.derivative, ramp);
  const double slope = plain[200];
  EXPECT_GT(std::fabs(slope), 0.0);
  for (std::size_t i = stages.derivative.size(); i < ramp.size(); ++i) {
    EXPECT_NEAR(plain[i], slope, 1e-12);
    EXPECT_NEAR(y[i], slope, 1e-3 * std::fabs(slope)) << i;
  }
}

TEST(HeLinearFilter, RandomEightTapsMatchPlaintextFir) {
  const auto& be = ckks_default();
  const auto x = uniform(1000, 12);
  const auto taps = uniform(8, 13);
  const auto y = be.decrypt(he_linear_filter(be, be.encrypt(x), taps));
  const auto want = dsp::fir(taps, x);
  const double scale = max_abs(want, 0, want.size());
  EXPECT_LE(max_abs_diff(y, want, taps.size(), x.size()) / scale, 1e-3);
  // The causal start-up slots match too, zeros being encrypted below slot 0.
  EXPECT_LE(max_abs_diff(y, want, 0, taps.size()) / scale, 1e-3);
}

TEST(HeLinearFilter, UniformTapsCostNoLevel) {
  const auto& be = ckks_default();
  const auto x = uniform(360, 14);
  const auto ct = be.encrypt(x);
  const std::vector<double> taps(54, 1.0 / 54.0);
  const auto out = he_linear_filter(be, ct, taps);
  EXPECT_EQ(out.level, ct.level);
  EXPECT_EQ(out.pt_level, ct.pt_level);
  const auto y = be.decrypt(out);
  const auto want = dsp::fir(taps, x);
  EXPECT_LE(max_abs_diff(y, want, 0, x.size()), 1e-3);
}

TEST(HeLinearFilter, RejectsOverflowingSupport) {
  const auto& be = ckks_small();
  const auto ct = be.encrypt(uniform(510, 15));
  const std::vector<double> taps(8, 0.1);
  try {
    (void)he_linear_filter(be, ct, taps);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedParams);
  }
}

TEST(HeSquare, TwosZerosRandom) {
  const auto& be = ckks_default();
  const std::vector<double> twos(100, 2.0), zeros(100, 0.0);
  for (double v : be.decrypt(he_square(be, be.encrypt(twos)))) EXPECT_NEAR(v, 4.0, 4e-3);
  for (double v : be.decrypt(he_square(be, be.encrypt(zeros)))) EXPECT_NEAR(v, 0.0, 1e-3);
  const auto x = uniform(1000, 16);
  const auto sq = he_square(be, be.encrypt(x));
  EXPECT_EQ(sq.level, be.params().multiplicative_depth - 1);
  const auto y = be.decrypt(sq);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i] * x[i], 1e-3);
}

namespace {

std::vector<double> tones(std::initializer_list<double> hz, double fs, std::size_t n) {
  std::vector<double> x(n, 0.0);
  for (double f : hz) {
    for (std::size_t i = 0; i < n; ++i) x[i] += std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
  }
  return x;
}

double magnitude(const HeBackend& be, const DftProjection& p) {
  const auto [c, s] = dft_components(be, p);
  return std::hypot(c, s);
}

}  // namespace

TEST(HeDft, ThreeHzToneDominates) {
  const auto& be = ckks_default();
  const double fs = 50.0;
  const auto x = tones({3.0}, fs, 500);
  const std::vector<double> probes{1.0, 3.0, 5.0};
  const auto proj = he_dft(be, be.encrypt(x), probes, fs, x.size());
  ASSERT_EQ(proj.size(), 3u);
  const double m1 = magnitude(be, proj[0]), m3 = magnitude(be, proj[1]), m5 = magnitude(be, proj[2]);
  EXPECT_GE(m3, 10.0 * m1);
  EXPECT_GE(m3, 10.0 * m5);
  // Oracle: direct projections.
  double c = 0, s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double th = 2.0 * std::numbers::pi * 3.0 * static_cast<double>(j) / fs;
    c += x[j] * std::cos(th);
    s += x[j] * std::sin(th);
  }
  const auto [hc, hs] = dft_components(be, proj[1]);
  EXPECT_LE(rel_err(hc, c, 1.0), 1e-3);
  EXPECT_LE(rel_err(hs, s, 1.0), 1e-3);
}

TEST(HeDft, ZeroSignalAndBadProbe) {
  const auto& be = ckks_default();
  const std::vector<double> z(200, 0.0);
  const std::vector<double> probes{2.0, 7.0};
  for (const auto& p : he_dft(be, be.encrypt(z), probes, 50.0, 200)) EXPECT_NEAR(magnitude(be, p), 0.0, 1e-3);
  const std::vector<double> bad{30.0};
  EXPECT_THROW((void)he_dft(be, be.encrypt(z), bad, 50.0, 200), Error);
}

TEST(HeDft, MixtureRankingMatchesPlaintext) {
  const auto& be = ckks_default();
  const double fs = 50.0;
  const auto x = tones({1.0, 3.0, 5.0}, fs, 500);
  NullBackend nb(be.params());
  signal::SignalWindow w;
  w.fs_hz = fs;
  w.samples = x;
  AnalysisSet set;
  set.frequency = true;
  const auto r = compare_pipelines(w, be, set);
  ASSERT_TRUE(r.frequency_match_pct);
  EXPECT_EQ(*r.frequency_match_pct, 100.0);
  auto got = r.encrypted_freqs;
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<double>{1.0, 3.0, 5.0}));
}

TEST(HeSpectrum, MatchesPlaintextMagnitudes) {
  const auto& be = ckks_small();
  const auto x = uniform(300, 17);
  const auto spec = be.decrypt_complex(he_spectrum(be, be.encrypt(x), x.size()));
  const auto mags = dsp::dft_magnitudes(x);
  ASSERT_EQ(mags.size(), 151u);
  const double top = *std::max_element(mags.begin(), mags.end());
  for (std::size_t k = 0; k < mags.size(); ++k) EXPECT_NEAR(std::abs(spec[k]), mags[k], 1e-3 * top) << k;
}

TEST(FrontEnd, MatchesPlaintextIntegratedWaveform) {
  const auto& be = ckks_small();
  for (double fs : {50.0, 100.0}) {
    const auto stages = dsp::pan_tompkins_stages(fs);
    signal::SynthProfile p;
    const auto w = signal::synth(p, 5.0, fs, 0);  // two chunks at 100 Hz
    const auto want = dsp::integrated_waveform(w.samples, stages);
    const auto fe = he_integrated_waveform(be, be.encrypt(w.samples), w.samples.size(), stages);
    const auto got = decrypt_integrated(be, fe);
    ASSERT_EQ(got.size(), want.size());
    EXPECT_EQ(fe.chunks.size(), fs == 50.0 ? 1u : 2u);
    const double top = max_abs(want, 0, want.size());
    EXPECT_LE(max_abs_diff(got, want, 0, want.size()) / top, 1e-3) << fs << " Hz, " << fe.chunks.size() << " chunks";
  }
}

// ---- comparison ----------------------------------------------------------------

TEST(CompareRatio, TableArithmetic) {
  EXPECT_NEAR(compare_ratio(0.052, 0.053), 98.11, 0.005);
  EXPECT_NEAR(compare_ratio(-0.15, -0.16), 93.75, 0.005);
  EXPECT_EQ(compare_ratio(0.0, 0.0), 100.0);
  EXPECT_EQ(compare_ratio(0.3, -0.3), 0.0);
  EXPECT_EQ(compare_ratio(0.0, 1.0), 0.0);
}

TEST(CompareRatio, Properties) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = d(rng), b = d(rng);
    const double r = compare_ratio(a, b);
    EXPECT_EQ(r, compare_ratio(b, a));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 100.0);
    EXPECT_EQ(r == 100.0, std::fabs(a) == std::fabs(b) && (a < 0) == (b < 0));
    EXPECT_EQ(compare_ratio(a, a), 100.0);
  }
}

TEST(SetMatch, Definition) {
  const std::vector<std::size_t> a{1, 2, 3, 4}, b{2, 3, 4, 5};
  EXPECT_EQ(set_match_pct(std::span<const std::size_t>(a), std::span<const std::size_t>(b)), 75.0);
  const std::vector<std::size_t> e;
  EXPECT_EQ(set_match_pct(std::span<const std::size_t>(e), std::span<const std::size_t>(e)), 100.0);
  EXPECT_EQ(set_match_pct(std::span<const std::size_t>(a), std::span<const std::size_t>(e)), 0.0);
}

TEST(ComparePipelines, NullSchemeGivesAllHundred) {
  NullBackend nb{HeParams{}};
  signal::SynthProfile p;
  p.class_mix = {0.6, 0.1, 0.1, 0.1, 0.1};
  p.noise_std = 0.02;
  p.baseline_wander_hz = 0.3;
  const auto w = signal::synth(p, 10.0, 360.0, 0);
  const auto r = compare_pipelines(w, nb);
  ASSERT_EQ(r.stats.size(), 5u);
  for (const auto& m : r.stats) EXPECT_NEAR(m.ratio, 100.0, 1e-9) << m.metric;
  ASSERT_EQ(r.hrv.size(), 2u);
  for (const auto& m : r.hrv) EXPECT_NEAR(m.ratio, 100.0, 1e-9) << m.metric;
  EXPECT_EQ(r.peak_match_pct, 100.0);
  EXPECT_EQ(r.frequency_match_pct, 100.0);
}

TEST(ComparePipelines, CkksOnNoiseFreeSynthetic) {
  const auto& be = ckks_default();
  for (double fs : {50.0, 360.0}) {
    signal::SynthProfile p;
    const auto w = signal::synth(p, fs == 50.0 ? 30.0 : 10.0, fs, 0);
    const auto r = compare_pipelines(w, be);
    EXPECT_EQ(r.peak_match_pct, 100.0) << fs;
    EXPECT_EQ(r.frequency_match_pct, 100.0) << fs;
    for (const auto& m : r.hrv) EXPECT_EQ(m.ratio, 100.0) << m.metric;
    EXPECT_GE(r.stats[0].ratio, 99.0);
    EXPECT_GE(r.stats[1].ratio, 99.0);
    EXPECT_EQ(comparison_from_json(to_json(r)).stats.size(), r.stats.size());
  }
}

TEST(ComparePipelines, WindowLongerThanSlotsRejected) {
  NullBackend nb{HeParams{}};
  signal::SynthProfile p;
  const auto w = signal::synth(p, 20.0, 360.0, 0);
  EXPECT_THROW((void)compare_pipelines(w, nb), Error);
}

TEST(Analyses, ParseAndFormat) {
  const auto s = parse_analyses("peaks, hrv");
  EXPECT_TRUE(s.peaks && s.hrv && !s.stats && !s.frequency);
  EXPECT_EQ(format_analyses(s), "peaks,hrv");
  EXPECT_THROW(parse_analyses("peaks,fft"), Error);
  EXPECT_THROW(parse_analyses(""), Error);
}

// Homomorphism property over random vectors, all ops against plaintext oracles.
TEST(Homomorphism, HundredRandomVectors) {
  const auto& be = ckks_small();
  const double budget = be.params().error_budget;
  std::mt19937_64 rng(19);
  const std::vector<double> probes{1.0, 4.0};
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 16 + rng() % 400;
    const auto x = uniform(n, rng());
    const auto ct = be.encrypt(x);

    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    ASSERT_LE(rel_err(be.decrypt(he_sum(be, ct, n))[0], sum), budget) << t;

    const auto mv = he_mean_var(be, ct, n);
    const double var = dsp::population_variance(x);
    ASSERT_LE(rel_err(be.decrypt(mv.mean)[0], sum / static_cast<double>(n)), budget) << t;
    ASSERT_LE(rel_err(be.decrypt(mv.variance)[0], var), budget) << t;

    const auto taps = uniform(1 + rng() % 8, rng());
    const auto fy = be.decrypt(he_linear_filter(be, ct, taps));
    const auto fw = dsp::fir(taps, x);
    for (std::size_t i = 0; i < n; ++i) ASSERT_LE(rel_err(fy[i], fw[i]), budget) << t << " fir " << i;

    const auto sq = be.decrypt(he_square(be, ct));
    for (std::size_t i = 0; i < n; ++i) ASSERT_LE(rel_err(sq[i], x[i] * x[i]), budget) << t << " sq " << i;

    const auto proj = he_dft(be, ct, probes, 10.0, n);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      double c = 0, s = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double th = 2.0 * std::numbers::pi * probes[k] * static_cast<double>(j) / 10.0;
        c += x[j] * std::cos(th);
        s += x[j] * std::sin(th);
      }
      const auto [hc, hs] = dft_components(be, proj[k]);
      ASSERT_LE(rel_err(hc, c), budget) << t;
      ASSERT_LE(rel_err(hs, s), budget) << t;
    }
  }
}
