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

#include "heartvault/gateway/server.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>

#include "httplib.h"

#include "heartvault/common/error.hpp"
#include "heartvault/gateway/agent.hpp"
#include "heartvault/gateway/blocks.hpp"
#include "heartvault/secure/crypto.hpp"

namespace hv::gateway {

namespace fs = std::filesystem;
using secure::Direction;

namespace {

constexpr const char* kSecretFile = "gateway.secret";
constexpr const char* kRegistryFile = "sessions.jsonl";
constexpr std::size_t kSubscriberQueue = 8192;

std::uint64_t now_ms() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
}

secure::Key32 load_or_create_secret(const fs::path& dir) {
  const auto path = dir / kSecretFile;
  if (fs::exists(path)) {
    std::ifstream in(path);
    std::string hex;
    in >> hex;
    return secure::parse_psk(hex);
  }
  const auto fresh = secure::random_bytes(32);
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << to_hex(fresh) << "\n";
  }
  ::chmod(path.c_str(), 0600);
  secure::Key32 k{};
  std::copy(fresh.begin(), fresh.end(), k.begin());
  return k;
}

// Direct form II transposed, one sample at a time.
struct StreamingFilter {
  dsp::FilterCoefficients c;
  std::vector<double> z;

  double step(double x) {
    const double y = c.b[0] * x + (z.empty() ? 0.0 : z[0]);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double next = i + 1 < z.size() ? z[i + 1] : 0.0;
      z[i] = c.b[i + 1] * x + next - c.a[i + 1] * y;
    }
    return y;
  }
  void prime(double x) {
    z = dsp::lfilter_zi(c);
    for (auto& v : z) v *= x;
  }
};

nlohmann::json error_json(const Error& e) {
  std::string message = e.what();
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", message}}}};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRequest:
    case ErrorCode::EmptyRange:
    case ErrorCode::InputTooShort:
    case ErrorCode::UnsupportedParams:
      return 400;
    case ErrorCode::UnknownPatient:
      return 404;
    default:
      return 500;
  }
}

nlohmann::json to_json(const StreamEvent& e) {
  auto j = to_json(e.metrics);
  j["t"] = e.t_ms;
  j["raw"] = e.raw ? nlohmann::json(*e.raw) : nlohmann::json(nullptr);
  j["decrypted"] = e.decrypted ? nlohmann::json(*e.decrypted) : nlohmann::json(nullptr);
  j["filtered"] = e.filtered;
  return j;
}

// ---- subscriptions ----

void Subscription::push(std::string line) {
  {
    std::lock_guard lk(mu_);
    if (closed_) return;
    if (lines_.size() >= capacity_) {
      lines_.pop_front();
      ++dropped_;
    }
    lines_.push_back(std::move(line));
  }
  cv_.notify_one();
}

std::vector<std::string> Subscription::drain(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return closed_ || !lines_.empty(); });
  std::vector<std::string> out(std::make_move_iterator(lines_.begin()), std::make_move_iterator(lines_.end()));
  lines_.clear();
  return out;
}

void Subscription::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lk(mu_);
  return closed_;
}

std::uint64_t Subscription::dropped() const {
  std::lock_guard lk(mu_);
  return dropped_;
}

// ---- sessions ----

struct Gateway::Session {
  std::string id;
  std::string patient_id;
  secure::SessionKey key;
  SessionDescriptor descriptor;
  std::shared_ptr<secure::Transport> transport;
  std::unique_ptr<RealtimeMonitor> monitor;
  wire::DecoderState live, stored;
  std::optional<secure::Sealer> at_rest;

  std::vector<double> block;
  std::uint64_t block_first = 0;
  std::uint64_t block_t_ms = 0;
  std::uint32_t block_index = 0;
  bool block_lead_off = false;
  std::size_t block_len = 0;

  std::uint64_t sample_index = 0;
  std::uint64_t last_t_ms = 0;
  std::size_t step = 1;
  std::size_t since_emit = 0;
  std::optional<StreamingFilter> display;
  bool display_primed = false;

  std::atomic<bool> acquiring{true};
  std::atomic<bool> filter{false};

  mutable std::mutex mu;  // guards everything below
  LiveMetrics snapshot;
  std::string state = "handshake";
  std::string error;
  std::uint64_t records = 0, dropped_records = 0, samples = 0, resync_bytes = 0, mismatches = 0, blocks = 0;
  std::uint64_t started_ms = 0;
  bool described = false;
};

Gateway::Gateway(GatewayConfig config) : config_(std::move(config)) {
  if (config_.store_dir.empty()) throw Error(ErrorCode::BadRequest, "gateway needs a store directory");
  if (config_.mode == secure::Mode::PreShared && !config_.psk) {
    throw Error(ErrorCode::BadRequest, "pre-shared mode needs a key");
  }
  if (config_.analyst_escrow_public == secure::Key32{}) {
    throw Error(ErrorCode::BadRequest, "gateway needs the analyst escrow public key");
  }
  if (config_.he_backend) {
    he_ = config_.he_backend;
  } else if (!config_.analyst_he_public.empty()) {
    he_ = fhe::CkksBackend::load_public(config_.analyst_he_public);
  } else {
    throw Error(ErrorCode::BadRequest, "gateway needs the analyst HE public key");
  }
  if (config_.stream_rate_hz <= 0.0 || config_.block_s <= 0.0) {
    throw Error(ErrorCode::BadRequest, "stream rate and block length must be positive");
  }

  fs::create_directories(config_.store_dir);
  log_ = store::RecordLog::open(config_.store_dir, config_.log);
  secret_ = load_or_create_secret(config_.store_dir);

  std::ifstream in(config_.store_dir / kRegistryFile);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto s = registered_from_json(nlohmann::json::parse(line));
      registry_[s.session_id] = std::move(s);
    } catch (const std::exception& e) {
      std::cerr << "gateway: skipping registry line: " << e.what() << "\n";  // a torn final line
    }
  }
}

Gateway::~Gateway() { stop(); }

void Gateway::register_session(const RegisteredSession& s) {
  std::lock_guard lk(registry_mu_);
  std::ofstream out(config_.store_dir / kRegistryFile, std::ios::app);
  out << to_json(s).dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot append to the session registry");
  registry_[s.session_id] = s;
}

std::shared_ptr<Subscription> Gateway::subscribe(const std::string& patient_id) {
  bool known = std::find(config_.patients.begin(), config_.patients.end(), patient_id) != config_.patients.end();
  {
    std::lock_guard lk(registry_mu_);
    for (const auto& [id, s] : registry_) known = known || s.patient_id == patient_id;
  }
  if (!known) {
    const auto patients = log_->patients();
    known = std::find(patients.begin(), patients.end(), patient_id) != patients.end();
  }
  if (!known) throw Error(ErrorCode::UnknownPatient, "no session or stored record for patient " + patient_id);
  auto sub = std::make_shared<Subscription>(kSubscriberQueue);
  std::lock_guard lk(subs_mu_);
  subs_.emplace(patient_id, sub);
  return sub;
}

void Gateway::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  sub->close();
  std::lock_guard lk(subs_mu_);
  for (auto it = subs_.begin(); it != subs_.end();) {
    it = it->second == sub ? subs_.erase(it) : std::next(it);
  }
}

void Gateway::publish(const std::string& patient_id, const std::string& line) {
  std::lock_guard lk(subs_mu_);
  auto [lo, hi] = subs_.equal_range(patient_id);
  for (auto it = lo; it != hi; ++it) it->second->push(line);
}

void Gateway::finish_block(Session& s) {
  if (s.block.empty()) return;
  AnalysisBlock b;
  b.session = s.key.session_id;
  b.index = s.block_index++;
  b.first_sample = s.block_first;
  b.n = static_cast<std::uint32_t>(s.block.size());
  b.fs_hz = s.descriptor.fs_hz;
  b.lead_off = s.block_lead_off;
  b.envelope = fhe::to_envelope(*he_, he_->encrypt(s.block));
  const auto rec = s.at_rest->seal_next(secure::RecordKind::AnalysisInput, s.patient_id, s.block_t_ms, encode_block(b));
  log_->append(rec);
  s.block.clear();
  s.block_lead_off = false;
  std::lock_guard lk(s.mu);
  ++s.blocks;
}

void Gateway::process_record(Session& s, const secure::CipherRecord& rec, ByteView plain, std::uint64_t ingest_ms) {
  const auto loc = log_->append(rec);

  std::vector<wire::FrameEvent> live;
  wire::feed(s.live, plain, live);
  wire::flush(s.live, live);  // agent records start at a marker, so each decodes on its own

  // The decrypted path: what the store holds, opened again.
  const auto stored_rec = secure::parse_record(log_->read_raw(loc));
  const auto stored_plain = secure::open(s.key, Direction::InitiatorToResponder, stored_rec);
  std::vector<wire::FrameEvent> stored;
  wire::feed(s.stored, stored_plain, stored);
  wire::flush(s.stored, stored);
  std::vector<std::uint8_t> stored_samples;
  for (const auto& e : stored) {
    if (e.kind == wire::FrameEvent::Kind::WaveSamples) {
      stored_samples.insert(stored_samples.end(), e.samples.begin(), e.samples.end());
    }
  }

  s.monitor->set_filter(s.filter.load());
  const bool hop = s.monitor->push(live, ingest_ms, now_ms);
  const LiveMetrics metrics = s.monitor->metrics();
  if (hop) log_->flush();

  const bool filter_on = s.filter.load();
  if (!filter_on) s.display_primed = false;
  const auto& cal = s.descriptor.calibration;
  const double ms_per_sample = 1000.0 / s.descriptor.fs_hz;
  std::vector<std::string> lines;
  std::size_t k = 0, in_record = 0;
  std::uint64_t mismatches = 0, decoded = 0;
  for (const auto& e : live) {
    if (e.is_lead_off()) {
      s.block_lead_off = true;
      StreamEvent ev;
      ev.t_ms = s.last_t_ms;
      ev.metrics = metrics;
      ev.metrics.lead_off = true;
      lines.push_back(to_json(ev).dump());
      continue;
    }
    if (e.kind != wire::FrameEvent::Kind::WaveSamples) continue;
    for (std::uint8_t raw : e.samples) {
      const auto t = rec.header.timestamp_ms +
                     static_cast<std::uint64_t>(std::llround(ms_per_sample * static_cast<double>(in_record++)));
      s.last_t_ms = std::max(s.last_t_ms, t);
      const double value = cal.forward(raw);
      if (s.block.empty()) {
        s.block_first = s.sample_index;
        s.block_t_ms = t;
      }
      s.block.push_back(value);
      if (s.block.size() >= s.block_len) finish_block(s);
      ++s.sample_index;
      ++decoded;

      std::optional<double> dec;
      if (k < stored_samples.size()) dec = cal.forward(stored_samples[k++]);
      if (!dec || *dec != value) ++mismatches;
      bool filtered = false;
      if (dec && filter_on && s.display) {
        if (!s.display_primed) {
          s.display->prime(*dec);
          s.display_primed = true;
        }
        dec = s.display->step(*dec);
        filtered = true;
      }
      if (++s.since_emit >= s.step) {
        s.since_emit = 0;
        StreamEvent ev;
        ev.t_ms = s.last_t_ms;
        ev.raw = value;
        ev.decrypted = dec;
        ev.filtered = filtered;
        ev.metrics = metrics;
        lines.push_back(to_json(ev).dump());
      }
    }
  }
  if (k != stored_samples.size()) mismatches += stored_samples.size() - k;

  {
    std::lock_guard lk(s.mu);
    s.snapshot = metrics;
    ++s.records;
    s.samples += decoded;
    s.mismatches += mismatches;
    s.resync_bytes = s.live.unexpected_data_bytes;
  }
  for (const auto& l : lines) publish(s.patient_id, l);
}

void Gateway::handle_session(std::shared_ptr<secure::Transport> transport) {
  auto s = std::make_shared<Session>();
  s->transport = transport;
  s->acquiring = config_.autostart;
  s->started_ms = now_ms();
  try {
    s->key = config_.mode == secure::Mode::PreShared
                 ? secure::handshake_psk(secure::Role::Responder, *transport, *config_.psk)
                 : secure::handshake(secure::Role::Responder, *transport);
  } catch (const Error& e) {
    std::cerr << "gateway: handshake failed: " << e.what() << "\n";
    transport->close();
    return;
  }
  s->id = session_hex(s->key.session_id);
  {
    std::lock_guard lk(sessions_mu_);
    sessions_[s->id] = s;
  }

  std::string final_state = "ended", error;
  try {
    secure::Opener opener(s->key, Direction::InitiatorToResponder);
    const auto first = secure::parse_record(secure::recv_frame32(*transport, kMaxRecordBytes));
    const auto first_plain = opener.open(first);
    if (first.header.kind != secure::RecordKind::Segment) {
      throw Error(ErrorCode::BadRequest, "the first record must be the session descriptor");
    }
    s->descriptor = parse_descriptor(first_plain);
    s->patient_id = first.header.patient_id;
    s->monitor = std::make_unique<RealtimeMonitor>(s->descriptor, config_.realtime, config_.model);
    s->at_rest.emplace(at_rest_key(secret_, s->key.session_id, s->key.mode), Direction::ResponderToInitiator);
    s->block_len = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config_.block_s * s->descriptor.fs_hz)), 1, he_->slots());
    s->step = std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::llround(s->descriptor.fs_hz / config_.stream_rate_hz)));
    try {
      dsp::FilterSpec spec;
      spec.order = config_.realtime.filter_order;
      spec.fs_hz = s->descriptor.fs_hz;
      spec.lowcut_hz = config_.realtime.filter_low_hz;
      spec.highcut_hz = std::min(config_.realtime.filter_high_hz, 0.45 * s->descriptor.fs_hz);
      s->display = StreamingFilter{dsp::design_bandpass(spec), {}};
    } catch (const Error&) {
      s->display.reset();
    }

    RegisteredSession reg;
    reg.session_id = s->id;
    reg.patient_id = s->patient_id;
    reg.mode = s->key.mode;
    reg.escrow = to_base64(escrow_session_key(config_.analyst_escrow_public, s->key));
    reg.descriptor = s->descriptor;
    register_session(reg);
    log_->append(first);
    {
      std::lock_guard lk(s->mu);
      s->state = "active";
      s->described = true;
      ++s->records;
    }

    for (;;) {
      Bytes frame;
      try {
        frame = secure::recv_frame32(*transport, kMaxRecordBytes);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::TransportClosed) break;
        throw;
      }
      const auto ingest = now_ms();
      const auto rec = secure::parse_record(frame);
      const auto plain = opener.open(rec);
      if (rec.header.patient_id != s->patient_id) {
        throw Error(ErrorCode::BadRequest, "record patient differs from the session descriptor");
      }
      if (rec.header.kind == secure::RecordKind::AnalysisInput || rec.header.kind == secure::RecordKind::Segment) {
        throw Error(ErrorCode::BadRequest, std::string("agents may not send ") + secure::kind_name(rec.header.kind));
      }
      if (!s->acquiring.load()) {
        finish_block(*s);
        std::lock_guard lk(s->mu);
        ++s->dropped_records;
        continue;
      }
      if (rec.header.kind == secure::RecordKind::Pulse) {
        log_->append(rec);
        std::lock_guard lk(s->mu);
        ++s->records;
        continue;
      }
      process_record(*s, rec, plain, ingest);
    }
    finish_block(*s);
  } catch (const Error& e) {
    final_state = "aborted";
    error = e.what();
    std::cerr << "gateway: session " << s->id << " aborted: " << e.what() << "\n";
    if (s->at_rest) {
      try {
        finish_block(*s);
      } catch (const Error& e2) {
        std::cerr << "gateway: cannot store the final block: " << e2.what() << "\n";
      }
    }
  }
  try {
    log_->flush();
  } catch (const Error& e) {
    std::cerr << "gateway: flush failed: " << e.what() << "\n";
  }
  transport->close();
  {
    std::lock_guard lk(s->mu);
    s->state = final_state;
    s->error = error;
    s->transport.reset();
  }
  {
    std::lock_guard lk(sessions_mu_);
    ++ended_;
  }
  sessions_cv_.notify_all();
}

bool Gateway::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lk(sessions_mu_);
  return sessions_cv_.wait_for(lk, timeout, [&] { return ended_ == sessions_.size(); });
}

bool Gateway::wait_sessions_ended(std::size_t count, std::chrono::milliseconds timeout) {
  std::unique_lock lk(sessions_mu_);
  return sessions_cv_.wait_for(lk, timeout, [&] { return ended_ >= count; });
}

// ---- API ----

nlohmann::json Gateway::call(const std::string& method, const nlohmann::json& params) {
  if (method == "session.list") return session_list();
  if (method == "session.control") return session_control(params);
  if (method == "analysis.run") return analysis_run(params);
  throw Error(ErrorCode::BadRequest, "unknown method " + method);
}

nlohmann::json Gateway::session_list() {
  std::map<std::string, nlohmann::json> out;
  {
    std::lock_guard lk(registry_mu_);
    for (const auto& [id, r] : registry_) {
      out[id] = {{"session_id", id},
                 {"patient_id", r.patient_id},
                 {"mode", secure::mode_name(r.mode)},
                 {"descriptor", to_json(r.descriptor)},
                 {"state", "stored"}};
    }
  }
  std::vector<std::shared_ptr<Session>> live;
  {
    std::lock_guard lk(sessions_mu_);
    for (const auto& [id, s] : sessions_) live.push_back(s);
  }
  for (const auto& s : live) {
    std::lock_guard lk(s->mu);
    if (!s->described) continue;
    auto& j = out[s->id];
    j["state"] = s->state;
    j["acquiring"] = s->acquiring.load();
    j["filter"] = s->filter.load();
    j["metrics"] = to_json(s->snapshot);
    j["records"] = s->records;
    j["dropped_records"] = s->dropped_records;
    j["samples"] = s->samples;
    j["resync_bytes"] = s->resync_bytes;
    j["mismatches"] = s->mismatches;
    j["blocks"] = s->blocks;
    j["started_ms"] = s->started_ms;
    if (!s->error.empty()) j["error"] = s->error;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (auto& [id, j] : out) arr.push_back(std::move(j));
  return {{"sessions", arr}};
}

nlohmann::json Gateway::session_control(const nlohmann::json& params) {
  std::string action, session_id, patient_id;
  try {
    action = params.at("action").get<std::string>();
    if (params.contains("session_id")) session_id = params.at("session_id").get<std::string>();
    if (params.contains("patient_id")) patient_id = params.at("patient_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("session.control: ") + e.what());
  }
  if (session_id.empty() && patient_id.empty()) {
    throw Error(ErrorCode::BadRequest, "session.control needs session_id or patient_id");
  }

  std::shared_ptr<Session> target;
  {
    std::lock_guard lk(sessions_mu_);
    for (const auto& [id, s] : sessions_) {
      std::lock_guard slk(s->mu);
      if (s->state != "active") continue;
      if (!session_id.empty() ? id == session_id : s->patient_id == patient_id) {
        if (!target || s->started_ms >= target->started_ms) target = s;
      }
    }
  }
  if (!target) {
    throw Error(ErrorCode::UnknownPatient,
                "no active session for " + (session_id.empty() ? "patient " + patient_id : "session " + session_id));
  }

  bool changed = false;
  if (action == "start") {
    changed = !target->acquiring.exchange(true);
  } else if (action == "stop") {
    changed = target->acquiring.exchange(false);
  } else if (action == "filter_on") {
    changed = !target->filter.exchange(true);
  } else if (action == "filter_off") {
    changed = target->filter.exchange(false);
  } else {
    throw Error(ErrorCode::BadRequest, "unknown action " + action);
  }
  return {{"session_id", target->id},
          {"patient_id", target->patient_id},
          {"action", action},
          {"changed", changed},
          {"acquiring", target->acquiring.load()},
          {"filter", target->filter.load()}};
}

nlohmann::json Gateway::analysis_run(const nlohmann::json& params) {
  const auto req = request_from_json(params);
  const bool want_plain = req.mode != AnalysisMode::Encrypted;
  const bool want_enc = req.mode != AnalysisMode::Plaintext;

  std::map<std::string, RegisteredSession> registry;
  {
    std::lock_guard lk(registry_mu_);
    registry = registry_;
  }

  struct Found {
    const RegisteredSession* session;
    AnalysisBlock block;
    std::uint64_t t_ms;
  };
  std::vector<Found> found;
  for (const auto& rec : log_->query(req.patient_id, req.t0_ms, req.t1_ms)) {
    if (rec.header.kind != secure::RecordKind::AnalysisInput) continue;
    for (const auto& [id, reg] : registry) {
      const auto sid = session_from_hex(id);
      if (!belongs_to(rec, sid, Direction::ResponderToInitiator)) continue;
      const auto plain = secure::open(at_rest_key(secret_, sid, reg.mode), Direction::ResponderToInitiator, rec);
      found.push_back({&reg, parse_block(plain), rec.header.timestamp_ms});
      break;
    }
  }
  if (found.empty()) {
    throw Error(ErrorCode::EmptyRange, "no analysis blocks for " + req.patient_id + " in the requested range");
  }

  std::vector<std::future<nlohmann::json>> outputs;
  if (want_enc) {
    for (const auto& f : found) {
      outputs.push_back(std::async(std::launch::async, [&, &f = f] {
        const auto window = fhe::from_envelope(*he_, f.block.envelope);
        return outputs_to_json(*he_, evaluate_block(*he_, window, f.block.n, f.block.fs_hz, req.analyses));
      }));
    }
  }

  nlohmann::json blocks = nlohmann::json::array();
  std::map<std::string, std::uint64_t> session_end;  // last sample index needed per session
  for (std::size_t i = 0; i < found.size(); ++i) {
    const auto& f = found[i];
    nlohmann::json b = {{"session_id", f.session->session_id},
                        {"index", f.block.index},
                        {"first_sample", f.block.first_sample},
                        {"n", f.block.n},
                        {"fs_hz", f.block.fs_hz},
                        {"lead_off", f.block.lead_off},
                        {"t_ms", f.t_ms}};
    if (want_enc) {
      b["window"] = to_base64(f.block.envelope);
      b["outputs"] = outputs[i].get();
    }
    auto& end = session_end[f.session->session_id];
    end = std::max<std::uint64_t>(end, f.block.first_sample + f.block.n);
    blocks.push_back(std::move(b));
  }

  nlohmann::json sessions = nlohmann::json::array();
  nlohmann::json records = nlohmann::json::array();
  std::vector<secure::CipherRecord> all;
  if (want_plain) all = log_->query(req.patient_id, 0, std::numeric_limits<std::uint64_t>::max());
  for (const auto& [id, end] : session_end) {
    const auto& reg = registry.at(id);
    sessions.push_back(to_json(reg));
    if (!want_plain) continue;
    // Every record of the session up to the one holding its last selected
    // sample; the analyst counts samples from the start of the session.
    const auto sid = session_from_hex(id);
    const double ms_per_sample = 1000.0 / reg.descriptor.fs_hz;
    std::uint64_t last_ts = 0;
    for (const auto& f : found) {
      if (f.session->session_id != id) continue;
      last_ts = std::max<std::uint64_t>(
          last_ts, f.t_ms + static_cast<std::uint64_t>(std::ceil(ms_per_sample * static_cast<double>(f.block.n))));
    }
    std::vector<const secure::CipherRecord*> mine;
    for (const auto& rec : all) {
      if (rec.header.kind != secure::RecordKind::RawFrame && rec.header.kind != secure::RecordKind::Segment) continue;
      if (rec.header.timestamp_ms > last_ts) continue;
      if (belongs_to(rec, sid, Direction::InitiatorToResponder)) mine.push_back(&rec);
    }
    std::sort(mine.begin(), mine.end(), [](auto* a, auto* b) { return a->header.seq < b->header.seq; });
    for (const auto* rec : mine) records.push_back({{"session_id", id}, {"record", to_base64(secure::serialize(*rec))}});
  }

  return {{"request", to_json(req)},
          {"he_fingerprint", to_hex(he_->fingerprint())},
          {"sessions", sessions},
          {"blocks", blocks},
          {"records", records}};
}

// ---- network ----

void Gateway::start() {
  if (running_.exchange(true)) return;
  listener_ = std::make_unique<secure::TcpListener>(config_.listen);
  accept_thread_ = std::thread([this] {
    for (;;) {
      std::unique_ptr<secure::SocketTransport> conn;
      try {
        conn = listener_->accept();
      } catch (const Error& e) {
        if (!running_) break;
        std::cerr << "gateway: accept failed: " << e.what() << "\n";
        continue;
      }
      if (!conn) break;
      std::shared_ptr<secure::Transport> t(std::move(conn));
      std::lock_guard lk(handlers_mu_);
      handlers_.emplace_back([this, t] { handle_session(t); });
    }
  });

  http_ = std::make_unique<httplib::Server>();
  http_->Post("/api", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
      const auto method = body.at("method").get<std::string>();
      const auto params = body.value("params", nlohmann::json::object());
      res.set_content(nlohmann::json{{"result", call(method, params)}}.dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status(e.code());
      res.set_content(error_json(e).dump(), "application/json");
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.set_content(error_json(Error(ErrorCode::BadRequest, e.what())).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(error_json(Error(ErrorCode::IoFailure, e.what())).dump(), "application/json");
    }
  });
  http_->Get("/stream", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Subscription> sub;
    try {
      sub = subscribe(req.get_param_value("patient"));
    } catch (const Error& e) {
      res.status = http_status(e.code());
      res.set_content(error_json(e).dump(), "application/json");
      return;
    }
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [sub](std::size_t, httplib::DataSink& sink) {
          for (auto& line : sub->drain(std::chrono::milliseconds(250))) {
            line.push_back('\n');
            if (!sink.write(line.data(), line.size())) return false;
          }
          if (sub->closed()) {
            sink.done();
            return true;
          }
          return sink.is_writable();
        },
        [this, sub](bool) { unsubscribe(sub); });
  });
  const auto [host, port] = secure::split_address(config_.api);
  if (port == 0) {
    api_port_ = static_cast<std::uint16_t>(http_->bind_to_any_port(host.empty() ? "127.0.0.1" : host));
  } else if (http_->bind_to_port(host.empty() ? "127.0.0.1" : host, port)) {
    api_port_ = port;
  }
  if (api_port_ == 0) {
    running_ = false;
    listener_->shutdown();
    accept_thread_.join();
    throw Error(ErrorCode::IoFailure, "cannot bind the API address " + config_.api);
  }
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void Gateway::stop() {
  if (!running_.exchange(false)) return;
  if (listener_) listener_->shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard lk(sessions_mu_);
    for (const auto& [id, s] : sessions_) {
      std::lock_guard slk(s->mu);
      if (s->transport) s->transport->close();
    }
  }
  {
    std::lock_guard lk(handlers_mu_);
    for (auto& t : handlers_) t.join();
    handlers_.clear();
  }
  {
    std::lock_guard lk(subs_mu_);
    for (auto& [p, sub] : subs_) sub->close();
  }
  if (http_) http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
}

std::uint16_t Gateway::agent_port() const { return listener_ ? listener_->port() : 0; }
std::uint16_t Gateway::api_port() const { return api_port_; }

}  // namespace hv::gateway
