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

#include "heartvault/gateway/analyst.hpp"

#include <sys/stat.h>

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "heartvault/common/error.hpp"
#include "heartvault/gateway/blocks.hpp"
#include "heartvault/wire/codec.hpp"

namespace hv::gateway {

namespace fs = std::filesystem;

namespace {

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, ByteView data, bool secret) {
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + p.string());
  }
  if (secret) ::chmod(p.c_str(), 0600);
}

void write_text(const fs::path& p, const std::string& s, bool secret) {
  write_file(p, ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), secret);
}

std::string read_hex(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
  std::string hex;
  in >> hex;
  return hex;
}

std::pair<std::string, int> host_port(const std::string& address) {
  auto a = address;
  if (a.rfind("http://", 0) == 0) a.erase(0, 7);
  const auto [host, port] = secure::split_address(a);
  return {host, port};
}

struct DecodedSession {
  SessionDescriptor descriptor;
  std::vector<std::uint8_t> samples;
};

// Same decode discipline as the gateway's live path: one feed + flush per record.
DecodedSession decode_session(const RegisteredSession& reg, const std::vector<secure::CipherRecord>& records,
                              const secure::X25519& escrow) {
  const auto key = unescrow_session_key(escrow, from_base64(reg.escrow));
  if (session_hex(key.session_id) != reg.session_id) {
    throw Error(ErrorCode::AuthFailure, "escrowed key belongs to another session");
  }
  DecodedSession out;
  out.descriptor = reg.descriptor;
  wire::DecoderState st;
  bool described = false;
  for (const auto& rec : records) {
    const auto plain = secure::open(key, secure::Direction::InitiatorToResponder, rec);
    if (rec.header.kind == secure::RecordKind::Segment) {
      out.descriptor = parse_descriptor(plain);
      described = true;
      continue;
    }
    if (rec.header.kind != secure::RecordKind::RawFrame) continue;
    std::vector<wire::FrameEvent> ev;
    wire::feed(st, plain, ev);
    wire::flush(st, ev);
    for (const auto& e : ev) {
      if (e.kind == wire::FrameEvent::Kind::WaveSamples) out.samples.insert(out.samples.end(), e.samples.begin(), e.samples.end());
    }
  }
  if (!described) throw Error(ErrorCode::BadRequest, "session " + reg.session_id + " has no descriptor record");
  return out;
}

}  // namespace

void write_keys(const fs::path& dir, const secure::X25519& escrow, const fhe::CkksBackend& he) {
  fs::create_directories(dir);
  write_text(dir / "escrow.key", to_hex(escrow.private_key()) + "\n", true);
  write_text(dir / "escrow.pub", to_hex(escrow.public_key()) + "\n", false);
  write_file(dir / "he.public", he.export_public(), false);
  write_file(dir / "he.secret", he.export_secret(), true);
}

AnalystKeys load_keys(const fs::path& dir) {
  AnalystKeys k;
  k.escrow = secure::X25519::from_private(secure::parse_psk(read_hex(dir / "escrow.key")));
  k.he = fhe::CkksBackend::load(read_file(dir / "he.public"), read_file(dir / "he.secret"));
  return k;
}

secure::Key32 read_escrow_public(const fs::path& file) { return secure::parse_psk(read_hex(file)); }

nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json j = to_json(r.request);
  j["sessions"] = r.sessions;
  j["blocks"] = r.blocks;
  j["samples"] = r.samples;
  j["fs_hz"] = r.fs_hz;
  j["lead_off"] = r.lead_off;
  j["plaintext"] = r.plaintext ? fhe::to_json(*r.plaintext) : nlohmann::json(nullptr);
  j["encrypted"] = r.encrypted ? fhe::to_json(*r.encrypted) : nlohmann::json(nullptr);
  j["comparison"] = r.comparison ? fhe::to_json(*r.comparison) : nlohmann::json(nullptr);
  return j;
}

AnalysisReport finish_analysis(const nlohmann::json& bundle, const AnalystKeys& keys) {
  if (!keys.he || !keys.he->can_decrypt()) throw Error(ErrorCode::BadRequest, "analyst keys cannot decrypt");
  AnalysisReport rep;
  std::map<std::string, RegisteredSession> sessions;
  std::map<std::string, std::vector<secure::CipherRecord>> records;
  std::vector<nlohmann::json> blocks;
  try {
    rep.request = request_from_json(bundle.at("request"));
    for (const auto& s : bundle.at("sessions")) {
      auto reg = registered_from_json(s);
      rep.sessions.push_back(reg.session_id);
      sessions.emplace(reg.session_id, std::move(reg));
    }
    for (const auto& r : bundle.at("records")) {
      records[r.at("session_id").get<std::string>()].push_back(
          secure::parse_record(from_base64(r.at("record").get<std::string>())));
    }
    for (const auto& b : bundle.at("blocks")) blocks.push_back(b);
    if (bundle.contains("he_fingerprint") &&
        bundle.at("he_fingerprint").get<std::string>() != to_hex(keys.he->fingerprint())) {
      throw Error(ErrorCode::ParamsMismatch, "gateway evaluates under a different HE key set");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("analysis bundle: ") + e.what());
  }
  if (blocks.empty()) throw Error(ErrorCode::EmptyRange, "bundle has no blocks");

  const bool want_plain = rep.request.mode != AnalysisMode::Encrypted;
  const bool want_enc = rep.request.mode != AnalysisMode::Plaintext;
  const auto& set = rep.request.analyses;

  std::map<std::string, DecodedSession> decoded;
  if (want_plain) {
    for (const auto& [id, reg] : sessions) decoded.emplace(id, decode_session(reg, records[id], keys.escrow));
  }

  std::vector<BlockPartial> plain, enc;
  for (const auto& b : blocks) {
    const auto sid = b.at("session_id").get<std::string>();
    const auto first = b.at("first_sample").get<std::uint64_t>();
    const auto n = b.at("n").get<std::size_t>();
    const double fs = b.at("fs_hz").get<double>();
    const auto reg = sessions.find(sid);
    if (reg == sessions.end()) throw Error(ErrorCode::BadRequest, "block refers to unknown session " + sid);
    rep.samples += n;
    rep.fs_hz = fs;
    rep.lead_off = rep.lead_off || b.at("lead_off").get<bool>();
    if (want_plain) {
      const auto& d = decoded.at(sid);
      if (first + n > d.samples.size()) {
        throw Error(ErrorCode::CorruptRecord, "stored records of session " + sid + " end before block data");
      }
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = d.descriptor.calibration.forward(d.samples[first + i]);
      plain.push_back(plain_partial(sid, first, fs, std::move(x), set));
    }
    if (want_enc) {
      const auto window = fhe::from_envelope(*keys.he, from_base64(b.at("window").get<std::string>()));
      const auto ea = outputs_from_json(*keys.he, b.at("outputs"));
      const auto& cal = reg->second.descriptor.calibration;
      enc.push_back(encrypted_partial(*keys.he, ea, window, sid, first, fhe::Quantization{cal.offset, cal.gain}));
    }
  }
  rep.blocks = blocks.size();
  if (want_plain) rep.plaintext = combine(plain, set);
  if (want_enc) rep.encrypted = combine(enc, set);
  if (rep.plaintext && rep.encrypted) rep.comparison = fhe::compare_results(*rep.plaintext, *rep.encrypted);
  return rep;
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::BadRequest); ++c) {
    if (to_string(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return std::nullopt;
}

nlohmann::json api_call(const std::string& address, const std::string& method, const nlohmann::json& params) {
  const auto [host, port] = host_port(address);
  httplib::Client cli(host, port);
  cli.set_read_timeout(600, 0);
  const auto res = cli.Post("/api", nlohmann::json{{"method", method}, {"params", params}}.dump(), "application/json");
  if (!res) throw Error(ErrorCode::IoFailure, "gateway " + address + " unreachable: " + httplib::to_string(res.error()));
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::IoFailure, "gateway returned non-JSON (HTTP " + std::to_string(res->status) + ")");
  }
  if (body.contains("error")) {
    const auto& e = body.at("error");
    const auto code = error_code_from_name(e.value("code", "")).value_or(ErrorCode::IoFailure);
    throw Error(code, e.value("message", "gateway error"));
  }
  return body.at("result");
}

AnalysisReport run_analysis(const std::string& gateway, const AnalysisRequest& request, const AnalystKeys& keys) {
  return finish_analysis(api_call(gateway, "analysis.run", to_json(request)), keys);
}

void serve_proxy(const std::string& listen, const std::string& gateway, const AnalystKeys& keys,
                 const std::atomic<bool>& stop) {
  httplib::Server srv;
  srv.Post("/api", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto body = nlohmann::json::parse(req.body);
      const auto method = body.at("method").get<std::string>();
      const auto params = body.value("params", nlohmann::json::object());
      nlohmann::json result = api_call(gateway, method, params);
      if (method == "analysis.run") result = to_json(finish_analysis(result, keys));
      res.set_content(nlohmann::json{{"result", result}}.dump(), "application/json");
    } catch (const Error& e) {
      std::string message = e.what();
      const auto prefix = std::string(to_string(e.code())) + ": ";
      if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
      res.status = e.code() == ErrorCode::UnknownPatient ? 404 : e.code() == ErrorCode::IoFailure ? 502 : 400;
      res.set_content(nlohmann::json{{"error", {{"code", std::string(to_string(e.code()))}, {"message", message}}}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", {{"code", "BadRequest"}, {"message", e.what()}}}}.dump(),
                      "application/json");
    }
  });
  srv.Get("/stream", [&](const httplib::Request& req, httplib::Response& res) {
    const auto patient = req.get_param_value("patient");
    res.set_chunked_content_provider("application/x-ndjson", [&, patient](std::size_t, httplib::DataSink& sink) {
      const auto [host, port] = host_port(gateway);
      httplib::Client cli(host, port);
      cli.set_read_timeout(3600, 0);
      cli.Get("/stream", httplib::Params{{"patient", patient}}, httplib::Headers{},
              [&](const char* data, std::size_t len) { return !stop && sink.write(data, len); });
      sink.done();
      return true;
    });
  });
  const auto [host, port] = host_port(listen);
  if (!srv.bind_to_port(host, port)) throw Error(ErrorCode::IoFailure, "cannot bind " + listen);
  std::thread t([&] { srv.listen_after_bind(); });
  while (!stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  srv.stop();
  t.join();
}

}  // namespace hv::gateway
