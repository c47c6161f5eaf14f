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
#include <fstream>

#include "httplib.h"

#include "gateway_support.hpp"
#include "heartvault/wire/codec.hpp"

using namespace hv;
using namespace hv::gateway;
using hvtest::TempDir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::BadRequest;
}

std::vector<nlohmann::json> drain_all(Subscription& sub) {
  std::vector<nlohmann::json> out;
  for (const auto& line : sub.drain(std::chrono::milliseconds(50))) out.push_back(nlohmann::json::parse(line));
  return out;
}

nlohmann::json find_session(Gateway& gw, const std::string& id) {
  const auto list = gw.call("session.list", {});
  for (const auto& s : list["sessions"]) {
    if (s["session_id"] == id) return s;
  }
  return nullptr;
}

Bytes read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

bool contains(const Bytes& hay, ByteView needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

AnalysisRequest request_for(const AgentReport& rep, const std::string& analyses, AnalysisMode mode) {
  AnalysisRequest r;
  r.patient_id = "patient-1";
  r.t0_ms = rep.descriptor.t0_ms;
  r.t1_ms = rep.descriptor.t0_ms + 3'600'000;
  r.analyses = fhe::parse_analyses(analyses);
  r.mode = mode;
  return r;
}

/// Sends hand-made records so a test can interleave API calls between them.
class ManualAgent {
 public:
  ManualAgent(Gateway& gw, std::string patient) : gw_(gw), patient_(std::move(patient)) {
    auto [a, g] = secure::memory_pair();
    agent_ = std::move(a);
    std::shared_ptr<secure::Transport> gs(std::move(g));
    handler_ = std::thread([this, gs] { gw_.handle_session(gs); });
    key_ = secure::handshake(secure::Role::Initiator, *agent_);
    sealer_.emplace(key_, secure::Direction::InitiatorToResponder);
    descriptor_.t0_ms = 5'000'000;
    send(secure::RecordKind::Segment, descriptor_.t0_ms, encode_descriptor(descriptor_));
  }
  ~ManualAgent() { finish(); }

  void send(secure::RecordKind kind, std::uint64_t ts, ByteView payload) {
    secure::send_frame32(*agent_, secure::serialize(sealer_->seal_next(kind, patient_, ts, payload)));
  }
  /// `n` samples of a slow ramp as one wave record; waits until handled.
  void send_wave(std::size_t n) {
    std::vector<std::uint8_t> s(n);
    for (auto& v : s) v = static_cast<std::uint8_t>(50 + (sent_++ % 100));
    const auto ts = sample_time_ms(descriptor_, sent_ - n);
    const auto before = handled();
    send(secure::RecordKind::RawFrame, ts, wire::encode({wire::FrameEvent::wave(s)}));
    wait_handled(before + 1);
  }
  std::uint64_t handled() {
    const auto s = find_session(gw_, id());
    if (s.is_null() || !s.contains("records")) return 0;
    return s["records"].get<std::uint64_t>() + s["dropped_records"].get<std::uint64_t>();
  }
  void wait_handled(std::uint64_t n) {
    for (int i = 0; i < 2000 && handled() < n; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    ASSERT_GE(handled(), n);
  }
  std::string id() const { return session_hex(key_.session_id); }
  void finish() {
    if (agent_) agent_->close();
    if (handler_.joinable()) handler_.join();
  }

 private:
  Gateway& gw_;
  std::string patient_;
  std::unique_ptr<secure::Transport> agent_;
  std::thread handler_;
  secure::SessionKey key_;
  std::optional<secure::Sealer> sealer_;
  SessionDescriptor descriptor_;
  std::uint64_t sent_ = 0;
};

}  // namespace

TEST(EndToEnd, CleanSessionConservationStreamAndCompare) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  auto sub = gw.subscribe("patient-1");
  const auto run = hvtest::run_in_process(gw, hvtest::agent_config());
  ASSERT_FALSE(run.agent_error);
  const auto& rep = run.report;
  EXPECT_EQ(rep.samples, 1500u);

  // Conservation: sent = decoded + resync-skipped.
  const auto s = find_session(gw, rep.session_id);
  ASSERT_FALSE(s.is_null());
  EXPECT_EQ(s["state"], "ended");
  EXPECT_EQ(s["samples"].get<std::uint64_t>() + s["resync_bytes"].get<std::uint64_t>(), rep.samples);
  EXPECT_EQ(s["resync_bytes"], 0);
  EXPECT_EQ(s["mismatches"], 0);
  EXPECT_EQ(s["records"], rep.records);
  EXPECT_EQ(s["metrics"]["count"], rep.samples);
  EXPECT_NEAR(s["metrics"]["pulse"].get<double>(), 60.0, 2.0);
  EXPECT_EQ(s["blocks"], 3);

  // Stream: paired samples bit-identical, times monotone, every second sample.
  const auto events = drain_all(*sub);
  ASSERT_EQ(events.size(), rep.samples / 2);
  std::uint64_t last_t = 0, last_count = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    ASSERT_FALSE(e["raw"].is_null());
    EXPECT_EQ(e["raw"].get<double>(), e["decrypted"].get<double>());
    EXPECT_EQ(e["raw"].get<double>(), rep.descriptor.calibration.forward(rep.sent_samples[2 * i + 1]));
    EXPECT_FALSE(e["filtered"].get<bool>());
    EXPECT_GE(e["t"].get<std::uint64_t>(), last_t);
    EXPECT_GE(e["count"].get<std::uint64_t>(), last_count);
    last_t = e["t"];
    last_count = e["count"];
  }
  EXPECT_EQ(events.front()["t"].get<std::uint64_t>(), rep.descriptor.t0_ms + 20);

  // Ciphertext only at rest.
  const Bytes wire_all = [&] {
    Bytes b;
    for (const auto& c : signal::stream(rep.window, hvtest::agent_config().stream)) b.insert(b.end(), c.bytes.begin(), c.bytes.end());
    return b;
  }();
  const std::string json_marker = "\"fs_hz\"";
  const Bytes hvai = {'H', 'V', 'A', 'I'};
  for (const auto& seg : gw.log().segment_paths()) {
    const auto bytes = read_all(seg);
    ASSERT_GT(bytes.size(), 0u);
    for (std::size_t at = 0; at + 12 <= wire_all.size(); at += 12) {
      ASSERT_FALSE(contains(bytes, ByteView(wire_all.data() + at, 12))) << "plaintext wire bytes at " << at;
    }
    EXPECT_FALSE(contains(bytes, ByteView(reinterpret_cast<const std::uint8_t*>(json_marker.data()), json_marker.size())));
    EXPECT_FALSE(contains(bytes, hvai));
  }

  // Compare mode through the bundle and the analyst.
  const auto bundle = gw.call("analysis.run", to_json(request_for(rep, "peaks,stats,frequency,hrv", AnalysisMode::Compare)));
  const auto report = finish_analysis(bundle, hvtest::analyst_keys());
  ASSERT_TRUE(report.comparison);
  const auto& cmp = *report.comparison;
  EXPECT_EQ(report.blocks, 3u);
  EXPECT_EQ(report.samples, 1500u);
  EXPECT_EQ(cmp.peak_match_pct.value(), 100.0);
  EXPECT_EQ(cmp.frequency_match_pct.value(), 100.0);
  for (const auto& m : cmp.hrv) EXPECT_EQ(m.ratio, 100.0) << m.metric;
  for (const auto& m : cmp.stats) {
    EXPECT_GE(m.ratio, 0.0);
    EXPECT_LE(m.ratio, 100.0);
    if (m.metric == "Mean" || m.metric == "Std") EXPECT_GE(m.ratio, 99.0) << m.metric;
  }
  EXPECT_NEAR(60.0 / report.plaintext->hrv->mean_rr, 60.0, 2.0);
  const auto j = to_json(report);
  for (const char* k : {"patient_id", "t0", "t1", "analyses", "mode", "plaintext", "encrypted", "comparison"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
}

TEST(EndToEnd, PlaintextAndEncryptedModesAlone) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  const auto run = hvtest::run_in_process(gw, hvtest::agent_config("patient-1", 12));
  ASSERT_FALSE(run.agent_error);

  const auto pb = gw.call("analysis.run", to_json(request_for(run.report, "stats,hrv", AnalysisMode::Plaintext)));
  EXPECT_TRUE(pb["blocks"][0].contains("window") == false);
  EXPECT_FALSE(pb["records"].empty());
  const auto pr = finish_analysis(pb, hvtest::analyst_keys());
  EXPECT_TRUE(pr.plaintext && !pr.encrypted && !pr.comparison);
  const auto whole = dsp::basic_stats(run.report.window.samples);
  EXPECT_NEAR(pr.plaintext->stats->mean, whole.mean, 0.006);  // quantization of the wire format
  EXPECT_NEAR(pr.plaintext->hrv->mean_rr, 1.0, 0.03);

  const auto eb = gw.call("analysis.run", to_json(request_for(run.report, "stats", AnalysisMode::Encrypted)));
  EXPECT_TRUE(eb["records"].empty());
  const auto er = finish_analysis(eb, hvtest::analyst_keys());
  EXPECT_TRUE(!er.plaintext && er.encrypted);
  EXPECT_NEAR(er.encrypted->stats->mean, pr.plaintext->stats->mean, 1e-3 * std::abs(pr.plaintext->stats->mean) + 1e-6);
  EXPECT_NEAR(er.encrypted->stats->std, pr.plaintext->stats->std, 1e-3 * pr.plaintext->stats->std);
}

TEST(EndToEnd, RangeSelectionAndEmptyRange) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  const auto run = hvtest::run_in_process(gw, hvtest::agent_config("patient-1", 30));
  const auto t0 = run.report.descriptor.t0_ms;
  auto req = request_for(run.report, "stats", AnalysisMode::Plaintext);
  req.t0_ms = t0 + 10'000;
  req.t1_ms = t0 + 10'000;
  const auto one = gw.call("analysis.run", to_json(req));
  ASSERT_EQ(one["blocks"].size(), 1u);
  EXPECT_EQ(one["blocks"][0]["first_sample"], 500);

  req.t0_ms = t0 + 10'001;
  req.t1_ms = t0 + 19'999;
  EXPECT_EQ(code_of([&] { gw.call("analysis.run", to_json(req)); }), ErrorCode::EmptyRange);
  req.patient_id = "nobody";
  req.t0_ms = 0;
  req.t1_ms = ~0ULL;
  EXPECT_EQ(code_of([&] { gw.call("analysis.run", to_json(req)); }), ErrorCode::EmptyRange);
  EXPECT_EQ(code_of([&] { gw.subscribe("nobody"); }), ErrorCode::UnknownPatient);
  EXPECT_EQ(code_of([&] { gw.call("no.such", {}); }), ErrorCode::BadRequest);
}

TEST(EndToEnd, TamperedRecordAbortsSessionAndKeepsPriorRecords) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  int records_seen = 0;
  const int victim = 20;
  const auto run = hvtest::run_in_process(gw, hvtest::agent_config("patient-1", 30), [&](int from, Bytes& data) {
    if (from != 0 || data.size() < 60) return;  // handshake messages are shorter
    if (++records_seen == victim) data[data.size() - 20] ^= 0x01;
  });
  // The in-memory pipe is unbounded, so the agent may finish before the abort.
  if (run.agent_error) EXPECT_EQ(*run.agent_error, ErrorCode::TransportClosed);
  std::string id;
  const auto list = gw.call("session.list", {});
  for (const auto& s : list["sessions"]) id = s["session_id"];
  const auto s = find_session(gw, id);
  EXPECT_EQ(s["state"], "aborted");
  EXPECT_NE(s["error"].get<std::string>().find("AuthFailure"), std::string::npos);
  EXPECT_EQ(s["records"], victim - 1);

  std::size_t agent_records = 0;
  for (const auto& r : gw.log().query("patient-1", 0, ~0ULL)) {
    if (r.header.kind != secure::RecordKind::AnalysisInput) ++agent_records;
  }
  EXPECT_EQ(agent_records, static_cast<std::size_t>(victim - 1));
}

TEST(EndToEnd, LeadOffIsStreamedAndFlagsTheBlock) {
  TempDir dir;
  auto cfg = hvtest::gateway_config(dir.path());
  cfg.model = std::make_shared<const classifier::CnnModel>(classifier::Hyperparameters{});
  Gateway gw(cfg);
  auto sub = gw.subscribe("patient-1");
  auto agent = hvtest::agent_config("patient-1", 20);
  agent.stream.faults = {{8.0, 3.0}};
  const auto run = hvtest::run_in_process(gw, agent);
  ASSERT_FALSE(run.agent_error);

  const auto events = drain_all(*sub);
  auto it = std::find_if(events.begin(), events.end(), [](const auto& e) { return e["raw"].is_null(); });
  ASSERT_NE(it, events.end());
  EXPECT_TRUE((*it)["lead_off"].get<bool>());
  EXPECT_TRUE((*it)["class"].is_null());
  // Wave data after the fault clears the flag and classification comes back.
  EXPECT_FALSE(events.back()["lead_off"].get<bool>());
  EXPECT_FALSE(events.back()["class"].is_null());
  std::uint64_t last = 0;
  for (const auto& e : events) {
    EXPECT_GE(e["t"].get<std::uint64_t>(), last);
    last = e["t"];
  }

  const auto bundle = gw.call("analysis.run", to_json(request_for(run.report, "stats", AnalysisMode::Encrypted)));
  EXPECT_TRUE(finish_analysis(bundle, hvtest::analyst_keys()).lead_off);
}

TEST(EndToEnd, SessionControlStopStartFilter) {
  TempDir dir;
  auto cfg = hvtest::gateway_config(dir.path());
  cfg.autostart = false;
  Gateway gw(cfg);
  auto sub = gw.subscribe("patient-2");
  ManualAgent agent(gw, "patient-2");
  agent.send_wave(50);
  EXPECT_TRUE(drain_all(*sub).empty());  // idle until started
  auto s = find_session(gw, agent.id());
  EXPECT_EQ(s["dropped_records"], 1);
  EXPECT_FALSE(s["acquiring"].get<bool>());

  auto ack = gw.call("session.control", {{"patient_id", "patient-2"}, {"action", "start"}});
  EXPECT_TRUE(ack["changed"].get<bool>());
  EXPECT_TRUE(ack["acquiring"].get<bool>());
  agent.send_wave(50);
  auto events = drain_all(*sub);
  EXPECT_EQ(events.size(), 25u);
  for (const auto& e : events) EXPECT_EQ(e["raw"], e["decrypted"]);

  ack = gw.call("session.control", {{"session_id", agent.id()}, {"action", "filter_on"}});
  EXPECT_TRUE(ack["filter"].get<bool>());
  agent.send_wave(100);
  events = drain_all(*sub);
  ASSERT_EQ(events.size(), 50u);
  std::size_t differ = 0;
  for (const auto& e : events) {
    EXPECT_TRUE(e["filtered"].get<bool>());
    differ += e["raw"] != e["decrypted"];
  }
  EXPECT_GT(differ, 40u);
  gw.call("session.control", {{"session_id", agent.id()}, {"action", "filter_off"}});
  agent.send_wave(10);
  for (const auto& e : drain_all(*sub)) {
    EXPECT_FALSE(e["filtered"].get<bool>());
    EXPECT_EQ(e["raw"], e["decrypted"]);
  }

  ack = gw.call("session.control", {{"patient_id", "patient-2"}, {"action", "stop"}});
  EXPECT_TRUE(ack["changed"].get<bool>());
  ack = gw.call("session.control", {{"patient_id", "patient-2"}, {"action", "stop"}});
  EXPECT_FALSE(ack["changed"].get<bool>());
  EXPECT_FALSE(ack["acquiring"].get<bool>());
  agent.send_wave(50);
  EXPECT_TRUE(drain_all(*sub).empty());
  s = find_session(gw, agent.id());
  EXPECT_EQ(s["dropped_records"], 2);
  EXPECT_EQ(s["samples"], 160);

  EXPECT_EQ(code_of([&] { gw.call("session.control", {{"patient_id", "patient-2"}, {"action", "dance"}}); }),
            ErrorCode::BadRequest);
  EXPECT_EQ(code_of([&] { gw.call("session.control", {{"patient_id", "patient-9"}, {"action", "stop"}}); }),
            ErrorCode::UnknownPatient);
  EXPECT_EQ(code_of([&] { gw.call("session.control", {{"action", "stop"}}); }), ErrorCode::BadRequest);
  agent.finish();
  EXPECT_EQ(code_of([&] { gw.call("session.control", {{"session_id", agent.id()}, {"action", "start"}}); }),
            ErrorCode::UnknownPatient);
}

TEST(EndToEnd, RestartKeepsSessionsAndAnalysis) {
  TempDir dir;
  AgentReport rep;
  {
    Gateway gw(hvtest::gateway_config(dir.path()));
    rep = hvtest::run_in_process(gw, hvtest::agent_config("patient-1", 12)).report;
    EXPECT_EQ(code_of([&] { Gateway second(hvtest::gateway_config(dir.path())); }), ErrorCode::IoFailure);
  }
  Gateway gw(hvtest::gateway_config(dir.path()));
  const auto s = find_session(gw, rep.session_id);
  ASSERT_FALSE(s.is_null());
  EXPECT_EQ(s["state"], "stored");
  EXPECT_EQ(s["patient_id"], "patient-1");
  const auto report =
      finish_analysis(gw.call("analysis.run", to_json(request_for(rep, "stats,peaks", AnalysisMode::Compare))),
                      hvtest::analyst_keys());
  EXPECT_EQ(report.comparison->peak_match_pct.value(), 100.0);
}

TEST(EndToEnd, PreSharedModeSession) {
  TempDir dir;
  auto cfg = hvtest::gateway_config(dir.path());
  cfg.mode = secure::Mode::PreShared;
  cfg.psk = secure::parse_psk(std::string(64, 'c'));
  Gateway gw(cfg);
  auto agent = hvtest::agent_config("patient-1", 6);
  agent.mode = secure::Mode::PreShared;
  agent.psk = cfg.psk;
  const auto run = hvtest::run_in_process(gw, agent);
  ASSERT_FALSE(run.agent_error);
  const auto s = find_session(gw, run.report.session_id);
  EXPECT_EQ(s["mode"], "preshared");
  EXPECT_EQ(s["samples"], 300);
  const auto report = finish_analysis(
      gw.call("analysis.run", to_json(request_for(run.report, "stats", AnalysisMode::Plaintext))), hvtest::analyst_keys());
  EXPECT_EQ(report.samples, 300u);

  // Wrong pre-shared key: no session is registered.
  auto wrong = agent;
  wrong.psk = secure::parse_psk(std::string(64, 'd'));
  EXPECT_TRUE(hvtest::run_in_process(gw, wrong).agent_error);
  EXPECT_EQ(gw.call("session.list", {})["sessions"].size(), 1u);
}

TEST(EndToEnd, ForeignAnalystKeysRejected) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  const auto run = hvtest::run_in_process(gw, hvtest::agent_config("patient-1", 6));
  const auto bundle = gw.call("analysis.run", to_json(request_for(run.report, "stats", AnalysisMode::Plaintext)));
  AnalystKeys other = hvtest::analyst_keys();
  other.escrow = secure::X25519::generate();
  EXPECT_EQ(code_of([&] { finish_analysis(bundle, other); }), ErrorCode::AuthFailure);
}

TEST(EndToEnd, OverTcpAndHttp) {
  TempDir dir;
  Gateway gw(hvtest::gateway_config(dir.path()));
  gw.start();
  const std::string api = "127.0.0.1:" + std::to_string(gw.api_port());

  std::vector<nlohmann::json> events;
  std::thread reader([&] {
    httplib::Client cli("127.0.0.1", gw.api_port());
    std::string buf;
    cli.Get("/stream", httplib::Params{{"patient", "patient-1"}}, httplib::Headers{}, [&](const char* d, std::size_t n) {
      buf.append(d, n);
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        events.push_back(nlohmann::json::parse(buf.substr(0, nl)));
        buf.erase(0, nl + 1);
      }
      return events.size() < 150;
    });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));

  const auto before = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch()).count();
  auto conn = secure::tcp_connect("127.0.0.1:" + std::to_string(gw.agent_port()));
  const auto rep = run_agent(hvtest::agent_config("patient-1", 6), *conn);
  reader.join();
  ASSERT_TRUE(gw.wait_sessions_ended(1, std::chrono::seconds(10)));
  const auto after = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch()).count();

  ASSERT_EQ(events.size(), 150u);
  for (const auto& e : events) EXPECT_EQ(e["raw"], e["decrypted"]);
  const auto& last = events.back();
  ASSERT_FALSE(last["latency_ms"].is_null());
  EXPECT_EQ(last["latency_ms"].get<double>(),
            static_cast<double>(last["result_ms"].get<std::uint64_t>() - last["ingest_ms"].get<std::uint64_t>()));
  EXPECT_GE(last["ingest_ms"].get<std::int64_t>(), before);
  EXPECT_LE(last["result_ms"].get<std::int64_t>(), after);

  const auto list = api_call(api, "session.list", {});
  ASSERT_EQ(list["sessions"].size(), 1u);
  EXPECT_EQ(list["sessions"][0]["samples"], rep.samples);

  AnalysisRequest req = request_for(rep, "stats,hrv", AnalysisMode::Compare);
  const auto report = run_analysis(api, req, hvtest::analyst_keys());
  for (const auto& m : report.comparison->hrv) EXPECT_EQ(m.ratio, 100.0);

  req.patient_id = "nobody";
  EXPECT_EQ(code_of([&] { run_analysis(api, req, hvtest::analyst_keys()); }), ErrorCode::EmptyRange);
  httplib::Client cli("127.0.0.1", gw.api_port());
  const auto res = cli.Get("/stream?patient=nobody");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"]["code"], "UnknownPatient");
  const auto bad = cli.Post("/api", "{nope", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  gw.stop();
  EXPECT_EQ(code_of([&] { api_call(api, "session.list", {}); }), ErrorCode::IoFailure);
}
