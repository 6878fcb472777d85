#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "gazepair/eventlog.hpp"

using namespace gazepair;

namespace {

std::string record_session(const SessionConfig& cfg, std::uint64_t seed, SimNetConfig net_cfg,
                           SessionOutcome* outcome_out = nullptr) {
  std::ostringstream log;
  EventLogRecorder recorder(log);
  Rng rng(seed);
  SimNet net(net_cfg, seed ^ 0xabcdef);
  const auto outcome = run_session(net, cfg, rng, &recorder);
  if (outcome_out) *outcome_out = outcome;
  return log.str();
}

}  // namespace

TEST_CASE("a recorded happy path replays to the same states and keys") {
  SessionConfig cfg;
  cfg.participants = 3;
  cfg.protocol.kdf_iterations = 32;

  SessionOutcome live;
  const std::string log = record_session(cfg, 2024, {}, &live);
  REQUIRE(live.paired);

  std::istringstream in(log);
  const auto replayed = replay_event_log(in);
  REQUIRE(replayed.host_phase == HostPhase::paired);
  REQUIRE(replayed.client_phases ==
          std::vector<ClientPhase>{ClientPhase::paired, ClientPhase::paired});
  REQUIRE(replayed.host_key_fingerprint == key_fingerprint(*live.host_key));
  for (const auto& fp : replayed.client_key_fingerprints)
    REQUIRE(fp == replayed.host_key_fingerprint);
  REQUIRE(replayed.events_replayed > 0);
}

TEST_CASE("replay reproduces emitted traffic bytes exactly") {
  SessionConfig cfg;
  cfg.protocol.kdf_iterations = 32;

  // capture live traffic through an observer
  struct TrafficTap : SessionObserver {
    std::vector<std::vector<std::uint8_t>> frames;
    void on_frame_sent(EndpointId, EndpointId, std::span<const std::uint8_t> frame) override {
      frames.emplace_back(frame.begin(), frame.end());
    }
  };

  std::ostringstream log;
  struct Both : SessionObserver {
    EventLogRecorder* rec;
    TrafficTap* tap;
    void on_session_start(const SessionConfig& c) override { rec->on_session_start(c); }
    void on_host_event(const HostEvent& e) override { rec->on_host_event(e); }
    void on_client_event(int i, const ClientEvent& e) override { rec->on_client_event(i, e); }
    void on_frame_sent(EndpointId f, EndpointId t, std::span<const std::uint8_t> fr) override {
      tap->on_frame_sent(f, t, fr);
    }
  };
  EventLogRecorder recorder(log);
  TrafficTap tap;
  Both both;
  both.rec = &recorder;
  both.tap = &tap;

  Rng rng(99);
  SimNet net({}, 100);
  const auto live = run_session(net, cfg, rng, &both);
  REQUIRE(live.paired);

  std::istringstream in(log.str());
  const auto replayed = replay_event_log(in);
  REQUIRE(replayed.emitted_frames == tap.frames);
}

TEST_CASE("a recorded failure replays with the same cause") {
  SessionConfig cfg;
  cfg.protocol.kdf_iterations = 32;
  cfg.protocol.timeout_seconds = 6.0;
  cfg.sensor.misselect_prob = 1.0;  // guaranteed key mismatch

  SessionOutcome live;
  const std::string log = record_session(cfg, 7, {}, &live);
  REQUIRE_FALSE(live.paired);
  REQUIRE(live.cause == FailureCause::secret_mismatch);

  std::istringstream in(log);
  const auto replayed = replay_event_log(in);
  REQUIRE(replayed.host_phase == HostPhase::failed);
  REQUIRE(replayed.host_cause == FailureCause::secret_mismatch);
}

TEST_CASE("replay output is stable across repeated replays") {
  SessionConfig cfg;
  cfg.protocol.kdf_iterations = 32;
  const std::string log = record_session(cfg, 31337, {0.0, 0.4, 1});

  std::istringstream in1(log), in2(log);
  const auto a = replay_event_log(in1);
  const auto b = replay_event_log(in2);
  REQUIRE(a.to_text() == b.to_text());
  REQUIRE(a.emitted_frames == b.emitted_frames);
}

TEST_CASE("malformed logs report the offending line") {
  SECTION("empty input") {
    std::istringstream in("");
    REQUIRE_THROWS_AS(replay_event_log(in), EventLogError);
  }
  SECTION("missing header") {
    std::istringstream in(R"({"type":"event","actor":"host","event":"tick","now":1})"
                          "\n");
    REQUIRE_THROWS_AS(replay_event_log(in), EventLogError);
  }
  SECTION("broken json mid-log names the line") {
    SessionConfig cfg;
    cfg.protocol.kdf_iterations = 32;
    std::string log = record_session(cfg, 5, {});
    log += "{this is not json\n";
    std::istringstream in(log);
    long line = -1;
    try {
      replay_event_log(in);
    } catch (const EventLogError& e) {
      line = e.line;
    }
    // the appended garbage is the last line
    long lines = 0;
    for (char c : log)
      if (c == '\n') ++lines;
    REQUIRE(line == lines);
  }
}
