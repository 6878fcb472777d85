#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "gazepair/session.hpp"
#include "gazepair/transport.hpp"

using namespace gazepair;

namespace {
std::vector<std::uint8_t> frame_of(std::initializer_list<std::uint8_t> bytes) { return bytes; }
}  // namespace

TEST_CASE("lossless network delivers in order, byte-identical") {
  SimNet net({0.0, 0.0, 1}, 1);
  net.register_endpoint(0);
  net.register_endpoint(1);
  for (std::uint8_t i = 0; i < 10; ++i) net.send(0, 1, frame_of({i, 42}));
  net.tick();
  for (std::uint8_t i = 0; i < 10; ++i) {
    const auto got = net.recv(1);
    REQUIRE(got.has_value());
    REQUIRE(got->first == 0);
    REQUIRE(got->second == frame_of({i, 42}));
  }
  REQUIRE_FALSE(net.recv(1).has_value());
}

TEST_CASE("latency holds frames until their tick") {
  SimNet net({0.0, 0.0, 3}, 1);
  net.register_endpoint(0);
  net.register_endpoint(1);
  net.send(0, 1, frame_of({7}));
  net.tick();
  net.tick();
  REQUIRE_FALSE(net.recv(1).has_value());
  net.tick();
  REQUIRE(net.recv(1).has_value());
}

TEST_CASE("network tap log equals the multiset of delivered frames") {
  SimNet net({0.35, 0.0, 1}, 99);
  net.register_endpoint(0);
  net.register_endpoint(1);
  std::vector<std::vector<std::uint8_t>> tapped;
  net.set_network_tap([&](const TapRecord& r) { tapped.push_back(r.frame); });

  Rng rng(5);
  std::vector<std::vector<std::uint8_t>> sent;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::uint8_t> frame{static_cast<std::uint8_t>(rng.next_u64()),
                                    static_cast<std::uint8_t>(i & 0xff)};
    net.send(0, 1, frame);
    sent.push_back(frame);
  }
  for (int t = 0; t < 8; ++t) net.tick();

  std::vector<std::vector<std::uint8_t>> delivered;
  while (auto got = net.recv(1)) delivered.push_back(got->second);

  REQUIRE(!delivered.empty());
  REQUIRE(delivered.size() < sent.size());  // some frames dropped at p=0.35
  auto a = tapped;
  auto b = delivered;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  REQUIRE(a == b);
}

TEST_CASE("simulation schedules are deterministic per seed") {
  auto run = [](std::uint64_t seed) {
    SimNet net({0.3, 0.3, 1}, seed);
    net.register_endpoint(0);
    net.register_endpoint(1);
    std::vector<std::vector<std::uint8_t>> delivered;
    for (int i = 0; i < 200; ++i) {
      net.send(0, 1, frame_of({static_cast<std::uint8_t>(i)}));
      net.tick();
      while (auto got = net.recv(1)) delivered.push_back(got->second);
    }
    for (int t = 0; t < 5; ++t) {
      net.tick();
      while (auto got = net.recv(1)) delivered.push_back(got->second);
    }
    return delivered;
  };
  REQUIRE(run(123) == run(123));
  REQUIRE(run(123) != run(321));
}

TEST_CASE("reordering lets later frames overtake") {
  SimNet net({0.0, 1.0, 1}, 4);  // every frame reordered: held two extra ticks
  net.register_endpoint(0);
  net.register_endpoint(1);
  net.send(0, 1, frame_of({1}));
  net.tick();
  net.tick();
  // frame sent at t0 with latency 1 would arrive at t1; reorder pushes to t3
  REQUIRE_FALSE(net.recv(1).has_value());
  net.tick();
  REQUIRE(net.recv(1).has_value());
}

TEST_CASE("oversized frames and unknown endpoints are rejected") {
  SimNet net({}, 1);
  net.register_endpoint(0);
  REQUIRE_THROWS_AS(net.send(0, 9, frame_of({1})), std::invalid_argument);
  REQUIRE_THROWS_AS(net.recv(9), std::invalid_argument);
  net.register_endpoint(1);
  std::vector<std::uint8_t> big(kMaxFrameBytes + 1);
  REQUIRE_THROWS_AS(net.send(0, 1, big), std::invalid_argument);
}

TEST_CASE("spoken cues reach all other parties and never the network tap") {
  SimNet net({}, 1);
  net.register_endpoint(0);
  net.register_endpoint(1);
  net.register_endpoint(2);

  std::vector<TapRecord> tapped;
  net.set_network_tap([&](const TapRecord& r) { tapped.push_back(r); });

  const OobUtterance spoken{Ksc::from_string("213"), 0};
  net.speak_oob(spoken);

  REQUIRE_FALSE(net.recv_oob(0).has_value());  // speaker already knows it
  for (EndpointId id : {1u, 2u}) {
    const auto heard = net.recv_oob(id);
    REQUIRE(heard.has_value());
    REQUIRE(heard->ksc == spoken.ksc);
  }
  REQUIRE(tapped.empty());
}

TEST_CASE("the OOB tap transcript is exactly what was spoken") {
  SimNet net({}, 1);
  net.register_endpoint(0);
  net.register_endpoint(1);
  std::vector<OobUtterance> transcript;
  net.set_oob_tap([&](const OobUtterance& u) { transcript.push_back(u); });

  net.speak_oob({Ksc::from_string("213"), 0});
  net.speak_oob({Ksc::from_string("905"), 0});
  REQUIRE(transcript.size() == 2);
  REQUIRE(transcript[0].ksc == Ksc::from_string("213"));
  REQUIRE(transcript[1].ksc == Ksc::from_string("905"));
}

TEST_CASE("the two tap positions are mutually exclusive") {
  SimNet net({}, 1);
  net.set_network_tap([](const TapRecord&) {});
  REQUIRE_THROWS_AS(net.set_oob_tap([](const OobUtterance&) {}), std::logic_error);
  net.set_network_tap(nullptr);
  REQUIRE_NOTHROW(net.set_oob_tap([](const OobUtterance&) {}));
  REQUIRE_THROWS_AS(net.set_network_tap([](const TapRecord&) {}), std::logic_error);
}

TEST_CASE("loopback and simulation reach the same final states on the happy path") {
  SessionConfig cfg;
  cfg.protocol.kdf_iterations = 32;

  Rng rng_sim(4242);
  SimNet sim({}, 1);
  const auto sim_out = run_session(sim, cfg, rng_sim);

  Rng rng_loop(4242);
  LoopbackNet loop;
  const auto loop_out = run_session(loop, cfg, rng_loop);

  REQUIRE(sim_out.paired);
  REQUIRE(loop_out.paired);
  REQUIRE(sim_out.host_phase == loop_out.host_phase);
  REQUIRE(sim_out.client_phases == loop_out.client_phases);
  // same master seed, same session materials, so identical keys end to end
  REQUIRE(sim_out.secrets == loop_out.secrets);
  REQUIRE(sim_out.host_key == loop_out.host_key);
  REQUIRE(sim_out.message_counts == loop_out.message_counts);
}

TEST_CASE("total loss times out the whole session") {
  SessionConfig cfg;
  cfg.protocol.kdf_iterations = 32;
  cfg.protocol.timeout_seconds = 8.0;
  Rng rng(7);
  SimNet net({1.0, 0.0, 1}, 3);
  const auto out = run_session(net, cfg, rng);
  REQUIRE_FALSE(out.paired);
  REQUIRE(out.cause == FailureCause::timeout);
  REQUIRE(out.host_phase == HostPhase::failed);
}
